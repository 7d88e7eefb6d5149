#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "pbr/frontend.hpp"
#include "pbr/ifft_detector.hpp"
#include "pbr/signal_model.hpp"

using namespace pbr;

namespace {

constexpr double kFs = constants::kSampleRateHz;

struct Scene {
    SampledSignal direct;
    SampledSignal surveillance;
    SpectrumQuotient q;
};

// Noiseless scene after DDC; full band unless half_band_hz > 0.
Scene make_scene(std::size_t n, const std::vector<Echo>& echoes, double half_band_hz = 0.0, std::uint64_t seed = 11) {
    const auto emitted = fm_modulate(synthesize_message(seed, n), EmitterSpec{}, n);
    TargetScene scene;
    scene.echoes = echoes;
    const auto r = render_scene(emitted, scene, 1);
    Scene s;
    const double shift = bin_aligned_shift(90e3, n, kFs);
    s.direct = ddc(r.direct, shift);
    s.surveillance = ddc(r.surveillance, shift);
    s.q = quotient(spectrum(s.surveillance), spectrum(s.direct));
    if (half_band_hz > 0.0) s.q = bandpass(s.q, -half_band_hz, half_band_hz);
    return s;
}

std::size_t argmax(const RVec& v) {
    return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

std::vector<std::size_t> local_maxima(const RVec& v, double min_fraction) {
    const double top = *std::max_element(v.begin(), v.end());
    std::vector<std::size_t> out;
    for (std::size_t i = 1; i + 1 < v.size(); ++i)
        if (v[i] > v[i - 1] && v[i] >= v[i + 1] && v[i] >= min_fraction * top) out.push_back(i);
    return out;
}

RangeProfile profile_from(const RVec& v) {
    RangeProfile p;
    p.values = v;
    p.lag_step_s = 1.0 / kFs;
    return p;
}

}  // namespace

TEST_SUITE("ifft_profile") {
    TEST_CASE("unit quotient gives a delta at lag 0") {
        Spectrum s;
        s.bins.assign(256, cplx{1.0, 0.0});
        s.bin_spacing_hz = kFs / 256.0;
        const auto p = ifft_profile(quotient(s, s, 0.0));
        CHECK(p.length() == 256);
        CHECK(p.lag_step_s == doctest::Approx(1.0 / kFs));
        CHECK(p.values[0] == doctest::Approx(1.0));
        for (std::size_t i = 1; i < 256; ++i) CHECK(std::abs(p.values[i]) < 1e-12);
    }

    TEST_CASE("10 us echo peaks at index 20, as does the time-domain cross-correlation") {
        const auto s = make_scene(4096, {{10e-6, 0.1}});
        CHECK(argmax(ifft_profile(s.q).values) == 20);
        const auto xc = oracle::circular_xcorr(s.surveillance.samples, s.direct.samples, 100);
        std::size_t best = 0;
        for (std::size_t m = 1; m < xc.size(); ++m)
            if (std::abs(xc[m]) > std::abs(xc[best])) best = m;
        CHECK(best == 20);
    }

    TEST_CASE("two targets 3 km apart with one FM channel: two distinct maxima") {
        const double t1 = 20e-6;
        const double t2 = t1 + range_to_delay(3000.0);
        const auto s = make_scene(std::size_t{1} << 16, {{t1, 0.1}, {t2, 0.1}}, 100e3);
        auto p = truncate(ifft_profile(s.q), 200);
        const auto maxima = local_maxima(p.values, 0.5);
        REQUIRE(maxima.size() == 2);
        CHECK(std::abs(static_cast<double>(maxima[0]) - 40.0) <= 1.0);
        CHECK(std::abs(static_cast<double>(maxima[1]) - 60.0) <= 1.0);
    }

    TEST_CASE("noiseless integer delays are identified exactly") {
        const std::size_t n = 4096;
        const auto emitted = fm_modulate(synthesize_message(21, n), EmitterSpec{}, n);
        std::mt19937 rng(99);
        std::uniform_int_distribution<std::size_t> pick(1, n / 4);
        for (int trial = 0; trial < 20; ++trial) {
            const std::size_t d = pick(rng);
            TargetScene scene;
            scene.echoes = {{static_cast<double>(d) / kFs, 0.1}};
            const auto r = render_scene(emitted, scene, 1);
            const double shift = bin_aligned_shift(90e3, n, kFs);
            const auto q = quotient(spectrum(ddc(r.surveillance, shift)), spectrum(ddc(r.direct, shift)));
            CHECK(argmax(ifft_profile(q).values) == d);
        }
    }

    TEST_CASE("one extra sample of delay moves the argmax by one bin") {
        const auto a = make_scene(4096, {{37.0 / kFs, 0.1}});
        const auto b = make_scene(4096, {{38.0 / kFs, 0.1}});
        CHECK(argmax(ifft_profile(b.q).values) == argmax(ifft_profile(a.q).values) + 1);
    }

    TEST_CASE("peak value scales with echo amplitude") {
        const auto a = make_scene(4096, {{15e-6, 0.1}});
        const auto b = make_scene(4096, {{15e-6, 0.3}});
        const double pa = ifft_profile(a.q).values[30];
        const double pb = ifft_profile(b.q).values[30];
        CHECK(pb / pa == doctest::Approx(3.0).epsilon(1e-9));
    }

    TEST_CASE("mainlobe -3 dB width is about fs/B bins") {
        const std::size_t n = std::size_t{1} << 14;
        Spectrum s;
        s.bins.assign(n, cplx{1.0, 0.0});
        s.bin_spacing_hz = kFs / static_cast<double>(n);
        for (double b : {200e3, 600e3, 1.4e6}) {
            const auto q = bandpass(quotient(s, s, 0.0), -b / 2.0, b / 2.0);
            const auto p = ifft_profile(q);
            const double half_power = p.values[0] / std::sqrt(2.0);
            std::size_t i = 0;
            while (p.values[i + 1] > half_power) ++i;
            const double frac = (p.values[i] - half_power) / (p.values[i] - p.values[i + 1]);
            const double width = 2.0 * (static_cast<double>(i) + frac);
            CHECK(width == doctest::Approx(kFs / b).epsilon(0.25));
        }
    }

    TEST_CASE("magnitude mode is nonnegative and peaks at the same lag") {
        const auto s = make_scene(4096, {{12e-6, 0.1}});
        const auto m = ifft_profile(s.q, ProfileMode::Magnitude);
        CHECK(*std::min_element(m.values.begin(), m.values.end()) >= 0.0);
        CHECK(argmax(m.values) == 24);
    }
}

TEST_SUITE("find_peaks") {
    TEST_CASE("single delta, k = 2: one peak and a shortfall") {
        RVec v(100, 0.0);
        v[20] = 1.0;
        const auto peaks = find_peaks(profile_from(v), 2, 1, false);
        REQUIRE(peaks.size() == 1);
        CHECK(peaks[0].index == 20);
        const auto r = lags_to_result(peaks, Method::Ifft, 2);
        CHECK(r.shortfall == 1);
        CHECK(r.metadata.at("shortfall") == "1");
    }

    TEST_CASE("two deltas at 20 and 40") {
        RVec v(100, 0.0);
        v[20] = 1.0;
        v[40] = 0.8;
        const auto peaks = find_peaks(profile_from(v), 2, 5, false);
        REQUIRE(peaks.size() == 2);
        CHECK(peaks[0].lag_s == doctest::Approx(10e-6));
        CHECK(peaks[1].lag_s == doctest::Approx(20e-6));
        CHECK_FALSE(peaks[0].refined);
    }

    TEST_CASE("separation guard skips close maxima") {
        RVec v(100, 0.0);
        v[20] = 1.0;
        v[23] = 0.9;
        v[60] = 0.5;
        const auto peaks = find_peaks(profile_from(v), 2, 5, false);
        REQUIRE(peaks.size() == 2);
        CHECK(peaks[0].index == 20);
        CHECK(peaks[1].index == 60);
    }

    TEST_CASE("flat profile has no peaks") {
        CHECK(find_peaks(profile_from(RVec(50, 0.0)), 2, 1, true).empty());
    }

    TEST_CASE("sinc pair between bins: parabolic refinement within 0.1 bin of the dense-grid maxima") {
        const double c1 = 40.3;
        const double c2 = 61.7;
        const double w = 4.0;
        auto sinc = [](double x) { return x == 0.0 ? 1.0 : std::sin(oracle::kPi * x) / (oracle::kPi * x); };
        auto f = [&](double t) { return sinc((t - c1) / w) + 0.8 * sinc((t - c2) / w); };
        RVec v(128);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(static_cast<double>(i));
        const auto peaks = find_peaks(profile_from(v), 2, 3, true);
        REQUIRE(peaks.size() == 2);
        for (std::size_t j = 0; j < 2; ++j) {
            const double c = j == 0 ? c1 : c2;
            const auto best = oracle::dense_grid_minima([&](double t) { return -f(t); }, c - 2.0, c + 2.0, 40000, 1);
            CHECK(peaks[j].refined);
            CHECK(std::abs(peaks[j].lag_s * kFs - best[0]) < 0.1);
        }
    }

    TEST_CASE("invalid arguments") {
        CHECK_THROWS_AS(find_peaks(profile_from(RVec(10, 0.0)), 0, 1, false), ParameterError);
        CHECK_THROWS_AS(find_peaks(profile_from(RVec(10, 0.0)), 1, 0, false), ParameterError);
    }
}

TEST_SUITE("parabolic_offset") {
    TEST_CASE("vertex of an exact parabola") {
        auto y = [](double x) { return 5.0 - 2.0 * (x - 0.3) * (x - 0.3); };
        CHECK(parabolic_offset(y(-1.0), y(0.0), y(1.0)) == doctest::Approx(0.3));
        CHECK(parabolic_offset(1.0, 2.0, 1.0) == 0.0);
        CHECK(parabolic_offset(1.0, 1.0, 1.0) == 0.0);
    }
}

TEST_SUITE("band-limited refinement") {
    TEST_CASE("lag_response matches the profile at integer lags") {
        const auto s = make_scene(4096, {{10.3e-6, 0.1}}, 100e3);
        const auto p = ifft_profile(s.q);
        for (std::size_t i : {0U, 5U, 20U, 21U, 300U, 4095U})
            CHECK(lag_response(s.q, static_cast<double>(i) / kFs) == doctest::Approx(p.values[i]).epsilon(1e-9).scale(1e-3));
    }

    TEST_CASE("fractional delay recovered to a small fraction of a bin") {
        for (double t0 : {10.3e-6, 17.77e-6, 33.123e-6}) {
            const auto s = make_scene(std::size_t{1} << 14, {{t0, 0.1}}, 100e3);
            const auto peaks = find_peaks(truncate(ifft_profile(s.q), 200), 1, 2, true);
            REQUIRE(peaks.size() == 1);
            const Peak polished = refine_bandlimited(s.q, peaks[0]);
            CHECK(std::abs(polished.lag_s - t0) * kFs < 0.01);
            CHECK(polished.value >= peaks[0].value - 1e-12);
        }
    }
}

TEST_SUITE("lags_to_result") {
    TEST_CASE("lag to range conversions") {
        Peak a;
        a.lag_s = 10.0069e-6;
        Peak b;
        b.lag_s = 1.0007e-6;
        Peak z;
        const auto r = lags_to_result({a, b, z}, Method::Ifft);
        REQUIRE(r.delays_s.size() == 3);
        CHECK(r.delays_s[0] == 0.0);
        CHECK(r.ranges_m[0] == 0.0);
        CHECK(r.ranges_m[1] == doctest::Approx(300.0).epsilon(0.1 / 300.0));
        CHECK(r.ranges_m[2] == doctest::Approx(3000.0).epsilon(0.1 / 3000.0));
        CHECK(std::is_sorted(r.delays_s.begin(), r.delays_s.end()));
        CHECK(r.method == Method::Ifft);
    }

    TEST_CASE("no peaks is an empty-result error") {
        CHECK_THROWS_AS(lags_to_result({}, Method::Ifft), EmptyResultError);
    }

    TEST_CASE("method names") {
        CHECK(to_string(Method::Ifft) == "IFFT");
        CHECK(to_string(Method::Music) == "MUSIC");
        CHECK(method_from_string("music") == Method::Music);
        CHECK_THROWS_AS(method_from_string("esprit"), ParameterError);
    }
}
