#include "pbr/ifft_detector.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pbr/fft.hpp"

namespace pbr {

using detail::require;

std::string to_string(Method m) { return m == Method::Ifft ? "IFFT" : "MUSIC"; }

Method method_from_string(std::string_view s) {
    if (s == "IFFT" || s == "ifft") return Method::Ifft;
    if (s == "MUSIC" || s == "music") return Method::Music;
    throw ParameterError("unknown method '" + std::string(s) + "' (expected IFFT or MUSIC)");
}

RangeProfile ifft_profile(const SpectrumQuotient& q, ProfileMode mode) {
    require(q.size() >= 2 && q.bin_spacing_hz > 0.0, "ifft_profile: malformed quotient");
    require(q.valid_count() > 0, "ifft_profile: empty passband");

    const CVec lagged = fft::inverse(q.bins);
    const double fs = q.sample_rate_hz();
    RangeProfile p;
    p.lag_step_s = 1.0 / fs;
    p.values.resize(lagged.size());
    for (std::size_t n = 0; n < lagged.size(); ++n) {
        cplx v = lagged[n];
        if (q.center_hz != 0.0) {
            const double cycles = std::fmod(q.center_hz * static_cast<double>(n) / fs, 1.0);
            v *= std::polar(1.0, constants::kTwoPi * cycles);
        }
        p.values[n] = mode == ProfileMode::RealPart ? v.real() : std::abs(v);
    }
    return p;
}

RangeProfile truncate(const RangeProfile& p, std::size_t n_lags) {
    RangeProfile out = p;
    out.values.resize(std::min(n_lags, p.values.size()));
    return out;
}

double parabolic_offset(double left, double center, double right) {
    const double den = left - 2.0 * center + right;
    if (den >= 0.0) return 0.0;  // not a strict maximum
    return std::clamp(0.5 * (left - right) / den, -0.5, 0.5);
}

std::vector<Peak> find_peaks(const RangeProfile& p, std::size_t k, std::size_t min_sep_bins, bool refine) {
    require(k >= 1, "find_peaks: k must be >= 1");
    require(min_sep_bins >= 1, "find_peaks: min_sep_bins must be >= 1");
    const auto& y = p.values;
    const std::size_t n = y.size();

    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < n; ++i) {
        // Interior plateaus report their first sample; edges need a strict rise.
        const bool above_left = i == 0 ? n > 1 && y[i] > y[i + 1] : y[i] > y[i - 1];
        const bool above_right = i + 1 == n ? n > 1 && y[i] > y[i - 1] : y[i] >= y[i + 1];
        if (above_left && above_right) candidates.push_back(i);
    }
    std::stable_sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) { return y[a] > y[b]; });

    std::vector<std::size_t> picked;
    for (std::size_t c : candidates) {
        if (picked.size() == k) break;
        const bool clear = std::all_of(picked.begin(), picked.end(), [&](std::size_t q) {
            return (c > q ? c - q : q - c) >= min_sep_bins;
        });
        if (clear) picked.push_back(c);
    }
    std::sort(picked.begin(), picked.end());

    std::vector<Peak> peaks;
    peaks.reserve(picked.size());
    for (std::size_t i : picked) {
        Peak pk;
        pk.index = i;
        pk.value = y[i];
        double offset = 0.0;
        if (refine && i > 0 && i + 1 < n) {
            offset = parabolic_offset(y[i - 1], y[i], y[i + 1]);
            pk.value = y[i] - 0.25 * (y[i - 1] - y[i + 1]) * offset;
            pk.refined = true;
        }
        pk.lag_s = (static_cast<double>(i) + offset) * p.lag_step_s;
        peaks.push_back(pk);
    }
    return peaks;
}

double lag_response(const SpectrumQuotient& q, double lag_s, ProfileMode mode) {
    const std::size_t n = q.size();
    require(n >= 2 && q.bin_spacing_hz > 0.0, "lag_response: malformed quotient");
    // Signed bin index m in [-n/2, n/2); valid bins of a band-pass are contiguous
    // in m, so the phasor is advanced by recurrence.
    const auto half = static_cast<long long>(n / 2);
    const auto lo = -half;
    const cplx step = std::polar(1.0, constants::kTwoPi * q.bin_spacing_hz * lag_s);
    cplx phasor = std::polar(1.0, constants::kTwoPi * std::fmod(q.bin_spacing_hz * static_cast<double>(lo) * lag_s, 1.0));
    cplx acc{0.0, 0.0};
    for (long long m = lo; m < lo + static_cast<long long>(n); ++m) {
        const auto k = static_cast<std::size_t>(m < 0 ? m + static_cast<long long>(n) : m);
        if (q.valid_mask[k]) acc += q.bins[k] * phasor;
        phasor *= step;
    }
    acc /= static_cast<double>(n);
    acc *= std::polar(1.0, constants::kTwoPi * std::fmod(q.center_hz * lag_s, 1.0));
    return mode == ProfileMode::RealPart ? acc.real() : std::abs(acc);
}

Peak refine_bandlimited(const SpectrumQuotient& q, const Peak& peak, ProfileMode mode) {
    const double step = 1.0 / q.sample_rate_hz();
    constexpr double kInvPhi = 0.6180339887498949;
    constexpr int kIterations = 48;
    double a = peak.lag_s - step;
    double b = peak.lag_s + step;
    double c = b - kInvPhi * (b - a);
    double d = a + kInvPhi * (b - a);
    double fc = lag_response(q, c, mode);
    double fd = lag_response(q, d, mode);
    for (int it = 0; it < kIterations; ++it) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - kInvPhi * (b - a);
            fc = lag_response(q, c, mode);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kInvPhi * (b - a);
            fd = lag_response(q, d, mode);
        }
    }
    Peak out = peak;
    out.lag_s = 0.5 * (a + b);
    out.value = lag_response(q, out.lag_s, mode);
    out.refined = true;
    return out;
}

DetectionResult lags_to_result(const std::vector<Peak>& peaks, Method method, std::size_t requested) {
    if (peaks.empty()) throw EmptyResultError("lags_to_result: no peaks to convert");
    DetectionResult r;
    r.method = method;
    std::vector<Peak> sorted = peaks;
    std::sort(sorted.begin(), sorted.end(), [](const Peak& a, const Peak& b) { return a.lag_s < b.lag_s; });
    for (const Peak& pk : sorted) {
        r.delays_s.push_back(std::max(0.0, pk.lag_s));
        r.peak_values.push_back(pk.value);
    }
    r.ranges_m.resize(r.delays_s.size());
    std::transform(r.delays_s.begin(), r.delays_s.end(), r.ranges_m.begin(), delay_to_range);
    r.shortfall = requested > peaks.size() ? requested - peaks.size() : 0;
    r.metadata["method"] = to_string(method);
    r.metadata["peaks_found"] = std::to_string(peaks.size());
    if (r.shortfall > 0) r.metadata["shortfall"] = std::to_string(r.shortfall);
    return r;
}

}  // namespace pbr
