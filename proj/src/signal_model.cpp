#include "pbr/signal_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "pbr/fft.hpp"

namespace pbr {

using detail::require;

namespace {

// Passes of clip-at-one-sigma followed by re-filtering in synthesize_message.
constexpr int kLimiterPasses = 4;

// Keeps only bins with 0 < |f| <= bw; the output is real up to roundoff.
RVec ideal_lowpass(const RVec& x, double bw_hz, double fs_hz) {
    CVec buf(x.begin(), x.end());
    CVec spec = fft::forward(buf);
    for (std::size_t k = 0; k < spec.size(); ++k) {
        const double f = std::abs(fft::bin_frequency(k, spec.size(), fs_hz));
        if (k == 0 || f > bw_hz) spec[k] = 0.0;
    }
    CVec back = fft::inverse(spec);
    RVec out(back.size());
    std::transform(back.begin(), back.end(), out.begin(), [](cplx v) { return v.real(); });
    return out;
}

void scale_to_unit_rms(RVec& x) {
    const double ss = std::inner_product(x.begin(), x.end(), x.begin(), 0.0);
    const double rms = std::sqrt(ss / static_cast<double>(x.size()));
    if (rms > 0.0)
        for (auto& v : x) v /= rms;
}

}  // namespace

double EmitterSpec::channel_carrier_hz(int k) const {
    const double centered = static_cast<double>(k) - 0.5 * static_cast<double>(channel_count - 1);
    return carrier_offset_hz + centered * channel_spacing_hz;
}

void EmitterSpec::validate() const {
    require(freq_deviation_hz > 0.0, "emitter: freq_deviation_hz must be > 0");
    require(channel_count >= 1, "emitter: channel_count must be >= 1");
    require(channel_spacing_hz > 0.0, "emitter: channel_spacing_hz must be > 0");
    require(occupied_bandwidth_hz() <= constants::kMaxOccupiedBandwidthHz,
            "emitter: channel_count * channel_spacing_hz exceeds the 20 MHz FM band");
    require(amplitude > 0.0, "emitter: amplitude must be > 0");
}

double SampledSignal::energy() const {
    return std::accumulate(samples.begin(), samples.end(), 0.0,
                           [](double acc, cplx v) { return acc + std::norm(v); });
}

void SampledSignal::validate() const {
    require(!samples.empty(), "signal: empty sample sequence");
    require(sample_rate_hz > 0.0, "signal: sample_rate_hz must be > 0");
}

void TargetScene::validate(double duration_s) const {
    require(direct_amplitude > 0.0, "scene: direct_amplitude must be > 0");
    require(noise_std >= 0.0, "scene: noise_std must be >= 0");
    for (std::size_t i = 0; i < echoes.size(); ++i) {
        const Echo& e = echoes[i];
        require(e.delay_s >= 0.0, "scene: echo delay must be >= 0");
        require(e.amplitude > 0.0, "scene: echo amplitude must be > 0");
        require(e.delay_s < duration_s, "scene: echo delay must be shorter than the record");
        if (i > 0) require(e.delay_s > echoes[i - 1].delay_s, "scene: echo delays must be strictly increasing");
    }
}

double noise_std_for_snr(double echo_amplitude, double snr_db) {
    return echo_amplitude * std::pow(10.0, -snr_db / 20.0);
}

MessageSignal synthesize_message(std::uint64_t seed, std::size_t n_samples, double audio_bw_hz,
                                 double sample_rate_hz) {
    require(sample_rate_hz > 0.0, "message: sample_rate_hz must be > 0");
    require(audio_bw_hz > 0.0 && audio_bw_hz < sample_rate_hz / 2.0,
            "message: audio bandwidth must lie in (0, fs/2)");
    require(n_samples >= 16, "message: need at least 16 samples");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    RVec x(n_samples);
    for (auto& v : x) v = gauss(rng);

    x = ideal_lowpass(x, audio_bw_hz, sample_rate_hz);
    for (int pass = 0; pass < kLimiterPasses; ++pass) {
        scale_to_unit_rms(x);
        for (auto& v : x) v = std::clamp(v, -1.0, 1.0);
        x = ideal_lowpass(x, audio_bw_hz, sample_rate_hz);
    }

    const double peak = std::transform_reduce(x.begin(), x.end(), 0.0, [](double a, double b) { return std::max(a, b); },
                                              [](double v) { return std::abs(v); });
    require(peak > 0.0, "message: band too narrow for the record length (no energy left)");
    for (auto& v : x) v /= peak;
    return MessageSignal{std::move(x), sample_rate_hz, seed};
}

SampledSignal fm_modulate(const MessageSignal& msg, const EmitterSpec& spec, std::size_t n_samples) {
    spec.validate();
    require(spec.channel_count == 1, "fm_modulate: single-channel emitter expected");
    require(n_samples >= 1, "fm_modulate: n_samples must be >= 1");
    require(msg.samples.size() >= n_samples, "fm_modulate: message shorter than requested record");
    require(msg.sample_rate_hz > 0.0, "fm_modulate: message sample rate must be > 0");

    const double fs = msg.sample_rate_hz;
    const double dt = 1.0 / fs;
    SampledSignal out;
    out.sample_rate_hz = fs;
    out.samples.resize(n_samples);

    double integral = 0.0;  // seconds; trapezoidal running integral of x_m
    for (std::size_t n = 0; n < n_samples; ++n) {
        if (n > 0) integral += 0.5 * dt * (msg.samples[n - 1] + msg.samples[n]);
        // Phase in cycles, wrapped before scaling to radians.
        const double carrier_cycles = std::fmod(spec.carrier_offset_hz * static_cast<double>(n) / fs, 1.0);
        const double cycles = carrier_cycles + std::fmod(spec.freq_deviation_hz * integral, 1.0);
        out.samples[n] = std::polar(spec.amplitude, constants::kTwoPi * cycles);
    }
    return out;
}

SampledSignal compose_multichannel(const std::vector<MessageSignal>& messages, const EmitterSpec& spec) {
    spec.validate();
    require(messages.size() == static_cast<std::size_t>(spec.channel_count),
            "compose_multichannel: need exactly one message per channel");
    const std::size_t n = messages.front().samples.size();
    const double fs = messages.front().sample_rate_hz;
    for (const auto& m : messages) {
        require(m.samples.size() == n, "compose_multichannel: messages differ in length");
        require(m.sample_rate_hz == fs, "compose_multichannel: messages differ in sample rate");
    }
    const double lowest = spec.channel_carrier_hz(0) - 0.5 * spec.channel_spacing_hz;
    const double highest = spec.channel_carrier_hz(spec.channel_count - 1) + 0.5 * spec.channel_spacing_hz;
    require(lowest >= -fs / 2.0 && highest <= fs / 2.0, "compose_multichannel: channel plan exceeds the Nyquist band");

    SampledSignal out;
    out.sample_rate_hz = fs;
    out.samples.assign(n, cplx{0.0, 0.0});
    for (int k = 0; k < spec.channel_count; ++k) {
        EmitterSpec single = spec;
        single.channel_count = 1;
        single.carrier_offset_hz = spec.channel_carrier_hz(k);
        const SampledSignal ch = fm_modulate(messages[static_cast<std::size_t>(k)], single, n);
        for (std::size_t i = 0; i < n; ++i) out.samples[i] += ch.samples[i];
    }
    return out;
}

RenderedScene render_scene(const SampledSignal& direct, const TargetScene& scene, std::uint64_t seed) {
    direct.validate();
    scene.validate(direct.duration_s());

    const std::size_t n = direct.size();
    RenderedScene out;
    out.direct = direct;
    for (auto& v : out.direct.samples) v *= scene.direct_amplitude;

    out.surveillance = direct;
    if (scene.echoes.empty()) {
        std::fill(out.surveillance.samples.begin(), out.surveillance.samples.end(), cplx{0.0, 0.0});
    } else {
        const CVec ref = fft::forward(direct.samples);
        CVec acc(n, cplx{0.0, 0.0});
        for (std::size_t k = 0; k < n; ++k) {
            // Absolute frequency of this bin, so a delay also rotates the carrier.
            const double f = fft::bin_frequency(k, n, direct.sample_rate_hz) + direct.center_hz;
            cplx gain{0.0, 0.0};
            for (const Echo& e : scene.echoes) {
                const double cycles = std::fmod(f * e.delay_s, 1.0);
                gain += std::polar(e.amplitude, -constants::kTwoPi * cycles);
            }
            acc[k] = ref[k] * gain;
        }
        out.surveillance.samples = fft::inverse(acc);
    }

    if (scene.noise_std > 0.0) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> gauss(0.0, scene.noise_std / std::sqrt(2.0));
        for (auto& v : out.surveillance.samples) {
            const double re = gauss(rng);
            const double im = gauss(rng);
            v += cplx{re, im};
        }
    }
    return out;
}

}  // namespace pbr
