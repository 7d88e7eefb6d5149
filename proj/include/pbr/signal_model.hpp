#pragma once

#include <cstdint>
#include <vector>

#include "pbr/common.hpp"

namespace pbr {

/// FM broadcast emitter. Channels are placed symmetrically around
/// carrier_offset_hz, channel_spacing_hz apart.
struct EmitterSpec {
    double carrier_offset_hz = constants::kCarrierOffsetHz;
    double freq_deviation_hz = constants::kFreqDeviationHz;
    int channel_count = 1;
    double channel_spacing_hz = constants::kChannelSpacingHz;
    double amplitude = 1.0;

    double occupied_bandwidth_hz() const { return channel_count * channel_spacing_hz; }
    /// Carrier of channel k, k = 0 .. channel_count-1.
    double channel_carrier_hz(int k) const;
    void validate() const;
};

/// Normalized real modulating signal, |x| <= 1.
struct MessageSignal {
    RVec samples;
    double sample_rate_hz = constants::kSampleRateHz;
    std::uint64_t seed = 0;
};

/// Uniformly sampled complex baseband record. center_hz is the frequency
/// that maps to 0 Hz in this record; it is advanced by every down-conversion.
struct SampledSignal {
    CVec samples;
    double sample_rate_hz = constants::kSampleRateHz;
    double t0_offset_s = 0.0;
    double center_hz = 0.0;

    std::size_t size() const { return samples.size(); }
    double duration_s() const { return static_cast<double>(samples.size()) / sample_rate_hz; }
    double energy() const;
    void validate() const;
};

struct Echo {
    double delay_s = 0.0;
    double amplitude = constants::kDefaultEchoAmplitude;
};

/// Point targets seen by the surveillance antenna. noise_std is the total
/// standard deviation of the complex noise (E|w|^2 = noise_std^2).
struct TargetScene {
    std::vector<Echo> echoes;
    double direct_amplitude = 1.0;
    double noise_std = 0.0;

    void validate(double duration_s) const;
};

/// Noise standard deviation giving the requested per-echo SNR for an echo of
/// the given amplitude on a unit-envelope waveform.
double noise_std_for_snr(double echo_amplitude, double snr_db);

struct RenderedScene {
    SampledSignal direct;
    SampledSignal surveillance;
};

/// Band-limited pseudorandom programme material: white Gaussian noise through
/// an ideal (0, audio_bw_hz] low-pass, peak-limited in a few clip/re-filter
/// passes the way broadcast audio processors keep deviation high, then
/// normalized to a peak of exactly 1.
MessageSignal synthesize_message(std::uint64_t seed, std::size_t n_samples,
                                 double audio_bw_hz = constants::kAudioBandwidthHz,
                                 double sample_rate_hz = constants::kSampleRateHz);

/// Single-carrier FM. The phase integral is the trapezoidal running sum of
/// the message at step 1/fs.
SampledSignal fm_modulate(const MessageSignal& msg, const EmitterSpec& spec, std::size_t n_samples);

/// Sum of channel_count independently modulated carriers, one message each.
SampledSignal compose_multichannel(const std::vector<MessageSignal>& messages, const EmitterSpec& spec);

/// Applies every echo as an exact linear phase over the full (circular)
/// record and adds circular complex Gaussian noise to the surveillance
/// channel only. The input is taken as the unit-amplitude emitted waveform.
RenderedScene render_scene(const SampledSignal& direct, const TargetScene& scene, std::uint64_t seed);

}  // namespace pbr
