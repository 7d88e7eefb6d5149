#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "pbr/common.hpp"
#include "pbr/detection.hpp"
#include "pbr/frontend.hpp"
#include "pbr/ifft_detector.hpp"
#include "pbr/music_detector.hpp"
#include "pbr/signal_model.hpp"

namespace pbr {

/// Knobs shared by both detectors plus the ones specific to each.
struct DetectorParams {
    double eps_rel = constants::kDefaultEpsRel;
    /// Band-pass width around the composite carrier after DDC; 0 selects
    /// channel_count * channel_spacing_hz.
    double passband_hz = 0.0;
    /// Delays are searched in [0, max_delay_s].
    double max_delay_s = 100e-6;
    bool refine = true;

    ProfileMode profile_mode = ProfileMode::RealPart;
    std::size_t min_sep_bins = 2;
    /// After the parabolic fit, polish IFFT peaks on the exact band-limited
    /// lag response (only when refine is set).
    bool ifft_bandlimited_refine = true;

    /// Passband bins are averaged down to about this many snapshot samples.
    std::size_t music_snapshot_len = 64;
    /// 0 selects min(32, n / 2).
    std::size_t music_subvector_len = 0;
    bool music_forward_backward = true;
    std::size_t music_grid = 4096;
};

struct ScenarioConfig {
    int channel_count = 1;
    double separation_m = 3000.0;
    double base_delay_s = 20e-6;
    /// 2 for the resolution scenes, 1 for the error-curve scenes.
    int target_count = 2;
    double snr_db = constants::kDefaultSnrDb;
    std::size_t n_samples = constants::kDefaultSamples;
    std::uint64_t seed = 1;
    Method method = Method::Ifft;

    double sample_rate_hz = constants::kSampleRateHz;
    double carrier_offset_hz = constants::kCarrierOffsetHz;
    double freq_deviation_hz = constants::kFreqDeviationHz;
    double channel_spacing_hz = constants::kChannelSpacingHz;
    double audio_bw_hz = constants::kAudioBandwidthHz;
    double echo_amplitude = constants::kDefaultEchoAmplitude;

    DetectorParams detector;

    EmitterSpec emitter() const;
    double passband_hz() const;
    void validate() const;
};

/// Flat key/value view of a config, one entry per field, and its inverse.
/// Missing keys keep their defaults; unknown keys are rejected.
std::map<std::string, std::string> to_key_values(const ScenarioConfig& cfg);
ScenarioConfig from_key_values(const std::map<std::string, std::string>& kv);

/// Everything up to the band-passed quotient, plus the ground truth.
struct PreparedScene {
    SpectrumQuotient quotient;
    RVec true_delays_s;
};

PreparedScene prepare_scene(const ScenarioConfig& cfg);

/// A detection together with the curve it was read from: the windowed range
/// profile for IFFT, the pseudospectrum (and its snapshot bin spacing) for MUSIC.
struct DetectorOutput {
    DetectionResult result;
    RangeProfile profile;
    Pseudospectrum pseudospectrum;
    double music_bin_spacing_hz = 0.0;
};

/// Runs one detector on a prepared quotient.
DetectorOutput detect_full(const SpectrumQuotient& q, Method method, std::size_t n_targets,
                           const DetectorParams& params);
DetectionResult detect(const SpectrumQuotient& q, Method method, std::size_t n_targets, const DetectorParams& params);

/// End-to-end chain: synthesize, compose, render, ddc, spectra, quotient,
/// band-pass, then the configured detector. Metadata records every parameter.
DetectionResult run_scenario(const ScenarioConfig& cfg);

struct ScenarioOutput {
    PreparedScene scene;
    DetectorOutput detection;
};
ScenarioOutput run_scenario_full(const ScenarioConfig& cfg);

/// Two peaks near the two true delays (one-to-one, each within
/// tol_frac * separation) with a valley at least 3 dB below the smaller
/// peak in between.
bool resolvability(const DetectionResult& result, const RVec& true_delays, double tol_frac = 0.5);

struct ResolutionRow {
    int channel_count = 0;
    Method method = Method::Ifft;
    /// NaN when not even the widest separation was resolved.
    double min_resolved_separation_m = 0.0;
    std::size_t trials = 0;
    double resolve_rate = 0.0;
};

struct SweepPoint {
    int channel_count = 0;
    Method method = Method::Ifft;
    double separation_m = 0.0;
    double resolve_rate = 0.0;
};

struct SweepResult {
    std::vector<ResolutionRow> rows;
    std::vector<SweepPoint> points;
};

inline constexpr double kResolveThreshold = 0.9;

std::vector<double> default_separations_m();

/// For each (channel, method) walks the separations from widest to narrowest
/// and reports the last one resolved in at least 90% of trials. Trial t uses
/// seed base_seed + t at every separation.
SweepResult resolution_sweep(const std::vector<int>& channels, const std::vector<Method>& methods,
                             std::vector<double> separations_m, std::size_t trials, std::uint64_t base_seed,
                             const ScenarioConfig& base = {});

struct ErrorCurvePoint {
    int channel_count = 0;
    Method method = Method::Ifft;
    double mean_rel_error_pct = 0.0;
    std::size_t iterations = 0;
    std::size_t excluded = 0;
};

/// Single-target scenes with a uniformly drawn delay; error is
/// 100 |est - true| / true averaged over the successful iterations.
struct ErrorCurveSettings {
    double delay_lo_s = 10e-6;
    double delay_hi_s = 50e-6;
    /// Estimates further than this from the truth count as failed detections.
    double gross_error_s = 5e-6;
};

std::vector<ErrorCurvePoint> monte_carlo_error(const std::vector<int>& channels, const std::vector<Method>& methods,
                                               std::size_t iterations, std::uint64_t base_seed,
                                               const ScenarioConfig& base = {}, const ErrorCurveSettings& settings = {});

/// Runs fn(i) for i in [0, n) on up to `threads` workers (0 = hardware).
/// fn must only touch state owned by index i.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, unsigned threads = 0);

}  // namespace pbr
