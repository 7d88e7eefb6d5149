#include "pbr/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <random>
#include <mutex>
#include <thread>

#include "pbr/io.hpp"

namespace pbr {

using detail::require;

namespace {

// Stream tags for deriving independent sub-seeds from one scenario seed.
constexpr std::uint64_t kNoiseStream = 0x6e6f697365ULL;
constexpr std::uint64_t kDelayStream = 0x64656c6179ULL;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) { return splitmix64(splitmix64(seed) ^ stream); }

// Re-throws a module error with the pipeline stage prepended, keeping its type.
template <typename Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const ParameterError& e) {
        throw ParameterError(std::string(name) + ": " + e.what());
    } catch (const NumericError& e) {
        throw NumericError(std::string(name) + ": " + e.what());
    } catch (const EmptyResultError& e) {
        throw EmptyResultError(std::string(name) + ": " + e.what());
    }
}

DetectionResult empty_result(Method method, std::size_t requested) {
    DetectionResult r;
    r.method = method;
    r.shortfall = requested;
    r.metadata["method"] = to_string(method);
    r.metadata["peaks_found"] = "0";
    r.metadata["shortfall"] = std::to_string(requested);
    return r;
}

DetectorOutput detect_ifft(const SpectrumQuotient& q, std::size_t n_targets, const DetectorParams& params) {
    const RangeProfile full = ifft_profile(q, params.profile_mode);
    const auto n_lags = static_cast<std::size_t>(std::ceil(params.max_delay_s / full.lag_step_s)) + 1;
    DetectorOutput out;
    out.profile = truncate(full, n_lags);
    const RangeProfile& window = out.profile;
    auto peaks = find_peaks(window, n_targets, params.min_sep_bins, params.refine);
    if (params.refine && params.ifft_bandlimited_refine)
        for (auto& pk : peaks) pk = refine_bandlimited(q, pk, params.profile_mode);
    out.result = peaks.empty() ? empty_result(Method::Ifft, n_targets) : lags_to_result(peaks, Method::Ifft, n_targets);
    DetectionResult& r = out.result;
    r.trace.power_scale = false;
    r.trace.value = window.values;
    r.trace.delay_s.resize(window.length());
    for (std::size_t i = 0; i < window.length(); ++i) r.trace.delay_s[i] = static_cast<double>(i) * window.lag_step_s;
    r.metadata["profile_mode"] = params.profile_mode == ProfileMode::RealPart ? "real" : "magnitude";
    r.metadata["lag_step_s"] = io::format_number(window.lag_step_s);
    return out;
}

DetectorOutput detect_music(const SpectrumQuotient& q, std::size_t n_targets, const DetectorParams& params) {
    const std::size_t valid = q.valid_count();
    const std::size_t decimation = std::max<std::size_t>(1, valid / std::max<std::size_t>(1, params.music_snapshot_len));
    const MusicInput snapshot = build_snapshot(q, decimation);
    const std::size_t len =
        params.music_subvector_len == 0 ? default_subvector_len(snapshot.n()) : params.music_subvector_len;
    const CovarianceEstimate cov = estimate_covariance(snapshot, len, params.music_forward_backward);
    const SubspaceDecomposition dec = eig_subspace(cov, n_targets);

    const double span = 1.0 / snapshot.bin_spacing_hz;
    double omega_lo = -constants::kPi;
    double omega_hi = constants::kPi;
    if (params.max_delay_s < span) {
        omega_lo = delay_to_omega(params.max_delay_s, snapshot.bin_spacing_hz);
        omega_hi = 0.0;
    }
    DetectorOutput out;
    out.pseudospectrum = pseudospectrum(dec, params.music_grid, omega_lo, omega_hi);
    out.music_bin_spacing_hz = snapshot.bin_spacing_hz;
    out.result = music_delays(out.pseudospectrum, n_targets, snapshot.bin_spacing_hz, params.refine);
    DetectionResult& r = out.result;
    r.metadata["music_decimation"] = std::to_string(decimation);
    r.metadata["music_snapshot_len"] = std::to_string(snapshot.n());
    r.metadata["music_subvector_len"] = std::to_string(len);
    r.metadata["music_bin_spacing_hz"] = io::format_number(snapshot.bin_spacing_hz);
    r.metadata["music_noise_floor"] = io::format_number(dec.noise_floor);
    r.metadata["music_omega_lo"] = io::format_number(omega_lo);
    r.metadata["music_omega_hi"] = io::format_number(omega_hi);
    return out;
}

}  // namespace

EmitterSpec ScenarioConfig::emitter() const {
    EmitterSpec spec;
    spec.carrier_offset_hz = carrier_offset_hz;
    spec.freq_deviation_hz = freq_deviation_hz;
    spec.channel_count = channel_count;
    spec.channel_spacing_hz = channel_spacing_hz;
    spec.amplitude = 1.0;
    return spec;
}

double ScenarioConfig::passband_hz() const {
    return detector.passband_hz > 0.0 ? detector.passband_hz : channel_count * channel_spacing_hz;
}

void ScenarioConfig::validate() const {
    emitter().validate();
    require(separation_m >= 0.0, "config: separation_m must be >= 0");
    require(base_delay_s >= 0.0, "config: base_delay_s must be >= 0");
    require(target_count == 1 || target_count == 2, "config: target_count must be 1 or 2");
    require(n_samples >= 16, "config: n_samples must be >= 16");
    require(sample_rate_hz > 0.0, "config: sample_rate_hz must be > 0");
    require(echo_amplitude > 0.0, "config: echo_amplitude must be > 0");
    require(!std::isnan(snr_db), "config: snr_db must be a number");
    require(detector.eps_rel >= 0.0, "config: eps_rel must be >= 0");
    require(detector.max_delay_s > 0.0, "config: max_delay_s must be > 0");
    require(detector.min_sep_bins >= 1, "config: min_sep_bins must be >= 1");
    require(detector.music_snapshot_len >= kMinSnapshotLen, "config: music_snapshot_len must be >= 8");
    require(detector.music_grid >= 64, "config: music_grid must be >= 64");
    require(passband_hz() <= sample_rate_hz, "config: passband wider than the sample rate");
    const double last_delay = base_delay_s + (target_count == 2 ? range_to_delay(separation_m) : 0.0);
    require(last_delay <= detector.max_delay_s, "config: target delays exceed max_delay_s");
}

std::map<std::string, std::string> to_key_values(const ScenarioConfig& cfg) {
    using io::format_number;
    const DetectorParams& d = cfg.detector;
    return {
        {"channel_count", std::to_string(cfg.channel_count)},
        {"separation_m", format_number(cfg.separation_m)},
        {"base_delay_s", format_number(cfg.base_delay_s)},
        {"target_count", std::to_string(cfg.target_count)},
        {"snr_db", format_number(cfg.snr_db)},
        {"n_samples", std::to_string(cfg.n_samples)},
        {"seed", std::to_string(cfg.seed)},
        {"method", to_string(cfg.method)},
        {"sample_rate_hz", format_number(cfg.sample_rate_hz)},
        {"carrier_offset_hz", format_number(cfg.carrier_offset_hz)},
        {"freq_deviation_hz", format_number(cfg.freq_deviation_hz)},
        {"channel_spacing_hz", format_number(cfg.channel_spacing_hz)},
        {"audio_bw_hz", format_number(cfg.audio_bw_hz)},
        {"echo_amplitude", format_number(cfg.echo_amplitude)},
        {"eps_rel", format_number(d.eps_rel)},
        {"passband_hz", format_number(cfg.passband_hz())},
        {"max_delay_s", format_number(d.max_delay_s)},
        {"refine", d.refine ? "true" : "false"},
        {"profile_mode", d.profile_mode == ProfileMode::RealPart ? "real" : "magnitude"},
        {"min_sep_bins", std::to_string(d.min_sep_bins)},
        {"ifft_bandlimited_refine", d.ifft_bandlimited_refine ? "true" : "false"},
        {"music_snapshot_len", std::to_string(d.music_snapshot_len)},
        {"music_subvector_len", std::to_string(d.music_subvector_len)},
        {"music_forward_backward", d.music_forward_backward ? "true" : "false"},
        {"music_grid", std::to_string(d.music_grid)},
    };
}

ScenarioConfig from_key_values(const std::map<std::string, std::string>& kv) {
    ScenarioConfig cfg;
    DetectorParams& d = cfg.detector;
    for (const auto& [key, value] : kv) {
        using io::parse_bool;
        using io::parse_int;
        using io::parse_number;
        using io::parse_size;
        if (key == "channel_count") cfg.channel_count = static_cast<int>(parse_int(key, value));
        else if (key == "separation_m") cfg.separation_m = parse_number(key, value);
        else if (key == "base_delay_s") cfg.base_delay_s = parse_number(key, value);
        else if (key == "target_count") cfg.target_count = static_cast<int>(parse_int(key, value));
        else if (key == "snr_db") cfg.snr_db = parse_number(key, value);
        else if (key == "n_samples") cfg.n_samples = parse_size(key, value);
        else if (key == "seed") cfg.seed = parse_size(key, value);
        else if (key == "method") cfg.method = method_from_string(value);
        else if (key == "sample_rate_hz") cfg.sample_rate_hz = parse_number(key, value);
        else if (key == "carrier_offset_hz") cfg.carrier_offset_hz = parse_number(key, value);
        else if (key == "freq_deviation_hz") cfg.freq_deviation_hz = parse_number(key, value);
        else if (key == "channel_spacing_hz") cfg.channel_spacing_hz = parse_number(key, value);
        else if (key == "audio_bw_hz") cfg.audio_bw_hz = parse_number(key, value);
        else if (key == "echo_amplitude") cfg.echo_amplitude = parse_number(key, value);
        else if (key == "eps_rel") d.eps_rel = parse_number(key, value);
        else if (key == "passband_hz") d.passband_hz = parse_number(key, value);
        else if (key == "max_delay_s") d.max_delay_s = parse_number(key, value);
        else if (key == "refine") d.refine = parse_bool(key, value);
        else if (key == "profile_mode") {
            if (value == "real") d.profile_mode = ProfileMode::RealPart;
            else if (value == "magnitude") d.profile_mode = ProfileMode::Magnitude;
            else throw ParameterError("config key 'profile_mode': expected real or magnitude, got '" + value + "'");
        }
        else if (key == "min_sep_bins") d.min_sep_bins = parse_size(key, value);
        else if (key == "ifft_bandlimited_refine") d.ifft_bandlimited_refine = parse_bool(key, value);
        else if (key == "music_snapshot_len") d.music_snapshot_len = parse_size(key, value);
        else if (key == "music_subvector_len") d.music_subvector_len = parse_size(key, value);
        else if (key == "music_forward_backward") d.music_forward_backward = parse_bool(key, value);
        else if (key == "music_grid") d.music_grid = parse_size(key, value);
        else throw ParameterError("config: unknown key '" + key + "'");
    }
    return cfg;
}

PreparedScene prepare_scene(const ScenarioConfig& cfg) {
    stage("config", [&] { cfg.validate(); });
    const EmitterSpec spec = cfg.emitter();

    const SampledSignal direct = stage("synthesize", [&] {
        std::vector<MessageSignal> messages;
        for (int k = 0; k < cfg.channel_count; ++k)
            messages.push_back(synthesize_message(derive_seed(cfg.seed, static_cast<std::uint64_t>(k)), cfg.n_samples,
                                                  cfg.audio_bw_hz, cfg.sample_rate_hz));
        return compose_multichannel(messages, spec);
    });

    PreparedScene out;
    TargetScene scene;
    scene.noise_std = noise_std_for_snr(cfg.echo_amplitude, cfg.snr_db);
    const double second = cfg.base_delay_s + range_to_delay(cfg.separation_m);
    if (cfg.target_count == 1) {
        scene.echoes.push_back({cfg.base_delay_s, cfg.echo_amplitude});
        out.true_delays_s = {cfg.base_delay_s};
    } else if (second > cfg.base_delay_s) {
        scene.echoes.push_back({cfg.base_delay_s, cfg.echo_amplitude});
        scene.echoes.push_back({second, cfg.echo_amplitude});
        out.true_delays_s = {cfg.base_delay_s, second};
    } else {
        // Coincident targets are one echo of twice the amplitude.
        scene.echoes.push_back({cfg.base_delay_s, 2.0 * cfg.echo_amplitude});
        out.true_delays_s = {cfg.base_delay_s, cfg.base_delay_s};
    }

    const RenderedScene rendered =
        stage("render", [&] { return render_scene(direct, scene, derive_seed(cfg.seed, kNoiseStream)); });

    out.quotient = stage("frontend", [&] {
        const double shift = bin_aligned_shift(cfg.carrier_offset_hz, cfg.n_samples, cfg.sample_rate_hz);
        const SampledSignal ref = ddc(rendered.direct, shift);
        const SampledSignal surv = ddc(rendered.surveillance, shift);
        const SpectrumQuotient q = quotient(spectrum(surv), spectrum(ref), cfg.detector.eps_rel);
        const double half = 0.5 * cfg.passband_hz();
        return bandpass(q, -half, std::min(half, 0.5 * cfg.sample_rate_hz));
    });
    return out;
}

DetectorOutput detect_full(const SpectrumQuotient& q, Method method, std::size_t n_targets,
                           const DetectorParams& params) {
    require(n_targets >= 1, "detect: need at least one target");
    if (method == Method::Ifft) return stage("ifft_detector", [&] { return detect_ifft(q, n_targets, params); });
    return stage("music_detector", [&] { return detect_music(q, n_targets, params); });
}

DetectionResult detect(const SpectrumQuotient& q, Method method, std::size_t n_targets, const DetectorParams& params) {
    return detect_full(q, method, n_targets, params).result;
}

DetectionResult run_scenario(const ScenarioConfig& cfg) { return run_scenario_full(cfg).detection.result; }

ScenarioOutput run_scenario_full(const ScenarioConfig& cfg) {
    ScenarioOutput out;
    out.scene = prepare_scene(cfg);
    const PreparedScene& scene = out.scene;
    out.detection =
        detect_full(scene.quotient, cfg.method, static_cast<std::size_t>(cfg.target_count), cfg.detector);
    DetectionResult& r = out.detection.result;
    for (const auto& [k, v] : to_key_values(cfg)) r.metadata["config." + k] = v;
    r.metadata["passband_lo_hz"] = io::format_number(scene.quotient.passband_lo_hz);
    r.metadata["passband_hi_hz"] = io::format_number(scene.quotient.passband_hi_hz);
    r.metadata["passband_shape"] = "rectangular";
    r.metadata["ddc_shift_hz"] = io::format_number(scene.quotient.center_hz);
    r.metadata["omega_sign_convention"] = "omega = -2*pi*bin_spacing*delay";
    for (std::size_t i = 0; i < scene.true_delays_s.size(); ++i)
        r.metadata["true_delay_" + std::to_string(i) + "_s"] = io::format_number(scene.true_delays_s[i]);
    return out;
}

bool resolvability(const DetectionResult& result, const RVec& true_delays, double tol_frac) {
    if (true_delays.size() != 2 || result.delays_s.size() < 2) return false;
    RVec truth = true_delays;
    std::sort(truth.begin(), truth.end());
    const double separation = truth[1] - truth[0];
    if (!(separation > 0.0)) return false;

    // The two strongest peaks, in delay order.
    std::vector<std::size_t> order(result.delays_s.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    if (result.peak_values.size() == result.delays_s.size()) {
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return result.peak_values[a] > result.peak_values[b]; });
    }
    std::size_t first = std::min(order[0], order[1]);
    std::size_t second = std::max(order[0], order[1]);
    const double d0 = result.delays_s[first];
    const double d1 = result.delays_s[second];
    if (std::abs(d0 - truth[0]) >= tol_frac * separation || std::abs(d1 - truth[1]) >= tol_frac * separation)
        return false;

    // Valley check on the underlying trace.
    const auto& tr = result.trace;
    if (tr.delay_s.empty() || tr.delay_s.size() != tr.value.size()) return false;
    auto value_near = [&](double t) {
        const auto it = std::lower_bound(tr.delay_s.begin(), tr.delay_s.end(), t);
        std::size_t i = static_cast<std::size_t>(it - tr.delay_s.begin());
        if (i == tr.delay_s.size()) i = tr.delay_s.size() - 1;
        if (i > 0 && std::abs(tr.delay_s[i - 1] - t) < std::abs(tr.delay_s[i] - t)) --i;
        // Peak value is the local maximum around the nearest sample.
        double v = tr.value[i];
        if (i > 0) v = std::max(v, tr.value[i - 1]);
        if (i + 1 < tr.value.size()) v = std::max(v, tr.value[i + 1]);
        return v;
    };
    const double smaller_peak = std::min(value_near(d0), value_near(d1));
    if (!(smaller_peak > 0.0)) return false;

    bool any_between = false;
    double valley = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < tr.delay_s.size(); ++i) {
        if (tr.delay_s[i] > d0 && tr.delay_s[i] < d1) {
            any_between = true;
            valley = std::min(valley, tr.value[i]);
        }
    }
    if (!any_between) return false;
    const double ratio = tr.power_scale ? std::pow(10.0, -3.0 / 10.0) : std::pow(10.0, -3.0 / 20.0);
    return valley <= ratio * smaller_peak;
}

std::vector<double> default_separations_m() { return {3000.0, 2000.0, 1000.0, 500.0, 300.0, 150.0}; }

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, unsigned threads) {
    if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> workers;
        for (unsigned t = 0; t < threads; ++t) {
            workers.emplace_back([&] {
                for (std::size_t i = next++; i < n && !failed; i = next++) {
                    try {
                        fn(i);
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                        failed = true;
                    }
                }
            });
        }
    }
    if (failure) std::rethrow_exception(failure);
}

SweepResult resolution_sweep(const std::vector<int>& channels, const std::vector<Method>& methods,
                             std::vector<double> separations_m, std::size_t trials, std::uint64_t base_seed,
                             const ScenarioConfig& base) {
    require(!channels.empty() && !methods.empty() && !separations_m.empty(), "resolution_sweep: empty parameter list");
    require(trials >= 1, "resolution_sweep: trials must be >= 1");
    std::sort(separations_m.begin(), separations_m.end(), std::greater<>());

    SweepResult out;
    for (int ch : channels) {
        const std::size_t jobs = separations_m.size() * trials;
        // resolved[job * methods + m]
        std::vector<char> resolved(jobs * methods.size(), 0);
        parallel_for(jobs, [&](std::size_t job) {
            ScenarioConfig cfg = base;
            cfg.channel_count = ch;
            cfg.target_count = 2;
            cfg.separation_m = separations_m[job / trials];
            cfg.seed = base_seed + job % trials;
            const PreparedScene scene = prepare_scene(cfg);
            for (std::size_t m = 0; m < methods.size(); ++m) {
                const DetectionResult r = detect(scene.quotient, methods[m], 2, cfg.detector);
                resolved[job * methods.size() + m] = resolvability(r, scene.true_delays_s) ? 1 : 0;
            }
        });

        for (std::size_t m = 0; m < methods.size(); ++m) {
            ResolutionRow row;
            row.channel_count = ch;
            row.method = methods[m];
            row.trials = trials;
            row.min_resolved_separation_m = std::numeric_limits<double>::quiet_NaN();
            bool walking = true;
            for (std::size_t s = 0; s < separations_m.size(); ++s) {
                std::size_t hits = 0;
                for (std::size_t t = 0; t < trials; ++t) hits += resolved[(s * trials + t) * methods.size() + m];
                const double rate = static_cast<double>(hits) / static_cast<double>(trials);
                out.points.push_back({ch, methods[m], separations_m[s], rate});
                if (walking && rate >= kResolveThreshold) {
                    row.min_resolved_separation_m = separations_m[s];
                    row.resolve_rate = rate;
                } else {
                    walking = false;
                }
            }
            out.rows.push_back(row);
        }
    }
    return out;
}

std::vector<ErrorCurvePoint> monte_carlo_error(const std::vector<int>& channels, const std::vector<Method>& methods,
                                               std::size_t iterations, std::uint64_t base_seed,
                                               const ScenarioConfig& base, const ErrorCurveSettings& settings) {
    require(iterations >= 1, "monte_carlo_error: iterations must be >= 1");
    require(!channels.empty() && !methods.empty(), "monte_carlo_error: empty parameter list");
    require(settings.delay_lo_s > 0.0 && settings.delay_hi_s >= settings.delay_lo_s,
            "monte_carlo_error: delay range must satisfy 0 < lo <= hi");

    std::vector<ErrorCurvePoint> out;
    for (int ch : channels) {
        // errors[i * methods + m], NaN marks a failed detection.
        std::vector<double> errors(iterations * methods.size(), 0.0);
        parallel_for(iterations, [&](std::size_t i) {
            ScenarioConfig cfg = base;
            cfg.channel_count = ch;
            cfg.target_count = 1;
            cfg.seed = base_seed + i;
            std::mt19937_64 rng(derive_seed(cfg.seed, kDelayStream));
            std::uniform_real_distribution<double> pick(settings.delay_lo_s, settings.delay_hi_s);
            cfg.base_delay_s = pick(rng);
            const PreparedScene scene = prepare_scene(cfg);
            const double truth = scene.true_delays_s.front();
            for (std::size_t m = 0; m < methods.size(); ++m) {
                const DetectionResult r = detect(scene.quotient, methods[m], 1, cfg.detector);
                double err = std::numeric_limits<double>::quiet_NaN();
                if (!r.delays_s.empty() && std::abs(r.delays_s.front() - truth) <= settings.gross_error_s)
                    err = 100.0 * std::abs(r.delays_s.front() - truth) / truth;
                errors[i * methods.size() + m] = err;
            }
        });

        for (std::size_t m = 0; m < methods.size(); ++m) {
            ErrorCurvePoint pt;
            pt.channel_count = ch;
            pt.method = methods[m];
            pt.iterations = iterations;
            double sum = 0.0;
            std::size_t used = 0;
            for (std::size_t i = 0; i < iterations; ++i) {
                const double e = errors[i * methods.size() + m];
                if (std::isnan(e)) {
                    ++pt.excluded;
                } else {
                    sum += e;
                    ++used;
                }
            }
            pt.mean_rel_error_pct = used > 0 ? sum / static_cast<double>(used) : std::numeric_limits<double>::quiet_NaN();
            out.push_back(pt);
        }
    }
    return out;
}

}  // namespace pbr
