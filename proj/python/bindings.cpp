// Python bindings for the pbr core. Signals cross the boundary as numpy
// arrays; configs as dicts of strings or numbers.

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <filesystem>
#include <optional>
#include <sstream>

#include "pbr/cli_io.hpp"

namespace py = pybind11;
using namespace pbr;

namespace {

using CArray = py::array_t<cplx, py::array::c_style | py::array::forcecast>;
using RArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

template <typename T>
py::array_t<T> to_numpy(const std::vector<T>& v) {
    return py::array_t<T>(static_cast<py::ssize_t>(v.size()), v.data());
}

template <typename T>
std::vector<T> from_numpy(const py::array_t<T, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 1) throw ParameterError("expected a 1-D array");
    return std::vector<T>(a.data(), a.data() + a.size());
}

py::array_t<bool> mask_to_numpy(const std::vector<bool>& m) {
    py::array_t<bool> out(static_cast<py::ssize_t>(m.size()));
    auto w = out.mutable_unchecked<1>();
    for (std::size_t i = 0; i < m.size(); ++i) w(static_cast<py::ssize_t>(i)) = m[i];
    return out;
}

// Accepts numbers, bools and strings; everything goes through the same
// parser as the config files.
std::map<std::string, std::string> to_kv(const py::dict& d) {
    std::map<std::string, std::string> kv;
    for (const auto& [k, v] : d) {
        std::string text;
        if (py::isinstance<py::bool_>(v)) text = v.cast<bool>() ? "true" : "false";
        else if (py::isinstance<py::str>(v)) text = v.cast<std::string>();
        else text = py::str(v).cast<std::string>();  // str() keeps numpy scalars plain
        kv[py::str(k).cast<std::string>()] = text;
    }
    return kv;
}

ScenarioConfig config_from(const py::object& o) {
    if (o.is_none()) return {};
    if (py::isinstance<ScenarioConfig>(o)) return o.cast<ScenarioConfig>();
    return from_key_values(to_kv(o.cast<py::dict>()));
}

SampledSignal make_signal(const CArray& x, double fs, double center_hz) {
    SampledSignal s;
    s.samples = from_numpy<cplx>(x);
    s.sample_rate_hz = fs;
    s.center_hz = center_hz;
    s.validate();
    return s;
}

py::dict result_dict(const DetectionResult& r) {
    py::dict d;
    d["method"] = to_string(r.method);
    d["delays_s"] = to_numpy(r.delays_s);
    d["ranges_m"] = to_numpy(r.ranges_m);
    d["peak_values"] = to_numpy(r.peak_values);
    d["shortfall"] = r.shortfall;
    d["metadata"] = r.metadata;
    d["trace_delay_s"] = to_numpy(r.trace.delay_s);
    d["trace_value"] = to_numpy(r.trace.value);
    d["trace_power_scale"] = r.trace.power_scale;
    return d;
}

DetectionResult result_from(const py::dict& d) {
    DetectionResult r;
    r.method = method_from_string(d["method"].cast<std::string>());
    r.delays_s = from_numpy<double>(d["delays_s"].cast<RArray>());
    r.ranges_m.resize(r.delays_s.size());
    for (std::size_t i = 0; i < r.delays_s.size(); ++i) r.ranges_m[i] = delay_to_range(r.delays_s[i]);
    if (d.contains("peak_values")) r.peak_values = from_numpy<double>(d["peak_values"].cast<RArray>());
    if (d.contains("trace_delay_s")) r.trace.delay_s = from_numpy<double>(d["trace_delay_s"].cast<RArray>());
    if (d.contains("trace_value")) r.trace.value = from_numpy<double>(d["trace_value"].cast<RArray>());
    if (d.contains("trace_power_scale")) r.trace.power_scale = d["trace_power_scale"].cast<bool>();
    return r;
}

py::dict manifest_dict(const RunManifest& m) {
    py::dict d;
    d["config"] = m.config_snapshot;
    d["artifact_version"] = m.artifact_version;
    d["output_paths"] = m.output_paths;
    d["notes"] = m.notes;
    d["wall_time_s"] = m.wall_time_s;
    return d;
}

// Runs f with the GIL released; f must not touch Python objects.
template <typename F>
auto nogil(F&& f) {
    py::gil_scoped_release release;
    return f();
}

std::vector<Method> methods_from(const std::vector<std::string>& names) {
    std::vector<Method> out;
    for (const auto& n : names) out.push_back(method_from_string(n));
    return out;
}

}  // namespace

PYBIND11_MODULE(_pbr, m) {
    m.doc() = "Passive FM radar: IFFT and MUSIC range detectors";
    m.attr("__version__") = artifact_version();

    py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);
    py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
    py::register_exception<EmptyResultError>(m, "EmptyResultError", PyExc_RuntimeError);

    m.def("delay_to_range", &delay_to_range, py::arg("delay_s"));
    m.def("range_to_delay", &range_to_delay, py::arg("range_m"));

    // Configuration.
    py::class_<ScenarioConfig>(m, "ScenarioConfig")
        .def(py::init([](const py::kwargs& kw) { return from_key_values(to_kv(kw)); }))
        .def_static("from_dict", [](const py::dict& d) { return from_key_values(to_kv(d)); })
        .def("to_dict", [](const ScenarioConfig& c) { return to_key_values(c); })
        .def("validate", &ScenarioConfig::validate)
        .def_readwrite("channel_count", &ScenarioConfig::channel_count)
        .def_readwrite("separation_m", &ScenarioConfig::separation_m)
        .def_readwrite("base_delay_s", &ScenarioConfig::base_delay_s)
        .def_readwrite("target_count", &ScenarioConfig::target_count)
        .def_readwrite("snr_db", &ScenarioConfig::snr_db)
        .def_readwrite("n_samples", &ScenarioConfig::n_samples)
        .def_readwrite("seed", &ScenarioConfig::seed)
        .def_property(
            "method", [](const ScenarioConfig& c) { return to_string(c.method); },
            [](ScenarioConfig& c, const std::string& s) { c.method = method_from_string(s); })
        .def_readwrite("sample_rate_hz", &ScenarioConfig::sample_rate_hz)
        .def("__repr__", [](const ScenarioConfig& c) {
            std::ostringstream os;
            os << "ScenarioConfig(";
            bool first = true;
            for (const auto& [k, v] : to_key_values(c)) {
                os << (first ? "" : ", ") << k << "=" << v;
                first = false;
            }
            return os.str() + ")";
        });

    // Signal model.
    m.def(
        "synthesize_message",
        [](std::uint64_t seed, std::size_t n, double audio_bw_hz, double fs) {
            return to_numpy(synthesize_message(seed, n, audio_bw_hz, fs).samples);
        },
        py::arg("seed"), py::arg("n_samples"), py::arg("audio_bw_hz") = constants::kAudioBandwidthHz,
        py::arg("sample_rate_hz") = constants::kSampleRateHz, "Band-limited programme material with peak 1.");

    m.def(
        "fm_modulate",
        [](const RArray& message, double fs, double carrier_hz, double deviation_hz) {
            MessageSignal msg;
            msg.samples = from_numpy<double>(message);
            msg.sample_rate_hz = fs;
            EmitterSpec spec;
            spec.carrier_offset_hz = carrier_hz;
            spec.freq_deviation_hz = deviation_hz;
            return to_numpy(fm_modulate(msg, spec, msg.samples.size()).samples);
        },
        py::arg("message"), py::arg("sample_rate_hz") = constants::kSampleRateHz,
        py::arg("carrier_hz") = constants::kCarrierOffsetHz, py::arg("deviation_hz") = constants::kFreqDeviationHz);

    m.def(
        "compose_multichannel",
        [](std::size_t n, int channel_count, std::uint64_t seed, double fs, double carrier_hz) {
            EmitterSpec spec;
            spec.channel_count = channel_count;
            spec.carrier_offset_hz = carrier_hz;
            std::vector<MessageSignal> msgs;
            for (int k = 0; k < channel_count; ++k)
                msgs.push_back(synthesize_message(seed + static_cast<std::uint64_t>(k), n,
                                                  constants::kAudioBandwidthHz, fs));
            return to_numpy(compose_multichannel(msgs, spec).samples);
        },
        py::arg("n_samples"), py::arg("channel_count"), py::arg("seed") = 1,
        py::arg("sample_rate_hz") = constants::kSampleRateHz, py::arg("carrier_hz") = constants::kCarrierOffsetHz,
        "Sum of channel_count FM carriers; channel k is modulated by message seed + k.");

    m.def(
        "render_scene",
        [](const CArray& emitted, const std::vector<std::pair<double, double>>& echoes, double noise_std,
           std::uint64_t seed, double fs) {
            TargetScene scene;
            for (const auto& [delay, amp] : echoes) scene.echoes.push_back({delay, amp});
            scene.noise_std = noise_std;
            const auto r = render_scene(make_signal(emitted, fs, 0.0), scene, seed);
            return py::make_tuple(to_numpy(r.direct.samples), to_numpy(r.surveillance.samples));
        },
        py::arg("emitted"), py::arg("echoes"), py::arg("noise_std") = 0.0, py::arg("seed") = 1,
        py::arg("sample_rate_hz") = constants::kSampleRateHz,
        "Returns (direct, surveillance); echoes are (delay_s, amplitude) pairs.");

    // Frontend.
    py::class_<SpectrumQuotient>(m, "SpectrumQuotient")
        .def_property_readonly("bins", [](const SpectrumQuotient& q) { return to_numpy(q.bins); })
        .def_property_readonly("valid_mask", [](const SpectrumQuotient& q) { return mask_to_numpy(q.valid_mask); })
        .def_readonly("bin_spacing_hz", &SpectrumQuotient::bin_spacing_hz)
        .def_readonly("center_hz", &SpectrumQuotient::center_hz)
        .def_readonly("passband_lo_hz", &SpectrumQuotient::passband_lo_hz)
        .def_readonly("passband_hi_hz", &SpectrumQuotient::passband_hi_hz)
        .def_property_readonly("sample_rate_hz", &SpectrumQuotient::sample_rate_hz)
        .def("valid_count", &SpectrumQuotient::valid_count)
        .def("__len__", &SpectrumQuotient::size);

    m.def("bin_aligned_shift", &bin_aligned_shift, py::arg("f_hz"), py::arg("n"), py::arg("sample_rate_hz"));

    m.def(
        "quotient",
        [](const CArray& surveillance, const CArray& reference, double fs, double shift_hz, double eps_rel) {
            const auto s = spectrum(ddc(make_signal(surveillance, fs, 0.0), shift_hz));
            const auto r = spectrum(ddc(make_signal(reference, fs, 0.0), shift_hz));
            return quotient(s, r, eps_rel);
        },
        py::arg("surveillance"), py::arg("reference"), py::arg("sample_rate_hz") = constants::kSampleRateHz,
        py::arg("shift_hz") = 0.0, py::arg("eps_rel") = constants::kDefaultEpsRel,
        "Down-converts both records by shift_hz and divides their spectra.");

    m.def("bandpass", &bandpass, py::arg("q"), py::arg("lo_hz"), py::arg("hi_hz"));

    m.def(
        "prepare_scene",
        [](const py::object& cfg) {
            const auto scene = prepare_scene(config_from(cfg));
            return py::make_tuple(scene.quotient, to_numpy(scene.true_delays_s));
        },
        py::arg("config") = py::none(), "Returns (band-passed quotient, true delays).");

    // Detectors.
    m.def(
        "ifft_profile",
        [](const SpectrumQuotient& q, bool magnitude) {
            const auto p = ifft_profile(q, magnitude ? ProfileMode::Magnitude : ProfileMode::RealPart);
            return py::make_tuple(to_numpy(p.values), p.lag_step_s);
        },
        py::arg("q"), py::arg("magnitude") = false, "Returns (values, lag_step_s).");

    m.def(
        "detect",
        [](const SpectrumQuotient& q, const std::string& method, std::size_t n_targets, const py::object& cfg) {
            const ScenarioConfig c = config_from(cfg);
            return result_dict(nogil([&] { return detect(q, method_from_string(method), n_targets, c.detector); }));
        },
        py::arg("q"), py::arg("method"), py::arg("n_targets") = 2, py::arg("config") = py::none(),
        "Runs one detector; detector settings come from the config.");

    m.def(
        "two_tone_snapshot",
        [](const std::vector<double>& omegas, const std::vector<cplx>& amplitudes, double noise_var, std::size_t n,
           std::uint64_t seed) {
            if (omegas.size() != 2 || amplitudes.size() != 2) throw ParameterError("two tones expected");
            SyntheticTwoToneModel model;
            model.omegas = {omegas[0], omegas[1]};
            model.amplitudes = {amplitudes[0], amplitudes[1]};
            model.noise_var = noise_var;
            model.n = n;
            return to_numpy(model.sample(seed).x);
        },
        py::arg("omegas"), py::arg("amplitudes") = std::vector<cplx>{1.0, 1.0}, py::arg("noise_var") = 0.0,
        py::arg("n") = 256, py::arg("seed") = 1);

    m.def(
        "exact_two_tone_covariance",
        [](const std::vector<double>& omegas, const std::vector<cplx>& amplitudes, double noise_var,
           std::size_t subvector_len) {
            if (omegas.size() != 2 || amplitudes.size() != 2) throw ParameterError("two tones expected");
            SyntheticTwoToneModel model;
            model.omegas = {omegas[0], omegas[1]};
            model.amplitudes = {amplitudes[0], amplitudes[1]};
            model.noise_var = noise_var;
            return model.exact_covariance(subvector_len).r;
        },
        py::arg("omegas"), py::arg("amplitudes") = std::vector<cplx>{1.0, 1.0}, py::arg("noise_var") = 0.0,
        py::arg("subvector_len") = 16);

    m.def(
        "estimate_covariance",
        [](const CArray& x, std::size_t subvector_len, bool forward_backward) {
            MusicInput in;
            in.x = from_numpy<cplx>(x);
            in.bin_spacing_hz = 1.0;
            return estimate_covariance(in, subvector_len, forward_backward).r;
        },
        py::arg("x"), py::arg("subvector_len"), py::arg("forward_backward") = true);

    m.def(
        "eig_subspace",
        [](const Eigen::MatrixXcd& r, std::size_t p) {
            CovarianceEstimate cov;
            cov.r = r;
            cov.subvector_len = static_cast<std::size_t>(r.rows());
            const auto dec = eig_subspace(cov, p);
            return py::make_tuple(to_numpy(dec.eigenvalues), dec.eigenvectors, dec.noise_floor);
        },
        py::arg("r"), py::arg("p"), "Returns (eigenvalues descending, eigenvectors, noise floor).");

    m.def(
        "pseudospectrum",
        [](const Eigen::MatrixXcd& r, std::size_t p, std::size_t grid_size, double omega_lo, double omega_hi) {
            CovarianceEstimate cov;
            cov.r = r;
            cov.subvector_len = static_cast<std::size_t>(r.rows());
            const auto ps = pseudospectrum(eig_subspace(cov, p), grid_size, omega_lo, omega_hi);
            return py::make_tuple(to_numpy(ps.omegas), to_numpy(ps.values));
        },
        py::arg("r"), py::arg("p"), py::arg("grid_size") = 4096, py::arg("omega_lo") = -constants::kPi,
        py::arg("omega_hi") = constants::kPi, "Returns (omegas, values) of the MUSIC pseudospectrum of R.");

    // Experiments.
    m.def(
        "run_scenario",
        [](const py::object& cfg) {
            const ScenarioConfig c = config_from(cfg);
            return result_dict(nogil([&] { return run_scenario(c); }));
        },
        py::arg("config") = py::none(), "End-to-end chain for one scene.");

    m.def(
        "resolvability",
        [](const py::dict& result, const std::vector<double>& true_delays, double tol_frac) {
            return resolvability(result_from(result), true_delays, tol_frac);
        },
        py::arg("result"), py::arg("true_delays"), py::arg("tol_frac") = 0.5);

    m.def(
        "resolution_sweep",
        [](const std::vector<int>& channels, const std::vector<std::string>& methods,
           std::optional<std::vector<double>> separations, std::size_t trials, std::uint64_t base_seed,
           const py::object& cfg) {
            const ScenarioConfig c = config_from(cfg);
            const auto s = nogil([&] { return resolution_sweep(channels, methods_from(methods), separations.value_or(default_separations_m()),
                                     trials, base_seed, c); });
            py::list rows, points;
            for (const auto& r : s.rows) {
                py::dict d;
                d["channel_count"] = r.channel_count;
                d["method"] = to_string(r.method);
                d["min_resolved_separation_m"] = r.min_resolved_separation_m;
                d["trials"] = r.trials;
                d["resolve_rate"] = r.resolve_rate;
                rows.append(d);
            }
            for (const auto& p : s.points) {
                py::dict d;
                d["channel_count"] = p.channel_count;
                d["method"] = to_string(p.method);
                d["separation_m"] = p.separation_m;
                d["resolve_rate"] = p.resolve_rate;
                points.append(d);
            }
            return py::make_tuple(rows, points);
        },
        py::arg("channels") = std::vector<int>{1, 3, 7},
        py::arg("methods") = std::vector<std::string>{"IFFT", "MUSIC"}, py::arg("separations_m") = py::none(),
        py::arg("trials") = 25, py::arg("base_seed") = 1, py::arg("config") = py::none(),
        "Returns (rows, points) as lists of dicts.");

    m.def(
        "monte_carlo_error",
        [](const std::vector<int>& channels, const std::vector<std::string>& methods, std::size_t iterations,
           std::uint64_t base_seed, const py::object& cfg) {
            const ScenarioConfig c = config_from(cfg);
            const auto pts = nogil([&] { return monte_carlo_error(channels, methods_from(methods), iterations, base_seed, c); });
            py::list out;
            for (const auto& p : pts) {
                py::dict d;
                d["channel_count"] = p.channel_count;
                d["method"] = to_string(p.method);
                d["mean_rel_error_pct"] = p.mean_rel_error_pct;
                d["iterations"] = p.iterations;
                d["excluded"] = p.excluded;
                out.append(d);
            }
            return out;
        },
        py::arg("channels") = std::vector<int>{1, 3, 7},
        py::arg("methods") = std::vector<std::string>{"IFFT", "MUSIC"}, py::arg("iterations") = 100,
        py::arg("base_seed") = 1, py::arg("config") = py::none());

    // Commands; same files as the pbr tool.
    m.def(
        "cmd_simulate",
        [](const std::filesystem::path& config, const std::filesystem::path& out, std::optional<std::uint64_t> seed) {
            return manifest_dict(nogil([&] { return cmd_simulate(config, out, seed); }));
        },
        py::arg("config"), py::arg("out"), py::arg("seed") = py::none());

    m.def(
        "cmd_table1",
        [](const std::filesystem::path& out, const std::vector<int>& channels,
           std::optional<std::vector<double>> separations, std::size_t trials, std::uint64_t base_seed) {
            Table1Options o;
            o.channels = channels;
            if (separations) o.separations_m = *separations;
            o.trials = trials;
            o.base_seed = base_seed;
            return manifest_dict(nogil([&] { return cmd_table1(out, o); }));
        },
        py::arg("out"), py::arg("channels") = std::vector<int>{1, 3, 7}, py::arg("separations_m") = py::none(),
        py::arg("trials") = 25, py::arg("base_seed") = 1);

    m.def(
        "cmd_fig10",
        [](std::size_t iterations, const std::filesystem::path& out, const std::vector<int>& channels,
           std::uint64_t base_seed) {
            Fig10Options o;
            o.channels = channels;
            o.base_seed = base_seed;
            return manifest_dict(nogil([&] { return cmd_fig10(iterations, out, o); }));
        },
        py::arg("iterations"), py::arg("out"), py::arg("channels") = std::vector<int>{1, 3, 7},
        py::arg("base_seed") = 1);

    m.def(
        "cmd_sweep",
        [](const std::filesystem::path& out, const std::vector<int>& channels, const std::vector<std::string>& methods,
           std::optional<std::vector<double>> separations, std::size_t trials, std::uint64_t base_seed) {
            SweepOptions o;
            o.channels = channels;
            o.methods = methods_from(methods);
            if (separations) o.separations_m = *separations;
            o.trials = trials;
            o.base_seed = base_seed;
            return manifest_dict(nogil([&] { return cmd_sweep(out, o); }));
        },
        py::arg("out"), py::arg("channels") = std::vector<int>{1, 3, 7},
        py::arg("methods") = std::vector<std::string>{"IFFT", "MUSIC"}, py::arg("separations_m") = py::none(),
        py::arg("trials") = 25, py::arg("base_seed") = 1);
}
