#include "pbr/cli_io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>

#ifndef PBR_VERSION
#define PBR_VERSION "0.0.0"
#endif

namespace pbr {
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError(dir.string() + ": cannot create output directory");
}

template <typename T, typename Fmt>
std::string join(const std::vector<T>& items, Fmt fmt) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i > 0) out += ',';
        out += fmt(items[i]);
    }
    return out;
}

std::string join_ints(const std::vector<int>& v) {
    return join(v, [](int x) { return std::to_string(x); });
}

std::string join_numbers(const std::vector<double>& v) { return join(v, io::format_number); }

void add_output(RunManifest& m, const fs::path& out_dir, const std::string& name,
                const std::function<void(std::ostream&)>& fn) {
    const fs::path path = out_dir / name;
    io::write_file(path, fn);
    m.output_paths.push_back(path);
}

void write_config_snapshot(RunManifest& m, const fs::path& out_dir) {
    add_output(m, out_dir, "config_snapshot.cfg", [&](std::ostream& os) { io::write_key_values(os, m.config_snapshot); });
}

}  // namespace

std::string artifact_version() { return PBR_VERSION; }

std::vector<std::string> required_simulate_keys() { return {"channel_count", "method", "separation_m", "seed"}; }

ScenarioConfig load_scenario_config(const fs::path& path, bool seed_given) {
    const io::KeyValues kv = io::read_key_values(path);
    std::vector<std::string> missing;
    for (const auto& key : required_simulate_keys()) {
        if (key == "seed" && seed_given) continue;
        if (!kv.contains(key)) missing.push_back(key);
    }
    if (!missing.empty()) {
        std::string list;
        for (const auto& k : missing) list += (list.empty() ? "" : ",") + k;
        throw ParameterError(path.string() + ": missing required keys: " + list);
    }
    return from_key_values(kv);
}

void write_manifest(const fs::path& out_dir, RunManifest& manifest) {
    io::KeyValues kv;
    kv["artifact_version"] = manifest.artifact_version;
    for (const auto& [k, v] : manifest.config_snapshot) kv["config." + k] = v;
    const fs::path manifest_path = out_dir / "manifest.txt";
    std::vector<fs::path> listed = manifest.output_paths;
    listed.push_back(manifest_path);
    for (std::size_t i = 0; i < listed.size(); ++i) kv["output." + std::to_string(i)] = listed[i].filename().string();
    for (std::size_t i = 0; i < manifest.notes.size(); ++i) kv["note." + std::to_string(i)] = manifest.notes[i];
    io::write_file(manifest_path, [&](std::ostream& os) { io::write_key_values(os, kv); });
    manifest.output_paths = listed;
}

RunManifest cmd_simulate(const fs::path& config_path, const fs::path& out_dir, std::optional<std::uint64_t> seed) {
    const auto start = Clock::now();
    ScenarioConfig cfg = load_scenario_config(config_path, seed.has_value());
    if (seed) cfg.seed = *seed;
    ensure_dir(out_dir);

    const ScenarioOutput run = run_scenario_full(cfg);
    RunManifest m;
    m.artifact_version = artifact_version();
    m.config_snapshot = to_key_values(cfg);

    if (cfg.method == Method::Ifft) {
        add_output(m, out_dir, "profile.csv", [&](std::ostream& os) { io::write_profile_csv(os, run.detection.profile); });
    } else {
        add_output(m, out_dir, "pseudospectrum.csv", [&](std::ostream& os) {
            io::write_pseudospectrum_csv(os, run.detection.pseudospectrum, run.detection.music_bin_spacing_hz);
        });
    }
    add_output(m, out_dir, "detection.txt",
               [&](std::ostream& os) { io::write_detection_record(os, run.detection.result); });
    write_config_snapshot(m, out_dir);
    if (run.detection.result.shortfall > 0) m.notes.push_back("fewer peaks found than targets");
    write_manifest(out_dir, m);
    m.wall_time_s = seconds_since(start);
    return m;
}

std::vector<Table1Row> table1_rows(const std::vector<ResolutionRow>& rows) {
    std::vector<int> channels;
    for (const auto& r : rows)
        if (std::find(channels.begin(), channels.end(), r.channel_count) == channels.end())
            channels.push_back(r.channel_count);

    std::vector<Table1Row> out;
    for (int ch : channels) {
        Table1Row row;
        row.channel_count = ch;
        row.ifft_resolution_m = std::nan("");
        row.music_resolution_m = std::nan("");
        for (const auto& r : rows) {
            if (r.channel_count != ch) continue;
            (r.method == Method::Ifft ? row.ifft_resolution_m : row.music_resolution_m) = r.min_resolved_separation_m;
        }
        row.improvement_pct = 100.0 * row.ifft_resolution_m / row.music_resolution_m;
        out.push_back(row);
    }
    return out;
}

RunManifest cmd_table1(const fs::path& out_dir, const Table1Options& opts) {
    const auto start = Clock::now();
    ensure_dir(out_dir);
    const SweepResult sweep = resolution_sweep(opts.channels, {Method::Ifft, Method::Music}, opts.separations_m,
                                               opts.trials, opts.base_seed, opts.base);
    RunManifest m;
    m.artifact_version = artifact_version();
    m.config_snapshot = to_key_values(opts.base);
    m.config_snapshot["channels"] = join_ints(opts.channels);
    m.config_snapshot["separations_m"] = join_numbers(opts.separations_m);
    m.config_snapshot["trials"] = std::to_string(opts.trials);
    m.config_snapshot["base_seed"] = std::to_string(opts.base_seed);

    add_output(m, out_dir, "resolution.csv", [&](std::ostream& os) { io::write_resolution_csv(os, sweep.points); });
    add_output(m, out_dir, "table1.csv", [&](std::ostream& os) {
        os << "channel_count,ifft_resolution_m,music_resolution_m,improvement_pct\n";
        for (const auto& r : table1_rows(sweep.rows))
            os << r.channel_count << ',' << io::format_number(r.ifft_resolution_m) << ','
               << io::format_number(r.music_resolution_m) << ',' << io::format_number(r.improvement_pct) << '\n';
    });
    write_config_snapshot(m, out_dir);
    write_manifest(out_dir, m);
    m.wall_time_s = seconds_since(start);
    return m;
}

RunManifest cmd_fig10(std::size_t iterations, const fs::path& out_dir, const Fig10Options& opts) {
    const auto start = Clock::now();
    detail::require(iterations >= 1, "fig10: iterations must be >= 1");
    ensure_dir(out_dir);
    const auto curve = monte_carlo_error(opts.channels, {Method::Ifft, Method::Music}, iterations, opts.base_seed,
                                         opts.base, opts.settings);
    RunManifest m;
    m.artifact_version = artifact_version();
    m.config_snapshot = to_key_values(opts.base);
    m.config_snapshot["channels"] = join_ints(opts.channels);
    m.config_snapshot["iterations"] = std::to_string(iterations);
    m.config_snapshot["base_seed"] = std::to_string(opts.base_seed);
    m.config_snapshot["delay_lo_s"] = io::format_number(opts.settings.delay_lo_s);
    m.config_snapshot["delay_hi_s"] = io::format_number(opts.settings.delay_hi_s);
    m.config_snapshot["gross_error_s"] = io::format_number(opts.settings.gross_error_s);

    add_output(m, out_dir, "error_curve.csv", [&](std::ostream& os) { io::write_error_curve_csv(os, curve); });
    write_config_snapshot(m, out_dir);
    if (iterations < 10) m.notes.push_back("low confidence: fewer than 10 Monte Carlo iterations");
    write_manifest(out_dir, m);
    m.wall_time_s = seconds_since(start);
    return m;
}

RunManifest cmd_sweep(const fs::path& out_dir, const SweepOptions& opts) {
    const auto start = Clock::now();
    ensure_dir(out_dir);
    const SweepResult sweep =
        resolution_sweep(opts.channels, opts.methods, opts.separations_m, opts.trials, opts.base_seed, opts.base);
    RunManifest m;
    m.artifact_version = artifact_version();
    m.config_snapshot = to_key_values(opts.base);
    m.config_snapshot["channels"] = join_ints(opts.channels);
    m.config_snapshot["methods"] = join(opts.methods, [](Method x) { return to_string(x); });
    m.config_snapshot["separations_m"] = join_numbers(opts.separations_m);
    m.config_snapshot["trials"] = std::to_string(opts.trials);
    m.config_snapshot["base_seed"] = std::to_string(opts.base_seed);

    add_output(m, out_dir, "resolution.csv", [&](std::ostream& os) { io::write_resolution_csv(os, sweep.points); });
    add_output(m, out_dir, "min_resolution.csv", [&](std::ostream& os) {
        os << "channel_count,method,min_resolved_separation_m,trials,resolve_rate\n";
        for (const auto& r : sweep.rows)
            os << r.channel_count << ',' << to_string(r.method) << ',' << io::format_number(r.min_resolved_separation_m)
               << ',' << r.trials << ',' << io::format_number(r.resolve_rate) << '\n';
    });
    write_config_snapshot(m, out_dir);
    write_manifest(out_dir, m);
    m.wall_time_s = seconds_since(start);
    return m;
}

}  // namespace pbr
