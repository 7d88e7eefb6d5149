#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pbr/experiments.hpp"
#include "pbr/io.hpp"

namespace pbr {

std::string artifact_version();

/// What a command wrote. Everything on disk is deterministic; wall time is
/// only reported in memory.
struct RunManifest {
    io::KeyValues config_snapshot;
    std::string artifact_version;
    std::vector<std::filesystem::path> output_paths;
    std::vector<std::string> notes;
    double wall_time_s = 0.0;
};

/// Keys a `simulate` config must provide (seed may come from the command line).
std::vector<std::string> required_simulate_keys();

/// Loads a scenario config; lists every missing required key in one error.
ScenarioConfig load_scenario_config(const std::filesystem::path& path, bool seed_given = false);

RunManifest cmd_simulate(const std::filesystem::path& config_path, const std::filesystem::path& out_dir,
                         std::optional<std::uint64_t> seed = std::nullopt);

struct Table1Options {
    std::vector<int> channels{1, 3, 7};
    std::vector<double> separations_m = default_separations_m();
    std::size_t trials = 25;
    std::uint64_t base_seed = 1;
    ScenarioConfig base;
};

/// One row of the reproduced resolution table.
struct Table1Row {
    int channel_count = 0;
    double ifft_resolution_m = 0.0;
    double music_resolution_m = 0.0;
    /// 100 * IFFT / MUSIC; NaN when either side never resolved.
    double improvement_pct = 0.0;
};

std::vector<Table1Row> table1_rows(const std::vector<ResolutionRow>& rows);

RunManifest cmd_table1(const std::filesystem::path& out_dir, const Table1Options& opts = {});

struct Fig10Options {
    std::vector<int> channels{1, 3, 7};
    std::uint64_t base_seed = 1;
    ScenarioConfig base;
    ErrorCurveSettings settings;
};

RunManifest cmd_fig10(std::size_t iterations, const std::filesystem::path& out_dir, const Fig10Options& opts = {});

struct SweepOptions {
    std::vector<int> channels{1, 3, 7};
    std::vector<Method> methods{Method::Ifft, Method::Music};
    std::vector<double> separations_m = default_separations_m();
    std::size_t trials = 25;
    std::uint64_t base_seed = 1;
    ScenarioConfig base;
};

RunManifest cmd_sweep(const std::filesystem::path& out_dir, const SweepOptions& opts = {});

/// Writes manifest.txt (config snapshot, version, output list, notes) into out_dir.
void write_manifest(const std::filesystem::path& out_dir, RunManifest& manifest);

}  // namespace pbr
