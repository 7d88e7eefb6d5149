// pbr: passive FM radar resolution experiments from the command line.
//
//   pbr simulate --config scene.cfg --out run/
//   pbr table1   --out table/ [--channels 1,3,7] [--trials 25]
//   pbr fig10    --out fig10/ --iterations 100
//   pbr sweep    --out sweep/ [--config base.cfg]
//
// On failure a single line `error kind=<kind> message="<text>"` goes to
// stderr and the exit code is nonzero.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "pbr/cli_io.hpp"

namespace {

using pbr::io::KeyValues;

template <typename T, typename Parse>
std::vector<T> split_list(const std::string& key, const std::string& text, Parse parse) {
    std::vector<T> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.find_first_not_of(" \t") == std::string::npos) continue;
        out.push_back(parse(key, item));
    }
    if (out.empty()) throw pbr::ParameterError("'" + key + "': empty list");
    return out;
}

std::vector<int> parse_channels(const std::string& key, const std::string& text) {
    return split_list<int>(key, text, [](const std::string& k, const std::string& v) {
        return static_cast<int>(pbr::io::parse_int(k, v));
    });
}

std::vector<double> parse_numbers(const std::string& key, const std::string& text) {
    return split_list<double>(key, text, [](const std::string& k, const std::string& v) {
        return pbr::io::parse_number(k, v);
    });
}

std::vector<pbr::Method> parse_methods(const std::string& key, const std::string& text) {
    return split_list<pbr::Method>(key, text, [](const std::string&, const std::string& v) {
        const auto first = v.find_first_not_of(" \t");
        const auto last = v.find_last_not_of(" \t");
        return pbr::method_from_string(v.substr(first, last - first + 1));
    });
}

// Removes a run-level key from kv, returning its value if present.
std::optional<std::string> take(KeyValues& kv, const std::string& key) {
    const auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    std::string v = it->second;
    kv.erase(it);
    return v;
}

struct CommonArgs {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> iterations;
    std::optional<std::size_t> trials;
    std::string channels;
    std::string separations;
    std::string methods;
};

int report(const char* kind, const std::string& message) {
    std::string escaped;
    for (char c : message) {
        if (c == '"' || c == '\\') escaped += '\\';
        escaped += (c == '\n') ? ' ' : c;
    }
    std::fprintf(stderr, "error kind=%s message=\"%s\"\n", kind, escaped.c_str());
    return std::string_view(kind) == "parameter" ? 2 : std::string_view(kind) == "io" ? 3 : std::string_view(kind) == "numeric" ? 4 : 1;
}

void print_summary(const char* command, const pbr::RunManifest& m) {
    std::cout << command << ": wrote " << m.output_paths.size() << " files in " << m.wall_time_s << " s\n";
    for (const auto& p : m.output_paths) std::cout << "  " << p.string() << '\n';
    for (const auto& n : m.notes) std::cout << "  note: " << n << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Passive FM radar: IFFT vs MUSIC range resolution experiments"};
    app.require_subcommand(1);
    app.set_version_flag("--version", pbr::artifact_version());

    CommonArgs args;
    auto add_common = [&](CLI::App* sub, bool config_required) {
        auto* cfg = sub->add_option("--config", args.config, "key = value configuration file");
        if (config_required) cfg->required();
        sub->add_option("--out", args.out, "output directory")->required();
        sub->add_option("--seed", args.seed, "seed (base seed for batch commands)");
    };

    auto* simulate = app.add_subcommand("simulate", "run one scenario and write its profile/pseudospectrum");
    add_common(simulate, true);

    auto* table1 = app.add_subcommand("table1", "reproduce the resolution table (IFFT vs MUSIC)");
    add_common(table1, false);
    table1->add_option("--channels", args.channels, "comma-separated channel counts");
    table1->add_option("--trials", args.trials, "trials per separation");
    table1->add_option("--separations", args.separations, "comma-separated separations in metres");

    auto* fig10 = app.add_subcommand("fig10", "Monte Carlo delay error per channel count and method");
    add_common(fig10, false);
    fig10->add_option("--iterations", args.iterations, "Monte Carlo iterations");
    fig10->add_option("--channels", args.channels, "comma-separated channel counts");

    auto* sweep = app.add_subcommand("sweep", "resolve rate over a separation grid");
    add_common(sweep, false);
    sweep->add_option("--channels", args.channels, "comma-separated channel counts");
    sweep->add_option("--trials", args.trials, "trials per separation");
    sweep->add_option("--separations", args.separations, "comma-separated separations in metres");
    sweep->add_option("--methods", args.methods, "comma-separated methods (IFFT,MUSIC)");
    sweep->add_option("--iterations", args.iterations, "alias for --trials");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        return report("usage", e.what());
    }

    try {
        KeyValues kv;
        if (!args.config.empty()) kv = pbr::io::read_key_values(args.config);

        if (simulate->parsed()) {
            print_summary("simulate", pbr::cmd_simulate(args.config, args.out, args.seed));
            return 0;
        }

        // Batch commands: run-level keys come from the config, flags override.
        const auto channels = take(kv, "channels");
        const auto separations = take(kv, "separations_m");
        const auto trials = take(kv, "trials");
        const auto base_seed = take(kv, "base_seed");
        const auto iterations = take(kv, "iterations");
        const auto methods = take(kv, "methods");
        const auto delay_lo = take(kv, "delay_lo_s");
        const auto delay_hi = take(kv, "delay_hi_s");
        const auto gross = take(kv, "gross_error_s");
        const pbr::ScenarioConfig base = pbr::from_key_values(kv);

        std::vector<int> ch_list{1, 3, 7};
        if (!args.channels.empty()) ch_list = parse_channels("channels", args.channels);
        else if (channels) ch_list = parse_channels("channels", *channels);

        std::vector<double> sep_list = pbr::default_separations_m();
        if (!args.separations.empty()) sep_list = parse_numbers("separations_m", args.separations);
        else if (separations) sep_list = parse_numbers("separations_m", *separations);

        std::uint64_t seed = 1;
        if (args.seed) seed = *args.seed;
        else if (base_seed) seed = pbr::io::parse_size("base_seed", *base_seed);

        std::size_t n_trials = 25;
        if (args.trials) n_trials = *args.trials;
        else if (args.iterations && sweep->parsed()) n_trials = *args.iterations;
        else if (trials) n_trials = pbr::io::parse_size("trials", *trials);

        if (table1->parsed()) {
            pbr::Table1Options opts;
            opts.channels = ch_list;
            opts.separations_m = sep_list;
            opts.trials = n_trials;
            opts.base_seed = seed;
            opts.base = base;
            print_summary("table1", pbr::cmd_table1(args.out, opts));
        } else if (fig10->parsed()) {
            std::size_t n_iter = 100;
            if (args.iterations) n_iter = *args.iterations;
            else if (iterations) n_iter = pbr::io::parse_size("iterations", *iterations);
            pbr::Fig10Options opts;
            opts.channels = ch_list;
            opts.base_seed = seed;
            opts.base = base;
            if (delay_lo) opts.settings.delay_lo_s = pbr::io::parse_number("delay_lo_s", *delay_lo);
            if (delay_hi) opts.settings.delay_hi_s = pbr::io::parse_number("delay_hi_s", *delay_hi);
            if (gross) opts.settings.gross_error_s = pbr::io::parse_number("gross_error_s", *gross);
            print_summary("fig10", pbr::cmd_fig10(n_iter, args.out, opts));
        } else if (sweep->parsed()) {
            pbr::SweepOptions opts;
            opts.channels = ch_list;
            opts.separations_m = sep_list;
            opts.trials = n_trials;
            opts.base_seed = seed;
            opts.base = base;
            if (!args.methods.empty()) opts.methods = parse_methods("methods", args.methods);
            else if (methods) opts.methods = parse_methods("methods", *methods);
            print_summary("sweep", pbr::cmd_sweep(args.out, opts));
        }
        return 0;
    } catch (const pbr::ParameterError& e) {
        return report("parameter", e.what());
    } catch (const pbr::IoError& e) {
        return report("io", e.what());
    } catch (const pbr::NumericError& e) {
        return report("numeric", e.what());
    } catch (const std::exception& e) {
        return report("internal", e.what());
    }
}
