#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "pbr/cli_io.hpp"

using namespace pbr;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("pbr_unit_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream(p) << text;
}

std::vector<std::pair<double, double>> read_profile(const fs::path& p) {
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    std::vector<std::pair<double, double>> rows;
    while (std::getline(in, line)) {
        const auto comma = line.find(',');
        rows.emplace_back(std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1)));
    }
    return rows;
}

}  // namespace

TEST_SUITE("cmd_simulate") {
    TEST_CASE("one-channel 3 km IFFT config: profile with two maxima 20 bins apart") {
        const fs::path dir = scratch("sim");
        write_text(dir / "fig4.cfg", "channel_count = 1\nmethod = IFFT\nseparation_m = 3000\nseed = 1\n");
        const auto m = cmd_simulate(dir / "fig4.cfg", dir / "out");
        for (const auto& p : m.output_paths) CHECK(fs::exists(p));
        const auto rows = read_profile(dir / "out" / "profile.csv");
        double top = 0.0;
        for (const auto& r : rows) top = std::max(top, r.second);
        std::vector<std::size_t> maxima;
        for (std::size_t i = 1; i + 1 < rows.size(); ++i)
            if (rows[i].second > rows[i - 1].second && rows[i].second >= rows[i + 1].second && rows[i].second > 0.5 * top)
                maxima.push_back(i);
        REQUIRE(maxima.size() == 2);
        CHECK(maxima[1] - maxima[0] == 20);
        const std::string record = slurp(dir / "out" / "detection.txt");
        CHECK(record.find("peak_count = 2") != std::string::npos);
        CHECK(slurp(dir / "out" / "manifest.txt").find("output.0 = profile.csv") != std::string::npos);
    }

    TEST_CASE("MUSIC writes a pseudospectrum") {
        const fs::path dir = scratch("sim_music");
        write_text(dir / "a.cfg", "channel_count = 3\nmethod = MUSIC\nseparation_m = 1000\nseed = 2\nn_samples = 16384\n");
        cmd_simulate(dir / "a.cfg", dir / "out");
        CHECK(slurp(dir / "out" / "pseudospectrum.csv").rfind("omega_rad,delay_s,p_music\n", 0) == 0);
    }

    TEST_CASE("empty config lists every required key") {
        const fs::path dir = scratch("sim_empty");
        write_text(dir / "empty.cfg", "");
        try {
            cmd_simulate(dir / "empty.cfg", dir / "out");
            FAIL("expected a parameter error");
        } catch (const ParameterError& e) {
            const std::string what = e.what();
            for (const auto& key : required_simulate_keys()) CHECK(what.find(key) != std::string::npos);
        }
        // A seed from the command line satisfies that key.
        write_text(dir / "noseed.cfg", "channel_count = 1\nmethod = IFFT\nseparation_m = 3000\n");
        CHECK_NOTHROW(cmd_simulate(dir / "noseed.cfg", dir / "out", 3));
    }

    TEST_CASE("rerun is byte-identical and the snapshot reproduces the run") {
        const fs::path dir = scratch("sim_rerun");
        write_text(dir / "a.cfg", "channel_count = 3\nmethod = IFFT\nseparation_m = 1000\nseed = 9\nn_samples = 16384\n");
        cmd_simulate(dir / "a.cfg", dir / "one");
        cmd_simulate(dir / "a.cfg", dir / "two");
        cmd_simulate(dir / "one" / "config_snapshot.cfg", dir / "three");
        for (const char* name : {"profile.csv", "detection.txt", "config_snapshot.cfg", "manifest.txt"}) {
            CHECK(slurp(dir / "one" / name) == slurp(dir / "two" / name));
            CHECK(slurp(dir / "one" / name) == slurp(dir / "three" / name));
        }
    }

    TEST_CASE("unwritable output directory") {
        const fs::path dir = scratch("sim_io");
        write_text(dir / "a.cfg", "channel_count = 1\nmethod = IFFT\nseparation_m = 3000\nseed = 1\n");
        write_text(dir / "blocker", "file, not a directory");
        CHECK_THROWS_AS(cmd_simulate(dir / "a.cfg", dir / "blocker" / "out"), IoError);
        CHECK_THROWS_AS(cmd_simulate(dir / "missing.cfg", dir / "out"), IoError);
    }
}

TEST_SUITE("cmd_table1") {
    TEST_CASE("improvement column") {
        const std::vector<ResolutionRow> rows{{1, Method::Ifft, 3000.0, 25, 1.0}, {1, Method::Music, 2000.0, 25, 1.0}};
        const auto t = table1_rows(rows);
        REQUIRE(t.size() == 1);
        CHECK(t[0].improvement_pct == doctest::Approx(150.0));
    }

    TEST_CASE("custom channel list gives a single row") {
        const fs::path dir = scratch("table1");
        Table1Options opts;
        opts.channels = {1};
        opts.separations_m = {3000.0, 1000.0};
        opts.trials = 2;
        opts.base.n_samples = 16384;
        const auto m = cmd_table1(dir, opts);
        const std::string table = slurp(dir / "table1.csv");
        CHECK(std::count(table.begin(), table.end(), '\n') == 2);
        CHECK(table.rfind("channel_count,ifft_resolution_m,music_resolution_m,improvement_pct\n1,", 0) == 0);
        CHECK(m.config_snapshot.at("channels") == "1");
        CHECK(m.config_snapshot.at("trials") == "2");
    }
}

TEST_SUITE("cmd_fig10") {
    TEST_CASE("one iteration runs and is flagged low-confidence") {
        const fs::path dir = scratch("fig10");
        Fig10Options opts;
        opts.base.n_samples = 16384;
        const auto m = cmd_fig10(1, dir, opts);
        REQUIRE(m.notes.size() == 1);
        CHECK(slurp(dir / "manifest.txt").find("note.0 = low confidence") != std::string::npos);
        const std::string curve = slurp(dir / "error_curve.csv");
        CHECK(std::count(curve.begin(), curve.end(), '\n') == 7);
        CHECK_THROWS_AS(cmd_fig10(0, dir, opts), ParameterError);
    }
}

TEST_SUITE("cmd_sweep") {
    TEST_CASE("writes both tables") {
        const fs::path dir = scratch("sweep");
        SweepOptions opts;
        opts.channels = {3};
        opts.methods = {Method::Music};
        opts.separations_m = {2000.0};
        opts.trials = 1;
        opts.base.n_samples = 16384;
        cmd_sweep(dir, opts);
        CHECK(slurp(dir / "resolution.csv") == "channel_count,method,separation_m,resolve_rate\n3,MUSIC,2000,1\n");
        CHECK(slurp(dir / "min_resolution.csv").find("3,MUSIC,2000,1,1\n") != std::string::npos);
    }
}
