// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
//
//   pbr_acceptance [scratch_dir]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>
#include <set>
#include <string>

#include "oracles.hpp"
#include "pbr/cli_io.hpp"
#include "pbr/fft.hpp"

using namespace pbr;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

int failures = 0;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

void report(int id, const char* name, bool ok, const std::string& detail) {
    std::printf("criterion %d %-28s %s  %s\n", id, name, ok ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string fmt(double v) { return io::format_number(v); }

// Criteria 1-3 share one resolution-table run.
void table1(const fs::path& out) {
    const auto start = Clock::now();
    Table1Options opts;  // channels {1,3,7}, 25 trials, default grid and scenario
    cmd_table1(out, opts);
    const double elapsed = seconds_since(start);

    // Re-derive the rows from the emitted CSV so the file itself is checked.
    std::ifstream in(out / "table1.csv");
    std::string line;
    std::getline(in, line);
    std::vector<Table1Row> rows;
    while (std::getline(in, line)) {
        std::stringstream ss(line);
        std::string a, b, c;
        std::getline(ss, a, ',');
        std::getline(ss, b, ',');
        std::getline(ss, c, ',');
        rows.push_back({std::stoi(a), std::stod(b), std::stod(c), 0.0});
    }

    const std::vector<double> grid = default_separations_m();
    auto grid_pos = [&](double v) {
        const auto it = std::find(grid.begin(), grid.end(), v);
        return it == grid.end() ? -100L : static_cast<long>(it - grid.begin());
    };
    const double ref_ifft[] = {3000.0, 2000.0, 1000.0};
    const double ref_music[] = {2000.0, 1000.0, 300.0};

    bool match = rows.size() == 3 && elapsed < 300.0;
    bool ordering = rows.size() == 3;
    bool monotone = rows.size() == 3;
    std::string table;
    for (std::size_t i = 0; i < rows.size() && i < 3; ++i) {
        const auto& r = rows[i];
        table += std::to_string(r.channel_count) + "ch IFFT " + fmt(r.ifft_resolution_m) + " (reference " +
                 fmt(ref_ifft[i]) + ") MUSIC " + fmt(r.music_resolution_m) + " (reference " + fmt(ref_music[i]) + "); ";
        match = match && std::abs(grid_pos(r.ifft_resolution_m) - grid_pos(ref_ifft[i])) <= 1 &&
                std::abs(grid_pos(r.music_resolution_m) - grid_pos(ref_music[i])) <= 1;
        const double ratio = r.music_resolution_m / r.ifft_resolution_m;
        ordering = ordering && std::isfinite(ratio) && ratio <= 0.7;
        if (i > 0) {
            monotone = monotone && r.ifft_resolution_m <= rows[i - 1].ifft_resolution_m &&
                       r.music_resolution_m <= rows[i - 1].music_resolution_m;
        }
    }
    report(1, "table1-calibration", match,
           table + "tolerance one step of the separation grid; runtime " + fmt(std::round(elapsed)) + " s (< 300)");

    std::string ratios;
    for (const auto& r : rows) ratios += fmt(r.music_resolution_m / r.ifft_resolution_m) + " ";
    report(2, "method-ordering", ordering, "MUSIC/IFFT ratios " + ratios + "(each <= 0.7)");
    report(3, "monotonicity", monotone, "non-increasing in channel count for both methods");
}

void fig10(const fs::path& out) {
    const auto start = Clock::now();
    cmd_fig10(100, out);
    const double elapsed = seconds_since(start);
    std::ifstream in(out / "error_curve.csv");
    std::string line;
    std::getline(in, line);
    std::map<int, std::pair<double, double>> by_channel;  // (ifft, music)
    std::string detail;
    while (std::getline(in, line)) {
        std::stringstream ss(line);
        std::string ch, method, err, iters, excl;
        std::getline(ss, ch, ',');
        std::getline(ss, method, ',');
        std::getline(ss, err, ',');
        std::getline(ss, iters, ',');
        std::getline(ss, excl, ',');
        auto& slot = by_channel[std::stoi(ch)];
        (method == "IFFT" ? slot.first : slot.second) = std::stod(err);
        detail += ch + "ch " + method + " " + err + "% (excluded " + excl + "); ";
    }
    bool ok = by_channel.size() == 3 && elapsed < 120.0;
    for (const auto& [ch, errs] : by_channel) ok = ok && errs.first <= errs.second;
    report(4, "fig10-error-ordering", ok, detail + "runtime " + fmt(std::round(elapsed)) + " s (< 120)");
}

void music_oracle() {
    const auto start = Clock::now();
    int agree = 0;
    const int instances = 50;
    for (int i = 0; i < instances; ++i) {
        SyntheticTwoToneModel model;
        model.n = 64;
        model.noise_var = 0.01;  // unit-power tones at 20 dB
        const auto cov = estimate_covariance(model.sample(static_cast<std::uint64_t>(1000 + i)), 16, true);
        const auto ps = pseudospectrum(eig_subspace(cov, 2), 4096, -oracle::kPi, oracle::kPi);
        const auto r = music_delays(ps, 2, 1.0, true);
        std::vector<double> ours;
        for (double t : r.delays_s) ours.push_back(oracle::wrap(delay_to_omega(t, 1.0)));
        std::sort(ours.begin(), ours.end());
        const auto proj = oracle::noise_projector(cov.r, 2);
        const auto brute = oracle::dense_grid_minima([&](double w) { return oracle::projection_norm2(proj, w); },
                                                     -oracle::kPi, oracle::kPi, 1 << 16, 2);
        if (ours.size() == 2 && brute.size() == 2 && std::abs(ours[0] - brute[0]) < 1e-3 &&
            std::abs(ours[1] - brute[1]) < 1e-3)
            ++agree;
    }
    const double elapsed = seconds_since(start);
    const bool ok = agree * 100 >= 95 * instances && elapsed < 30.0;
    report(5, "music-oracle-equivalence", ok,
           std::to_string(agree) + "/" + std::to_string(instances) + " within 1e-3 rad (>= 95%); runtime " +
               fmt(std::round(elapsed * 10.0) / 10.0) + " s (< 30)");
}

void exact_covariance() {
    double worst_eig = 0.0;
    double worst_orth = 0.0;
    for (std::size_t len : {8U, 16U, 32U, 64U}) {
        SyntheticTwoToneModel model;
        model.amplitudes = {cplx{1.0, 0.0}, std::polar(0.5, 1.0)};
        model.noise_var = 0.01;
        const auto dec = eig_subspace(model.exact_covariance(len), 2);
        const auto [l0, l1] = oracle::two_tone_eigenvalues(1.0, 0.25, 0.2, 0.25, len);
        worst_eig = std::max({worst_eig, std::abs(dec.eigenvalues[0] - l0 - 0.01) / (l0 + 0.01),
                              std::abs(dec.eigenvalues[1] - l1 - 0.01) / (l1 + 0.01)});
        for (double w : model.omegas) {
            Eigen::VectorXcd s(static_cast<Eigen::Index>(len));
            for (std::size_t l = 0; l < len; ++l) s[static_cast<Eigen::Index>(l)] = std::polar(1.0, w * static_cast<double>(l));
            for (std::size_t m = 2; m < len; ++m)
                worst_orth = std::max(worst_orth, std::abs(s.dot(dec.eigenvectors.col(static_cast<Eigen::Index>(m)))));
        }
    }
    report(6, "exact-covariance-subspace", worst_eig < 1e-6 && worst_orth < 1e-6,
           "max relative eigenvalue error " + fmt(worst_eig) + ", max |s^H q_noise| " + fmt(worst_orth) +
               " (both < 1e-6)");
}

void ifft_exactness() {
    const std::size_t n = std::size_t{1} << 16;
    const double fs = constants::kSampleRateHz;
    const auto emitted = fm_modulate(synthesize_message(77, n), EmitterSpec{}, n);
    const double shift = bin_aligned_shift(constants::kCarrierOffsetHz, n, fs);
    const SampledSignal direct = ddc(emitted, shift);
    const Spectrum ref = spectrum(direct);
    std::mt19937_64 rng(2718);
    std::uniform_int_distribution<std::size_t> pick(1, n / 4);
    int exact = 0;
    for (int i = 0; i < 50; ++i) {
        const std::size_t d = pick(rng);
        TargetScene scene;
        scene.echoes = {{static_cast<double>(d) / fs, 0.1}};
        const auto r = render_scene(emitted, scene, 1);
        const auto p = ifft_profile(quotient(spectrum(ddc(r.surveillance, shift)), ref));
        if (static_cast<std::size_t>(std::max_element(p.values.begin(), p.values.end()) - p.values.begin()) == d) ++exact;
    }

    double worst_parseval = 0.0;
    double worst_roundtrip = 0.0;
    for (std::size_t len : {std::size_t{256}, std::size_t{4096}, std::size_t{1} << 16, std::size_t{1} << 18}) {
        const auto x = oracle::random_complex(len, static_cast<unsigned>(len));
        const auto big = fft::forward(x);
        const double e = oracle::energy(x) * static_cast<double>(len);
        worst_parseval = std::max(worst_parseval, std::abs(oracle::energy(big) - e) / e);
        worst_roundtrip = std::max(worst_roundtrip, oracle::max_rel_diff(fft::inverse(big), x));
    }
    const bool ok = exact == 50 && worst_parseval < 1e-10 && worst_roundtrip < 1e-10;
    report(7, "ifft-exactness", ok,
           std::to_string(exact) + "/50 integer delays exact; Parseval " + fmt(worst_parseval) + ", round trip " +
               fmt(worst_roundtrip) + " (< 1e-10, N <= 2^18)");
}

void determinism(const fs::path& out) {
    bool same = true;
    std::size_t compared = 0;
    const fs::path cfg = out / "scene.cfg";
    fs::create_directories(out);
    std::ofstream(cfg) << "channel_count = 3\nmethod = MUSIC\nseparation_m = 1000\nseed = 5\n";
    for (int run = 0; run < 2; ++run) {
        const fs::path dir = out / ("run" + std::to_string(run));
        fs::remove_all(dir);
        cmd_simulate(cfg, dir / "simulate");
        std::ofstream(out / "ifft.cfg") << "channel_count = 7\nmethod = IFFT\nseparation_m = 500\nseed = 5\n";
        cmd_simulate(out / "ifft.cfg", dir / "simulate_ifft");
        Table1Options t;
        t.trials = 2;
        t.separations_m = {2000.0, 500.0};
        cmd_table1(dir / "table1", t);
        Fig10Options f;
        cmd_fig10(3, dir / "fig10", f);
        SweepOptions s;
        s.trials = 2;
        s.separations_m = {1000.0, 300.0};
        cmd_sweep(dir / "sweep", s);
    }
    for (const auto& entry : fs::recursive_directory_iterator(out / "run0")) {
        if (!entry.is_regular_file()) continue;
        const fs::path other = out / "run1" / fs::relative(entry.path(), out / "run0");
        ++compared;
        if (!fs::exists(other) || slurp(entry.path()) != slurp(other)) {
            same = false;
            std::printf("  differs: %s\n", fs::relative(entry.path(), out).string().c_str());
        }
    }
    report(8, "determinism", same && compared >= 15,
           std::to_string(compared) + " files byte-identical across two runs of simulate/table1/fig10/sweep");
}

}  // namespace

// Usage: pbr_acceptance [out_dir] [criterion...]; no criteria runs all.
int main(int argc, char** argv) {
    const fs::path out = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "pbr_acceptance";
    fs::create_directories(out);
    std::set<int> only;
    for (int i = 2; i < argc; ++i) only.insert(std::atoi(argv[i]));
    const auto want = [&](std::initializer_list<int> ids) {
        return only.empty() || std::any_of(ids.begin(), ids.end(), [&](int id) { return only.count(id) > 0; });
    };
    try {
        if (want({1, 2, 3})) table1(out / "table1");
        if (want({4})) fig10(out / "fig10");
        if (want({5})) music_oracle();
        if (want({6})) exact_covariance();
        if (want({7})) ifft_exactness();
        if (want({8})) determinism(out / "determinism");
    } catch (const std::exception& e) {
        std::printf("acceptance aborted: %s\n", e.what());
        return 2;
    }
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
