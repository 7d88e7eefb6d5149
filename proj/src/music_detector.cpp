#include "pbr/music_detector.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "pbr/ifft_detector.hpp"

namespace pbr {

using detail::require;

namespace {

constexpr double kDenominatorFloor = 1e-30;

Eigen::VectorXcd steering(double omega, std::size_t len) {
    Eigen::VectorXcd s(static_cast<Eigen::Index>(len));
    for (std::size_t l = 0; l < len; ++l) s[static_cast<Eigen::Index>(l)] = std::polar(1.0, omega * static_cast<double>(l));
    return s;
}

// Indices of the valid bins in ascending frequency order (DFT order rotated
// so that -fs/2 comes first).
std::vector<std::size_t> ascending_valid_bins(const SpectrumQuotient& q) {
    const std::size_t n = q.size();
    const std::size_t start = n / 2;
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t k = (start + i) % n;
        if (q.valid_mask[k]) order.push_back(k);
    }
    return order;
}

}  // namespace

std::size_t default_subvector_len(std::size_t n) { return std::min<std::size_t>(32, n / 2); }

MusicInput build_snapshot(const SpectrumQuotient& q, std::size_t decimation) {
    require(decimation >= 1, "build_snapshot: decimation must be >= 1");
    require(q.valid_mask.size() == q.size(), "build_snapshot: mask does not match bins");
    const auto order = ascending_valid_bins(q);
    require(!order.empty(), "build_snapshot: empty passband");

    // Contiguous in the rotated (ascending-frequency) index.
    const std::size_t n = q.size();
    auto rotated = [&](std::size_t k) { return (k + n - n / 2) % n; };
    for (std::size_t i = 1; i < order.size(); ++i)
        require(rotated(order[i]) == rotated(order[i - 1]) + 1, "build_snapshot: passband is not contiguous");

    MusicInput m;
    m.bin_spacing_hz = q.bin_spacing_hz * static_cast<double>(decimation);
    const std::size_t groups = order.size() / decimation;
    m.x.reserve(groups);
    for (std::size_t g = 0; g < groups; ++g) {
        cplx acc{0.0, 0.0};
        for (std::size_t i = 0; i < decimation; ++i) acc += q.bins[order[g * decimation + i]];
        m.x.push_back(acc / static_cast<double>(decimation));
    }
    require(m.n() >= kMinSnapshotLen, "build_snapshot: fewer than 8 snapshot samples");
    return m;
}

CovarianceEstimate estimate_covariance(const MusicInput& m, std::size_t subvector_len, bool forward_backward) {
    require(m.n() >= 3, "estimate_covariance: snapshot too short");
    require(subvector_len >= 2 && subvector_len <= m.n() - 1, "estimate_covariance: subvector_len must lie in [2, n-1]");

    const auto len = static_cast<Eigen::Index>(subvector_len);
    const auto k = static_cast<Eigen::Index>(m.n() - subvector_len + 1);
    Eigen::MatrixXcd data(len, k);
    for (Eigen::Index j = 0; j < k; ++j)
        for (Eigen::Index i = 0; i < len; ++i) data(i, j) = m.x[static_cast<std::size_t>(i + j)];

    CovarianceEstimate cov;
    cov.subvector_len = subvector_len;
    cov.n_snapshots = static_cast<std::size_t>(k);
    cov.forward_backward = forward_backward;
    cov.r = (data * data.adjoint()) / static_cast<double>(k);
    if (forward_backward) {
        // J conj(R) J reverses both axes of conj(R).
        const Eigen::MatrixXcd backward = cov.r.conjugate().reverse();
        cov.r = 0.5 * (cov.r + backward);
    }
    const Eigen::MatrixXcd sym = 0.5 * (cov.r + cov.r.adjoint());
    cov.r = sym;
    return cov;
}

SubspaceDecomposition eig_subspace(const CovarianceEstimate& cov, std::size_t p) {
    const auto dim = static_cast<std::size_t>(cov.r.rows());
    require(cov.r.rows() == cov.r.cols() && dim >= 2, "eig_subspace: covariance must be square, at least 2x2");
    require(p >= 1 && p < dim, "eig_subspace: p must lie in [1, L-1]");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(cov.r);
    if (solver.info() != Eigen::Success) {
        std::ostringstream msg;
        msg << "eig_subspace: eigensolver failed (L=" << dim << ", trace=" << cov.r.trace().real()
            << ", max|r|=" << cov.r.cwiseAbs().maxCoeff()
            << ", hermitian residual=" << (cov.r - cov.r.adjoint()).cwiseAbs().maxCoeff() << ")";
        throw NumericError(msg.str());
    }

    SubspaceDecomposition dec;
    dec.p = p;
    dec.eigenvalues.resize(dim);
    dec.eigenvectors.resize(cov.r.rows(), cov.r.cols());
    // Eigen returns ascending order.
    for (std::size_t m = 0; m < dim; ++m) {
        const auto src = static_cast<Eigen::Index>(dim - 1 - m);
        dec.eigenvalues[m] = solver.eigenvalues()[src];
        dec.eigenvectors.col(static_cast<Eigen::Index>(m)) = solver.eigenvectors().col(src);
    }
    double tail = 0.0;
    for (std::size_t m = p; m < dim; ++m) tail += dec.eigenvalues[m];
    dec.noise_floor = tail / static_cast<double>(dim - p);
    return dec;
}

Pseudospectrum pseudospectrum(const SubspaceDecomposition& dec, std::size_t grid_size, double omega_lo,
                              double omega_hi) {
    require(grid_size >= 64, "pseudospectrum: grid_size must be >= 64");
    require(omega_lo < omega_hi, "pseudospectrum: omega_lo must be below omega_hi");
    const std::size_t dim = dec.dimension();
    require(dec.p >= 1 && dec.p < dim, "pseudospectrum: decomposition has no noise subspace");

    const auto len = static_cast<Eigen::Index>(dim);
    const auto first_noise = static_cast<Eigen::Index>(dec.p);
    const Eigen::MatrixXcd noise = dec.eigenvectors.rightCols(len - first_noise);

    Pseudospectrum ps;
    ps.omegas.resize(grid_size);
    ps.values.resize(grid_size);
    const double step = (omega_hi - omega_lo) / static_cast<double>(grid_size - 1);
    for (std::size_t g = 0; g < grid_size; ++g) {
        const double omega = omega_lo + step * static_cast<double>(g);
        // s^H Q_noise, one entry per noise eigenvector.
        const Eigen::RowVectorXcd proj = steering(omega, dim).adjoint() * noise;
        const double den = std::max(proj.squaredNorm(), kDenominatorFloor);
        ps.omegas[g] = omega;
        ps.values[g] = 1.0 / den;
    }
    return ps;
}

double omega_to_delay(double omega, double bin_spacing_hz) {
    require(bin_spacing_hz > 0.0, "omega_to_delay: bin spacing must be > 0");
    const double span = 1.0 / bin_spacing_hz;
    double t = -omega / (constants::kTwoPi * bin_spacing_hz);
    t = std::fmod(t, span);
    if (t < 0.0) t += span;
    // -0.0 and values that round up to the span fold back to zero.
    if (t >= span || t == 0.0) t = 0.0;
    return t;
}

double delay_to_omega(double delay_s, double bin_spacing_hz) { return -constants::kTwoPi * bin_spacing_hz * delay_s; }

DetectionResult music_delays(const Pseudospectrum& ps, std::size_t p, double bin_spacing_hz, bool refine) {
    require(p >= 1, "music_delays: p must be >= 1");
    require(ps.grid_size() >= 3, "music_delays: pseudospectrum grid too small");
    const double step = ps.omegas[1] - ps.omegas[0];

    RangeProfile db;
    db.lag_step_s = 1.0;  // grid index units
    db.values.resize(ps.grid_size());
    std::transform(ps.values.begin(), ps.values.end(), db.values.begin(),
                   [](double v) { return 10.0 * std::log10(v); });
    const auto peaks = find_peaks(db, p, 1, refine);

    DetectionResult r;
    r.method = Method::Music;
    std::vector<std::pair<double, double>> found;
    for (const Peak& pk : peaks)
        found.emplace_back(omega_to_delay(ps.omegas.front() + pk.lag_s * step, bin_spacing_hz),
                           std::pow(10.0, pk.value / 10.0));
    std::sort(found.begin(), found.end());
    for (const auto& [t, v] : found) {
        r.delays_s.push_back(t);
        r.peak_values.push_back(v);
    }
    r.ranges_m.resize(r.delays_s.size());
    std::transform(r.delays_s.begin(), r.delays_s.end(), r.ranges_m.begin(), delay_to_range);
    r.shortfall = p > peaks.size() ? p - peaks.size() : 0;
    r.metadata["method"] = "MUSIC";
    r.metadata["peaks_found"] = std::to_string(peaks.size());
    if (r.shortfall > 0) r.metadata["shortfall"] = std::to_string(r.shortfall);

    std::vector<std::pair<double, double>> trace(ps.grid_size());
    for (std::size_t g = 0; g < ps.grid_size(); ++g)
        trace[g] = {omega_to_delay(ps.omegas[g], bin_spacing_hz), ps.values[g]};
    std::sort(trace.begin(), trace.end());
    r.trace.power_scale = true;
    for (const auto& [t, v] : trace) {
        r.trace.delay_s.push_back(t);
        r.trace.value.push_back(v);
    }
    return r;
}

MusicInput SyntheticTwoToneModel::sample(std::uint64_t seed) const {
    require(n >= kMinSnapshotLen, "two-tone model: n must be >= 8");
    require(noise_var >= 0.0, "two-tone model: noise_var must be >= 0");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, std::sqrt(noise_var / 2.0));
    MusicInput m;
    m.bin_spacing_hz = 1.0;
    m.x.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i);
        cplx v = amplitudes[0] * std::polar(1.0, omegas[0] * t) + amplitudes[1] * std::polar(1.0, omegas[1] * t);
        if (noise_var > 0.0) {
            const double re = gauss(rng);
            const double im = gauss(rng);
            v += cplx{re, im};
        }
        m.x[i] = v;
    }
    return m;
}

CovarianceEstimate SyntheticTwoToneModel::exact_covariance(std::size_t subvector_len) const {
    require(subvector_len >= 2, "two-tone model: subvector_len must be >= 2");
    const auto len = static_cast<Eigen::Index>(subvector_len);
    Eigen::MatrixXcd s(len, 2);
    s.col(0) = steering(omegas[0], subvector_len);
    s.col(1) = steering(omegas[1], subvector_len);
    Eigen::Matrix2cd power = Eigen::Matrix2cd::Zero();
    power(0, 0) = std::norm(amplitudes[0]);
    power(1, 1) = std::norm(amplitudes[1]);

    CovarianceEstimate cov;
    cov.subvector_len = subvector_len;
    cov.n_snapshots = 0;
    cov.r = s * power * s.adjoint() + noise_var * Eigen::MatrixXcd::Identity(len, len);
    return cov;
}

}  // namespace pbr
