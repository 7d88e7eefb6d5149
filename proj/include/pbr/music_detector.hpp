#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>

#include "pbr/common.hpp"
#include "pbr/detection.hpp"
#include "pbr/frontend.hpp"

namespace pbr {

/// One frequency-domain snapshot x[n]: the passband bins of a quotient in
/// ascending frequency order. An echo of delay t0 appears in it as the tone
/// exp(j w n) with w = -2 pi bin_spacing_hz t0.
struct MusicInput {
    CVec x;
    double bin_spacing_hz = 0.0;

    std::size_t n() const { return x.size(); }
};

/// Spatially smoothed covariance estimate, L x L.
struct CovarianceEstimate {
    Eigen::MatrixXcd r;
    std::size_t subvector_len = 0;
    std::size_t n_snapshots = 0;
    bool forward_backward = false;
};

struct SubspaceDecomposition {
    RVec eigenvalues;                 // descending
    Eigen::MatrixXcd eigenvectors;    // column m pairs with eigenvalues[m]
    std::size_t p = 0;                // assumed number of sources
    double noise_floor = 0.0;         // mean of the trailing L - p eigenvalues

    std::size_t dimension() const { return eigenvalues.size(); }
};

struct Pseudospectrum {
    RVec omegas;  // rad/sample, uniform ascending grid
    RVec values;

    std::size_t grid_size() const { return omegas.size(); }
};

/// Minimum snapshot length accepted by the estimator.
inline constexpr std::size_t kMinSnapshotLen = 8;

/// Default subvector length for a snapshot of n samples: min(32, n / 2).
std::size_t default_subvector_len(std::size_t n);

/// Collects the passband bins of q in ascending frequency. With decimation
/// D > 1, each D consecutive bins are averaged into one sample (trailing
/// partial group dropped) and the recorded spacing becomes D * bin spacing.
MusicInput build_snapshot(const SpectrumQuotient& q, std::size_t decimation = 1);

/// R = (1/K) sum_k x_k x_k^H over the K = n - L + 1 sliding length-L
/// subvectors; optionally averaged with J conj(R) J.
CovarianceEstimate estimate_covariance(const MusicInput& m, std::size_t subvector_len, bool forward_backward = true);

/// Hermitian eigendecomposition of R, eigenvalues descending.
SubspaceDecomposition eig_subspace(const CovarianceEstimate& cov, std::size_t p);

/// 1 / sum_{m >= p} |s(w)^H q_m|^2 on grid_size points spanning
/// [omega_lo, omega_hi], s(w) = [1, e^{jw}, ..., e^{jw(L-1)}]^T.
Pseudospectrum pseudospectrum(const SubspaceDecomposition& dec, std::size_t grid_size, double omega_lo,
                              double omega_hi);

/// Tone frequency <-> delay for a snapshot of the given bin spacing. Delays
/// are folded into [0, 1 / bin_spacing).
double omega_to_delay(double omega, double bin_spacing_hz);
double delay_to_omega(double delay_s, double bin_spacing_hz);

/// Picks the p largest pseudospectrum maxima and converts them to delays.
/// Refinement fits a parabola to the peak in dB.
DetectionResult music_delays(const Pseudospectrum& ps, std::size_t p, double bin_spacing_hz, bool refine);

/// Test-signal generator for the two-tone data model x = S a + w.
struct SyntheticTwoToneModel {
    std::array<cplx, 2> amplitudes{cplx{1.0, 0.0}, cplx{1.0, 0.0}};
    std::array<double, 2> omegas{0.2, 0.25};
    double noise_var = 0.0;
    std::size_t n = 256;

    /// One realization; noise is circular complex Gaussian of variance noise_var.
    MusicInput sample(std::uint64_t seed) const;
    /// S diag(|a_0|^2, |a_1|^2) S^H + noise_var I for length-L steering
    /// vectors, i.e. the covariance of tones with independent random phases.
    CovarianceEstimate exact_covariance(std::size_t subvector_len) const;
};

}  // namespace pbr
