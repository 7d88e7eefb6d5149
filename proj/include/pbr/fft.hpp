#pragma once

#include <span>

#include "pbr/common.hpp"

namespace pbr::fft {

// Forward transform is unnormalized: X[k] = sum_n x[n] exp(-j 2 pi k n / N).
// Inverse carries the 1/N factor so inverse(forward(x)) == x.
CVec forward(std::span<const cplx> x);
CVec inverse(std::span<const cplx> x);

/// Frequency (Hz) of DFT bin k for an N-point transform at rate fs, in [-fs/2, fs/2).
double bin_frequency(std::size_t k, std::size_t n, double sample_rate_hz);

}  // namespace pbr::fft
