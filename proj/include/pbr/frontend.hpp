#pragma once

#include <vector>

#include "pbr/common.hpp"
#include "pbr/signal_model.hpp"

namespace pbr {

/// DFT of a record. Bin k sits at center_hz + bin_frequency(k).
struct Spectrum {
    CVec bins;
    double bin_spacing_hz = 0.0;
    double center_hz = 0.0;

    std::size_t size() const { return bins.size(); }
    double sample_rate_hz() const { return bin_spacing_hz * static_cast<double>(bins.size()); }
    /// Offset of bin k from center_hz, in [-fs/2, fs/2).
    double bin_offset_hz(std::size_t k) const;
};

/// Surveillance-over-reference spectrum. Bins outside the passband are 0 and
/// masked invalid.
struct SpectrumQuotient {
    CVec bins;
    double bin_spacing_hz = 0.0;
    double center_hz = 0.0;
    double passband_lo_hz = 0.0;  // offsets relative to center_hz
    double passband_hi_hz = 0.0;
    std::vector<bool> valid_mask;

    std::size_t size() const { return bins.size(); }
    double sample_rate_hz() const { return bin_spacing_hz * static_cast<double>(bins.size()); }
    double bin_offset_hz(std::size_t k) const;
    std::size_t valid_count() const;
};

/// Minimum number of passband bins a quotient must keep.
inline constexpr std::size_t kMinValidBins = 8;

/// Nearest multiple of fs / n to f_hz. Down-converting an n-sample record by
/// this amount rotates its spectrum by whole bins, so circular delays stay
/// circular.
double bin_aligned_shift(double f_hz, std::size_t n, double sample_rate_hz);

/// Shifts the record down by f_shift_hz: x[n] * exp(-j 2 pi f_shift n / fs).
SampledSignal ddc(const SampledSignal& sig, double f_shift_hz);

/// Forward unnormalized DFT; the bins inherit the record's center frequency.
Spectrum spectrum(const SampledSignal& sig);
/// Inverse of spectrum(); t0_offset_s of the result is 0.
SampledSignal inverse_spectrum(const Spectrum& spec);

/// Regularized division surv * conj(ref) / (|ref|^2 + eps), with
/// eps = eps_rel * max|ref|^2. Passband starts as the full band.
SpectrumQuotient quotient(const Spectrum& surv, const Spectrum& ref, double eps_rel = constants::kDefaultEpsRel);

/// Ideal rectangular mask: bins with offset in [lo_hz, hi_hz] are kept
/// untouched, all others zeroed and invalidated.
SpectrumQuotient bandpass(const SpectrumQuotient& q, double lo_hz, double hi_hz);

}  // namespace pbr
