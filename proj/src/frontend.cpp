#include "pbr/frontend.hpp"

#include <algorithm>
#include <cmath>

#include "pbr/fft.hpp"

namespace pbr {

using detail::require;

double Spectrum::bin_offset_hz(std::size_t k) const { return fft::bin_frequency(k, bins.size(), sample_rate_hz()); }

double SpectrumQuotient::bin_offset_hz(std::size_t k) const {
    return fft::bin_frequency(k, bins.size(), sample_rate_hz());
}

std::size_t SpectrumQuotient::valid_count() const {
    return static_cast<std::size_t>(std::count(valid_mask.begin(), valid_mask.end(), true));
}

double bin_aligned_shift(double f_hz, std::size_t n, double sample_rate_hz) {
    require(n >= 1 && sample_rate_hz > 0.0, "bin_aligned_shift: need n >= 1 and fs > 0");
    const double df = sample_rate_hz / static_cast<double>(n);
    return std::round(f_hz / df) * df;
}

SampledSignal ddc(const SampledSignal& sig, double f_shift_hz) {
    sig.validate();
    require(std::abs(f_shift_hz) < sig.sample_rate_hz / 2.0, "ddc: |f_shift| must be below fs/2");
    SampledSignal out = sig;
    out.center_hz = sig.center_hz + f_shift_hz;
    if (f_shift_hz == 0.0) return out;
    const double step = f_shift_hz / sig.sample_rate_hz;
    for (std::size_t n = 0; n < out.samples.size(); ++n) {
        const double cycles = std::fmod(step * static_cast<double>(n), 1.0);
        out.samples[n] *= std::polar(1.0, -constants::kTwoPi * cycles);
    }
    return out;
}

Spectrum spectrum(const SampledSignal& sig) {
    sig.validate();
    require(sig.size() >= 2, "spectrum: need at least 2 samples");
    Spectrum out;
    out.bins = fft::forward(sig.samples);
    out.bin_spacing_hz = sig.sample_rate_hz / static_cast<double>(sig.size());
    out.center_hz = sig.center_hz;
    return out;
}

SampledSignal inverse_spectrum(const Spectrum& spec) {
    require(spec.size() >= 2 && spec.bin_spacing_hz > 0.0, "inverse_spectrum: malformed spectrum");
    SampledSignal out;
    out.samples = fft::inverse(spec.bins);
    out.sample_rate_hz = spec.sample_rate_hz();
    out.center_hz = spec.center_hz;
    return out;
}

SpectrumQuotient quotient(const Spectrum& surv, const Spectrum& ref, double eps_rel) {
    require(surv.size() == ref.size(), "quotient: spectra differ in length");
    require(surv.size() >= 2, "quotient: need at least 2 bins");
    require(surv.bin_spacing_hz == ref.bin_spacing_hz, "quotient: spectra differ in bin spacing");
    require(surv.center_hz == ref.center_hz, "quotient: spectra differ in center frequency");
    require(eps_rel >= 0.0, "quotient: eps_rel must be >= 0");

    double max_power = 0.0;
    for (const auto& v : ref.bins) max_power = std::max(max_power, std::norm(v));
    const double eps = eps_rel * max_power;

    SpectrumQuotient q;
    q.bin_spacing_hz = surv.bin_spacing_hz;
    q.center_hz = surv.center_hz;
    q.bins.resize(surv.size());
    for (std::size_t k = 0; k < surv.size(); ++k) {
        const double den = std::norm(ref.bins[k]) + eps;
        q.bins[k] = den > 0.0 ? surv.bins[k] * std::conj(ref.bins[k]) / den : cplx{0.0, 0.0};
    }
    const double fs = q.sample_rate_hz();
    q.passband_lo_hz = -fs / 2.0;
    q.passband_hi_hz = fs / 2.0;
    q.valid_mask.assign(q.bins.size(), true);
    return q;
}

SpectrumQuotient bandpass(const SpectrumQuotient& q, double lo_hz, double hi_hz) {
    const double fs = q.sample_rate_hz();
    require(lo_hz < hi_hz, "bandpass: lo must be below hi");
    require(lo_hz >= -fs / 2.0 && hi_hz <= fs / 2.0, "bandpass: passband outside the Nyquist range");

    SpectrumQuotient out = q;
    out.passband_lo_hz = std::max(q.passband_lo_hz, lo_hz);
    out.passband_hi_hz = std::min(q.passband_hi_hz, hi_hz);
    std::size_t kept = 0;
    for (std::size_t k = 0; k < out.bins.size(); ++k) {
        const double f = out.bin_offset_hz(k);
        const bool inside = out.valid_mask[k] && f >= lo_hz && f <= hi_hz;
        out.valid_mask[k] = inside;
        if (inside)
            ++kept;
        else
            out.bins[k] = 0.0;
    }
    require(kept > 0, "bandpass: empty passband");
    require(kept >= kMinValidBins, "bandpass: passband keeps fewer than 8 bins");
    return out;
}

}  // namespace pbr
