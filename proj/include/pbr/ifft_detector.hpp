#pragma once

#include <vector>

#include "pbr/common.hpp"
#include "pbr/detection.hpp"
#include "pbr/frontend.hpp"

namespace pbr {

enum class ProfileMode { RealPart, Magnitude };

/// Lag-domain response of a quotient, one value per lag bin.
struct RangeProfile {
    RVec values;
    double lag_step_s = 0.0;

    std::size_t length() const { return values.size(); }
};

struct Peak {
    double lag_s = 0.0;
    double value = 0.0;
    std::size_t index = 0;
    bool refined = false;
};

/// Inverse DFT of the quotient. The lag response is referenced to the
/// quotient's absolute frequencies (center_hz is added back), so an echo of
/// delay t0 peaks with zero phase at lag t0 whatever down-conversion was
/// applied upstream. RealPart keeps Re(.), Magnitude keeps |.|.
RangeProfile ifft_profile(const SpectrumQuotient& q, ProfileMode mode = ProfileMode::RealPart);

/// Keeps the first n_lags lags of a profile.
RangeProfile truncate(const RangeProfile& p, std::size_t n_lags);

/// Greedy k-best local maxima with a separation guard; optional 3-point
/// parabolic refinement. Result is sorted by lag and may hold fewer than k.
std::vector<Peak> find_peaks(const RangeProfile& p, std::size_t k, std::size_t min_sep_bins, bool refine);

/// Exact band-limited lag response of a quotient at an arbitrary lag; equals
/// ifft_profile(q).values[n] at lag n / fs.
double lag_response(const SpectrumQuotient& q, double lag_s, ProfileMode mode = ProfileMode::RealPart);

/// Moves a peak to the maximum of lag_response within one lag bin of its
/// current position (golden-section search).
Peak refine_bandlimited(const SpectrumQuotient& q, const Peak& peak, ProfileMode mode = ProfileMode::RealPart);

/// Builds a result from picked peaks; `requested` > peaks.size() is recorded
/// as a shortfall.
DetectionResult lags_to_result(const std::vector<Peak>& peaks, Method method, std::size_t requested = 0);

/// Vertex offset in (-0.5, 0.5) of the parabola through three equally spaced
/// samples centred on a local maximum.
double parabolic_offset(double left, double center, double right);

}  // namespace pbr
