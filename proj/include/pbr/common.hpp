#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace pbr {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;
using RVec = std::vector<double>;

namespace constants {
/// Propagation speed used for every delay/range conversion, m/s.
inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Defaults of the reference scenario.
inline constexpr double kSampleRateHz = 2.0e6;
inline constexpr double kCarrierOffsetHz = 90.0e3;
inline constexpr double kFreqDeviationHz = 75.0e3;
inline constexpr double kChannelSpacingHz = 200.0e3;
inline constexpr double kAudioBandwidthHz = 15.0e3;
inline constexpr double kMaxOccupiedBandwidthHz = 20.0e6;
inline constexpr std::size_t kDefaultSamples = std::size_t{1} << 16;
inline constexpr double kDefaultSnrDb = 20.0;
inline constexpr double kDefaultEchoAmplitude = 0.1;
inline constexpr double kDefaultEpsRel = 1e-3;
}  // namespace constants

/// Invalid argument or inconsistent inputs.
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Numerical failure (eigensolver did not converge, etc).
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Detector was asked for a result but had nothing to report.
class EmptyResultError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// File system / stream failure; message carries the path.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {
inline void require(bool cond, const std::string& what) {
    if (!cond) throw ParameterError(what);
}
}  // namespace detail

inline double delay_to_range(double delay_s) { return constants::kSpeedOfLight * delay_s; }
inline double range_to_delay(double range_m) { return range_m / constants::kSpeedOfLight; }

}  // namespace pbr
