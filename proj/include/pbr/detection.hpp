#pragma once

#include <map>
#include <string>
#include <string_view>

#include "pbr/common.hpp"

namespace pbr {

enum class Method { Ifft, Music };

std::string to_string(Method m);
Method method_from_string(std::string_view s);

/// The curve a detector picked its peaks from, on an ascending delay axis.
/// power_scale marks quantities that are powers (pseudospectrum) rather than
/// amplitudes (range profile); it decides how a 3 dB valley is measured.
struct DetectionTrace {
    RVec delay_s;
    RVec value;
    bool power_scale = false;
};

struct DetectionResult {
    RVec delays_s;  // ascending
    RVec ranges_m;
    RVec peak_values;  // detector output at each delay
    Method method = Method::Ifft;
    std::map<std::string, std::string> metadata;
    DetectionTrace trace;
    /// Peaks requested but not found.
    std::size_t shortfall = 0;
};

}  // namespace pbr
