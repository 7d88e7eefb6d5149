#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "pbr/common.hpp"
#include "pbr/detection.hpp"
#include "pbr/experiments.hpp"
#include "pbr/frontend.hpp"
#include "pbr/ifft_detector.hpp"
#include "pbr/music_detector.hpp"
#include "pbr/signal_model.hpp"

namespace pbr::io {

// Text output is locale independent: shortest round-trip decimal form,
// '.' separator, '\n' line ends.
std::string format_number(double v);

double parse_number(std::string_view key, std::string_view text);
long long parse_int(std::string_view key, std::string_view text);
std::size_t parse_size(std::string_view key, std::string_view text);
bool parse_bool(std::string_view key, std::string_view text);

using KeyValues = std::map<std::string, std::string>;

/// `key = value` lines; '#' starts a comment; blank lines ignored.
KeyValues parse_key_values(std::istream& in, const std::string& origin = "<stream>");
KeyValues read_key_values(const std::filesystem::path& path);
void write_key_values(std::ostream& out, const KeyValues& kv);

/// Header `index,re,im`, one row per sample.
void write_signal_csv(std::ostream& out, const SampledSignal& sig);
SampledSignal read_signal_csv(std::istream& in, double sample_rate_hz);

/// Little-endian: 8-byte magic "PBRSIG01", u32 length, then (re, im) f64 pairs.
inline constexpr std::string_view kSignalMagic = "PBRSIG01";
void write_signal_binary(std::ostream& out, const SampledSignal& sig);
SampledSignal read_signal_binary(std::istream& in, double sample_rate_hz);

/// `freq_hz,re,im,valid` in ascending frequency; freq_hz is absolute.
void write_spectrum_csv(std::ostream& out, const Spectrum& spec);
void write_quotient_csv(std::ostream& out, const SpectrumQuotient& q);

/// `lag_s,value`.
void write_profile_csv(std::ostream& out, const RangeProfile& profile);
/// `omega_rad,delay_s,p_music`.
void write_pseudospectrum_csv(std::ostream& out, const Pseudospectrum& ps, double bin_spacing_hz);

/// Flat `key = value` record of a detection, metadata included.
void write_detection_record(std::ostream& out, const DetectionResult& r);

/// `channel_count,method,separation_m,resolve_rate`.
void write_resolution_csv(std::ostream& out, const std::vector<SweepPoint>& points);
/// `channel_count,method,mean_rel_error_pct,iterations,excluded`.
void write_error_curve_csv(std::ostream& out, const std::vector<ErrorCurvePoint>& points);

/// Opens `path` for writing and hands the stream to fn; failures carry the path.
void write_file(const std::filesystem::path& path, const std::function<void(std::ostream&)>& fn);

}  // namespace pbr::io
