#include "pbr/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "pbr/fft.hpp"

namespace pbr::io {
namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view text, std::string_view expected) {
    throw ParameterError("config key '" + std::string(key) + "': expected " + std::string(expected) + ", got '" +
                         std::string(text) + "'");
}

template <typename T>
void put_le(std::ostream& out, T value) {
    std::array<char, sizeof(T)> bytes{};
    for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xff);
    out.write(bytes.data(), bytes.size());
}

template <typename T>
T get_le(std::istream& in) {
    std::array<unsigned char, sizeof(T)> bytes{};
    in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
    if (!in) throw IoError("binary signal: truncated input");
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(bytes[i]) << (8 * i);
    return value;
}

// Bin indices of an N-point spectrum in ascending frequency order.
std::vector<std::size_t> ascending_bins(std::size_t n) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = (n / 2 + i) % n;
    return order;
}

}  // namespace

std::string format_number(double v) {
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

double parse_number(std::string_view key, std::string_view text) {
    const auto t = trim(text);
    double v = 0.0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc{} || res.ptr != t.data() + t.size()) bad_value(key, text, "a number");
    return v;
}

long long parse_int(std::string_view key, std::string_view text) {
    const auto t = trim(text);
    long long v = 0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc{} || res.ptr != t.data() + t.size()) bad_value(key, text, "an integer");
    return v;
}

std::size_t parse_size(std::string_view key, std::string_view text) {
    const auto t = trim(text);
    std::uint64_t v = 0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc{} || res.ptr != t.data() + t.size()) bad_value(key, text, "a non-negative integer");
    return static_cast<std::size_t>(v);
}

bool parse_bool(std::string_view key, std::string_view text) {
    const auto t = trim(text);
    if (t == "true" || t == "1" || t == "yes") return true;
    if (t == "false" || t == "0" || t == "no") return false;
    bad_value(key, text, "true or false");
}

KeyValues parse_key_values(std::istream& in, const std::string& origin) {
    KeyValues kv;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view = line;
        if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
        view = trim(view);
        if (view.empty()) continue;
        const auto eq = view.find('=');
        if (eq == std::string_view::npos)
            throw ParameterError(origin + ":" + std::to_string(line_no) + ": expected 'key = value'");
        const auto key = trim(view.substr(0, eq));
        const auto value = trim(view.substr(eq + 1));
        if (key.empty()) throw ParameterError(origin + ":" + std::to_string(line_no) + ": empty key");
        kv[std::string(key)] = std::string(value);
    }
    return kv;
}

KeyValues read_key_values(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError(path.string() + ": cannot open for reading");
    return parse_key_values(in, path.string());
}

void write_key_values(std::ostream& out, const KeyValues& kv) {
    for (const auto& [k, v] : kv) out << k << " = " << v << '\n';
}

void write_signal_csv(std::ostream& out, const SampledSignal& sig) {
    out << "index,re,im\n";
    for (std::size_t i = 0; i < sig.samples.size(); ++i)
        out << i << ',' << format_number(sig.samples[i].real()) << ',' << format_number(sig.samples[i].imag()) << '\n';
}

SampledSignal read_signal_csv(std::istream& in, double sample_rate_hz) {
    std::string line;
    if (!std::getline(in, line) || trim(line) != "index,re,im") throw IoError("signal csv: missing 'index,re,im' header");
    SampledSignal sig;
    sig.sample_rate_hz = sample_rate_hz;
    std::size_t expected = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        std::string_view row = line;
        const auto c1 = row.find(',');
        const auto c2 = row.find(',', c1 == std::string_view::npos ? c1 : c1 + 1);
        if (c1 == std::string_view::npos || c2 == std::string_view::npos) throw IoError("signal csv: malformed row");
        if (parse_size("index", row.substr(0, c1)) != expected++) throw IoError("signal csv: indices out of order");
        sig.samples.emplace_back(parse_number("re", row.substr(c1 + 1, c2 - c1 - 1)), parse_number("im", row.substr(c2 + 1)));
    }
    sig.validate();
    return sig;
}

void write_signal_binary(std::ostream& out, const SampledSignal& sig) {
    detail::require(sig.samples.size() <= 0xffffffffULL, "binary signal: too many samples for a u32 length");
    out.write(kSignalMagic.data(), static_cast<std::streamsize>(kSignalMagic.size()));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(sig.samples.size()));
    for (const cplx& v : sig.samples) {
        put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v.real()));
        put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v.imag()));
    }
}

SampledSignal read_signal_binary(std::istream& in, double sample_rate_hz) {
    std::array<char, 8> magic{};
    in.read(magic.data(), magic.size());
    if (!in || std::string_view(magic.data(), magic.size()) != kSignalMagic) throw IoError("binary signal: bad magic");
    const auto n = get_le<std::uint32_t>(in);
    SampledSignal sig;
    sig.sample_rate_hz = sample_rate_hz;
    sig.samples.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        const double re = std::bit_cast<double>(get_le<std::uint64_t>(in));
        const double im = std::bit_cast<double>(get_le<std::uint64_t>(in));
        sig.samples.emplace_back(re, im);
    }
    return sig;
}

void write_spectrum_csv(std::ostream& out, const Spectrum& spec) {
    out << "freq_hz,re,im,valid\n";
    for (std::size_t k : ascending_bins(spec.size()))
        out << format_number(spec.center_hz + spec.bin_offset_hz(k)) << ',' << format_number(spec.bins[k].real()) << ','
            << format_number(spec.bins[k].imag()) << ",1\n";
}

void write_quotient_csv(std::ostream& out, const SpectrumQuotient& q) {
    out << "freq_hz,re,im,valid\n";
    for (std::size_t k : ascending_bins(q.size()))
        out << format_number(q.center_hz + q.bin_offset_hz(k)) << ',' << format_number(q.bins[k].real()) << ','
            << format_number(q.bins[k].imag()) << ',' << (q.valid_mask[k] ? 1 : 0) << '\n';
}

void write_profile_csv(std::ostream& out, const RangeProfile& profile) {
    out << "lag_s,value\n";
    for (std::size_t i = 0; i < profile.values.size(); ++i)
        out << format_number(static_cast<double>(i) * profile.lag_step_s) << ',' << format_number(profile.values[i]) << '\n';
}

void write_pseudospectrum_csv(std::ostream& out, const Pseudospectrum& ps, double bin_spacing_hz) {
    out << "omega_rad,delay_s,p_music\n";
    for (std::size_t g = 0; g < ps.grid_size(); ++g)
        out << format_number(ps.omegas[g]) << ',' << format_number(omega_to_delay(ps.omegas[g], bin_spacing_hz)) << ','
            << format_number(ps.values[g]) << '\n';
}

void write_detection_record(std::ostream& out, const DetectionResult& r) {
    KeyValues kv = r.metadata;
    kv["method"] = to_string(r.method);
    kv["peak_count"] = std::to_string(r.delays_s.size());
    kv["shortfall"] = std::to_string(r.shortfall);
    for (std::size_t i = 0; i < r.delays_s.size(); ++i) {
        const std::string idx = std::to_string(i);
        kv["delay_" + idx + "_s"] = format_number(r.delays_s[i]);
        kv["range_" + idx + "_m"] = format_number(r.ranges_m[i]);
        if (i < r.peak_values.size()) kv["peak_" + idx + "_value"] = format_number(r.peak_values[i]);
    }
    write_key_values(out, kv);
}

void write_resolution_csv(std::ostream& out, const std::vector<SweepPoint>& points) {
    out << "channel_count,method,separation_m,resolve_rate\n";
    for (const auto& p : points)
        out << p.channel_count << ',' << to_string(p.method) << ',' << format_number(p.separation_m) << ','
            << format_number(p.resolve_rate) << '\n';
}

void write_error_curve_csv(std::ostream& out, const std::vector<ErrorCurvePoint>& points) {
    out << "channel_count,method,mean_rel_error_pct,iterations,excluded\n";
    for (const auto& p : points)
        out << p.channel_count << ',' << to_string(p.method) << ',' << format_number(p.mean_rel_error_pct) << ','
            << p.iterations << ',' << p.excluded << '\n';
}

void write_file(const std::filesystem::path& path, const std::function<void(std::ostream&)>& fn) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(path.string() + ": cannot open for writing");
    fn(out);
    out.flush();
    if (!out) throw IoError(path.string() + ": write failed");
}

}  // namespace pbr::io
