#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace edaloop::util {

std::string_view trim(std::string_view s);
std::string to_lower(std::string_view s);
bool iequals(std::string_view a, std::string_view b);
bool starts_with_ci(std::string_view s, std::string_view prefix);
std::vector<std::string> split_lines(std::string_view text);
std::vector<std::string> split_ws(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// printf-style fixed formatting, e.g. fixed(1.0, 3) == "1.000".
std::string fixed(double value, int decimals);
/// Shortest round-trippable decimal representation.
std::string shortest(double value);

/// Strict decimal parse of the whole string (no locale, no trailing junk).
std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);
/// Writes via a sibling temp file and rename, so readers never observe a torn file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::uint64_t fnv1a64(std::string_view data);

/// Deterministic stream of uniform reals and integers.
///
/// Uses std::mt19937_64, whose output sequence is fixed by the standard, and
/// maps raw 64-bit words to doubles as (w >> 11) * 2^-53. Integer draws use
/// rejection sampling on the raw words. Unlike std::uniform_*_distribution the
/// results are identical across standard library implementations.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1).
    double unit();
    /// Uniform in [low, high].
    double uniform(double low, double high);
    /// Uniform integer in [0, n).
    std::uint64_t index(std::uint64_t n);

private:
    std::mt19937_64 engine_;
};

} // namespace edaloop::util
