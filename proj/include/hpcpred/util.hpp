#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hpcpred {

// SplitMix64 step; used to derive independent child seeds from one seed.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

// 64-bit FNV-1a, stable across platforms (used for config digests).
std::uint64_t fnv1a64(std::string_view data);
std::string hex64(std::uint64_t v);

// Shortest text that parses back to exactly the same double.
std::string format_double(double v);
// Fixed-point with the given number of decimals.
std::string format_fixed(double v, int decimals);

std::optional<double> parse_double(std::string_view s);
std::optional<std::int64_t> parse_int(std::string_view s);

std::vector<std::string> split(std::string_view s, char delim);
std::string_view trim(std::string_view s);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace hpcpred
