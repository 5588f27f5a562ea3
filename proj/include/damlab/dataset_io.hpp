#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "damlab/pattern.hpp"

namespace damlab {

// Dataset container, bit-exact layout:
//   "DAMP" | version u16 LE | N u32 LE | S u32 LE | source u8 |
//   seed u64 LE | skew_p f64 LE (NaN = absent) | target_hd f64 LE (NaN = absent)
// then S patterns of ceil(N/8) bytes each, bit i at byte i/8, position i%8 (LSB first).
inline constexpr std::uint16_t kDatasetFormatVersion = 1;

void write_pattern_set(const PatternSet& set, std::ostream& out);
void write_pattern_set(const PatternSet& set, const std::filesystem::path& path);

PatternSet read_pattern_set(std::istream& in);
PatternSet read_pattern_set(const std::filesystem::path& path);

/// One generated subset as listed in a dataset manifest (JSON lines).
struct ManifestEntry {
    std::string id;
    std::string file; // relative to the manifest's directory
    std::optional<double> skew_p;
    std::optional<double> target_hd;
    double realized_mean_hd = 0.0;
    std::uint64_t seed = 0;
    std::uint32_t n_neurons = 0;
    std::uint32_t size = 0;
};

void write_manifest(const std::vector<ManifestEntry>& entries, const std::filesystem::path& path);
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);

} // namespace damlab
