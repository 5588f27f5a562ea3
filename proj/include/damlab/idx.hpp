#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "damlab/pattern.hpp"

namespace damlab {

/// Raw grayscale images prior to binarization, row-major bytes.
struct GrayscaleImagePool {
    std::vector<std::vector<std::uint8_t>> images;
    std::uint32_t rows = 0;
    std::uint32_t cols = 0;
    std::optional<std::vector<int>> labels;

    std::size_t count() const { return images.size(); }
};

/// True if the buffer starts with the gzip magic 0x1F 0x8B.
bool is_gzip(std::span<const std::uint8_t> bytes);

/// Inflate a gzip (or zlib) stream. Throws FormatError on corrupt input.
std::vector<std::uint8_t> gunzip(std::span<const std::uint8_t> bytes);

/// Parse an IDX image file (big-endian, magic 0x00000803, dims count x rows x cols).
/// Gzip input is detected and inflated transparently. The payload must be exactly
/// count*rows*cols bytes: anything shorter or longer is a LengthError.
GrayscaleImagePool read_idx_images(std::span<const std::uint8_t> raw);

/// Parse an IDX label file (magic 0x00000801). Same gzip handling and strict length.
std::vector<int> read_idx_labels(std::span<const std::uint8_t> raw);

/// Pixel >= threshold maps to +1, below to -1. Image length must equal n_neurons.
Pattern binarize(std::span<const std::uint8_t> image, int threshold, std::uint32_t n_neurons);

/// Binarize every image in the pool into a PatternSet (source = image_pool).
PatternSet binarize_pool(const GrayscaleImagePool& pool, int threshold = 128);

/// Keep the first per_digit occurrences of each label value in file order.
/// Deterministic and seedless. Requires labels.
GrayscaleImagePool filter_per_digit(const GrayscaleImagePool& pool, std::size_t per_digit);

} // namespace damlab
