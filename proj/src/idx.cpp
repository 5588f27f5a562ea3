#include "damlab/idx.hpp"

#include <map>
#include <string>

#include <zlib.h>

namespace damlab {

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803; // ubyte, 3 dimensions
constexpr std::uint32_t kLabelMagic = 0x00000801; // ubyte, 1 dimension

std::uint32_t read_u32_be(std::span<const std::uint8_t> bytes, std::size_t offset) {
    if (offset + 4 > bytes.size()) {
        throw LengthError("IDX stream truncated in header");
    }
    return (static_cast<std::uint32_t>(bytes[offset]) << 24) |
           (static_cast<std::uint32_t>(bytes[offset + 1]) << 16) |
           (static_cast<std::uint32_t>(bytes[offset + 2]) << 8) |
           static_cast<std::uint32_t>(bytes[offset + 3]);
}

} // namespace

bool is_gzip(std::span<const std::uint8_t> bytes) {
    return bytes.size() >= 2 && bytes[0] == 0x1F && bytes[1] == 0x8B;
}

std::vector<std::uint8_t> gunzip(std::span<const std::uint8_t> bytes) {
    z_stream strm{};
    // 15 window bits + 32: accept either zlib or gzip framing.
    if (inflateInit2(&strm, 15 + 32) != Z_OK) {
        throw FormatError("zlib: inflateInit failed");
    }
    std::vector<std::uint8_t> out;
    std::uint8_t chunk[1 << 15];
    strm.next_in = const_cast<std::uint8_t*>(bytes.data());
    strm.avail_in = static_cast<uInt>(bytes.size());
    int rc = Z_OK;
    do {
        strm.next_out = chunk;
        strm.avail_out = sizeof(chunk);
        rc = inflate(&strm, Z_NO_FLUSH);
        if (rc != Z_OK && rc != Z_STREAM_END) {
            inflateEnd(&strm);
            throw FormatError("zlib: corrupt compressed stream (rc=" + std::to_string(rc) + ")");
        }
        out.insert(out.end(), chunk, chunk + (sizeof(chunk) - strm.avail_out));
    } while (rc != Z_STREAM_END);
    inflateEnd(&strm);
    return out;
}

GrayscaleImagePool read_idx_images(std::span<const std::uint8_t> raw) {
    std::vector<std::uint8_t> inflated;
    if (is_gzip(raw)) {
        inflated = gunzip(raw);
        raw = inflated;
    }
    const std::uint32_t magic = read_u32_be(raw, 0);
    if (magic != kImageMagic) {
        throw FormatError("IDX image magic mismatch: expected 0x00000803");
    }
    GrayscaleImagePool pool;
    const std::uint32_t count = read_u32_be(raw, 4);
    pool.rows = read_u32_be(raw, 8);
    pool.cols = read_u32_be(raw, 12);
    const std::size_t pixels = static_cast<std::size_t>(pool.rows) * pool.cols;
    const std::size_t expected = 16 + static_cast<std::size_t>(count) * pixels;
    if (raw.size() != expected) {
        throw LengthError("IDX image payload is " + std::to_string(raw.size() - 16) +
                          " bytes, header promises " + std::to_string(expected - 16));
    }
    pool.images.reserve(count);
    for (std::uint32_t k = 0; k < count; ++k) {
        const auto* begin = raw.data() + 16 + static_cast<std::size_t>(k) * pixels;
        pool.images.emplace_back(begin, begin + pixels);
    }
    return pool;
}

std::vector<int> read_idx_labels(std::span<const std::uint8_t> raw) {
    std::vector<std::uint8_t> inflated;
    if (is_gzip(raw)) {
        inflated = gunzip(raw);
        raw = inflated;
    }
    const std::uint32_t magic = read_u32_be(raw, 0);
    if (magic != kLabelMagic) {
        throw FormatError("IDX label magic mismatch: expected 0x00000801");
    }
    const std::uint32_t count = read_u32_be(raw, 4);
    if (raw.size() != 8 + static_cast<std::size_t>(count)) {
        throw LengthError("IDX label payload is " + std::to_string(raw.size() - 8) +
                          " bytes, header promises " + std::to_string(count));
    }
    std::vector<int> labels(count);
    for (std::uint32_t k = 0; k < count; ++k) {
        labels[k] = raw[8 + k];
    }
    return labels;
}

Pattern binarize(std::span<const std::uint8_t> image, int threshold, std::uint32_t n_neurons) {
    if (image.size() != n_neurons) {
        throw DimensionError("binarize: image has " + std::to_string(image.size()) +
                             " pixels, expected " + std::to_string(n_neurons));
    }
    Pattern p(n_neurons);
    for (std::uint32_t i = 0; i < n_neurons; ++i) {
        if (static_cast<int>(image[i]) >= threshold) {
            p.set(i, 1);
        }
    }
    return p;
}

PatternSet binarize_pool(const GrayscaleImagePool& pool, int threshold) {
    const std::uint32_t n = pool.rows * pool.cols;
    PatternSet set;
    set.source = PatternSource::image_pool;
    set.patterns.reserve(pool.count());
    for (const auto& image : pool.images) {
        set.patterns.push_back(binarize(image, threshold, n));
    }
    return set;
}

GrayscaleImagePool filter_per_digit(const GrayscaleImagePool& pool, std::size_t per_digit) {
    if (!pool.labels) {
        throw SpecError("per-digit filtering requires labels");
    }
    if (pool.labels->size() != pool.count()) {
        throw DimensionError("label count does not match image count");
    }
    GrayscaleImagePool out;
    out.rows = pool.rows;
    out.cols = pool.cols;
    out.labels.emplace();
    std::map<int, std::size_t> taken;
    for (std::size_t k = 0; k < pool.count(); ++k) {
        const int label = (*pool.labels)[k];
        if (taken[label] < per_digit) {
            ++taken[label];
            out.images.push_back(pool.images[k]);
            out.labels->push_back(label);
        }
    }
    return out;
}

} // namespace damlab
