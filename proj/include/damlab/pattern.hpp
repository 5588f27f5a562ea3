#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "damlab/errors.hpp"

namespace damlab {

/// Fixed-length bipolar (+1/-1) vector of N neurons, bit-packed into 64-bit
/// words (bit set <=> value +1). Padding bits past N are kept at zero so
/// whole-word popcounts need no masking.
class Pattern {
public:
    Pattern() = default;

    /// All neurons -1.
    explicit Pattern(std::uint32_t n_neurons)
        : words_((n_neurons + 63) / 64, 0), n_neurons_(n_neurons) {}

    /// From a +1/-1 vector. Any positive entry maps to +1, anything else to -1.
    static Pattern from_bipolar(std::span<const int> values);

    /// From raw words (little-endian bit order). Padding bits are cleared.
    static Pattern from_words(std::vector<std::uint64_t> words, std::uint32_t n_neurons);

    std::uint32_t n_neurons() const { return n_neurons_; }
    std::size_t word_count() const { return words_.size(); }
    const std::vector<std::uint64_t>& words() const { return words_; }

    bool bit(std::uint32_t i) const {
        check_index(i);
        return (words_[i >> 6] >> (i & 63)) & 1u;
    }

    /// Neuron value, +1 or -1.
    int get(std::uint32_t i) const { return bit(i) ? 1 : -1; }

    void set(std::uint32_t i, int value) {
        check_index(i);
        const std::uint64_t mask = 1ULL << (i & 63);
        if (value > 0) {
            words_[i >> 6] |= mask;
        } else {
            words_[i >> 6] &= ~mask;
        }
    }

    std::vector<int> to_bipolar() const;

    /// Every neuron flipped. Padding stays zero.
    Pattern complemented() const;

    bool operator==(const Pattern&) const = default;

private:
    void check_index(std::uint32_t i) const {
        if (i >= n_neurons_) {
            throw DimensionError("neuron index " + std::to_string(i) + " out of range [0, " +
                                 std::to_string(n_neurons_) + ")");
        }
    }

    std::vector<std::uint64_t> words_;
    std::uint32_t n_neurons_ = 0;
};

/// Number of differing positions. Throws DimensionError on length mismatch.
std::uint32_t hamming_distance(const Pattern& a, const Pattern& b);

/// Inner product sum_i a_i * b_i = N - 2*HD(a, b), in [-N, N].
int overlap(const Pattern& a, const Pattern& b);

enum class PatternSource : std::uint8_t {
    rademacher = 0,
    image_pool = 1,
    external = 2,
};

const char* to_string(PatternSource source);
std::optional<PatternSource> pattern_source_from_string(std::string_view name);

/// Ordered pattern collection plus provenance. Order is meaningful: capacity
/// measurement always stores "the first K patterns" in this order.
struct PatternSet {
    std::vector<Pattern> patterns;
    PatternSource source = PatternSource::external;
    std::optional<double> target_hd;
    std::optional<double> skew_p;
    std::uint64_t seed = 0;

    std::size_t size() const { return patterns.size(); }
    std::uint32_t n_neurons() const { return patterns.empty() ? 0 : patterns.front().n_neurons(); }

    /// Throws unless all patterns share one N and the set is non-empty.
    void validate() const;
};

/// Mean Hamming distance over all C(S,2) unordered pairs. Exact: computed from
/// integer pair sums (small S) or per-position +1 counts (large S), both of
/// which equal the naive double loop. Throws InsufficientPatternsError if S < 2.
double mean_pairwise_hd(std::span<const Pattern> patterns);

inline double mean_pairwise_hd(const PatternSet& set) {
    return mean_pairwise_hd(std::span<const Pattern>(set.patterns));
}

/// Mean pairwise HD of the first k patterns.
inline double mean_pairwise_hd_prefix(const PatternSet& set, std::size_t k) {
    if (k > set.size()) {
        throw DimensionError("prefix length exceeds set size");
    }
    return mean_pairwise_hd(std::span<const Pattern>(set.patterns.data(), k));
}

} // namespace damlab
