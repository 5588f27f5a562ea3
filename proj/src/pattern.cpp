#include "damlab/pattern.hpp"

#include <bit>
#include <string_view>

namespace damlab {

Pattern Pattern::from_bipolar(std::span<const int> values) {
    Pattern p(static_cast<std::uint32_t>(values.size()));
    for (std::uint32_t i = 0; i < values.size(); ++i) {
        if (values[i] > 0) {
            p.words_[i >> 6] |= 1ULL << (i & 63);
        }
    }
    return p;
}

Pattern Pattern::from_words(std::vector<std::uint64_t> words, std::uint32_t n_neurons) {
    const std::size_t need = (n_neurons + 63) / 64;
    if (words.size() != need) {
        throw DimensionError("word count does not match neuron count");
    }
    Pattern p;
    p.words_ = std::move(words);
    p.n_neurons_ = n_neurons;
    if (n_neurons % 64 != 0 && !p.words_.empty()) {
        p.words_.back() &= (1ULL << (n_neurons % 64)) - 1;
    }
    return p;
}

std::vector<int> Pattern::to_bipolar() const {
    std::vector<int> out(n_neurons_);
    for (std::uint32_t i = 0; i < n_neurons_; ++i) {
        out[i] = ((words_[i >> 6] >> (i & 63)) & 1u) ? 1 : -1;
    }
    return out;
}

Pattern Pattern::complemented() const {
    Pattern p(n_neurons_);
    for (std::size_t w = 0; w < words_.size(); ++w) {
        p.words_[w] = ~words_[w];
    }
    if (n_neurons_ % 64 != 0 && !p.words_.empty()) {
        p.words_.back() &= (1ULL << (n_neurons_ % 64)) - 1;
    }
    return p;
}

std::uint32_t hamming_distance(const Pattern& a, const Pattern& b) {
    if (a.n_neurons() != b.n_neurons()) {
        throw DimensionError("hamming_distance: neuron counts differ (" +
                             std::to_string(a.n_neurons()) + " vs " +
                             std::to_string(b.n_neurons()) + ")");
    }
    const auto& wa = a.words();
    const auto& wb = b.words();
    std::uint32_t hd = 0;
    for (std::size_t w = 0; w < wa.size(); ++w) {
        hd += static_cast<std::uint32_t>(std::popcount(wa[w] ^ wb[w]));
    }
    return hd;
}

int overlap(const Pattern& a, const Pattern& b) {
    const std::uint32_t hd = hamming_distance(a, b);
    return static_cast<int>(a.n_neurons()) - 2 * static_cast<int>(hd);
}

const char* to_string(PatternSource source) {
    switch (source) {
        case PatternSource::rademacher: return "rademacher";
        case PatternSource::image_pool: return "image_pool";
        case PatternSource::external: return "external";
    }
    return "external";
}

std::optional<PatternSource> pattern_source_from_string(std::string_view name) {
    if (name == "rademacher") return PatternSource::rademacher;
    if (name == "image_pool") return PatternSource::image_pool;
    if (name == "external") return PatternSource::external;
    return std::nullopt;
}

void PatternSet::validate() const {
    if (patterns.empty()) {
        throw SpecError("pattern set must contain at least one pattern");
    }
    const std::uint32_t n = patterns.front().n_neurons();
    for (const auto& p : patterns) {
        if (p.n_neurons() != n) {
            throw DimensionError("pattern set mixes neuron counts");
        }
    }
}

double mean_pairwise_hd(std::span<const Pattern> patterns) {
    const std::size_t s = patterns.size();
    if (s < 2) {
        throw InsufficientPatternsError("mean pairwise HD needs at least 2 patterns, got " +
                                        std::to_string(s));
    }
    const std::uint64_t n_pairs = static_cast<std::uint64_t>(s) * (s - 1) / 2;
    std::uint64_t total = 0;
    if (s <= 512) {
        for (std::size_t i = 0; i < s; ++i) {
            for (std::size_t j = i + 1; j < s; ++j) {
                total += hamming_distance(patterns[i], patterns[j]);
            }
        }
    } else {
        // Position-wise: a position with c set bits differs in c*(s-c) pairs.
        const std::uint32_t n = patterns.front().n_neurons();
        for (const auto& p : patterns) {
            if (p.n_neurons() != n) {
                throw DimensionError("mean pairwise HD: neuron counts differ");
            }
        }
        std::vector<std::uint64_t> ones(n, 0);
        for (const auto& p : patterns) {
            const auto& w = p.words();
            for (std::uint32_t i = 0; i < n; ++i) {
                ones[i] += (w[i >> 6] >> (i & 63)) & 1u;
            }
        }
        for (std::uint32_t i = 0; i < n; ++i) {
            total += ones[i] * (s - ones[i]);
        }
    }
    return static_cast<double>(total) / static_cast<double>(n_pairs);
}

} // namespace damlab
