#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "damlab/bigint.hpp"
#include "damlab/pattern.hpp"

namespace damlab {

enum class NumericPath {
    exact_integer,
    fast_float_with_exact_fallback,
};

enum class TieMode {
    keep_state,  // zero update argument leaves the neuron unchanged
    strict_fail, // a tied neuron counts as flipped, so retrieval fails
};

struct DamConfig {
    std::uint32_t n_neurons = 784;
    std::uint32_t degree = 6;
    NumericPath numeric_path = NumericPath::fast_float_with_exact_fallback;
    TieMode tie_mode = TieMode::keep_state;
    // Relative margin under which the float path abstains and defers to the
    // exact integer path.
    double fast_margin = 1e-6;

    void validate() const;
};

/// Rectified polynomial interaction: x^degree for x > 0, otherwise 0.
/// Exact at any magnitude (784^38 has 110 decimal digits).
BigUInt rect_poly(std::int64_t x, std::uint32_t degree);

/// Dense associative memory holding its patterns directly (no trained weights).
/// A state update compares, per neuron, the rectified-polynomial energy of the
/// two candidate values: the neuron takes the value whose summed interaction
/// with all stored patterns is strictly larger, and keeps (or fails, per
/// TieMode) on exact ties.
///
/// Immutable after construction; all queries are const and safe to run
/// concurrently from multiple threads.
class StoredMemory {
public:
    StoredMemory(std::vector<Pattern> patterns, DamConfig config);

    std::size_t size() const { return patterns_.size(); }
    const DamConfig& config() const { return config_; }
    const Pattern& pattern(std::size_t mu) const { return patterns_[mu]; }

    /// Post-update value of neuron i when the network sits at `state`,
    /// computed on the configured numeric path.
    int update_sign(const Pattern& state, std::uint32_t i) const;

    /// Exact big-integer route. Deterministic and platform-independent.
    int update_sign_exact(const Pattern& state, std::uint32_t i) const;

    /// Float route; nullopt when the branch sums are within the configured
    /// relative margin (the caller must fall back to the exact route).
    std::optional<int> update_sign_fast(const Pattern& state, std::uint32_t i) const;

    /// True iff no neuron flips: update_sign(candidate, i) == candidate[i] for
    /// every i, which equals the outcome of one asynchronous sweep in any
    /// visiting order. The two branch powers per memory are computed once and
    /// reused across all N neurons.
    bool is_fixed_point(const Pattern& candidate) const;

private:
    enum class Decision { keep, flip, tie };

    Decision decide_exact(const Pattern& state, std::uint32_t i) const;
    int apply_tie(Decision d, int current) const;

    std::vector<Pattern> patterns_;
    DamConfig config_;
};

/// True iff each of the first k patterns is a fixed point of the memory
/// storing exactly those k patterns. Throws DimensionError if k is out of
/// [1, patterns.size()].
bool check_prefix_retrieval(const PatternSet& patterns, std::size_t k, const DamConfig& config);

} // namespace damlab
