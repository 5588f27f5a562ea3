#include "damlab/dam.hpp"

#include <cmath>
#include <string>

namespace damlab {

namespace {

// Branch term on the float route: (x/N)^degree for x > 0, else 0. Normalizing
// by N keeps every term in (0, 1]; the smallest positive value, (1/784)^38,
// is ~1e-110 and nowhere near long double underflow.
long double norm_term(std::int64_t x, std::uint32_t n_neurons, std::uint32_t degree) {
    if (x <= 0) return 0.0L;
    return std::pow(static_cast<long double>(x) / n_neurons, static_cast<long double>(degree));
}

enum class FloatCompare { left, right, tie, abstain };

FloatCompare compare_with_margin(long double lhs, long double rhs, double margin) {
    if (lhs == 0.0L && rhs == 0.0L) {
        // A term is zero iff its branch argument is <= 0, so both sums being
        // float-zero certifies the exact sums are zero too.
        return FloatCompare::tie;
    }
    const long double diff = std::fabs(lhs - rhs);
    if (diff <= margin * std::max(lhs, rhs)) {
        return FloatCompare::abstain;
    }
    return lhs > rhs ? FloatCompare::left : FloatCompare::right;
}

} // namespace

void DamConfig::validate() const {
    if (degree < 1) {
        throw SpecError("polynomial degree must be >= 1");
    }
    if (n_neurons < 2) {
        throw SpecError("need at least 2 neurons");
    }
    if (!(fast_margin >= 0.0) || fast_margin >= 1.0) {
        throw SpecError("fast margin must lie in [0, 1)");
    }
}

BigUInt rect_poly(std::int64_t x, std::uint32_t degree) {
    if (x <= 0) return BigUInt{};
    return BigUInt::pow(static_cast<std::uint64_t>(x), degree);
}

StoredMemory::StoredMemory(std::vector<Pattern> patterns, DamConfig config)
    : patterns_(std::move(patterns)), config_(config) {
    config_.validate();
    if (patterns_.empty()) {
        throw SpecError("stored memory needs at least one pattern");
    }
    for (const auto& p : patterns_) {
        if (p.n_neurons() != config_.n_neurons) {
            throw DimensionError("stored pattern length " + std::to_string(p.n_neurons()) +
                                 " does not match configured " +
                                 std::to_string(config_.n_neurons));
        }
    }
}

int StoredMemory::apply_tie(Decision d, int current) const {
    switch (d) {
        case Decision::keep: return current;
        case Decision::flip: return -current;
        case Decision::tie:
            return config_.tie_mode == TieMode::keep_state ? current : -current;
    }
    return current;
}

StoredMemory::Decision StoredMemory::decide_exact(const Pattern& state, std::uint32_t i) const {
    BigUInt s_plus;
    BigUInt s_minus;
    for (const auto& memory : patterns_) {
        const std::int64_t o = overlap(memory, state);
        const std::int64_t xi = memory.get(i);
        const std::int64_t si = state.get(i);
        s_plus += rect_poly(o - xi * si + xi, config_.degree);
        s_minus += rect_poly(o - xi * si - xi, config_.degree);
    }
    const auto cmp = s_plus <=> s_minus;
    if (cmp == std::strong_ordering::equal) return Decision::tie;
    const int updated = cmp > 0 ? 1 : -1;
    return updated == state.get(i) ? Decision::keep : Decision::flip;
}

int StoredMemory::update_sign_exact(const Pattern& state, std::uint32_t i) const {
    if (state.n_neurons() != config_.n_neurons) {
        throw DimensionError("state length does not match memory");
    }
    return apply_tie(decide_exact(state, i), state.get(i));
}

std::optional<int> StoredMemory::update_sign_fast(const Pattern& state, std::uint32_t i) const {
    if (state.n_neurons() != config_.n_neurons) {
        throw DimensionError("state length does not match memory");
    }
    long double s_plus = 0.0L;
    long double s_minus = 0.0L;
    for (const auto& memory : patterns_) {
        const std::int64_t o = overlap(memory, state);
        const std::int64_t xi = memory.get(i);
        const std::int64_t si = state.get(i);
        s_plus += norm_term(o - xi * si + xi, config_.n_neurons, config_.degree);
        s_minus += norm_term(o - xi * si - xi, config_.n_neurons, config_.degree);
    }
    switch (compare_with_margin(s_plus, s_minus, config_.fast_margin)) {
        case FloatCompare::left: return 1;
        case FloatCompare::right: return -1;
        case FloatCompare::tie: return apply_tie(Decision::tie, state.get(i));
        case FloatCompare::abstain: return std::nullopt;
    }
    return std::nullopt;
}

int StoredMemory::update_sign(const Pattern& state, std::uint32_t i) const {
    if (config_.numeric_path == NumericPath::fast_float_with_exact_fallback) {
        if (const auto fast = update_sign_fast(state, i)) {
            return *fast;
        }
    }
    return update_sign_exact(state, i);
}

bool StoredMemory::is_fixed_point(const Pattern& candidate) const {
    if (candidate.n_neurons() != config_.n_neurons) {
        throw DimensionError("candidate length does not match memory");
    }
    const std::size_t k = patterns_.size();
    const std::size_t n_words = candidate.word_count();
    const std::uint32_t n = config_.n_neurons;
    const std::uint32_t degree = config_.degree;
    const bool use_float = config_.numeric_path == NumericPath::fast_float_with_exact_fallback;

    // Per memory: full overlap with the candidate and the disagreement mask.
    // For neuron i the branch matching candidate[i] always scores F(o), the
    // opposite branch scores F(o-2) where memory and candidate agree at i and
    // F(o+2) where they differ, so three powers per memory cover all N neurons.
    std::vector<std::int64_t> overlaps(k);
    std::vector<std::uint64_t> xor_words(k * n_words);
    for (std::size_t mu = 0; mu < k; ++mu) {
        overlaps[mu] = overlap(patterns_[mu], candidate);
        const auto& mw = patterns_[mu].words();
        const auto& cw = candidate.words();
        for (std::size_t w = 0; w < n_words; ++w) {
            xor_words[mu * n_words + w] = mw[w] ^ cw[w];
        }
    }

    std::vector<long double> same_f;
    std::vector<long double> minus_f;
    std::vector<long double> plus_f;
    long double total_same_f = 0.0L;
    if (use_float) {
        same_f.resize(k);
        minus_f.resize(k);
        plus_f.resize(k);
        for (std::size_t mu = 0; mu < k; ++mu) {
            same_f[mu] = norm_term(overlaps[mu], n, degree);
            minus_f[mu] = norm_term(overlaps[mu] - 2, n, degree);
            plus_f[mu] = norm_term(overlaps[mu] + 2, n, degree);
            total_same_f += same_f[mu];
        }
    }

    // Exact powers are built lazily: only abstaining neurons (or the pure
    // exact path) pay for big-integer arithmetic.
    bool exact_ready = false;
    BigUInt total_same;
    std::vector<BigUInt> minus_exact;
    std::vector<BigUInt> plus_exact;
    auto ensure_exact = [&] {
        if (exact_ready) return;
        minus_exact.resize(k);
        plus_exact.resize(k);
        for (std::size_t mu = 0; mu < k; ++mu) {
            total_same += rect_poly(overlaps[mu], degree);
            minus_exact[mu] = rect_poly(overlaps[mu] - 2, degree);
            plus_exact[mu] = rect_poly(overlaps[mu] + 2, degree);
        }
        exact_ready = true;
    };

    auto decide_exact_neuron = [&](std::size_t word, std::uint64_t mask) {
        ensure_exact();
        BigUInt other;
        for (std::size_t mu = 0; mu < k; ++mu) {
            other += (xor_words[mu * n_words + word] & mask) ? plus_exact[mu] : minus_exact[mu];
            if (other > total_same) return Decision::flip;
        }
        const auto cmp = total_same <=> other;
        if (cmp == std::strong_ordering::equal) return Decision::tie;
        return cmp > 0 ? Decision::keep : Decision::flip;
    };

    for (std::uint32_t i = 0; i < n; ++i) {
        const std::size_t word = i >> 6;
        const std::uint64_t mask = 1ULL << (i & 63);
        Decision decision;
        if (use_float) {
            long double other_f = 0.0L;
            for (std::size_t mu = 0; mu < k; ++mu) {
                other_f += (xor_words[mu * n_words + word] & mask) ? plus_f[mu] : minus_f[mu];
            }
            switch (compare_with_margin(total_same_f, other_f, config_.fast_margin)) {
                case FloatCompare::left: decision = Decision::keep; break;
                case FloatCompare::right: decision = Decision::flip; break;
                case FloatCompare::tie: decision = Decision::tie; break;
                case FloatCompare::abstain: decision = decide_exact_neuron(word, mask); break;
            }
        } else {
            decision = decide_exact_neuron(word, mask);
        }
        if (decision == Decision::flip ||
            (decision == Decision::tie && config_.tie_mode == TieMode::strict_fail)) {
            return false;
        }
    }
    return true;
}

bool check_prefix_retrieval(const PatternSet& patterns, std::size_t k, const DamConfig& config) {
    if (k < 1 || k > patterns.size()) {
        throw DimensionError("prefix length " + std::to_string(k) + " out of [1, " +
                             std::to_string(patterns.size()) + "]");
    }
    StoredMemory memory(
        std::vector<Pattern>(patterns.patterns.begin(),
                             patterns.patterns.begin() + static_cast<std::ptrdiff_t>(k)),
        config);
    for (std::size_t mu = 0; mu < k; ++mu) {
        if (!memory.is_fixed_point(patterns.patterns[mu])) {
            return false;
        }
    }
    return true;
}

} // namespace damlab
