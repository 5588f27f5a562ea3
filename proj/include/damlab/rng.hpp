#pragma once

#include <cstdint>
#include <cmath>

namespace damlab {

// SplitMix64 finalizer. Full-avalanche mix of a 64-bit word.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
}

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// Derive an independent stream key from a base seed and up to two stream ids.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) {
    std::uint64_t k = mix64(base + kGolden);
    k = mix64(k ^ (mix64(a + kGolden) + 0x1D8E4E27C47D124FULL));
    k = mix64(k ^ (mix64(b + kGolden) + 0xA24BAED4963EE407ULL));
    return k;
}

// SplitMix64 run in counter mode: draw k of a stream is mix64(key + (k+1)*golden).
// State is just (key, counter), so streams keyed by (seed, subset, draw index)
// reproduce bit-identically on any platform and under any scheduling.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t key) : key_(key) {}
    CounterRng(std::uint64_t base, std::uint64_t stream) : key_(derive_seed(base, stream)) {}
    CounterRng(std::uint64_t base, std::uint64_t s1, std::uint64_t s2)
        : key_(derive_seed(base, s1, s2)) {}

    std::uint64_t next_u64() {
        ++counter_;
        return mix64(key_ + counter_ * kGolden);
    }

    // Uniform in [0, 1), 53 random bits.
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform in [0, bound). Lemire multiply-shift; bias is < bound / 2^64.
    std::uint64_t next_below(std::uint64_t bound) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
    }

    // True with probability p. p is quantized to 53 bits so the comparison is
    // plain integer arithmetic (identical on every IEEE-754 platform).
    bool next_bernoulli(double p) {
        if (p >= 1.0) return true;
        if (p <= 0.0) return false;
        const auto threshold = static_cast<std::uint64_t>(std::llround(p * 0x1.0p53));
        return (next_u64() >> 11) < threshold;
    }

    std::uint64_t draws() const { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

} // namespace damlab
