#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

namespace damlab {

/// Unsigned arbitrary-precision integer, base 2^64 limbs, little-endian,
/// canonical (no trailing zero limbs; zero is the empty limb vector).
/// Only the operations the exact update path needs: add, multiply, integer
/// power, three-way compare. All operations are exact; nothing ever rounds.
class BigUInt {
public:
    BigUInt() = default;
    explicit BigUInt(std::uint64_t v) {
        if (v != 0) limbs_.push_back(v);
    }

    /// base^exp by repeated squaring. pow(x, 0) == 1 for every x.
    static BigUInt pow(std::uint64_t base, std::uint32_t exp);

    bool is_zero() const { return limbs_.empty(); }

    BigUInt& operator+=(const BigUInt& rhs);
    friend BigUInt operator+(BigUInt lhs, const BigUInt& rhs) {
        lhs += rhs;
        return lhs;
    }
    friend BigUInt operator*(const BigUInt& lhs, const BigUInt& rhs);

    std::strong_ordering operator<=>(const BigUInt& rhs) const;
    bool operator==(const BigUInt& rhs) const { return limbs_ == rhs.limbs_; }

    std::string to_decimal() const;

    const std::vector<std::uint64_t>& limbs() const { return limbs_; }

private:
    void trim() {
        while (!limbs_.empty() && limbs_.back() == 0) limbs_.pop_back();
    }

    std::vector<std::uint64_t> limbs_;
};

} // namespace damlab
