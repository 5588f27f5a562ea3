#include "damlab/bigint.hpp"

#include <algorithm>

namespace damlab {

using u128 = unsigned __int128;

BigUInt& BigUInt::operator+=(const BigUInt& rhs) {
    const std::size_t n = std::max(limbs_.size(), rhs.limbs_.size());
    limbs_.resize(n, 0);
    std::uint64_t carry = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint64_t b = i < rhs.limbs_.size() ? rhs.limbs_[i] : 0;
        const u128 sum = static_cast<u128>(limbs_[i]) + b + carry;
        limbs_[i] = static_cast<std::uint64_t>(sum);
        carry = static_cast<std::uint64_t>(sum >> 64);
    }
    if (carry) limbs_.push_back(carry);
    return *this;
}

BigUInt operator*(const BigUInt& lhs, const BigUInt& rhs) {
    BigUInt out;
    if (lhs.is_zero() || rhs.is_zero()) return out;
    out.limbs_.assign(lhs.limbs_.size() + rhs.limbs_.size(), 0);
    for (std::size_t i = 0; i < lhs.limbs_.size(); ++i) {
        std::uint64_t carry = 0;
        for (std::size_t j = 0; j < rhs.limbs_.size(); ++j) {
            const u128 cur = static_cast<u128>(lhs.limbs_[i]) * rhs.limbs_[j] +
                             out.limbs_[i + j] + carry;
            out.limbs_[i + j] = static_cast<std::uint64_t>(cur);
            carry = static_cast<std::uint64_t>(cur >> 64);
        }
        out.limbs_[i + rhs.limbs_.size()] += carry;
    }
    out.trim();
    return out;
}

BigUInt BigUInt::pow(std::uint64_t base, std::uint32_t exp) {
    BigUInt result(1);
    BigUInt sq(base);
    while (exp != 0) {
        if (exp & 1u) result = result * sq;
        exp >>= 1;
        if (exp != 0) sq = sq * sq;
    }
    return result;
}

std::strong_ordering BigUInt::operator<=>(const BigUInt& rhs) const {
    if (limbs_.size() != rhs.limbs_.size()) {
        return limbs_.size() <=> rhs.limbs_.size();
    }
    for (std::size_t i = limbs_.size(); i-- > 0;) {
        if (limbs_[i] != rhs.limbs_[i]) {
            return limbs_[i] <=> rhs.limbs_[i];
        }
    }
    return std::strong_ordering::equal;
}

std::string BigUInt::to_decimal() const {
    if (is_zero()) return "0";
    // Repeatedly divide by 10^19 (largest power of ten in a 64-bit limb).
    constexpr std::uint64_t kChunk = 10'000'000'000'000'000'000ULL;
    std::vector<std::uint64_t> work = limbs_;
    std::string out;
    while (!work.empty()) {
        std::uint64_t rem = 0;
        for (std::size_t i = work.size(); i-- > 0;) {
            const u128 cur = (static_cast<u128>(rem) << 64) | work[i];
            work[i] = static_cast<std::uint64_t>(cur / kChunk);
            rem = static_cast<std::uint64_t>(cur % kChunk);
        }
        while (!work.empty() && work.back() == 0) work.pop_back();
        std::string digits = std::to_string(rem);
        if (!work.empty()) {
            digits.insert(0, 19 - digits.size(), '0');
        }
        out.insert(0, digits);
    }
    return out;
}

} // namespace damlab
