#include "damlab/capacity.hpp"

#include <cassert>
#include <chrono>

namespace damlab {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

void finish_result(CapacityResult& r, const PatternSet& patterns, const CapacityPolicy& policy,
                   std::uint32_t effective_max) {
    if (r.k_max >= 2) {
        r.realized_mean_hd = mean_pairwise_hd_prefix(patterns, r.k_max);
    }
    r.saturated = r.k_max == effective_max;
    r.excluded = policy.exclude_above && r.k_max > *policy.exclude_above;
}

} // namespace

void CapacityPolicy::validate() const {
    if (max_k < 1) {
        throw SpecError("max_k must be >= 1");
    }
    if (exclude_above && *exclude_above >= max_k) {
        throw SpecError("exclude_above must be < max_k (or disabled)");
    }
    if (early_stop_threshold && *early_stop_threshold < 1) {
        throw SpecError("early stop threshold must be >= 1 (or disabled)");
    }
}

PrefixSearch binary_search_kmax(std::uint32_t max_k,
                                const std::function<bool(std::uint32_t)>& pred) {
    PrefixSearch out;
    std::uint32_t lo = 1;
    std::uint32_t hi = max_k;
    while (lo <= hi) {
        const std::uint32_t mid = lo + (hi - lo) / 2;
        ++out.n_checks;
        if (pred(mid)) {
            out.k_max = mid;
            lo = mid + 1;
        } else {
            hi = mid - 1;
        }
    }
    return out;
}

LinearScan linear_scan_kmax(std::uint32_t max_k,
                            const std::function<bool(std::uint32_t)>& pred) {
    LinearScan out;
    bool failed_before = false;
    for (std::uint32_t k = 1; k <= max_k; ++k) {
        ++out.n_checks;
        if (pred(k)) {
            out.k_max_global = k;
            if (!failed_before) {
                out.k_max_first_failure = k;
            } else {
                out.monotone = false;
            }
        } else {
            failed_before = true;
        }
    }
    return out;
}

CapacityResult find_kmax(const PatternSet& patterns, const DamConfig& config,
                         const CapacityPolicy& policy) {
    policy.validate();
    patterns.validate();
    const auto start = Clock::now();
    const auto effective_max =
        static_cast<std::uint32_t>(std::min<std::size_t>(policy.max_k, patterns.size()));
    const auto pred = [&](std::uint32_t k) { return check_prefix_retrieval(patterns, k, config); };

    CapacityResult r;
    if (policy.assume_monotone) {
        const PrefixSearch search = binary_search_kmax(effective_max, pred);
        r.k_max = search.k_max;
        r.n_checks = search.n_checks;
    } else {
        const LinearScan scan = linear_scan_kmax(effective_max, pred);
        r.k_max = scan.k_max_first_failure;
        r.n_checks = scan.n_checks;
    }
    // One stored pattern is always a fixed point, so the search cannot come
    // back empty unless the inputs were malformed.
    assert(r.k_max >= 1);
    finish_result(r, patterns, policy, effective_max);
    r.wall_time_ms = elapsed_ms(start);
    return r;
}

LinearCapacityResult find_kmax_linear(const PatternSet& patterns, const DamConfig& config,
                                      const CapacityPolicy& policy) {
    policy.validate();
    patterns.validate();
    const auto start = Clock::now();
    const auto effective_max =
        static_cast<std::uint32_t>(std::min<std::size_t>(policy.max_k, patterns.size()));
    const LinearScan scan = linear_scan_kmax(
        effective_max, [&](std::uint32_t k) { return check_prefix_retrieval(patterns, k, config); });

    LinearCapacityResult out;
    out.k_max_global = scan.k_max_global;
    out.monotone = scan.monotone;
    out.result.k_max = scan.k_max_first_failure;
    out.result.n_checks = scan.n_checks;
    assert(out.result.k_max >= 1);
    finish_result(out.result, patterns, policy, effective_max);
    out.result.wall_time_ms = elapsed_ms(start);
    return out;
}

SweepDecision apply_early_stop(std::span<const CapacityResult> results_so_far,
                               const CapacityPolicy& policy) {
    if (!policy.early_stop_threshold) {
        return SweepDecision::proceed;
    }
    const std::uint32_t needed = *policy.early_stop_threshold;
    if (results_so_far.size() < needed) {
        return SweepDecision::proceed;
    }
    for (std::size_t i = results_so_far.size() - needed; i < results_so_far.size(); ++i) {
        if (!results_so_far[i].saturated) {
            return SweepDecision::proceed;
        }
    }
    return SweepDecision::stop;
}

} // namespace damlab
