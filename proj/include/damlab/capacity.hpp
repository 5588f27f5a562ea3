#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>

#include "damlab/dam.hpp"
#include "damlab/pattern.hpp"

namespace damlab {

struct CapacityPolicy {
    std::uint32_t max_k = 50;
    // K_max values strictly above this are flagged excluded (saturation
    // distorts plots). nullopt disables exclusion.
    std::optional<std::uint32_t> exclude_above = 49;
    // Stop a sweep series after this many consecutive saturated results.
    // nullopt disables early stopping.
    std::optional<std::uint32_t> early_stop_threshold = 2;
    // Binary search is only valid if prefix success is non-increasing in K;
    // set false to fall back to the linear first-failure scan.
    bool assume_monotone = true;

    void validate() const;
};

struct CapacityResult {
    std::uint32_t k_max = 0;
    // Mean pairwise HD of the first k_max stored patterns; defined for k_max >= 2.
    std::optional<double> realized_mean_hd;
    bool saturated = false;
    bool excluded = false;
    std::uint32_t n_checks = 0;
    double wall_time_ms = 0.0;
};

struct PrefixSearch {
    std::uint32_t k_max = 0;
    std::uint32_t n_checks = 0;
};

/// Largest K in [1, max_k] with pred(K) true, assuming pred is a step function
/// (true up to some K, false after). At most ceil(log2(max_k)) + 1 calls.
PrefixSearch binary_search_kmax(std::uint32_t max_k,
                                const std::function<bool(std::uint32_t)>& pred);

struct LinearScan {
    std::uint32_t k_max_first_failure = 0;
    std::uint32_t k_max_global = 0;
    bool monotone = true;
    std::uint32_t n_checks = 0;
};

/// Full scan K = 1..max_k. Records both the largest success before the first
/// failure and the largest success overall; a gap between them certifies the
/// predicate is not monotone.
LinearScan linear_scan_kmax(std::uint32_t max_k,
                            const std::function<bool(std::uint32_t)>& pred);

/// Memory capacity via binary search over prefix sizes (or the linear scan
/// when policy.assume_monotone is false). k_max >= 1 always: a single stored
/// pattern is unconditionally stable.
CapacityResult find_kmax(const PatternSet& patterns, const DamConfig& config,
                         const CapacityPolicy& policy);

struct LinearCapacityResult {
    CapacityResult result; // first-failure semantics
    std::uint32_t k_max_global = 0;
    bool monotone = true;
};

/// Linear-scan oracle for find_kmax; also detects non-monotone instances.
LinearCapacityResult find_kmax_linear(const PatternSet& patterns, const DamConfig& config,
                                      const CapacityPolicy& policy);

enum class SweepDecision { proceed, stop };

/// Early stopping for one (dataset, degree) series, inspected after each
/// result. results_so_far must be ordered by ascending subset separation.
SweepDecision apply_early_stop(std::span<const CapacityResult> results_so_far,
                               const CapacityPolicy& policy);

} // namespace damlab
