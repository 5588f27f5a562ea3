#pragma once

#include <cstdint>
#include <vector>

#include "damlab/pattern.hpp"

namespace damlab {

/// Skewed i.i.d. Rademacher patterns: each neuron is +1 with probability p.
struct RademacherSpec {
    double p = 0.51; // must lie in (0.5, 1.0]
    std::uint32_t n_patterns = 50;
    std::uint32_t n_neurons = 784;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Deterministic: pattern mu draws from the counter stream keyed by
/// (seed, mu), so identical specs are bit-identical on any platform.
PatternSet gen_skewed_rademacher(const RademacherSpec& spec);

struct GreedyOptions {
    // Acceptance band around the target mean HD. A candidate is accepted when
    // the post-insertion mean moves weakly toward the target or lands inside
    // the band; once inside, the subset can never leave it.
    double band = 2.0;
    // Pool draws allowed per attempt; 0 means 200 * subset_size.
    std::uint64_t max_trials = 0;
    // Accepts are irrevocable, so an early off-target accept can strand the
    // climb; each restart redraws from the stream keyed by (seed, attempt).
    std::uint32_t restarts = 10;
    // Hill-climb on the minimum pairwise HD instead of the mean.
    bool track_min_hd = false;
};

/// Raised when greedy selection cannot assemble an in-band subset. Carries
/// whatever was accepted so far and its realized mean HD (NaN below 2 patterns).
class InfeasibleTargetError : public Error {
public:
    InfeasibleTargetError(std::string what, PatternSet best_effort, double realized_hd)
        : Error(std::move(what)),
          best_effort_(std::move(best_effort)),
          realized_hd_(realized_hd) {}

    const PatternSet& best_effort() const { return best_effort_; }
    double realized_hd() const { return realized_hd_; }

private:
    PatternSet best_effort_;
    double realized_hd_;
};

/// Iterative hill-climb: sample pool patterns with replacement (skipping exact
/// duplicates of accepted ones) and accept those that move the tracked
/// separation statistic weakly toward target_hd. The first pattern is a
/// uniform pool draw. Draws come from the counter stream keyed by seed.
PatternSet greedy_select(const PatternSet& pool, double target_hd, std::uint32_t subset_size,
                         std::uint64_t seed, const GreedyOptions& options = {});

enum class PlanKind { artificial, pool_selected };

struct DatasetPlan {
    PlanKind kind = PlanKind::artificial;
    // Per subset: skew p for artificial plans, target mean HD for pool plans.
    std::vector<double> subset_specs;
    std::uint32_t subset_size = 50;
    std::uint32_t n_neurons = 784;
    std::uint64_t base_seed = 0;
    GreedyOptions greedy;

    /// 50 subsets, p = 0.51, 0.52, ..., 1.00.
    static DatasetPlan artificial(std::uint64_t base_seed);

    /// 53 subsets, targets evenly spaced over [30, 190].
    static DatasetPlan pool_selected(std::uint64_t base_seed);
};

/// Build every subset of the plan. Subset i uses the seed derived from
/// (base_seed, i). pool must be present exactly for pool_selected plans.
std::vector<PatternSet> build_dataset(const DatasetPlan& plan, const PatternSet* pool);

} // namespace damlab
