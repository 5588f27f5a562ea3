#include "damlab/generators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "damlab/rng.hpp"

namespace damlab {

void RademacherSpec::validate() const {
    if (!(p > 0.5) || !(p <= 1.0)) {
        throw SpecError("skew p must lie in (0.5, 1.0], got " + std::to_string(p));
    }
    if (n_patterns < 1 || n_neurons < 1) {
        throw SpecError("pattern and neuron counts must be positive");
    }
}

PatternSet gen_skewed_rademacher(const RademacherSpec& spec) {
    spec.validate();
    PatternSet set;
    set.source = PatternSource::rademacher;
    set.skew_p = spec.p;
    set.seed = spec.seed;
    set.patterns.reserve(spec.n_patterns);
    for (std::uint32_t mu = 0; mu < spec.n_patterns; ++mu) {
        CounterRng rng(spec.seed, mu);
        Pattern p(spec.n_neurons);
        for (std::uint32_t i = 0; i < spec.n_neurons; ++i) {
            if (rng.next_bernoulli(spec.p)) {
                p.set(i, 1);
            }
        }
        set.patterns.push_back(std::move(p));
    }
    return set;
}

namespace {

// Incremental view of the statistic the hill-climb tracks.
struct SeparationTracker {
    bool use_min = false;
    std::uint64_t pair_sum = 0; // sum of pairwise HDs
    std::uint32_t min_hd = std::numeric_limits<std::uint32_t>::max();

    // Statistic after hypothetically adding a pattern whose HD sum to the
    // current members is cand_sum (and min distance cand_min), with the set
    // growing from s to s+1 members.
    double with_candidate(std::size_t s, std::uint64_t cand_sum, std::uint32_t cand_min) const {
        if (use_min) {
            return static_cast<double>(std::min(min_hd, cand_min));
        }
        const std::uint64_t pairs = (s + 1) * s / 2;
        return static_cast<double>(pair_sum + cand_sum) / static_cast<double>(pairs);
    }

    double current(std::size_t s) const {
        if (s < 2) return std::numeric_limits<double>::quiet_NaN();
        if (use_min) return static_cast<double>(min_hd);
        const std::uint64_t pairs = s * (s - 1) / 2;
        return static_cast<double>(pair_sum) / static_cast<double>(pairs);
    }

    void accept(std::uint64_t cand_sum, std::uint32_t cand_min) {
        pair_sum += cand_sum;
        min_hd = std::min(min_hd, cand_min);
    }
};

} // namespace

namespace {

struct GreedyAttempt {
    PatternSet subset;
    double realized = std::numeric_limits<double>::quiet_NaN();
    bool complete = false; // reached subset_size
    bool in_band = false;
};

GreedyAttempt run_greedy_attempt(const PatternSet& pool, double target_hd,
                                 std::uint32_t subset_size, std::uint64_t seed,
                                 std::uint32_t attempt, const GreedyOptions& options,
                                 std::uint64_t max_trials) {
    CounterRng rng(seed, attempt);
    GreedyAttempt out;
    out.subset.source = pool.source;
    out.subset.target_hd = target_hd;
    out.subset.seed = seed;
    auto& members = out.subset.patterns;
    members.push_back(pool.patterns[rng.next_below(pool.size())]);

    SeparationTracker tracker;
    tracker.use_min = options.track_min_hd;
    std::uint64_t trials = 0;

    // Seeding the climb: every later accept is irrevocable, so a companion far
    // from the target strands the whole attempt. Hunt for an in-band pair
    // within a slice of the budget, then settle for the closest pair seen.
    {
        const std::uint64_t hunt_budget = std::min(max_trials, max_trials / 10 + 1);
        const Pattern* best_candidate = nullptr;
        std::uint32_t best_hd = 0;
        double best_dist = std::numeric_limits<double>::infinity();
        while (members.size() < 2 && trials < max_trials) {
            ++trials;
            const Pattern& candidate = pool.patterns[rng.next_below(pool.size())];
            const std::uint32_t hd = hamming_distance(candidate, members.front());
            if (hd == 0) continue;
            const double dist = std::fabs(static_cast<double>(hd) - target_hd);
            if (dist <= options.band) {
                tracker.accept(hd, hd);
                members.push_back(candidate);
                break;
            }
            if (dist < best_dist) {
                best_dist = dist;
                best_hd = hd;
                best_candidate = &candidate;
            }
            if (trials >= hunt_budget && best_candidate != nullptr) {
                tracker.accept(best_hd, best_hd);
                members.push_back(*best_candidate);
                break;
            }
        }
    }

    while (members.size() < subset_size && trials < max_trials) {
        ++trials;
        const Pattern& candidate = pool.patterns[rng.next_below(pool.size())];
        bool duplicate = false;
        std::uint64_t cand_sum = 0;
        std::uint32_t cand_min = std::numeric_limits<std::uint32_t>::max();
        for (const auto& member : members) {
            const std::uint32_t hd = hamming_distance(candidate, member);
            if (hd == 0) { // HD 0 is exact equality
                duplicate = true;
                break;
            }
            cand_sum += hd;
            cand_min = std::min(cand_min, hd);
        }
        if (duplicate) continue;

        const std::size_t s = members.size();
        const double stat_new = tracker.with_candidate(s, cand_sum, cand_min);
        const double dist_new = std::fabs(stat_new - target_hd);
        const double dist_cur = std::fabs(tracker.current(s) - target_hd);
        if (dist_new <= options.band || dist_new <= dist_cur) {
            tracker.accept(cand_sum, cand_min);
            members.push_back(candidate);
        }
    }

    out.complete = members.size() == subset_size;
    if (members.size() >= 2) {
        out.realized =
            options.track_min_hd ? tracker.current(members.size()) : mean_pairwise_hd(out.subset);
        out.in_band = out.complete && std::fabs(out.realized - target_hd) <= options.band;
    }
    return out;
}

} // namespace

PatternSet greedy_select(const PatternSet& pool, double target_hd, std::uint32_t subset_size,
                         std::uint64_t seed, const GreedyOptions& options) {
    pool.validate();
    if (subset_size < 1) {
        throw SpecError("subset size must be >= 1");
    }
    if (pool.size() < subset_size) {
        throw SpecError("pool has " + std::to_string(pool.size()) + " patterns, need " +
                        std::to_string(subset_size));
    }
    if (!(target_hd >= 0.0) || target_hd > pool.n_neurons()) {
        throw SpecError("target HD " + std::to_string(target_hd) + " outside [0, N]");
    }

    const std::uint64_t max_trials =
        options.max_trials != 0 ? options.max_trials : 200ULL * subset_size;
    const std::uint32_t attempts = std::max(1u, options.restarts);

    if (subset_size == 1) {
        // No pairwise statistic to steer by: a single uniform draw.
        CounterRng rng(seed, 0);
        PatternSet subset;
        subset.source = pool.source;
        subset.target_hd = target_hd;
        subset.seed = seed;
        subset.patterns.push_back(pool.patterns[rng.next_below(pool.size())]);
        return subset;
    }

    std::optional<GreedyAttempt> best;
    for (std::uint32_t attempt = 0; attempt < attempts; ++attempt) {
        GreedyAttempt run =
            run_greedy_attempt(pool, target_hd, subset_size, seed, attempt, options, max_trials);
        if (run.in_band) {
            return std::move(run.subset);
        }
        const bool closer =
            !best || (std::isnan(best->realized) && !std::isnan(run.realized)) ||
            (!std::isnan(run.realized) && !std::isnan(best->realized) &&
             std::fabs(run.realized - target_hd) < std::fabs(best->realized - target_hd));
        if (closer) {
            best = std::move(run);
        }
    }

    const auto& b = *best;
    throw InfeasibleTargetError(
        "greedy selection: no attempt reached the band (target " + std::to_string(target_hd) +
            ", best realized " + std::to_string(b.realized) + " with " +
            std::to_string(b.subset.size()) + "/" + std::to_string(subset_size) +
            " accepted over " + std::to_string(attempts) + " attempts)",
        b.subset, b.realized);
}

DatasetPlan DatasetPlan::artificial(std::uint64_t base_seed) {
    DatasetPlan plan;
    plan.kind = PlanKind::artificial;
    plan.base_seed = base_seed;
    plan.subset_specs.reserve(50);
    for (int i = 0; i < 50; ++i) {
        plan.subset_specs.push_back(static_cast<double>(51 + i) / 100.0);
    }
    return plan;
}

DatasetPlan DatasetPlan::pool_selected(std::uint64_t base_seed) {
    DatasetPlan plan;
    plan.kind = PlanKind::pool_selected;
    plan.base_seed = base_seed;
    plan.subset_specs.reserve(53);
    for (int j = 0; j < 53; ++j) {
        plan.subset_specs.push_back(30.0 + j * (190.0 - 30.0) / 52.0);
    }
    return plan;
}

std::vector<PatternSet> build_dataset(const DatasetPlan& plan, const PatternSet* pool) {
    if (plan.kind == PlanKind::pool_selected && pool == nullptr) {
        throw SpecError("pool-selected plan needs a pattern pool");
    }
    if (plan.kind == PlanKind::artificial && pool != nullptr) {
        throw SpecError("artificial plan does not take a pool");
    }
    if (plan.subset_specs.empty()) {
        throw SpecError("plan lists no subsets");
    }
    std::vector<PatternSet> subsets;
    subsets.reserve(plan.subset_specs.size());
    for (std::size_t i = 0; i < plan.subset_specs.size(); ++i) {
        const std::uint64_t subset_seed = derive_seed(plan.base_seed, i);
        if (plan.kind == PlanKind::artificial) {
            RademacherSpec spec;
            spec.p = plan.subset_specs[i];
            spec.n_patterns = plan.subset_size;
            spec.n_neurons = plan.n_neurons;
            spec.seed = subset_seed;
            subsets.push_back(gen_skewed_rademacher(spec));
        } else {
            subsets.push_back(greedy_select(*pool, plan.subset_specs[i], plan.subset_size,
                                            subset_seed, plan.greedy));
        }
    }
    return subsets;
}

} // namespace damlab
