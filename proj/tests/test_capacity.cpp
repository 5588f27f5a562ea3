#include <doctest.h>

#include <cmath>
#include <random>

#include "damlab/capacity.hpp"
#include "damlab/generators.hpp"
#include "test_util.hpp"

using namespace damlab;
using test::random_pattern;

namespace {

std::uint32_t check_bound(std::uint32_t max_k) {
    return static_cast<std::uint32_t>(std::ceil(std::log2(static_cast<double>(max_k)))) + 1;
}

PatternSet random_set(std::mt19937_64& rng, std::uint32_t n, std::size_t s, double p) {
    PatternSet set;
    for (std::size_t i = 0; i < s; ++i) set.patterns.push_back(random_pattern(rng, n, p));
    return set;
}

} // namespace

TEST_CASE("binary search on stub step predicates") {
    SUBCASE("true up to 7") {
        const auto out = binary_search_kmax(50, [](std::uint32_t k) { return k <= 7; });
        CHECK(out.k_max == 7);
        CHECK(out.n_checks <= check_bound(50));
    }
    SUBCASE("all prefixes succeed") {
        const auto out = binary_search_kmax(50, [](std::uint32_t) { return true; });
        CHECK(out.k_max == 50);
    }
    SUBCASE("random thresholds keep the check-count bound") {
        std::mt19937_64 rng(11);
        for (int rep = 0; rep < 500; ++rep) {
            const std::uint32_t max_k = 1 + rng() % 200;
            const std::uint32_t t = rng() % (max_k + 2); // may exceed max_k or be 0
            const auto out =
                binary_search_kmax(max_k, [&](std::uint32_t k) { return k <= t; });
            CHECK(out.k_max == std::min(t, max_k));
            CHECK(out.n_checks <= check_bound(max_k));
        }
    }
}

TEST_CASE("linear scan records both semantics") {
    // K=1 ok, K=2 fails, K=3 ok again
    const auto scan = linear_scan_kmax(3, [](std::uint32_t k) { return k != 2; });
    CHECK(scan.k_max_first_failure == 1);
    CHECK(scan.k_max_global == 3);
    CHECK_FALSE(scan.monotone);
    CHECK(scan.n_checks == 3);

    const auto mono = linear_scan_kmax(6, [](std::uint32_t k) { return k <= 4; });
    CHECK(mono.k_max_first_failure == 4);
    CHECK(mono.k_max_global == 4);
    CHECK(mono.monotone);
}

TEST_CASE("find_kmax on saturating and small instances") {
    std::mt19937_64 rng(22);
    DamConfig config;
    config.n_neurons = 64;
    config.degree = 8;
    CapacityPolicy policy;
    policy.max_k = 20;
    policy.exclude_above = 19;

    SUBCASE("well separated patterns saturate and get excluded") {
        const auto set = random_set(rng, 64, 20, 0.5);
        const auto result = find_kmax(set, config, policy);
        CHECK(result.k_max == 20);
        CHECK(result.saturated);
        CHECK(result.excluded);
        CHECK(result.n_checks <= check_bound(20));
        CHECK(result.realized_mean_hd.has_value());
    }

    SUBCASE("k_max is at least 1 even on pathological sets") {
        PatternSet identical;
        identical.patterns.assign(10, random_pattern(rng, 64));
        config.degree = 2;
        const auto result = find_kmax(identical, config, policy);
        CHECK(result.k_max >= 1);
    }
}

TEST_CASE("binary search equals the linear oracle on monotone instances") {
    std::mt19937_64 rng(33);
    DamConfig config;
    config.n_neurons = 64;
    CapacityPolicy policy;
    policy.max_k = 20;
    policy.exclude_above = std::nullopt;

    int non_monotone = 0;
    for (int rep = 0; rep < 60; ++rep) {
        const std::uint32_t degrees[] = {2, 4, 8};
        config.degree = degrees[rep % 3];
        const double p = 0.55 + 0.35 * (rng() % 100) / 100.0;
        const auto set = random_set(rng, 64, 20, p);

        const auto fast = find_kmax(set, config, policy);
        const auto oracle = find_kmax_linear(set, config, policy);
        if (oracle.monotone) {
            CHECK(fast.k_max == oracle.result.k_max);
        } else {
            ++non_monotone;
        }
        CHECK(fast.k_max >= 1);
        CHECK(oracle.result.k_max >= 1);
    }
    MESSAGE("non-monotone instances: ", non_monotone, "/60");
}

TEST_CASE("realized mean HD is recomputed over the k_max prefix") {
    std::mt19937_64 rng(44);
    DamConfig config;
    config.n_neurons = 48;
    config.degree = 2;
    CapacityPolicy policy;
    policy.max_k = 12;
    policy.exclude_above = std::nullopt;

    const auto set = random_set(rng, 48, 12, 0.85);
    const auto result = find_kmax(set, config, policy);
    if (result.k_max >= 2) {
        CHECK(*result.realized_mean_hd ==
              doctest::Approx(mean_pairwise_hd_prefix(set, result.k_max)));
    } else {
        CHECK(!result.realized_mean_hd.has_value());
    }
}

TEST_CASE("determinism: identical inputs give identical results") {
    std::mt19937_64 rng(55);
    const auto set = random_set(rng, 64, 15, 0.7);
    DamConfig config;
    config.n_neurons = 64;
    config.degree = 4;
    CapacityPolicy policy;
    policy.max_k = 15;
    policy.exclude_above = 14;

    const auto a = find_kmax(set, config, policy);
    const auto b = find_kmax(set, config, policy);
    CHECK(a.k_max == b.k_max);
    CHECK(a.realized_mean_hd == b.realized_mean_hd);
    CHECK(a.saturated == b.saturated);
    CHECK(a.excluded == b.excluded);
    CHECK(a.n_checks == b.n_checks);
}

TEST_CASE("early stopping decisions") {
    CapacityPolicy policy; // threshold 2

    auto saturated = [] {
        CapacityResult r;
        r.k_max = 50;
        r.saturated = true;
        return r;
    };
    auto open = [] {
        CapacityResult r;
        r.k_max = 17;
        return r;
    };

    std::vector<CapacityResult> history;
    CHECK(apply_early_stop(history, policy) == SweepDecision::proceed);

    history = {saturated()};
    CHECK(apply_early_stop(history, policy) == SweepDecision::proceed);

    history = {open(), saturated(), saturated()};
    CHECK(apply_early_stop(history, policy) == SweepDecision::stop);

    history = {saturated(), open(), saturated()};
    CHECK(apply_early_stop(history, policy) == SweepDecision::proceed);

    policy.early_stop_threshold = std::nullopt;
    history = {saturated(), saturated(), saturated()};
    CHECK(apply_early_stop(history, policy) == SweepDecision::proceed);
}

TEST_CASE("policy validation") {
    CapacityPolicy policy;
    policy.max_k = 0;
    CHECK_THROWS_AS(policy.validate(), SpecError);
    policy.max_k = 50;
    policy.exclude_above = 50;
    CHECK_THROWS_AS(policy.validate(), SpecError);
    policy.exclude_above = 49;
    CHECK_NOTHROW(policy.validate());
}

TEST_CASE("assume_monotone=false routes through the linear scan") {
    std::mt19937_64 rng(66);
    const auto set = random_set(rng, 64, 10, 0.8);
    DamConfig config;
    config.n_neurons = 64;
    config.degree = 3;
    CapacityPolicy policy;
    policy.max_k = 10;
    policy.exclude_above = std::nullopt;
    policy.assume_monotone = false;

    const auto result = find_kmax(set, config, policy);
    CHECK(result.n_checks == 10); // scans every K
    const auto oracle = find_kmax_linear(set, config, policy);
    CHECK(result.k_max == oracle.result.k_max);
}
