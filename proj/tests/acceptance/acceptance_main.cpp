// Acceptance suite: one line per criterion, [PASS]/[FAIL]/[SKIP], exit code =
// number of failures. Criteria 5 and 6 need the MNIST IDX files; point
// DAMLAB_MNIST_DIR at them (or place them under data/mnist) to enable those
// runs — without the files they are skipped explicitly, never passed silently.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "damlab/capacity.hpp"
#include "damlab/dam.hpp"
#include "damlab/dataset_io.hpp"
#include "damlab/generators.hpp"
#include "damlab/idx.hpp"
#include "damlab/pattern.hpp"
#include "damlab/rng.hpp"
#include "damlab/sweep.hpp"

namespace fs = std::filesystem;
using namespace damlab;

namespace {

enum class Status { pass, fail, skip };

struct Outcome {
    Status status = Status::fail;
    std::string detail;
};

Outcome pass(std::string detail) { return {Status::pass, std::move(detail)}; }
Outcome fail(std::string detail) { return {Status::fail, std::move(detail)}; }
Outcome skip(std::string detail) { return {Status::skip, std::move(detail)}; }

std::mt19937_64 make_rng(std::uint64_t salt) { return std::mt19937_64(20250809ULL ^ salt); }

Pattern random_pattern(std::mt19937_64& rng, std::uint32_t n, double p_plus = 0.5) {
    std::bernoulli_distribution plus(p_plus);
    Pattern out(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        if (plus(rng)) out.set(i, 1);
    }
    return out;
}

struct MnistFiles {
    fs::path images;
    fs::path labels;
};

std::optional<MnistFiles> find_mnist() {
    std::vector<fs::path> dirs;
    if (const char* env = std::getenv("DAMLAB_MNIST_DIR")) {
        dirs.emplace_back(env);
    }
    dirs.emplace_back("data/mnist");
    dirs.emplace_back("data");

    const std::vector<std::string> image_names = {
        "train-images-idx3-ubyte.gz", "train-images-idx3-ubyte",
        "train-images.idx3-ubyte.gz", "train-images.idx3-ubyte"};
    const std::vector<std::string> label_names = {
        "train-labels-idx1-ubyte.gz", "train-labels-idx1-ubyte",
        "train-labels.idx1-ubyte.gz", "train-labels.idx1-ubyte"};

    for (const auto& dir : dirs) {
        std::optional<fs::path> images;
        std::optional<fs::path> labels;
        for (const auto& name : image_names) {
            if (fs::exists(dir / name)) {
                images = dir / name;
                break;
            }
        }
        for (const auto& name : label_names) {
            if (fs::exists(dir / name)) {
                labels = dir / name;
                break;
            }
        }
        if (images && labels) {
            return MnistFiles{*images, *labels};
        }
    }
    return std::nullopt;
}

// Shared artificial dataset, written once and swept by criteria 4, 5 and 7.
struct ArtificialDataset {
    fs::path dir;
    fs::path manifest;
};

const ArtificialDataset& artificial_dataset() {
    static const ArtificialDataset dataset = [] {
        ArtificialDataset out;
        out.dir = fs::temp_directory_path() / "damlab_acceptance_artificial";
        fs::remove_all(out.dir);
        fs::create_directories(out.dir);
        const auto plan = DatasetPlan::artificial(20250809);
        const auto subsets = build_dataset(plan, nullptr);
        std::vector<ManifestEntry> manifest;
        for (std::size_t i = 0; i < subsets.size(); ++i) {
            char name[32];
            std::snprintf(name, sizeof(name), "art_%03zu.damp", i);
            write_pattern_set(subsets[i], out.dir / name);
            ManifestEntry entry;
            entry.id = name;
            entry.id.resize(entry.id.size() - 5); // drop ".damp"
            entry.file = name;
            entry.skew_p = subsets[i].skew_p;
            entry.realized_mean_hd = mean_pairwise_hd(subsets[i]);
            entry.seed = subsets[i].seed;
            entry.n_neurons = subsets[i].n_neurons();
            entry.size = static_cast<std::uint32_t>(subsets[i].size());
            manifest.push_back(std::move(entry));
        }
        out.manifest = out.dir / "manifest.jsonl";
        write_manifest(manifest, out.manifest);
        return out;
    }();
    return dataset;
}

std::vector<SweepRecord> sweep_manifests(const std::vector<fs::path>& manifests,
                                         std::vector<std::uint32_t> degrees) {
    SweepConfig config;
    config.manifests = manifests;
    config.degree_grid = std::move(degrees);
    config.out_dir.clear();
    return run_sweep(config);
}

// ---------------------------------------------------------------------------

Outcome criterion_numeric_paths() {
    auto rng = make_rng(1);
    const int total = 10000;
    int abstained = 0;
    int decided = 0;
    int mismatched = 0;
    for (int rep = 0; rep < total; ++rep) {
        const std::uint32_t n = 8 + rng() % 121;   // <= 128
        const std::uint32_t degree = 1 + rng() % 15;
        const std::size_t k = 1 + rng() % 20;
        const double bias = 0.5 + 0.45 * std::uniform_real_distribution<>(0, 1)(rng);

        std::vector<Pattern> memories;
        for (std::size_t m = 0; m < k; ++m) memories.push_back(random_pattern(rng, n, bias));
        Pattern state = memories[rng() % k];
        switch (rep % 3) {
            case 0: break; // stored pattern itself
            case 1:
                for (int flips = 0; flips < 4; ++flips) {
                    const auto i = static_cast<std::uint32_t>(rng() % n);
                    state.set(i, -state.get(i));
                }
                break;
            default: state = random_pattern(rng, n); break;
        }
        DamConfig config;
        config.n_neurons = n;
        config.degree = degree;
        StoredMemory memory(std::move(memories), config);

        const auto i = static_cast<std::uint32_t>(rng() % n);
        const auto fast = memory.update_sign_fast(state, i);
        if (!fast) {
            ++abstained;
            continue;
        }
        ++decided;
        if (*fast != memory.update_sign_exact(state, i)) ++mismatched;
    }
    std::ostringstream detail;
    detail << decided << "/" << total << " decided, " << mismatched << " mismatches, "
           << abstained << " abstentions (" << (100.0 * abstained / total) << "%)";
    if (mismatched == 0 && abstained * 20 < total) return pass(detail.str());
    return fail(detail.str());
}

Outcome criterion_search_oracle() {
    auto rng = make_rng(2);
    const int total = 200;
    int non_monotone = 0;
    int mismatched = 0;
    CapacityPolicy policy;
    policy.max_k = 20;
    policy.exclude_above = std::nullopt;
    for (int rep = 0; rep < total; ++rep) {
        const std::uint32_t degrees[] = {2, 4, 8};
        RademacherSpec spec;
        spec.p = 0.55 + 0.4 * std::uniform_real_distribution<>(0, 1)(rng);
        spec.n_patterns = 20;
        spec.n_neurons = 64;
        spec.seed = rng();
        const auto set = gen_skewed_rademacher(spec);
        DamConfig config;
        config.n_neurons = 64;
        config.degree = degrees[rep % 3];

        const auto fast = find_kmax(set, config, policy);
        const auto oracle = find_kmax_linear(set, config, policy);
        if (!oracle.monotone) {
            ++non_monotone;
        } else if (fast.k_max != oracle.result.k_max) {
            ++mismatched;
        }
    }
    std::ostringstream detail;
    detail << total << " instances, " << mismatched << " binary/linear mismatches, "
           << non_monotone << " non-monotone (" << (100.0 * non_monotone / total) << "%)";
    return mismatched == 0 ? pass(detail.str()) : fail(detail.str());
}

Outcome criterion_generator_statistics() {
    std::ostringstream detail;
    bool ok = true;
    auto mean_over_seeds = [](double p, int seeds) {
        double sum = 0.0;
        for (int s = 0; s < seeds; ++s) {
            RademacherSpec spec;
            spec.p = p;
            spec.n_patterns = 50;
            spec.n_neurons = 784;
            spec.seed = 977 + 31ULL * static_cast<std::uint64_t>(s);
            sum += mean_pairwise_hd(gen_skewed_rademacher(spec));
        }
        return sum / seeds;
    };
    for (const double p : {0.6, 0.75, 0.9}) {
        const double expected = 2.0 * p * (1.0 - p) * 784.0;
        const double got = mean_over_seeds(p, 10);
        const double rel = std::fabs(got - expected) / expected;
        detail << "p=" << p << ": " << got << " vs " << expected << " (rel "
               << (100.0 * rel) << "%); ";
        ok = ok && rel <= 0.05;
    }
    // limit toward p = 0.5 (p itself is outside the spec'd open interval)
    const double limit = mean_over_seeds(0.51, 10);
    detail << "p=0.51 limit: " << limit << " vs 392";
    ok = ok && std::fabs(limit - 392.0) / 392.0 <= 0.05;
    return ok ? pass(detail.str()) : fail(detail.str());
}

Outcome criterion_exponential_scaling() {
    const auto& dataset = artificial_dataset();
    const auto records = sweep_manifests({dataset.manifest}, {20});
    const auto fit = fit_log_kmax(records, PatternSource::rademacher, 20);
    std::size_t measured = 0;
    for (const auto& rec : records) {
        if (rec.measured()) ++measured;
    }
    if (!fit) {
        return fail("fewer than two non-saturated subsets with defined separation");
    }
    std::ostringstream detail;
    detail << "pearson r = " << fit->pearson_r << ", slope = " << fit->slope << " over "
           << fit->n_points << " subsets (" << measured << " measured cells)";
    return fit->pearson_r >= 0.9 ? pass(detail.str()) : fail(detail.str());
}

Outcome criterion_correlation_gap() {
    const auto mnist = find_mnist();
    if (!mnist) {
        return skip("MNIST files absent; set DAMLAB_MNIST_DIR or put "
                    "train-images/train-labels IDX files under data/mnist");
    }
    const auto pool = binarize_pool(read_idx_images(read_file_bytes(mnist->images)), 128);

    const fs::path dir = fs::temp_directory_path() / "damlab_acceptance_mnist";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const auto plan = DatasetPlan::pool_selected(20250809);
    const auto subsets = build_dataset(plan, &pool);
    std::vector<ManifestEntry> manifest;
    for (std::size_t i = 0; i < subsets.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "sel_%03zu.damp", i);
        write_pattern_set(subsets[i], dir / name);
        ManifestEntry entry;
        entry.id = name;
        entry.id.resize(entry.id.size() - 5);
        entry.file = name;
        entry.target_hd = subsets[i].target_hd;
        entry.realized_mean_hd = mean_pairwise_hd(subsets[i]);
        entry.seed = subsets[i].seed;
        entry.n_neurons = subsets[i].n_neurons();
        entry.size = static_cast<std::uint32_t>(subsets[i].size());
        manifest.push_back(std::move(entry));
    }
    const fs::path mnist_manifest = dir / "manifest.jsonl";
    write_manifest(manifest, mnist_manifest);

    std::vector<std::uint32_t> degrees;
    for (const auto n : default_degree_grid()) {
        if (n >= 20) degrees.push_back(n);
    }
    const auto records =
        sweep_manifests({artificial_dataset().manifest, mnist_manifest}, degrees);
    const auto buckets = bucketize(records, default_bucket_centers(), 10.0);

    int cells = 0;
    int synthetic_wins = 0;
    for (const auto& bucket : buckets) {
        std::map<std::uint32_t, std::pair<std::vector<double>, std::vector<double>>> by_degree;
        for (const auto& rec : bucket.members) {
            auto& cell = by_degree[rec.degree];
            if (rec.source == PatternSource::rademacher) {
                cell.first.push_back(rec.k_max);
            } else if (rec.source == PatternSource::image_pool) {
                cell.second.push_back(rec.k_max);
            }
        }
        for (const auto& [degree, cell] : by_degree) {
            (void)degree;
            if (cell.first.size() < 3 || cell.second.size() < 3) continue;
            auto mean = [](const std::vector<double>& v) {
                double s = 0.0;
                for (const double x : v) s += x;
                return s / static_cast<double>(v.size());
            };
            ++cells;
            if (mean(cell.first) >= mean(cell.second)) ++synthetic_wins;
        }
    }
    std::ostringstream detail;
    detail << synthetic_wins << "/" << cells << " qualified (bucket, degree) cells favor synthetic";
    if (cells == 0) return fail("no (bucket, degree) cell had >= 3 members from each source");
    return synthetic_wins >= 0.8 * cells ? pass(detail.str()) : fail(detail.str());
}

Outcome criterion_mnist_feasibility() {
    const auto mnist = find_mnist();
    if (!mnist) {
        return skip("MNIST files absent; set DAMLAB_MNIST_DIR or put "
                    "train-images/train-labels IDX files under data/mnist");
    }
    auto raw_pool = read_idx_images(read_file_bytes(mnist->images));
    raw_pool.labels = read_idx_labels(read_file_bytes(mnist->labels));
    const auto pool = binarize_pool(raw_pool, 128);

    std::ostringstream detail;
    const auto plan = DatasetPlan::pool_selected(20250809);
    double lo = 1e9;
    double hi = -1e9;
    for (std::size_t i = 0; i < plan.subset_specs.size(); ++i) {
        try {
            const auto subset = greedy_select(pool, plan.subset_specs[i], plan.subset_size,
                                              derive_seed(plan.base_seed, i), plan.greedy);
            const double realized = mean_pairwise_hd(subset);
            lo = std::min(lo, realized);
            hi = std::max(hi, realized);
            if (realized < 25.0 || realized > 195.0) {
                detail << "target " << plan.subset_specs[i] << " realized " << realized
                       << " outside [25, 195]";
                return fail(detail.str());
            }
        } catch (const InfeasibleTargetError& e) {
            detail << "target " << plan.subset_specs[i] << " infeasible: " << e.what();
            return fail(detail.str());
        }
    }
    detail << "53 targets realized within [" << lo << ", " << hi << "]; ";

    for (const double bad_target : {250.0, 10.0}) {
        try {
            greedy_select(pool, bad_target, 50, 20250809);
            detail << "target " << bad_target << " unexpectedly succeeded";
            return fail(detail.str());
        } catch (const InfeasibleTargetError&) {
            // expected
        } catch (const SpecError&) {
            // target 250 < N=784 so both probes must take the greedy path
            detail << "target " << bad_target << " rejected as a spec error";
            return fail(detail.str());
        }
    }
    detail << "targets 250 and 10 infeasible as required; ";

    const auto balanced = filter_per_digit(raw_pool, 3000);
    const double balanced_hd = mean_pairwise_hd(binarize_pool(balanced, 128));
    detail << "3000-per-digit pool mean HD = " << balanced_hd;
    return std::fabs(balanced_hd - 112.0) <= 10.0 ? pass(detail.str()) : fail(detail.str());
}

Outcome criterion_saturation_policy() {
    const auto& dataset = artificial_dataset();
    const auto records = sweep_manifests({dataset.manifest}, {37});
    if (records.empty()) return fail("sweep produced no records");

    // the highest-separation subsets sit at the end of the separation axis
    std::vector<const SweepRecord*> ordered;
    for (const auto& rec : records) ordered.push_back(&rec);
    std::sort(ordered.begin(), ordered.end(), [](const SweepRecord* a, const SweepRecord* b) {
        const double ha = a->realized_mean_hd.value_or(-1.0);
        const double hb = b->realized_mean_hd.value_or(-1.0);
        return ha < hb;
    });

    int top_saturated = 0;
    for (std::size_t i = ordered.size() - 5; i < ordered.size(); ++i) {
        const auto& rec = *ordered[i];
        if (rec.k_max == 50 && rec.saturated && rec.excluded) ++top_saturated;
    }
    std::size_t measured = 0;
    std::size_t extrapolated = 0;
    for (const auto& rec : records) {
        if (rec.measured()) {
            ++measured;
        } else {
            ++extrapolated;
        }
    }
    std::ostringstream detail;
    detail << top_saturated << "/5 top-separation subsets saturated+excluded at k_max=50; "
           << measured << " measured, " << extrapolated
           << " saturated-by-extrapolation after early stop";
    return (top_saturated == 5 && extrapolated > 0) ? pass(detail.str()) : fail(detail.str());
}

Outcome criterion_unit_invariants() {
    std::ostringstream detail;

    // HD/overlap identity + bit-packed vs naive loop, 1e5 random pairs.
    {
        auto rng = make_rng(8);
        for (int rep = 0; rep < 100000; ++rep) {
            const std::uint32_t n = 1 + rng() % 256;
            const auto a = random_pattern(rng, n, 0.3 + 0.4 * (rng() % 2));
            const auto b = random_pattern(rng, n);
            const auto hd = hamming_distance(a, b);
            if (overlap(a, b) != static_cast<int>(n) - 2 * static_cast<int>(hd)) {
                return fail("overlap identity violated at rep " + std::to_string(rep));
            }
            const auto va = a.to_bipolar();
            const auto vb = b.to_bipolar();
            std::uint32_t naive = 0;
            for (std::uint32_t i = 0; i < n; ++i) {
                naive += va[i] != vb[i] ? 1 : 0;
            }
            if (naive != hd) {
                return fail("popcount HD diverged from naive loop at rep " + std::to_string(rep));
            }
        }
        detail << "HD/overlap identity on 100000 pairs; ";
    }

    // One-memory stability for 1000 random configurations.
    {
        auto rng = make_rng(9);
        for (int rep = 0; rep < 1000; ++rep) {
            const std::uint32_t n = 2 + rng() % 255;
            const std::uint32_t degree = 1 + rng() % 40;
            DamConfig config;
            config.n_neurons = n;
            config.degree = degree;
            config.numeric_path = rep % 2 == 0 ? NumericPath::exact_integer
                                               : NumericPath::fast_float_with_exact_fallback;
            const auto pattern = random_pattern(rng, n, 0.2 + 0.6 * (rng() % 3) / 2.0);
            StoredMemory memory({pattern}, config);
            if (!memory.is_fixed_point(pattern)) {
                return fail("single stored pattern unstable at rep " + std::to_string(rep));
            }
        }
        detail << "one-memory stability on 1000 configs; ";
    }

    // CSV round trip, byte-stable re-emission.
    {
        std::vector<SweepRecord> records;
        auto rng = make_rng(10);
        for (int i = 0; i < 200; ++i) {
            SweepRecord r;
            r.dataset_id = i % 7 == 0 ? "odd,\"name\"\n" + std::to_string(i)
                                      : "set_" + std::to_string(i);
            r.source = static_cast<PatternSource>(i % 3);
            if (i % 4 != 0) r.param = 0.51 + 0.01 * (i % 50);
            if (i % 5 != 0) r.realized_mean_hd = 390.0 * (i / 200.0);
            r.degree = 6 + i % 31;
            r.k_max = 1 + i % 50;
            r.saturated = r.k_max == 50;
            r.excluded = r.k_max > 49;
            r.n_checks = i % 8;
            r.wall_time_ms = (i * 37) % 1000 / 8.0;
            r.seed = rng();
            records.push_back(std::move(r));
        }
        std::ostringstream first;
        write_sweep_csv(records, first);
        std::istringstream parse_in(first.str());
        const auto parsed = parse_sweep_csv(parse_in);
        if (parsed.size() != records.size()) return fail("CSV round trip lost records");
        for (std::size_t i = 0; i < records.size(); ++i) {
            if (!(parsed[i] == records[i])) {
                return fail("CSV round trip altered record " + std::to_string(i));
            }
        }
        std::ostringstream second;
        write_sweep_csv(parsed, second);
        if (first.str() != second.str()) return fail("CSV re-emission not byte-stable");
        detail << "CSV round trip byte-stable on 200 records";
    }

    return pass(detail.str());
}

} // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria = {
        {1, "numeric-path equivalence", criterion_numeric_paths},
        {2, "search-oracle equivalence", criterion_search_oracle},
        {3, "generator statistics", criterion_generator_statistics},
        {4, "exponential separation scaling", criterion_exponential_scaling},
        {5, "correlation gap (synthetic vs MNIST)", criterion_correlation_gap},
        {6, "MNIST feasibility range", criterion_mnist_feasibility},
        {7, "saturation policy and early stopping", criterion_saturation_policy},
        {8, "unit invariants", criterion_unit_invariants},
    };

    int failures = 0;
    for (const auto& criterion : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome outcome;
        try {
            outcome = criterion.run();
        } catch (const std::exception& e) {
            outcome = fail(std::string("unexpected exception: ") + e.what());
        }
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const char* tag = outcome.status == Status::pass ? "[PASS]"
                          : outcome.status == Status::skip ? "[SKIP]"
                                                           : "[FAIL]";
        std::printf("%s criterion %d: %s — %s (%.1fs)\n", tag, criterion.id, criterion.name,
                    outcome.detail.c_str(), seconds);
        std::fflush(stdout);
        if (outcome.status == Status::fail) ++failures;
    }
    return failures;
}
