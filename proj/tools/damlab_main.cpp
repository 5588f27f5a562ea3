#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "damlab/capacity.hpp"
#include "damlab/dam.hpp"
#include "damlab/dataset_io.hpp"
#include "damlab/generators.hpp"
#include "damlab/idx.hpp"
#include "damlab/pattern.hpp"
#include "damlab/sweep.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct PolicyOpts {
    std::uint32_t max_k = 50;
    std::int64_t exclude_above = 49; // negative disables exclusion
    std::uint32_t early_stop = 2;    // 0 disables early stopping
    bool linear = false;

    damlab::CapacityPolicy to_policy() const {
        damlab::CapacityPolicy policy;
        policy.max_k = max_k;
        policy.exclude_above = exclude_above < 0
                                   ? std::nullopt
                                   : std::optional<std::uint32_t>(
                                         static_cast<std::uint32_t>(exclude_above));
        policy.early_stop_threshold =
            early_stop == 0 ? std::nullopt : std::optional<std::uint32_t>(early_stop);
        policy.assume_monotone = !linear;
        return policy;
    }
};

struct DamOpts {
    std::string numeric_path = "fast";
    std::string tie_mode = "keep";
    double fast_margin = 1e-6;

    damlab::DamConfig to_config() const {
        damlab::DamConfig config;
        config.numeric_path = numeric_path == "exact"
                                  ? damlab::NumericPath::exact_integer
                                  : damlab::NumericPath::fast_float_with_exact_fallback;
        config.tie_mode = tie_mode == "strict" ? damlab::TieMode::strict_fail
                                               : damlab::TieMode::keep_state;
        config.fast_margin = fast_margin;
        return config;
    }
};

void add_policy_options(CLI::App* cmd, PolicyOpts& opts) {
    cmd->add_option("--max-k", opts.max_k, "Largest prefix size to test")
        ->capture_default_str();
    cmd->add_option("--exclude-above", opts.exclude_above,
                    "Flag K_max above this as excluded; negative disables")
        ->capture_default_str();
}

void add_dam_options(CLI::App* cmd, DamOpts& opts) {
    cmd->add_option("--numeric-path", opts.numeric_path, "Numeric path: fast or exact")
        ->check(CLI::IsMember({"fast", "exact"}))
        ->capture_default_str();
    cmd->add_option("--tie-mode", opts.tie_mode, "Zero-field ties: keep or strict")
        ->check(CLI::IsMember({"keep", "strict"}))
        ->capture_default_str();
    cmd->add_option("--fast-margin", opts.fast_margin,
                    "Relative margin below which the fast path defers to exact")
        ->capture_default_str();
}

json result_to_json(const damlab::CapacityResult& r) {
    return json{
        {"k_max", r.k_max},
        {"realized_mean_hd", r.realized_mean_hd ? json(*r.realized_mean_hd) : json(nullptr)},
        {"saturated", r.saturated},
        {"excluded", r.excluded},
        {"n_checks", r.n_checks},
        {"wall_time_ms", r.wall_time_ms},
    };
}

std::string format_id(const char* prefix, std::size_t index, const char* tag, double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s_%03zu_%s%.2f", prefix, index, tag, value);
    return buf;
}

int cmd_generate(const std::string& kind, const fs::path& out_dir, const std::string& pool_file,
                 std::uint64_t seed, const damlab::GreedyOptions& greedy,
                 std::uint32_t subset_size, std::uint32_t n_neurons) {
    damlab::DatasetPlan plan = kind == "artificial" ? damlab::DatasetPlan::artificial(seed)
                                                    : damlab::DatasetPlan::pool_selected(seed);
    plan.subset_size = subset_size;
    plan.n_neurons = n_neurons;
    plan.greedy = greedy;

    std::optional<damlab::PatternSet> pool;
    if (plan.kind == damlab::PlanKind::pool_selected) {
        if (pool_file.empty()) {
            throw damlab::SpecError("--kind mnist requires --pool");
        }
        pool = damlab::read_pattern_set(fs::path(pool_file));
        plan.n_neurons = pool->n_neurons();
    }

    const auto subsets = damlab::build_dataset(plan, pool ? &*pool : nullptr);
    fs::create_directories(out_dir);

    std::vector<damlab::ManifestEntry> manifest;
    for (std::size_t i = 0; i < subsets.size(); ++i) {
        const auto& subset = subsets[i];
        const bool artificial = plan.kind == damlab::PlanKind::artificial;
        const std::string id = artificial
                                   ? format_id("art", i, "p", plan.subset_specs[i])
                                   : format_id("sel", i, "t", plan.subset_specs[i]);
        const std::string file = id + ".damp";
        damlab::write_pattern_set(subset, out_dir / file);

        damlab::ManifestEntry entry;
        entry.id = id;
        entry.file = file;
        entry.skew_p = subset.skew_p;
        entry.target_hd = subset.target_hd;
        entry.realized_mean_hd = subset.size() >= 2 ? damlab::mean_pairwise_hd(subset) : 0.0;
        entry.seed = subset.seed;
        entry.n_neurons = subset.n_neurons();
        entry.size = static_cast<std::uint32_t>(subset.size());
        manifest.push_back(std::move(entry));
    }
    damlab::write_manifest(manifest, out_dir / "manifest.jsonl");

    json summary;
    summary["kind"] = kind;
    summary["subsets"] = manifest.size();
    summary["manifest"] = (out_dir / "manifest.jsonl").string();
    std::cout << summary.dump() << "\n";
    return 0;
}

int cmd_ingest(const std::string& images_file, const std::string& labels_file, int threshold,
               std::uint32_t per_digit, const fs::path& out_file) {
    auto pool = damlab::read_idx_images(damlab::read_file_bytes(images_file));
    if (!labels_file.empty()) {
        pool.labels = damlab::read_idx_labels(damlab::read_file_bytes(labels_file));
        if (pool.labels->size() != pool.count()) {
            throw damlab::LengthError("label count does not match image count");
        }
    }
    if (per_digit > 0) {
        pool = damlab::filter_per_digit(pool, per_digit);
    }

    auto set = damlab::binarize_pool(pool, threshold);
    set.validate();
    damlab::write_pattern_set(set, out_file);

    json summary;
    summary["images"] = pool.count();
    summary["rows"] = pool.rows;
    summary["cols"] = pool.cols;
    summary["n_neurons"] = set.n_neurons();
    summary["threshold"] = threshold;
    summary["mean_pairwise_hd"] =
        set.size() >= 2 ? json(damlab::mean_pairwise_hd(set)) : json(nullptr);
    summary["out"] = out_file.string();
    std::cout << summary.dump() << "\n";
    return 0;
}

int cmd_measure(const std::string& dataset_file, std::uint32_t degree, bool verify,
                const PolicyOpts& policy_opts, const DamOpts& dam_opts,
                const std::string& out_file) {
    const auto set = damlab::read_pattern_set(fs::path(dataset_file));
    damlab::DamConfig config = dam_opts.to_config();
    config.n_neurons = set.n_neurons();
    config.degree = degree;
    const damlab::CapacityPolicy policy = policy_opts.to_policy();

    const auto result = damlab::find_kmax(set, config, policy);
    json out = result_to_json(result);
    if (verify) {
        const auto linear = damlab::find_kmax_linear(set, config, policy);
        out["verify"] = {
            {"k_max_first_failure", linear.result.k_max},
            {"k_max_global", linear.k_max_global},
            {"monotone", linear.monotone},
            {"agrees", !linear.monotone || linear.result.k_max == result.k_max},
        };
    }
    if (out_file.empty()) {
        std::cout << out.dump() << "\n";
    } else {
        std::ofstream f(out_file, std::ios::binary);
        if (!f) {
            throw damlab::IoError("cannot open for write: " + out_file);
        }
        f << out.dump() << "\n";
    }
    return 0;
}

int cmd_sweep(const std::vector<std::string>& manifest_files,
              const std::vector<std::uint32_t>& degrees, const fs::path& out_dir,
              std::uint32_t threads, std::uint64_t seed, const PolicyOpts& policy_opts,
              const DamOpts& dam_opts, const std::vector<double>& centers, double leeway) {
    damlab::SweepConfig config;
    for (const auto& m : manifest_files) config.manifests.emplace_back(m);
    if (!degrees.empty()) config.degree_grid = degrees;
    config.policy = policy_opts.to_policy();
    config.dam = dam_opts.to_config();
    config.out_dir = out_dir;
    config.parallelism = threads;
    config.seed = seed;

    const auto records = damlab::run_sweep(config);
    const auto buckets = damlab::bucketize(records, centers, leeway);
    damlab::emit_report(records, buckets, out_dir);

    json summary;
    summary["records"] = records.size();
    summary["measured"] = std::count_if(records.begin(), records.end(),
                                        [](const auto& r) { return r.measured(); });
    summary["out"] = out_dir.string();
    std::cout << summary.dump() << "\n";
    return 0;
}

int cmd_report(const std::string& csv_file, const fs::path& out_dir,
               const std::vector<double>& centers, double leeway) {
    const auto records = damlab::parse_sweep_csv(fs::path(csv_file));
    const auto buckets = damlab::bucketize(records, centers, leeway);
    damlab::emit_report(records, buckets, out_dir);
    json summary;
    summary["records"] = records.size();
    summary["out"] = out_dir.string();
    std::cout << summary.dump() << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dense associative memory capacity laboratory"};
    app.require_subcommand(1);
    app.fallthrough(); // global flags may follow the verb
    app.set_config("--config", "", "Flat key=value options file (flags override it)");

    std::uint64_t seed = 1;
    std::uint32_t threads = 0;
    std::string global_out;
    app.add_option("--seed", seed, "Base seed for dataset generation")->capture_default_str();
    app.add_option("--threads", threads, "Worker threads (0 = all cores)")
        ->capture_default_str();
    app.add_option("--out", global_out, "Output file or directory (verb-specific)");

    // generate
    auto* generate = app.add_subcommand("generate", "Construct pattern subsets with controlled separation");
    std::string gen_kind;
    std::string gen_pool;
    damlab::GreedyOptions greedy;
    std::uint32_t subset_size = 50;
    std::uint32_t n_neurons = 784;
    generate->add_option("--kind", gen_kind, "artificial (skewed Rademacher) or mnist (greedy pool selection)")
        ->required()
        ->check(CLI::IsMember({"artificial", "mnist"}));
    generate->add_option("--pool", gen_pool, "Binarized pool file (required for --kind mnist)");
    generate->add_option("--band", greedy.band, "Greedy acceptance band around the target HD")
        ->capture_default_str();
    generate->add_option("--max-trials", greedy.max_trials,
                         "Pool draws per subset (0 = 200 * subset size)");
    generate->add_flag("--min-hd", greedy.track_min_hd,
                       "Hill-climb the minimum pairwise HD instead of the mean");
    generate->add_option("--subset-size", subset_size, "Patterns per subset")
        ->capture_default_str();
    generate->add_option("--neurons", n_neurons, "Neurons per pattern (artificial kind)")
        ->capture_default_str();

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Binarize an IDX image file into a pattern pool");
    std::string idx_images;
    std::string idx_labels;
    int threshold = 128;
    std::uint32_t per_digit = 0;
    ingest->add_option("--images", idx_images, "IDX image file (gzip ok)")->required();
    ingest->add_option("--labels", idx_labels, "IDX label file (gzip ok)");
    ingest->add_option("--threshold", threshold, "Pixels >= threshold become +1")
        ->capture_default_str();
    ingest->add_option("--per-digit", per_digit,
                       "Keep only the first COUNT images of each label (file order)");

    // measure
    auto* measure = app.add_subcommand("measure", "Measure K_max for one dataset file");
    std::string measure_dataset;
    std::uint32_t measure_degree = 0;
    bool verify = false;
    PolicyOpts measure_policy;
    DamOpts measure_dam;
    measure->add_option("--dataset", measure_dataset, "Dataset file")->required();
    measure->add_option("--degree", measure_degree, "Polynomial degree n")->required();
    measure->add_flag("--verify", verify, "Also run the linear-scan oracle and compare");
    measure->add_flag("--linear", measure_policy.linear,
                      "Use the linear first-failure scan instead of binary search");
    add_policy_options(measure, measure_policy);
    add_dam_options(measure, measure_dam);

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Measure datasets x degrees and emit report files");
    std::vector<std::string> sweep_manifests;
    std::vector<std::uint32_t> sweep_degrees;
    std::vector<double> bucket_centers = damlab::default_bucket_centers();
    double leeway = 10.0;
    PolicyOpts sweep_policy;
    DamOpts sweep_dam;
    sweep->add_option("--manifest", sweep_manifests, "Dataset manifest (repeatable)")
        ->required();
    sweep->add_option("--degrees", sweep_degrees, "Polynomial degrees (default 6..11,13,15,...,37)")
        ->delimiter(',');
    sweep->add_option("--buckets", bucket_centers, "Bucket centers for fig_buckets.json")
        ->delimiter(',')
        ->capture_default_str();
    sweep->add_option("--leeway", leeway, "Bucket half-width")->capture_default_str();
    sweep->add_option("--early-stop", sweep_policy.early_stop,
                      "Consecutive saturated results that stop a series (0 = never)")
        ->capture_default_str();
    add_policy_options(sweep, sweep_policy);
    add_dam_options(sweep, sweep_dam);

    // report
    auto* report = app.add_subcommand("report", "Rebuild report files from an existing sweep.csv");
    std::string report_csv;
    std::vector<double> report_centers = damlab::default_bucket_centers();
    double report_leeway = 10.0;
    report->add_option("--csv", report_csv, "sweep.csv produced by the sweep verb")->required();
    report->add_option("--buckets", report_centers, "Bucket centers")->delimiter(',');
    report->add_option("--leeway", report_leeway, "Bucket half-width")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1; // 1 = usage error
    }

    try {
        const fs::path out = global_out;
        if (app.got_subcommand(generate)) {
            if (global_out.empty()) {
                throw damlab::SpecError("generate needs --out DIR");
            }
            return cmd_generate(gen_kind, out, gen_pool, seed, greedy, subset_size, n_neurons);
        }
        if (app.got_subcommand(ingest)) {
            if (global_out.empty()) {
                throw damlab::SpecError("ingest needs --out FILE");
            }
            return cmd_ingest(idx_images, idx_labels, threshold, per_digit, out);
        }
        if (app.got_subcommand(measure)) {
            return cmd_measure(measure_dataset, measure_degree, verify, measure_policy,
                               measure_dam, global_out);
        }
        if (app.got_subcommand(sweep)) {
            if (global_out.empty()) {
                throw damlab::SpecError("sweep needs --out DIR");
            }
            return cmd_sweep(sweep_manifests, sweep_degrees, out, threads, seed, sweep_policy,
                             sweep_dam, bucket_centers, leeway);
        }
        if (app.got_subcommand(report)) {
            if (global_out.empty()) {
                throw damlab::SpecError("report needs --out DIR");
            }
            return cmd_report(report_csv, out, report_centers, report_leeway);
        }
    } catch (const damlab::InfeasibleTargetError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const damlab::SpecError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const damlab::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
