#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "damlab/capacity.hpp"
#include "damlab/dam.hpp"
#include "damlab/pattern.hpp"

namespace damlab {

/// {6..11} then odd steps of 2 up to 37.
std::vector<std::uint32_t> default_degree_grid();

/// {40, 70, 100, 130, 160, 190}.
std::vector<double> default_bucket_centers();

struct SweepConfig {
    std::vector<std::filesystem::path> manifests;
    std::vector<std::uint32_t> degree_grid = default_degree_grid();
    CapacityPolicy policy;
    DamConfig dam; // degree is overridden per measurement
    std::filesystem::path out_dir;
    std::uint32_t parallelism = 0; // 0 = hardware concurrency
    std::uint64_t seed = 0;
};

/// One (dataset, degree) measurement row.
/// n_checks == 0 marks a row that was not actually measured: either
/// saturated-by-extrapolation after early stopping (k_max == max_k) or a
/// dataset that failed to load (degree == 0, k_max == 0).
struct SweepRecord {
    std::string dataset_id;
    PatternSource source = PatternSource::external;
    std::optional<double> param; // skew_p for rademacher, target_hd for pools
    std::optional<double> realized_mean_hd;
    std::uint32_t degree = 0;
    std::uint32_t k_max = 0;
    bool saturated = false;
    bool excluded = false;
    std::uint32_t n_checks = 0;
    double wall_time_ms = 0.0;
    std::uint64_t seed = 0;

    bool operator==(const SweepRecord&) const = default;

    bool measured() const { return n_checks > 0; }
    /// Rows that belong in plot series and buckets.
    bool plottable() const { return measured() && !excluded && realized_mean_hd.has_value(); }
};

/// Measure every (dataset, degree) cell. Each (manifest, degree) series walks
/// its subsets in ascending separation order and honors the policy's early
/// stopping; remaining cells are emitted as saturated-by-extrapolation rows.
/// Distinct series run on a worker pool; records come back sorted by
/// (dataset_id, degree), so scheduling never changes the output.
std::vector<SweepRecord> run_sweep(const SweepConfig& config);

struct HdBucket {
    double center = 0.0;
    double leeway = 10.0;
    std::vector<SweepRecord> members;
};

/// Assign plottable records to every bucket whose band contains their
/// realized mean HD (bands may overlap).
std::vector<HdBucket> bucketize(std::span<const SweepRecord> records,
                                std::span<const double> centers, double leeway = 10.0);

/// Least-squares fit of ln(k_max) against realized mean HD.
struct LogLinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double pearson_r = 0.0;
    std::size_t n_points = 0;
};

/// Fit over the plottable records of one (source, degree) cell; nullopt when
/// fewer than two usable points (or zero variance in either coordinate).
std::optional<LogLinearFit> fit_log_kmax(std::span<const SweepRecord> records,
                                         PatternSource source, std::uint32_t degree);

void write_sweep_csv(std::span<const SweepRecord> records, std::ostream& out);
std::vector<SweepRecord> parse_sweep_csv(std::istream& in);
std::vector<SweepRecord> parse_sweep_csv(const std::filesystem::path& path);

/// Write sweep.csv, fig_separation.json, fig_buckets.json and summary.json.
void emit_report(std::span<const SweepRecord> records, std::span<const HdBucket> buckets,
                 const std::filesystem::path& out_dir);

} // namespace damlab
