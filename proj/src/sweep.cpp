#include "damlab/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "damlab/dataset_io.hpp"

namespace damlab {

std::vector<std::uint32_t> default_degree_grid() {
    std::vector<std::uint32_t> grid;
    for (std::uint32_t n = 6; n <= 11; ++n) grid.push_back(n);
    for (std::uint32_t n = 13; n <= 37; n += 2) grid.push_back(n);
    return grid;
}

std::vector<double> default_bucket_centers() {
    return {40.0, 70.0, 100.0, 130.0, 160.0, 190.0};
}

namespace {

struct LoadedSubset {
    ManifestEntry entry;
    std::optional<PatternSet> set; // nullopt if the file failed to load
};

SweepRecord base_record(const LoadedSubset& subset) {
    SweepRecord rec;
    rec.dataset_id = subset.entry.id;
    if (subset.set) {
        rec.source = subset.set->source;
        rec.param = subset.set->skew_p ? subset.set->skew_p : subset.set->target_hd;
        rec.seed = subset.set->seed;
    } else {
        rec.param = subset.entry.skew_p ? subset.entry.skew_p : subset.entry.target_hd;
        rec.seed = subset.entry.seed;
    }
    return rec;
}

} // namespace

std::vector<SweepRecord> run_sweep(const SweepConfig& config) {
    if (config.manifests.empty()) {
        throw SpecError("sweep needs at least one dataset manifest");
    }
    if (config.degree_grid.empty()) {
        throw SpecError("sweep needs at least one polynomial degree");
    }
    config.policy.validate();

    std::vector<SweepRecord> records;

    // Preload every subset once; a file that cannot be read yields a single
    // error row (degree 0, k_max 0) and the sweep carries on without it.
    std::vector<std::vector<LoadedSubset>> manifests;
    manifests.reserve(config.manifests.size());
    for (const auto& manifest_path : config.manifests) {
        std::vector<LoadedSubset> loaded;
        const auto dir = manifest_path.parent_path();
        for (auto& entry : read_manifest(manifest_path)) {
            LoadedSubset subset{std::move(entry), std::nullopt};
            try {
                subset.set = read_pattern_set(dir / subset.entry.file);
            } catch (const Error&) {
                records.push_back(base_record(subset));
            }
            loaded.push_back(std::move(subset));
        }
        // Series walk order: ascending generation-time separation.
        std::stable_sort(loaded.begin(), loaded.end(),
                         [](const LoadedSubset& a, const LoadedSubset& b) {
                             if (a.entry.realized_mean_hd != b.entry.realized_mean_hd) {
                                 return a.entry.realized_mean_hd < b.entry.realized_mean_hd;
                             }
                             return a.entry.id < b.entry.id;
                         });
        manifests.push_back(std::move(loaded));
    }

    struct Task {
        std::size_t manifest;
        std::uint32_t degree;
    };
    std::vector<Task> tasks;
    for (std::size_t m = 0; m < manifests.size(); ++m) {
        for (const auto degree : config.degree_grid) {
            tasks.push_back({m, degree});
        }
    }

    std::mutex records_mutex;
    std::atomic<std::size_t> next_task{0};

    auto run_series = [&](const Task& task) {
        const auto& series_subsets = manifests[task.manifest];
        DamConfig dam = config.dam;
        dam.degree = task.degree;

        std::vector<SweepRecord> series_records;
        std::vector<CapacityResult> series_results;
        bool stopped = false;
        for (const auto& subset : series_subsets) {
            if (!subset.set) continue;
            dam.n_neurons = subset.set->n_neurons();
            SweepRecord rec = base_record(subset);
            rec.degree = task.degree;
            const auto effective_max = static_cast<std::uint32_t>(
                std::min<std::size_t>(config.policy.max_k, subset.set->size()));
            if (stopped) {
                rec.k_max = effective_max;
                rec.saturated = true;
                rec.excluded =
                    config.policy.exclude_above && rec.k_max > *config.policy.exclude_above;
                rec.n_checks = 0;
                if (rec.k_max >= 2) {
                    rec.realized_mean_hd = mean_pairwise_hd_prefix(*subset.set, rec.k_max);
                }
            } else {
                try {
                    const CapacityResult result = find_kmax(*subset.set, dam, config.policy);
                    rec.k_max = result.k_max;
                    rec.realized_mean_hd = result.realized_mean_hd;
                    rec.saturated = result.saturated;
                    rec.excluded = result.excluded;
                    rec.n_checks = result.n_checks;
                    rec.wall_time_ms = result.wall_time_ms;
                    series_results.push_back(result);
                    if (apply_early_stop(series_results, config.policy) == SweepDecision::stop) {
                        stopped = true;
                    }
                } catch (const Error&) {
                    // degenerate subset (bad dimensions etc.): error row, keep going
                    rec.k_max = 0;
                    rec.n_checks = 0;
                }
            }
            series_records.push_back(std::move(rec));
        }
        const std::lock_guard<std::mutex> lock(records_mutex);
        records.insert(records.end(), series_records.begin(), series_records.end());
    };

    std::uint32_t n_workers = config.parallelism != 0
                                  ? config.parallelism
                                  : std::max(1u, std::thread::hardware_concurrency());
    n_workers = static_cast<std::uint32_t>(
        std::min<std::size_t>(n_workers, std::max<std::size_t>(tasks.size(), 1)));

    if (n_workers <= 1) {
        for (const auto& task : tasks) run_series(task);
    } else {
        std::vector<std::thread> workers;
        workers.reserve(n_workers);
        for (std::uint32_t w = 0; w < n_workers; ++w) {
            workers.emplace_back([&] {
                while (true) {
                    const std::size_t t = next_task.fetch_add(1);
                    if (t >= tasks.size()) return;
                    run_series(tasks[t]);
                }
            });
        }
        for (auto& worker : workers) worker.join();
    }

    std::sort(records.begin(), records.end(), [](const SweepRecord& a, const SweepRecord& b) {
        if (a.dataset_id != b.dataset_id) return a.dataset_id < b.dataset_id;
        return a.degree < b.degree;
    });
    return records;
}

std::vector<HdBucket> bucketize(std::span<const SweepRecord> records,
                                std::span<const double> centers, double leeway) {
    if (!(leeway > 0.0)) {
        throw SpecError("bucket leeway must be positive");
    }
    std::vector<HdBucket> buckets;
    buckets.reserve(centers.size());
    for (const double center : centers) {
        HdBucket bucket;
        bucket.center = center;
        bucket.leeway = leeway;
        for (const auto& rec : records) {
            if (!rec.plottable()) continue;
            if (std::fabs(*rec.realized_mean_hd - center) <= leeway) {
                bucket.members.push_back(rec);
            }
        }
        buckets.push_back(std::move(bucket));
    }
    return buckets;
}

std::optional<LogLinearFit> fit_log_kmax(std::span<const SweepRecord> records,
                                         PatternSource source, std::uint32_t degree) {
    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto& rec : records) {
        if (!rec.plottable() || rec.source != source || rec.degree != degree) continue;
        xs.push_back(*rec.realized_mean_hd);
        ys.push_back(std::log(static_cast<double>(rec.k_max)));
    }
    const std::size_t n = xs.size();
    if (n < 2) return std::nullopt;
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0;
    double syy = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        syy += (ys[i] - my) * (ys[i] - my);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return std::nullopt;
    LogLinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.pearson_r = sxy / std::sqrt(sxx * syy);
    fit.n_points = n;
    return fit;
}

namespace {

constexpr const char* kCsvHeader =
    "dataset_id,source,skew_p_or_target_hd,realized_mean_hd,degree,k_max,saturated,excluded,"
    "n_checks,wall_time_ms,seed";

// Shortest representation that parses back to the same double.
std::string fmt_double(double v) {
    return nlohmann::json(v).dump();
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) {
        return field;
    }
    std::string out = "\"";
    for (const char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

std::vector<std::vector<std::string>> parse_csv_rows(std::istream& in) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool row_open = false;
    char c;
    while (in.get(c)) {
        row_open = true;
        if (quoted) {
            if (c == '"') {
                if (in.peek() == '"') {
                    in.get(c);
                    field += '"';
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"' && field.empty()) {
            quoted = true;
        } else if (c == ',') {
            row.push_back(std::move(field));
            field.clear();
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && in.peek() == '\n') in.get(c);
            row.push_back(std::move(field));
            field.clear();
            rows.push_back(std::move(row));
            row.clear();
            row_open = false;
        } else {
            field += c;
        }
    }
    if (quoted) {
        throw FormatError("CSV ends inside a quoted field");
    }
    if (row_open) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::optional<double> parse_opt_double(const std::string& s) {
    if (s.empty()) return std::nullopt;
    return std::stod(s);
}

bool parse_bool(const std::string& s) {
    if (s == "true") return true;
    if (s == "false") return false;
    throw FormatError("bad boolean in CSV: '" + s + "'");
}

} // namespace

void write_sweep_csv(std::span<const SweepRecord> records, std::ostream& out) {
    out << kCsvHeader << "\n";
    for (const auto& r : records) {
        out << csv_escape(r.dataset_id) << ',' << to_string(r.source) << ','
            << (r.param ? fmt_double(*r.param) : std::string{}) << ','
            << (r.realized_mean_hd ? fmt_double(*r.realized_mean_hd) : std::string{}) << ','
            << r.degree << ',' << r.k_max << ',' << (r.saturated ? "true" : "false") << ','
            << (r.excluded ? "true" : "false") << ',' << r.n_checks << ','
            << fmt_double(r.wall_time_ms) << ',' << r.seed << "\n";
    }
}

std::vector<SweepRecord> parse_sweep_csv(std::istream& in) {
    const auto rows = parse_csv_rows(in);
    if (rows.empty()) {
        throw FormatError("empty CSV");
    }
    {
        std::ostringstream header;
        for (std::size_t i = 0; i < rows[0].size(); ++i) {
            if (i) header << ',';
            header << rows[0][i];
        }
        if (header.str() != kCsvHeader) {
            throw FormatError("unexpected CSV header: " + header.str());
        }
    }
    std::vector<SweepRecord> records;
    for (std::size_t line = 1; line < rows.size(); ++line) {
        const auto& row = rows[line];
        if (row.size() == 1 && row[0].empty()) continue; // trailing newline
        if (row.size() != 11) {
            throw FormatError("CSV row " + std::to_string(line + 1) + " has " +
                              std::to_string(row.size()) + " fields, expected 11");
        }
        SweepRecord r;
        r.dataset_id = row[0];
        const auto source = pattern_source_from_string(row[1]);
        if (!source) {
            throw FormatError("unknown source tag '" + row[1] + "'");
        }
        r.source = *source;
        r.param = parse_opt_double(row[2]);
        r.realized_mean_hd = parse_opt_double(row[3]);
        r.degree = static_cast<std::uint32_t>(std::stoul(row[4]));
        r.k_max = static_cast<std::uint32_t>(std::stoul(row[5]));
        r.saturated = parse_bool(row[6]);
        r.excluded = parse_bool(row[7]);
        r.n_checks = static_cast<std::uint32_t>(std::stoul(row[8]));
        r.wall_time_ms = std::stod(row[9]);
        r.seed = std::stoull(row[10]);
        records.push_back(std::move(r));
    }
    return records;
}

std::vector<SweepRecord> parse_sweep_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open for read: " + path.string());
    }
    return parse_sweep_csv(in);
}

void emit_report(std::span<const SweepRecord> records, std::span<const HdBucket> buckets,
                 const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    auto open_out = [&](const char* name) {
        std::ofstream out(out_dir / name, std::ios::binary);
        if (!out) {
            throw IoError("cannot open for write: " + (out_dir / name).string());
        }
        return out;
    };

    {
        auto out = open_out("sweep.csv");
        write_sweep_csv(records, out);
        if (!out) {
            throw IoError("failed writing " + (out_dir / "sweep.csv").string());
        }
    }

    // fig_separation.json: k_max against realized separation, one series per
    // (source, degree).
    {
        std::map<std::pair<std::string, std::uint32_t>, std::vector<const SweepRecord*>> series;
        for (const auto& rec : records) {
            if (!rec.plottable()) continue;
            series[{to_string(rec.source), rec.degree}].push_back(&rec);
        }
        nlohmann::json j;
        j["series"] = nlohmann::json::array();
        for (auto& [key, recs] : series) {
            std::sort(recs.begin(), recs.end(), [](const SweepRecord* a, const SweepRecord* b) {
                if (*a->realized_mean_hd != *b->realized_mean_hd) {
                    return *a->realized_mean_hd < *b->realized_mean_hd;
                }
                return a->dataset_id < b->dataset_id;
            });
            nlohmann::json points = nlohmann::json::array();
            for (const auto* rec : recs) {
                points.push_back({{"dataset_id", rec->dataset_id},
                                  {"realized_mean_hd", *rec->realized_mean_hd},
                                  {"k_max", rec->k_max}});
            }
            j["series"].push_back(
                {{"source", key.first}, {"degree", key.second}, {"points", std::move(points)}});
        }
        open_out("fig_separation.json") << j.dump(2) << "\n";
    }

    // fig_buckets.json: k_max against degree inside each separation bucket.
    {
        nlohmann::json j;
        j["buckets"] = nlohmann::json::array();
        for (const auto& bucket : buckets) {
            std::map<std::string, std::map<std::uint32_t, std::vector<std::uint32_t>>> by_cell;
            for (const auto& rec : bucket.members) {
                by_cell[to_string(rec.source)][rec.degree].push_back(rec.k_max);
            }
            nlohmann::json series = nlohmann::json::array();
            for (const auto& [source, by_degree] : by_cell) {
                nlohmann::json points = nlohmann::json::array();
                for (const auto& [degree, values] : by_degree) {
                    double mean = 0.0;
                    for (const auto v : values) mean += v;
                    mean /= static_cast<double>(values.size());
                    points.push_back({{"degree", degree},
                                      {"k_max_mean", mean},
                                      {"n_members", values.size()},
                                      {"k_max_values", values}});
                }
                series.push_back({{"source", source}, {"points", std::move(points)}});
            }
            j["buckets"].push_back({{"center", bucket.center},
                                    {"leeway", bucket.leeway},
                                    {"series", std::move(series)}});
        }
        open_out("fig_buckets.json") << j.dump(2) << "\n";
    }

    // summary.json: per-(source, degree) log-linear scaling fits.
    {
        std::map<std::pair<std::string, std::uint32_t>, LogLinearFit> fits;
        std::set<std::pair<PatternSource, std::uint32_t>> cells;
        for (const auto& rec : records) {
            if (rec.plottable()) cells.insert({rec.source, rec.degree});
        }
        for (const auto& cell : cells) {
            if (const auto fit = fit_log_kmax(records, cell.first, cell.second)) {
                fits[{to_string(cell.first), cell.second}] = *fit;
            }
        }
        nlohmann::json j;
        j["fits"] = nlohmann::json::array();
        for (const auto& [key, fit] : fits) {
            j["fits"].push_back({{"source", key.first},
                                 {"degree", key.second},
                                 {"slope", fit.slope},
                                 {"intercept", fit.intercept},
                                 {"pearson_r", fit.pearson_r},
                                 {"n_points", fit.n_points}});
        }
        open_out("summary.json") << j.dump(2) << "\n";
    }
}

} // namespace damlab
