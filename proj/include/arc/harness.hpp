#pragma once

#include <filesystem>
#include <nlohmann/json_fwd.hpp>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "arc/cache.hpp"
#include "arc/metrics.hpp"
#include "arc/workload.hpp"

namespace arc {

struct AnalyticAmatParams {
    double t_cache_s = 0.05;
    double t_corpus_s = 1.0;
};

// One reproducible replay: corpus + query stream (from files or generated),
// one policy, one cache configuration. For synthetic inputs, `seed` is the
// generation seed so that sweeps and comparisons share a workload by sharing
// a seed.
struct RunConfig {
    std::filesystem::path corpus_path;
    std::filesystem::path query_path;
    std::optional<SyntheticSpec> synthetic;
    PolicyKind policy = PolicyKind::Arc;
    CacheConfig cache;
    AmatMode amat_mode = AmatMode::Analytic;
    AnalyticAmatParams amat_params;
    std::filesystem::path output_dir;  // empty: compute only, write nothing
    bool snapshot = false;             // also write cache_snapshot.jsonl
    std::uint64_t seed = 0;

    void validate() const;  // ConfigError on violation
};

void to_json(nlohmann::json& j, const RunConfig& config);
void from_json(const nlohmann::json& j, RunConfig& config);
RunConfig load_run_config(const std::filesystem::path& path);

// Replays every query in order. With an output directory set, writes
// report.json, per_query.csv, config.echo and optionally cache_snapshot.jsonl.
RunReport run(const RunConfig& config);

// Pre-loaded variant used by run(), sweeps and tests to share inputs.
RunReport run_loaded(const RunConfig& config, const Corpus& corpus,
                     std::span<const QueryRecord> queries);

// One run per value along a single cache parameter axis
// (w_max_bytes | beta | alpha | tau | k_retrieve | k_hub). With an output
// directory, each run lands in "<axis>=<value>/" plus a combined sweep.csv.
std::vector<RunReport> sweep(const RunConfig& base, const std::string& axis,
                             std::span<const double> values);

RunConfig with_axis_value(const RunConfig& base, const std::string& axis, double value);

struct ComparisonRow {
    std::string label;
    PolicyKind policy;
    double has_answer_rate_item = 0.0;
    std::optional<double> has_answer_rate_answer;
    double amat_s = 0.0;
};

// Head-to-head over identical inputs (same corpus, queries and seed; only
// policy and cache parameters may differ). Mismatched inputs or an empty list
// is a ContractError.
std::vector<ComparisonRow> compare(std::span<const RunConfig> configs,
                                   std::span<const std::string> labels = {});

void write_sweep_csv(const std::string& axis, std::span<const double> values,
                     std::span<const RunReport> reports, std::ostream& out);
void write_comparison_csv(std::span<const ComparisonRow> rows, std::ostream& out);
void write_comparison_table(std::span<const ComparisonRow> rows, std::ostream& out);

}  // namespace arc
