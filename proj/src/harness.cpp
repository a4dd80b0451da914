#include "arc/harness.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "arc/baselines.hpp"
#include "arc/errors.hpp"

namespace arc {

using nlohmann::json;

void RunConfig::validate() const {
    const bool has_files = !corpus_path.empty() || !query_path.empty();
    if (synthetic.has_value() == has_files) {
        throw ConfigError("exactly one of {corpus+queries, synthetic spec} must be given");
    }
    if (has_files && (corpus_path.empty() || query_path.empty())) {
        throw ConfigError("file-based runs need both a corpus and a query file");
    }
    if (synthetic.has_value()) {
        SyntheticSpec s = *synthetic;
        s.seed = seed;
        s.validate();
    }
    cache.validate();
    if (amat_params.t_cache_s < 0.0 || amat_params.t_corpus_s < 0.0) {
        throw ConfigError("analytic AMAT latencies must be non-negative");
    }
}

namespace {

json cache_to_json(const CacheConfig& c) {
    return json{{"w_max_bytes", c.w_max_bytes},
                {"k_retrieve", c.k_retrieve},
                {"k_hub", c.k_hub},
                {"alpha", c.alpha},
                {"beta", c.beta},
                {"tau", c.tau},
                {"hub_refresh_period", c.hub_refresh_period},
                {"dist_floor", c.dist_floor}};
}

void cache_from_json(const json& j, CacheConfig& c) {
    if (j.contains("w_max_bytes")) c.w_max_bytes = j["w_max_bytes"].get<std::uint64_t>();
    if (j.contains("k_retrieve")) c.k_retrieve = j["k_retrieve"].get<std::size_t>();
    if (j.contains("k_hub")) c.k_hub = j["k_hub"].get<std::size_t>();
    if (j.contains("alpha")) c.alpha = j["alpha"].get<double>();
    if (j.contains("beta")) c.beta = j["beta"].get<double>();
    if (j.contains("tau")) c.tau = j["tau"].get<double>();
    if (j.contains("hub_refresh_period"))
        c.hub_refresh_period = j["hub_refresh_period"].get<std::uint64_t>();
    if (j.contains("dist_floor")) c.dist_floor = j["dist_floor"].get<double>();
}

json synthetic_to_json(const SyntheticSpec& s) {
    return json{{"n_clusters", s.n_clusters},
                {"cluster_weights", s.cluster_weights},
                {"noise_sigma", s.intra_cluster_noise_sigma},
                {"n_queries", s.n_queries},
                {"n_passages_per_cluster", s.n_passages_per_cluster},
                {"dimension", s.dimension},
                {"seed", s.seed}};
}

void synthetic_from_json(const json& j, SyntheticSpec& s) {
    if (j.contains("n_clusters")) s.n_clusters = j["n_clusters"].get<std::size_t>();
    if (j.contains("cluster_weights"))
        s.cluster_weights = j["cluster_weights"].get<std::vector<double>>();
    if (j.contains("noise_sigma")) s.intra_cluster_noise_sigma = j["noise_sigma"].get<double>();
    if (j.contains("n_queries")) s.n_queries = j["n_queries"].get<std::size_t>();
    if (j.contains("n_passages_per_cluster"))
        s.n_passages_per_cluster = j["n_passages_per_cluster"].get<std::size_t>();
    if (j.contains("dimension")) s.dimension = j["dimension"].get<Eigen::Index>();
    if (j.contains("seed")) s.seed = j["seed"].get<std::uint64_t>();
}

}  // namespace

void to_json(json& j, const RunConfig& config) {
    j = json::object();
    j["corpus"] = config.corpus_path.string();
    j["queries"] = config.query_path.string();
    if (config.synthetic.has_value()) {
        j["synthetic"] = synthetic_to_json(*config.synthetic);
    } else {
        j["synthetic"] = nullptr;
    }
    j["policy"] = to_string(config.policy);
    j["cache"] = cache_to_json(config.cache);
    j["amat_mode"] = to_string(config.amat_mode);
    j["t_cache_s"] = config.amat_params.t_cache_s;
    j["t_corpus_s"] = config.amat_params.t_corpus_s;
    j["output_dir"] = config.output_dir.string();
    j["snapshot"] = config.snapshot;
    j["seed"] = config.seed;
}

void from_json(const json& j, RunConfig& config) {
    if (j.contains("corpus")) config.corpus_path = j["corpus"].get<std::string>();
    if (j.contains("queries")) config.query_path = j["queries"].get<std::string>();
    if (j.contains("synthetic") && !j["synthetic"].is_null()) {
        SyntheticSpec s;
        synthetic_from_json(j["synthetic"], s);
        config.synthetic = s;
    }
    if (j.contains("policy")) config.policy = policy_from_string(j["policy"].get<std::string>());
    if (j.contains("cache")) cache_from_json(j["cache"], config.cache);
    if (j.contains("amat_mode"))
        config.amat_mode = amat_mode_from_string(j["amat_mode"].get<std::string>());
    if (j.contains("t_cache_s")) config.amat_params.t_cache_s = j["t_cache_s"].get<double>();
    if (j.contains("t_corpus_s")) config.amat_params.t_corpus_s = j["t_corpus_s"].get<double>();
    if (j.contains("output_dir")) config.output_dir = j["output_dir"].get<std::string>();
    if (j.contains("snapshot")) config.snapshot = j["snapshot"].get<bool>();
    if (j.contains("seed")) config.seed = j["seed"].get<std::uint64_t>();
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file: " + path.string());
    }
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw ConfigError("config file is not a JSON object: " + path.string());
    }
    RunConfig config;
    from_json(j, config);
    return config;
}

RunReport run_loaded(const RunConfig& config, const Corpus& corpus,
                     std::span<const QueryRecord> queries) {
    config.validate();
    auto policy = make_policy(config.policy, config.cache);

    RunReport report;
    report.amat_mode = config.amat_mode;
    report.per_query.reserve(queries.size());
    std::size_t index = 0;
    for (const QueryRecord& q : queries) {
        ServeOutcome served;
        try {
            served = policy->serve(q.id, q.embedding, corpus);
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw DataError("query #" + std::to_string(index) + " ('" + q.id +
                            "') failed: " + e.what());
        }
        const ServeTrace& trace = served.trace;

        QueryOutcome outcome;
        outcome.query_id = q.id;
        outcome.m = static_cast<int>(served.result.size());
        outcome.misses = trace.misses;
        outcome.served_from_cache = trace.provenance == Provenance::Cache;
        if (!q.answers.empty()) {
            outcome.answer_found = answer_containment(served.result, q.answers);
        }
        if (config.amat_mode == AmatMode::Measured) {
            outcome.cache_latency_s = trace.probe_seconds;
            if (!outcome.served_from_cache) {
                outcome.corpus_latency_s = trace.corpus_seconds;
            }
        } else {
            outcome.cache_latency_s = config.amat_params.t_cache_s;
            if (!outcome.served_from_cache) {
                outcome.corpus_latency_s = config.amat_params.t_corpus_s;
            }
        }
        report.per_query.push_back(std::move(outcome));

        if (!report.per_query.back().served_from_cache) report.escalations += 1;
        report.insertions += trace.inserted_ids.size();
        report.evictions += trace.evicted_ids.size();
        report.oversize_skips += trace.skipped_oversize;
        ++index;
    }

    if (!report.per_query.empty()) {
        report.has_answer_rate_item = has_answer_rate_item(report.per_query);
        report.has_answer_rate_answer = has_answer_rate_answer(report.per_query);
        report.m_fixed = has_fixed_m(report.per_query);
        report.cache_serve_rate = arc::cache_serve_rate(report.per_query);
        report.cumulative_curve = cumulative_item_rate_curve(report.per_query);
        report.amat_s = config.amat_mode == AmatMode::Measured
                            ? amat_measured(report.per_query)
                            : amat_analytic(report.cache_serve_rate, config.amat_params.t_cache_s,
                                            config.amat_params.t_corpus_s);
    }
    report.final_items = policy->entry_count();
    report.final_used_bytes = policy->used_bytes();

    if (!config.output_dir.empty()) {
        namespace fs = std::filesystem;
        fs::create_directories(config.output_dir);
        {
            std::ofstream out(config.output_dir / "report.json");
            write_report_json(report, out);
        }
        {
            std::ofstream out(config.output_dir / "per_query.csv");
            write_per_query_csv(report, out);
        }
        {
            std::ofstream out(config.output_dir / "config.echo");
            json echo;
            to_json(echo, config);
            out << echo.dump(2) << '\n';
        }
        if (config.snapshot && policy->item_state() != nullptr) {
            std::ofstream out(config.output_dir / "cache_snapshot.jsonl");
            export_snapshot(*policy->item_state(), config.cache, out);
        }
    }
    return report;
}

namespace {

struct LoadedInputs {
    Corpus corpus;
    std::vector<QueryRecord> queries;
};

LoadedInputs load_inputs(const RunConfig& config) {
    LoadedInputs inputs;
    if (config.synthetic.has_value()) {
        SyntheticSpec spec = *config.synthetic;
        spec.seed = config.seed;
        SyntheticWorkload w = generate_synthetic(spec);
        inputs.corpus = std::move(w.corpus);
        inputs.queries = std::move(w.queries);
    } else {
        inputs.corpus = ingest_corpus(config.corpus_path, /*normalize=*/false);
        inputs.queries = load_queries(config.query_path, inputs.corpus.dimension());
    }
    return inputs;
}

std::string format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

}  // namespace

RunReport run(const RunConfig& config) {
    config.validate();
    const LoadedInputs inputs = load_inputs(config);
    return run_loaded(config, inputs.corpus, inputs.queries);
}

RunConfig with_axis_value(const RunConfig& base, const std::string& axis, double value) {
    RunConfig config = base;
    if (axis == "w_max_bytes") {
        config.cache.w_max_bytes = static_cast<std::uint64_t>(std::llround(value));
    } else if (axis == "beta") {
        config.cache.beta = value;
    } else if (axis == "alpha") {
        config.cache.alpha = value;
    } else if (axis == "tau") {
        config.cache.tau = value;
    } else if (axis == "k_retrieve") {
        config.cache.k_retrieve = static_cast<std::size_t>(std::llround(value));
    } else if (axis == "k_hub") {
        config.cache.k_hub = static_cast<std::size_t>(std::llround(value));
    } else {
        throw ConfigError("unknown sweep axis '" + axis +
                          "' (w_max_bytes|beta|alpha|tau|k_retrieve|k_hub)");
    }
    return config;
}

std::vector<RunReport> sweep(const RunConfig& base, const std::string& axis,
                             std::span<const double> values) {
    if (values.empty()) {
        throw ContractError("sweep: values must be non-empty");
    }
    base.validate();
    const LoadedInputs inputs = load_inputs(base);

    std::vector<RunReport> reports;
    reports.reserve(values.size());
    for (double value : values) {
        RunConfig config = with_axis_value(base, axis, value);
        if (!base.output_dir.empty()) {
            config.output_dir = base.output_dir / (axis + "=" + format_value(value));
        }
        reports.push_back(run_loaded(config, inputs.corpus, inputs.queries));
    }

    if (!base.output_dir.empty()) {
        std::filesystem::create_directories(base.output_dir);
        std::ofstream out(base.output_dir / "sweep.csv");
        write_sweep_csv(axis, values, reports, out);
    }
    return reports;
}

std::vector<ComparisonRow> compare(std::span<const RunConfig> configs,
                                   std::span<const std::string> labels) {
    if (configs.empty()) {
        throw ContractError("compare: at least one config is required");
    }
    if (!labels.empty() && labels.size() != configs.size()) {
        throw ContractError("compare: labels must match configs");
    }
    const RunConfig& first = configs.front();
    for (const RunConfig& c : configs) {
        c.validate();
        if (c.corpus_path != first.corpus_path || c.query_path != first.query_path ||
            c.synthetic != first.synthetic || c.seed != first.seed) {
            throw ContractError("compare: all configs must share corpus, queries and seed");
        }
    }
    const LoadedInputs inputs = load_inputs(first);

    std::vector<ComparisonRow> rows;
    rows.reserve(configs.size());
    for (std::size_t i = 0; i < configs.size(); ++i) {
        RunConfig config = configs[i];
        const std::string label = labels.empty() ? to_string(config.policy) : labels[i];
        if (!config.output_dir.empty()) {
            config.output_dir = config.output_dir / label;
        }
        const RunReport report = run_loaded(config, inputs.corpus, inputs.queries);
        rows.push_back(ComparisonRow{label, config.policy, report.has_answer_rate_item,
                                     report.has_answer_rate_answer, report.amat_s});
    }
    return rows;
}

void write_sweep_csv(const std::string& axis, std::span<const double> values,
                     std::span<const RunReport> reports, std::ostream& out) {
    out << axis << ",has_answer_rate_item,has_answer_rate_answer,amat_s\n";
    for (std::size_t i = 0; i < reports.size(); ++i) {
        out << format_value(values[i]) << ',' << format_value(reports[i].has_answer_rate_item)
            << ',';
        if (reports[i].has_answer_rate_answer.has_value()) {
            out << format_value(*reports[i].has_answer_rate_answer);
        }
        out << ',' << format_value(reports[i].amat_s) << '\n';
    }
}

void write_comparison_csv(std::span<const ComparisonRow> rows, std::ostream& out) {
    out << "policy,has_answer_rate_item,has_answer_rate_answer,amat_s\n";
    for (const ComparisonRow& row : rows) {
        out << row.label << ',' << format_value(row.has_answer_rate_item) << ',';
        if (row.has_answer_rate_answer.has_value()) {
            out << format_value(*row.has_answer_rate_answer);
        }
        out << ',' << format_value(row.amat_s) << '\n';
    }
}

void write_comparison_table(std::span<const ComparisonRow> rows, std::ostream& out) {
    out << std::left << std::setw(18) << "policy" << std::right << std::setw(18) << "rate_item"
        << std::setw(18) << "rate_answer" << std::setw(14) << "amat_s" << '\n';
    for (const ComparisonRow& row : rows) {
        out << std::left << std::setw(18) << row.label << std::right << std::setw(18)
            << std::fixed << std::setprecision(6) << row.has_answer_rate_item << std::setw(18);
        if (row.has_answer_rate_answer.has_value()) {
            out << *row.has_answer_rate_answer;
        } else {
            out << "-";
        }
        out << std::setw(14) << row.amat_s << '\n';
        out.unsetf(std::ios::fixed);
    }
}

}  // namespace arc
