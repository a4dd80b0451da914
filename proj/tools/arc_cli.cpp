// Command-line driver: reproducible cache replays, parameter sweeps,
// policy comparisons, synthetic workload generation and corpus validation.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "arc/baselines.hpp"
#include "arc/errors.hpp"
#include "arc/harness.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitInternal = 4;

std::vector<double> parse_number_list(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string token;
    while (std::getline(ss, token, ',')) {
        if (token.empty()) continue;
        out.push_back(std::stod(token));
    }
    return out;
}

std::vector<std::string> parse_string_list(const std::string& csv) {
    std::vector<std::string> out;
    std::stringstream ss(csv);
    std::string token;
    while (std::getline(ss, token, ',')) {
        if (!token.empty()) out.push_back(token);
    }
    return out;
}

arc::SyntheticSpec load_synthetic_spec(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw arc::ConfigError("cannot open synthetic spec: " + path.string());
    }
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw arc::ConfigError("synthetic spec is not a JSON object: " + path.string());
    }
    arc::SyntheticSpec spec;
    if (j.contains("n_clusters")) spec.n_clusters = j["n_clusters"].get<std::size_t>();
    if (j.contains("cluster_weights"))
        spec.cluster_weights = j["cluster_weights"].get<std::vector<double>>();
    if (j.contains("noise_sigma")) spec.intra_cluster_noise_sigma = j["noise_sigma"].get<double>();
    if (j.contains("n_queries")) spec.n_queries = j["n_queries"].get<std::size_t>();
    if (j.contains("n_passages_per_cluster"))
        spec.n_passages_per_cluster = j["n_passages_per_cluster"].get<std::size_t>();
    if (j.contains("dimension")) spec.dimension = j["dimension"].get<Eigen::Index>();
    if (j.contains("seed")) spec.seed = j["seed"].get<std::uint64_t>();
    return spec;
}

// Flags shared by run/sweep/compare. CLI values override the --config file,
// which overrides defaults.
struct RunFlags {
    std::string config_file;
    std::string corpus;
    std::string queries;
    std::string synthetic_file;
    std::string policy = "arc";
    std::uint64_t w_max_bytes = 0;
    std::size_t k_retrieve = 50;
    std::size_t k_hub = 10;
    double alpha = 0.4;
    double beta = 0.0;
    double tau = 0.0;
    std::uint64_t hub_refresh_period = 1;
    double dist_floor = 1e-6;
    std::string amat_mode = "analytic";
    double t_cache = 0.05;
    double t_corpus = 1.0;
    std::string out_dir;
    bool snapshot = false;
    std::uint64_t seed = 0;

    void add_to(CLI::App& cmd) {
        cmd.add_option("--config", config_file, "JSON config file; flags override its fields");
        cmd.add_option("--corpus", corpus, "corpus JSONL path");
        cmd.add_option("--queries", queries, "query JSONL path");
        cmd.add_option("--synthetic", synthetic_file, "synthetic workload spec (JSON)");
        cmd.add_option("--policy", policy, "arc|lfu|fifo|proximity|semanticreuse");
        cmd.add_option("--w-max-bytes", w_max_bytes, "cache capacity in bytes");
        cmd.add_option("--k-retrieve", k_retrieve, "top-k retrieval size");
        cmd.add_option("--k-hub", k_hub, "hubness neighborhood size");
        cmd.add_option("--alpha", alpha, "distance sensitivity of the DRF score");
        cmd.add_option("--beta", beta, "hubness/DRF balance (required for arc)");
        cmd.add_option("--tau", tau, "escalation threshold on mean probe distance");
        cmd.add_option("--hub-refresh-period", hub_refresh_period,
                       "queries between hubness recomputations");
        cmd.add_option("--dist-floor", dist_floor, "clamp for zero distances in DRF");
        cmd.add_option("--amat-mode", amat_mode, "analytic|measured");
        cmd.add_option("--t-cache", t_cache, "analytic cache access time (s)");
        cmd.add_option("--t-corpus", t_corpus, "analytic corpus access time (s)");
        cmd.add_option("--out", out_dir, "output directory");
        cmd.add_flag("--snapshot", snapshot, "export cache_snapshot.jsonl (item caches)");
        cmd.add_option("--seed", seed, "run seed (drives synthetic generation)");
    }

    arc::RunConfig build(const CLI::App& cmd) const {
        arc::RunConfig config;
        bool beta_set = cmd.count("--beta") > 0;
        if (!config_file.empty()) {
            config = arc::load_run_config(config_file);
            std::ifstream in(config_file);
            json j = json::parse(in);
            if (j.contains("cache") && j["cache"].contains("beta")) beta_set = true;
        }
        if (cmd.count("--corpus")) config.corpus_path = corpus;
        if (cmd.count("--queries")) config.query_path = queries;
        if (cmd.count("--synthetic")) config.synthetic = load_synthetic_spec(synthetic_file);
        if (cmd.count("--policy")) config.policy = arc::policy_from_string(policy);
        if (cmd.count("--w-max-bytes")) config.cache.w_max_bytes = w_max_bytes;
        if (cmd.count("--k-retrieve")) config.cache.k_retrieve = k_retrieve;
        if (cmd.count("--k-hub")) config.cache.k_hub = k_hub;
        if (cmd.count("--alpha")) config.cache.alpha = alpha;
        if (cmd.count("--beta")) config.cache.beta = beta;
        if (cmd.count("--tau")) config.cache.tau = tau;
        if (cmd.count("--hub-refresh-period")) config.cache.hub_refresh_period = hub_refresh_period;
        if (cmd.count("--dist-floor")) config.cache.dist_floor = dist_floor;
        if (cmd.count("--amat-mode")) config.amat_mode = arc::amat_mode_from_string(amat_mode);
        if (cmd.count("--t-cache")) config.amat_params.t_cache_s = t_cache;
        if (cmd.count("--t-corpus")) config.amat_params.t_corpus_s = t_corpus;
        if (cmd.count("--out")) config.output_dir = out_dir;
        if (cmd.count("--snapshot")) config.snapshot = snapshot;
        if (cmd.count("--seed")) config.seed = seed;

        if (config.policy == arc::PolicyKind::Arc && !beta_set) {
            throw arc::ConfigError("policy 'arc' requires an explicit --beta");
        }
        return config;
    }
};

void print_report_summary(const arc::RunReport& report) {
    std::cout << "queries:                " << report.per_query.size() << '\n'
              << "has_answer_rate_item:   " << report.has_answer_rate_item << '\n';
    std::cout << "has_answer_rate_answer: ";
    if (report.has_answer_rate_answer.has_value()) {
        std::cout << *report.has_answer_rate_answer << '\n';
    } else {
        std::cout << "n/a (no labelled queries)\n";
    }
    std::cout << "cache_serve_rate:       " << report.cache_serve_rate << '\n'
              << "amat_s (" << arc::to_string(report.amat_mode)
              << "):      " << report.amat_s << '\n'
              << "escalations:            " << report.escalations << '\n'
              << "insertions/evictions:   " << report.insertions << '/' << report.evictions
              << '\n'
              << "final cache:            " << report.final_items << " items, "
              << report.final_used_bytes << " bytes\n";
}

int cmd_run(const RunFlags& flags, const CLI::App& cmd) {
    const arc::RunConfig config = flags.build(cmd);
    const arc::RunReport report = arc::run(config);
    print_report_summary(report);
    if (!config.output_dir.empty()) {
        std::cout << "wrote " << (config.output_dir / "report.json").string() << '\n';
    }
    return kExitOk;
}

int cmd_sweep(const RunFlags& flags, const CLI::App& cmd, const std::string& axis,
              const std::string& values_csv) {
    const arc::RunConfig base = flags.build(cmd);
    const std::vector<double> values = parse_number_list(values_csv);
    if (values.empty()) {
        throw arc::ConfigError("--values must list at least one number");
    }
    const auto reports = arc::sweep(base, axis, values);
    arc::write_sweep_csv(axis, values, reports, std::cout);
    return kExitOk;
}

int cmd_compare(const RunFlags& flags, const CLI::App& cmd, const std::string& policies_csv,
                bool include_arc_beta0) {
    const arc::RunConfig base = flags.build(cmd);
    std::vector<arc::RunConfig> configs;
    std::vector<std::string> labels;
    for (const std::string& name : parse_string_list(policies_csv)) {
        arc::RunConfig config = base;
        config.policy = arc::policy_from_string(name);
        configs.push_back(config);
        labels.push_back(arc::to_string(config.policy));
    }
    if (include_arc_beta0) {
        arc::RunConfig config = base;
        config.policy = arc::PolicyKind::Arc;
        config.cache.beta = 0.0;
        configs.push_back(config);
        labels.push_back("arc-beta0");
    }
    const auto rows = arc::compare(configs, labels);
    arc::write_comparison_table(rows, std::cout);
    if (!base.output_dir.empty()) {
        fs::create_directories(base.output_dir);
        std::ofstream csv(base.output_dir / "comparison.csv");
        arc::write_comparison_csv(rows, csv);
        std::ofstream txt(base.output_dir / "comparison.txt");
        arc::write_comparison_table(rows, txt);
    }
    return kExitOk;
}

int cmd_generate(const arc::SyntheticSpec& spec, const fs::path& out_corpus,
                 const fs::path& out_queries) {
    const arc::SyntheticWorkload workload = arc::generate_synthetic(spec);
    {
        std::ofstream out(out_corpus);
        if (!out) throw arc::DataError("cannot write " + out_corpus.string());
        arc::write_corpus_jsonl(workload.corpus, out);
    }
    {
        std::ofstream out(out_queries);
        if (!out) throw arc::DataError("cannot write " + out_queries.string());
        arc::write_queries_jsonl(workload.queries, out);
    }
    std::cout << "corpus:  " << out_corpus.string() << " (" << workload.corpus.size()
              << " passages, dim " << workload.corpus.dimension() << ")\n"
              << "queries: " << out_queries.string() << " (" << workload.queries.size()
              << " queries)\n";
    return kExitOk;
}

int cmd_ingest(const fs::path& corpus_path, bool normalize, const fs::path& out_path) {
    const arc::Corpus corpus = arc::ingest_corpus(corpus_path, normalize);
    std::cout << "passages:        " << corpus.size() << '\n'
              << "dimension:       " << corpus.dimension() << '\n'
              << "total footprint: " << corpus.total_footprint_bytes() << " bytes\n";
    if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!out) throw arc::DataError("cannot write " + out_path.string());
        arc::write_corpus_jsonl(corpus, out);
        std::cout << "wrote normalized corpus to " << out_path.string() << '\n';
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Semantic retrieval cache replay harness"};
    app.require_subcommand(1);

    RunFlags run_flags;
    CLI::App* run_cmd = app.add_subcommand("run", "replay one query stream through one policy");
    run_flags.add_to(*run_cmd);

    RunFlags sweep_flags;
    std::string axis;
    std::string values_csv;
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "one run per value along a parameter axis");
    sweep_flags.add_to(*sweep_cmd);
    sweep_cmd->add_option("--axis", axis, "w_max_bytes|beta|alpha|tau|k_retrieve|k_hub")
        ->required();
    sweep_cmd->add_option("--values", values_csv, "comma-separated values")->required();

    RunFlags compare_flags;
    std::string policies_csv = "arc,lfu,fifo,proximity,semanticreuse";
    bool include_arc_beta0 = false;
    CLI::App* compare_cmd =
        app.add_subcommand("compare", "head-to-head policies on identical inputs");
    compare_flags.add_to(*compare_cmd);
    compare_cmd->add_option("--policies", policies_csv, "comma-separated policy names");
    compare_cmd->add_flag("--arc-beta0", include_arc_beta0, "also run arc with beta=0");

    std::string spec_file;
    arc::SyntheticSpec gen_spec;
    std::string weights_csv;
    std::string out_corpus = "corpus.jsonl";
    std::string out_queries = "queries.jsonl";
    CLI::App* generate_cmd = app.add_subcommand("generate", "write a synthetic corpus + queries");
    generate_cmd->add_option("--spec", spec_file, "synthetic spec JSON (flags override)");
    generate_cmd->add_option("--clusters", gen_spec.n_clusters, "number of clusters");
    generate_cmd->add_option("--weights", weights_csv, "comma-separated cluster weights");
    generate_cmd->add_option("--noise", gen_spec.intra_cluster_noise_sigma, "gaussian sigma");
    generate_cmd->add_option("--n-queries", gen_spec.n_queries, "queries to generate");
    generate_cmd->add_option("--passages-per-cluster", gen_spec.n_passages_per_cluster,
                             "passages per cluster");
    generate_cmd->add_option("--dim", gen_spec.dimension, "embedding dimension");
    generate_cmd->add_option("--seed", gen_spec.seed, "generation seed");
    generate_cmd->add_option("--out-corpus", out_corpus, "corpus output path");
    generate_cmd->add_option("--out-queries", out_queries, "query output path");

    std::string ingest_corpus_path;
    std::string ingest_out;
    bool ingest_normalize = false;
    CLI::App* ingest_cmd = app.add_subcommand("ingest", "validate (and normalize) a corpus file");
    ingest_cmd->add_option("--corpus", ingest_corpus_path, "corpus JSONL path")->required();
    ingest_cmd->add_flag("--normalize", ingest_normalize, "L2-normalize vectors");
    ingest_cmd->add_option("--out", ingest_out, "write the validated corpus here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (run_cmd->parsed()) {
            return cmd_run(run_flags, *run_cmd);
        }
        if (sweep_cmd->parsed()) {
            return cmd_sweep(sweep_flags, *sweep_cmd, axis, values_csv);
        }
        if (compare_cmd->parsed()) {
            return cmd_compare(compare_flags, *compare_cmd, policies_csv, include_arc_beta0);
        }
        if (generate_cmd->parsed()) {
            arc::SyntheticSpec spec =
                spec_file.empty() ? arc::SyntheticSpec{} : load_synthetic_spec(spec_file);
            if (generate_cmd->count("--clusters")) spec.n_clusters = gen_spec.n_clusters;
            if (generate_cmd->count("--weights"))
                spec.cluster_weights = parse_number_list(weights_csv);
            if (generate_cmd->count("--noise"))
                spec.intra_cluster_noise_sigma = gen_spec.intra_cluster_noise_sigma;
            if (generate_cmd->count("--n-queries")) spec.n_queries = gen_spec.n_queries;
            if (generate_cmd->count("--passages-per-cluster"))
                spec.n_passages_per_cluster = gen_spec.n_passages_per_cluster;
            if (generate_cmd->count("--dim")) spec.dimension = gen_spec.dimension;
            if (generate_cmd->count("--seed")) spec.seed = gen_spec.seed;
            return cmd_generate(spec, out_corpus, out_queries);
        }
        if (ingest_cmd->parsed()) {
            return cmd_ingest(ingest_corpus_path, ingest_normalize, ingest_out);
        }
    } catch (const arc::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const arc::DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const arc::ContractError& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kExitInternal;
    } catch (const arc::InternalError& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kExitInternal;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInternal;
    }
    return kExitConfig;
}
