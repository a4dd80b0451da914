#include "arc/workload.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <utility>

#include "arc/errors.hpp"
#include "arc/geometry.hpp"
#include "arc/hash.hpp"

namespace arc {

using nlohmann::json;

void SyntheticSpec::validate() const {
    if (n_clusters < 1) throw ConfigError("synthetic: n_clusters must be >= 1");
    if (cluster_weights.size() != n_clusters) {
        throw ConfigError("synthetic: cluster_weights size != n_clusters");
    }
    double sum = 0.0;
    for (double w : cluster_weights) {
        if (w < 0.0) throw ConfigError("synthetic: negative cluster weight");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw ConfigError("synthetic: cluster weights must sum to 1");
    }
    if (intra_cluster_noise_sigma < 0.0) throw ConfigError("synthetic: noise sigma must be >= 0");
    if (n_queries < 1) throw ConfigError("synthetic: n_queries must be >= 1");
    if (n_passages_per_cluster < 1) {
        throw ConfigError("synthetic: n_passages_per_cluster must be >= 1");
    }
    if (dimension < 2) throw ConfigError("synthetic: dimension must be >= 2");
}

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double gaussian(std::mt19937_64& rng) {
    // Box-Muller, one value per pair of uniforms.
    const double u1 = (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

namespace {

Embedding random_unit_vector(std::mt19937_64& rng, Eigen::Index dim) {
    Embedding v(dim);
    do {
        for (Eigen::Index i = 0; i < dim; ++i) {
            v[i] = static_cast<float>(gaussian(rng));
        }
    } while (!try_unit_normalize(v));
    return v;
}

Embedding jittered(const Embedding& center, double sigma, std::mt19937_64& rng) {
    Embedding v = center;
    if (sigma > 0.0) {
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            v[i] += static_cast<float>(sigma * gaussian(rng));
        }
    }
    if (!try_unit_normalize(v)) {
        // Noise cancelled the center outright; keep the center direction.
        v = center;
    }
    return v;
}

// Pseudo-words of deterministic length so footprints vary across passages.
std::string filler_text(std::mt19937_64& rng) {
    static constexpr const char* kWords[] = {"amber", "basalt", "cobalt", "delta",  "ember",
                                             "fjord", "garnet", "harbor", "indigo", "juniper",
                                             "krill", "lumen",  "mesa",   "nadir",  "onyx",
                                             "prism"};
    const std::size_t n_words = 2 + static_cast<std::size_t>(uniform01(rng) * 30.0);
    std::string out;
    for (std::size_t i = 0; i < n_words; ++i) {
        out += ' ';
        out += kWords[static_cast<std::size_t>(uniform01(rng) * 16.0) & 15];
    }
    return out;
}

std::size_t pick_cluster(const std::vector<double>& weights, std::mt19937_64& rng) {
    const double u = uniform01(rng);
    double acc = 0.0;
    for (std::size_t c = 0; c < weights.size(); ++c) {
        acc += weights[c];
        if (u < acc) return c;
    }
    return weights.size() - 1;
}

}  // namespace

SyntheticWorkload generate_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.seed);

    std::vector<Embedding> centers;
    centers.reserve(spec.n_clusters);
    for (std::size_t c = 0; c < spec.n_clusters; ++c) {
        centers.push_back(random_unit_vector(rng, spec.dimension));
    }

    SyntheticWorkload out;
    std::vector<Passage> passages;
    std::vector<std::vector<std::string>> cluster_passage_ids(spec.n_clusters);
    passages.reserve(spec.n_clusters * spec.n_passages_per_cluster);
    for (std::size_t c = 0; c < spec.n_clusters; ++c) {
        for (std::size_t i = 0; i < spec.n_passages_per_cluster; ++i) {
            char id[32];
            std::snprintf(id, sizeof(id), "c%02zu-p%04zu", c, i);
            Passage p;
            p.id = id;
            p.text = "passage " + p.id + " topic t" + std::to_string(c) + filler_text(rng);
            p.embedding = jittered(centers[c], spec.intra_cluster_noise_sigma, rng);
            passages.push_back(std::move(p));
            cluster_passage_ids[c].push_back(id);
            out.passage_cluster.push_back(c);
        }
    }
    out.corpus = Corpus(spec.dimension, std::move(passages));

    out.queries.reserve(spec.n_queries);
    out.query_cluster.reserve(spec.n_queries);
    for (std::size_t t = 0; t < spec.n_queries; ++t) {
        const std::size_t c = pick_cluster(spec.cluster_weights, rng);
        char id[32];
        std::snprintf(id, sizeof(id), "q%06zu", t);
        QueryRecord q;
        q.id = id;
        q.embedding = jittered(centers[c], spec.intra_cluster_noise_sigma, rng);
        q.answers = cluster_passage_ids[c];
        q.timestamp = t;
        out.queries.push_back(std::move(q));
        out.query_cluster.push_back(c);
    }
    return out;
}

std::vector<QueryRecord> parse_queries_jsonl(std::istream& in, Eigen::Index expected_dim,
                                             const std::string& source_name) {
    std::vector<QueryRecord> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json row = json::parse(line, nullptr, false);
        if (row.is_discarded() || !row.is_object()) {
            throw DataError(source_name + ":" + std::to_string(lineno) + ": malformed JSON");
        }
        if (!row.contains("id") || !row["id"].is_string()) {
            throw DataError(source_name + ":" + std::to_string(lineno) + ": missing string 'id'");
        }
        const bool has_vec = row.contains("vec");
        const bool has_text = row.contains("text");
        if (has_vec == has_text) {
            throw DataError(source_name + ":" + std::to_string(lineno) +
                            ": exactly one of 'vec' or 'text' is required");
        }
        QueryRecord q;
        q.id = row["id"].get<std::string>();
        if (has_vec) {
            const json& arr = row["vec"];
            if (!arr.is_array()) {
                throw DataError(source_name + ":" + std::to_string(lineno) +
                                ": 'vec' must be an array");
            }
            if (static_cast<Eigen::Index>(arr.size()) != expected_dim) {
                throw DataError(source_name + ":" + std::to_string(lineno) + ": vector length " +
                                std::to_string(arr.size()) + " != corpus dimension " +
                                std::to_string(expected_dim));
            }
            q.embedding.resize(expected_dim);
            Eigen::Index i = 0;
            for (const auto& x : arr) {
                if (!x.is_number()) {
                    throw DataError(source_name + ":" + std::to_string(lineno) +
                                    ": non-numeric vector entry");
                }
                q.embedding[i++] = static_cast<float>(x.get<double>());
            }
            if (!all_finite(q.embedding)) {
                throw DataError(source_name + ":" + std::to_string(lineno) +
                                ": non-finite vector component");
            }
        } else {
            q.embedding = toy_embed(row["text"].get<std::string>(), expected_dim);
        }
        if (row.contains("answers")) {
            for (const auto& a : row["answers"]) {
                q.answers.push_back(a.get<std::string>());
            }
        }
        q.timestamp = row.contains("ts") ? row["ts"].get<std::uint64_t>()
                                         : static_cast<std::uint64_t>(out.size());
        out.push_back(std::move(q));
    }
    return out;
}

std::vector<QueryRecord> load_queries(const std::filesystem::path& path,
                                      Eigen::Index expected_dim) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open query file: " + path.string());
    }
    return parse_queries_jsonl(in, expected_dim, path.filename().string());
}

void write_queries_jsonl(std::span<const QueryRecord> queries, std::ostream& out) {
    for (const QueryRecord& q : queries) {
        json row;
        row["id"] = q.id;
        json vec = json::array();
        for (Eigen::Index i = 0; i < q.embedding.size(); ++i) {
            vec.push_back(static_cast<double>(q.embedding[i]));
        }
        row["vec"] = std::move(vec);
        row["answers"] = q.answers;
        row["ts"] = q.timestamp;
        out << row.dump() << '\n';
    }
}

Embedding toy_embed(std::string_view text, Eigen::Index dimension) {
    if (dimension < 8) {
        throw ContractError("toy_embed: dimension must be >= 8");
    }
    if (text.empty()) {
        throw DataError("toy_embed: cannot embed empty text");
    }
    Embedding v = Embedding::Zero(dimension);
    const auto bump = [&](std::string_view feature) {
        const std::uint64_t h = fnv1a64(feature);
        const auto idx = static_cast<Eigen::Index>(h % static_cast<std::uint64_t>(dimension));
        v[idx] += (h >> 63) ? -1.0f : 1.0f;
    };
    if (text.size() < 3) {
        bump(text);
    } else {
        for (std::size_t i = 0; i + 3 <= text.size(); ++i) {
            bump(text.substr(i, 3));
        }
    }
    if (!try_unit_normalize(v)) {
        // Opposite-signed collisions cancelled everything; fall back to a
        // single whole-text feature.
        v.setZero();
        v[static_cast<Eigen::Index>(fnv1a64(text) % static_cast<std::uint64_t>(dimension))] = 1.0f;
    }
    return v;
}

}  // namespace arc
