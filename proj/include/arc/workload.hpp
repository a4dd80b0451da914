#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "arc/corpus.hpp"
#include "arc/types.hpp"

namespace arc {

struct QueryRecord {
    std::string id;
    Embedding embedding;
    std::vector<std::string> answers;  // empty = unlabelled
    std::uint64_t timestamp = 0;
};

// Clustered queries over a clustered corpus: a skewed mixture over dense cores
// on the unit sphere, the simplest geometry where both demand skew and hubness
// are visible.
struct SyntheticSpec {
    std::size_t n_clusters = 0;
    std::vector<double> cluster_weights;  // sums to 1
    double intra_cluster_noise_sigma = 0.0;
    std::size_t n_queries = 0;
    std::size_t n_passages_per_cluster = 0;
    Eigen::Index dimension = 0;
    std::uint64_t seed = 0;

    void validate() const;  // ConfigError on violation
    bool operator==(const SyntheticSpec&) const = default;
};

struct SyntheticWorkload {
    Corpus corpus;
    std::vector<QueryRecord> queries;
    std::vector<std::size_t> passage_cluster;  // parallel to corpus passages
    std::vector<std::size_t> query_cluster;    // parallel to queries
};

// Fully determined by (spec, spec.seed); every generated byte is reproducible.
// Each query's answers are the passage ids of its source cluster, and every
// passage text contains its own id, so answer containment is well defined.
SyntheticWorkload generate_synthetic(const SyntheticSpec& spec);

// Query JSONL: one {"id", "vec"|"text", "answers", "ts"} object per line.
// Text queries are embedded with toy_embed at expected_dim.
std::vector<QueryRecord> load_queries(const std::filesystem::path& path, Eigen::Index expected_dim);
std::vector<QueryRecord> parse_queries_jsonl(std::istream& in, Eigen::Index expected_dim,
                                             const std::string& source_name);
void write_queries_jsonl(std::span<const QueryRecord> queries, std::ostream& out);

// Deterministic feature-hashed character-trigram embedding, unit-normalized.
// A stand-in for a real embedding model at desk scale. dimension >= 8;
// empty text is a DataError.
Embedding toy_embed(std::string_view text, Eigen::Index dimension);

// Seeded draws pinned to bit-stable algorithms (std distributions vary across
// stdlibs; mt19937_64 itself is specified exactly).
double uniform01(std::mt19937_64& rng);
double gaussian(std::mt19937_64& rng);

}  // namespace arc
