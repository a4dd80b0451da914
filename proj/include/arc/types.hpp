#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace arc {

template <typename Scalar>
using DenseVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Embeddings are unit-normalized float32 vectors.
using Embedding = DenseVector<float>;
using EmbeddingMatrix = DenseMatrix<float>;

inline constexpr std::uint64_t kFloatBytes = 4;

// Storage accounting: UTF-8 text bytes plus float32 vector bytes.
inline std::uint64_t passage_footprint(const std::string& text, Eigen::Index dim) {
    return static_cast<std::uint64_t>(text.size()) + kFloatBytes * static_cast<std::uint64_t>(dim);
}

struct Passage {
    std::string id;
    std::string text;
    Embedding embedding;
    std::uint64_t footprint_bytes = 0;  // fixed at ingestion
};

enum class Provenance { Cache, Corpus };

inline const char* to_string(Provenance p) {
    return p == Provenance::Cache ? "cache" : "corpus";
}

struct RetrievalHit {
    Passage passage;  // full payload so escalated items can be inserted into a cache
    int rank = 0;     // 1-based, consecutive
    float distance = 0.0f;
};

// Ranked list (ascending distance) plus where it was served from.
struct RetrievalResult {
    std::vector<RetrievalHit> hits;
    Provenance provenance = Provenance::Corpus;

    bool empty() const { return hits.empty(); }
    std::size_t size() const { return hits.size(); }
};

struct TraceHit {
    std::string id;
    int rank = 0;
    float distance = 0.0f;
};

// Per-query audit record: what the policy saw, decided, and changed.
struct ServeTrace {
    Provenance provenance = Provenance::Corpus;
    bool probe_empty = true;       // cache-side probe returned nothing
    double probe_mean_dist = 0.0;  // quantity the escalation test compared against tau
    std::vector<std::string> inserted_ids;
    std::vector<std::string> evicted_ids;
    std::uint64_t skipped_oversize = 0;  // items larger than the whole cache budget
    int misses = 0;                      // result items absent from the cache before access
    std::vector<TraceHit> hits;          // ranks/distances of the served result
    double probe_seconds = 0.0;          // wall-clock, only meaningful for measured AMAT
    double corpus_seconds = 0.0;         // wall-clock of the escalated fetch, 0 when not escalated
};

struct ServeOutcome {
    RetrievalResult result;
    ServeTrace trace;
};

}  // namespace arc
