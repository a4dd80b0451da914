#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "arc/types.hpp"

namespace arc {

// Immutable passage collection with an exact flat top-k index. Safe for
// concurrent read-only queries once constructed.
class Corpus {
public:
    Corpus() = default;

    // Takes ownership of the passages; recomputes footprints, enforces unique
    // ids, matching dimensions, finite and unit-norm embeddings (DataError).
    Corpus(Eigen::Index dimension, std::vector<Passage> passages);

    Eigen::Index dimension() const { return dimension_; }
    std::size_t size() const { return passages_.size(); }
    bool empty() const { return passages_.empty(); }
    const Passage& passage(std::size_t i) const { return passages_[i]; }
    const std::vector<Passage>& passages() const { return passages_; }
    const Passage* find(const std::string& id) const;

    std::uint64_t total_footprint_bytes() const { return total_footprint_bytes_; }

    // Exact search: min(k, size) hits sorted ascending by dist = 1 - q.p,
    // ranks 1-based, ties by ascending id. Empty corpus gives an empty result.
    // Dimension mismatch or k < 1 is a ContractError.
    RetrievalResult top_k(const Eigen::Ref<const Embedding>& query, std::size_t k) const;

private:
    Eigen::Index dimension_ = 0;
    std::vector<Passage> passages_;
    std::unordered_map<std::string, std::size_t> by_id_;
    std::uint64_t total_footprint_bytes_ = 0;
};

// JSONL interchange format: line 1 is {"dim": d, "count": n}, then n lines of
// {"id": "...", "text": "...", "vec": [...]}. With normalize set, vectors are
// L2-normalized on the way in; otherwise they must already be unit-norm.
Corpus ingest_corpus(const std::filesystem::path& file, bool normalize);
Corpus parse_corpus_jsonl(std::istream& in, bool normalize, const std::string& source_name);
void write_corpus_jsonl(const Corpus& corpus, std::ostream& out);

}  // namespace arc
