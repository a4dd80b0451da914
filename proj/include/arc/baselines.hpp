#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "arc/cache.hpp"
#include "arc/corpus.hpp"
#include "arc/types.hpp"

namespace arc {

// Uniform serve interface so one trace replays head-to-head under any policy.
// Single writer per instance, same as the underlying caches.
class Policy {
public:
    virtual ~Policy() = default;

    virtual ServeOutcome serve(const std::string& query_id,
                               const Eigen::Ref<const Embedding>& query, const Corpus& corpus) = 0;

    virtual PolicyKind kind() const = 0;
    virtual std::uint64_t used_bytes() const = 0;
    virtual std::uint64_t recompute_used_bytes() const = 0;
    virtual std::uint64_t w_max_bytes() const = 0;
    virtual std::uint64_t entry_count() const = 0;

    // Non-null for item-cache policies (snapshot export and inspection).
    virtual const CacheState* item_state() const { return nullptr; }
};

std::unique_ptr<Policy> make_policy(PolicyKind kind, const CacheConfig& config);

// Arc, Lfu and Fifo: one pipeline (probe, tau escalation, DRF credit, evict),
// only the eviction score differs. Hubness is maintained for Arc scoring only;
// the other scorings never read it.
class ItemCachePolicy final : public Policy {
public:
    ItemCachePolicy(PolicyKind scoring, CacheConfig config);

    ServeOutcome serve(const std::string& query_id, const Eigen::Ref<const Embedding>& query,
                       const Corpus& corpus) override;

    PolicyKind kind() const override { return scoring_; }
    std::uint64_t used_bytes() const override { return state_.used_bytes(); }
    std::uint64_t recompute_used_bytes() const override { return state_.recompute_used_bytes(); }
    std::uint64_t w_max_bytes() const override { return config_.w_max_bytes; }
    std::uint64_t entry_count() const override { return state_.size(); }
    const CacheState* item_state() const override { return &state_; }

    CacheState& state() { return state_; }
    const CacheConfig& config() const { return config_; }

private:
    PolicyKind scoring_;
    CacheConfig config_;
    CacheState state_;
};

struct QueryMemoryEntry {
    std::string query_id;
    Embedding query_embedding;
    RetrievalResult result;  // non-empty
    std::uint64_t stored_at = 0;
    std::uint64_t footprint_bytes = 0;  // query vector bytes + sum of passage footprints
};

// Proximity and SemanticReuse: remember (query, result) pairs, replay the
// nearest past query's result when it is within tau, otherwise escalate and
// store. Eviction differs: Proximity drops the oldest pair, SemanticReuse the
// pair most similar to the newly stored one.
class QueryMemoryPolicy final : public Policy {
public:
    QueryMemoryPolicy(PolicyKind kind, CacheConfig config);

    ServeOutcome serve(const std::string& query_id, const Eigen::Ref<const Embedding>& query,
                       const Corpus& corpus) override;

    PolicyKind kind() const override { return kind_; }
    std::uint64_t used_bytes() const override { return used_bytes_; }
    std::uint64_t recompute_used_bytes() const override;
    std::uint64_t w_max_bytes() const override { return config_.w_max_bytes; }
    std::uint64_t entry_count() const override { return entries_.size(); }

    const std::vector<QueryMemoryEntry>& entries() const { return entries_; }
    std::uint64_t oversize_skips() const { return oversize_skips_; }

private:
    void erase_entry(std::size_t pos);
    bool contains_passage(const std::string& id) const;

    PolicyKind kind_;
    CacheConfig config_;
    std::vector<QueryMemoryEntry> entries_;
    std::unordered_map<std::string, std::uint64_t> passage_refcount_;
    std::uint64_t used_bytes_ = 0;
    std::uint64_t clock_ = 0;
    std::uint64_t oversize_skips_ = 0;
};

}  // namespace arc
