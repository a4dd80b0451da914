#include "arc/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <utility>

#include "arc/errors.hpp"
#include "arc/geometry.hpp"

namespace arc {

std::unique_ptr<Policy> make_policy(PolicyKind kind, const CacheConfig& config) {
    switch (kind) {
        case PolicyKind::Arc:
        case PolicyKind::Lfu:
        case PolicyKind::Fifo: return std::make_unique<ItemCachePolicy>(kind, config);
        case PolicyKind::Proximity:
        case PolicyKind::SemanticReuse: return std::make_unique<QueryMemoryPolicy>(kind, config);
    }
    throw ConfigError("unknown policy kind");
}

ItemCachePolicy::ItemCachePolicy(PolicyKind scoring, CacheConfig config)
    : scoring_(scoring), config_(std::move(config)) {
    config_.validate();
    if (scoring_ != PolicyKind::Arc && scoring_ != PolicyKind::Lfu &&
        scoring_ != PolicyKind::Fifo) {
        throw ConfigError("ItemCachePolicy requires arc, lfu or fifo scoring");
    }
}

ServeOutcome ItemCachePolicy::serve(const std::string&, const Eigen::Ref<const Embedding>& query,
                                    const Corpus& corpus) {
    return serve_query(state_, query, corpus, config_, scoring_);
}

QueryMemoryPolicy::QueryMemoryPolicy(PolicyKind kind, CacheConfig config)
    : kind_(kind), config_(std::move(config)) {
    config_.validate();
    if (kind_ != PolicyKind::Proximity && kind_ != PolicyKind::SemanticReuse) {
        throw ConfigError("QueryMemoryPolicy requires proximity or semanticreuse");
    }
}

std::uint64_t QueryMemoryPolicy::recompute_used_bytes() const {
    std::uint64_t sum = 0;
    for (const QueryMemoryEntry& e : entries_) {
        sum += e.footprint_bytes;
    }
    return sum;
}

bool QueryMemoryPolicy::contains_passage(const std::string& id) const {
    auto it = passage_refcount_.find(id);
    return it != passage_refcount_.end() && it->second > 0;
}

void QueryMemoryPolicy::erase_entry(std::size_t pos) {
    for (const RetrievalHit& hit : entries_[pos].result.hits) {
        auto it = passage_refcount_.find(hit.passage.id);
        if (it == passage_refcount_.end() || it->second == 0) {
            throw InternalError("query-memory refcount drifted for '" + hit.passage.id + "'");
        }
        if (--it->second == 0) {
            passage_refcount_.erase(it);
        }
    }
    used_bytes_ -= entries_[pos].footprint_bytes;
    if (pos + 1 != entries_.size()) {
        entries_[pos] = std::move(entries_.back());
    }
    entries_.pop_back();
}

ServeOutcome QueryMemoryPolicy::serve(const std::string& query_id,
                                      const Eigen::Ref<const Embedding>& query,
                                      const Corpus& corpus) {
    using steady = std::chrono::steady_clock;
    ServeOutcome out;
    ServeTrace& trace = out.trace;

    const auto probe_start = steady::now();
    std::size_t best = entries_.size();
    float best_dist = std::numeric_limits<float>::infinity();
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        const QueryMemoryEntry& e = entries_[i];
        if (e.query_embedding.size() != query.size()) {
            throw ContractError("query dimension does not match stored query memory");
        }
        const float d = cosine_distance(e.query_embedding, query);
        const bool better = best == entries_.size() || d < best_dist ||
                            (d == best_dist && e.stored_at < entries_[best].stored_at);
        if (better) {
            best = i;
            best_dist = d;
        }
    }
    trace.probe_empty = entries_.empty();
    trace.probe_mean_dist = entries_.empty() ? 0.0 : static_cast<double>(best_dist);
    trace.probe_seconds = std::chrono::duration<double>(steady::now() - probe_start).count();

    const bool reuse = !entries_.empty() && static_cast<double>(best_dist) <= config_.tau;
    if (reuse) {
        out.result = entries_[best].result;
        out.result.provenance = Provenance::Cache;
    } else {
        const auto corpus_start = steady::now();
        out.result = corpus.top_k(query, config_.k_retrieve);
        trace.corpus_seconds = std::chrono::duration<double>(steady::now() - corpus_start).count();
    }
    trace.provenance = out.result.provenance;
    for (const RetrievalHit& hit : out.result.hits) {
        trace.hits.push_back(TraceHit{hit.passage.id, hit.rank, hit.distance});
        if (!contains_passage(hit.passage.id)) {
            trace.misses += 1;
        }
    }

    if (!reuse && !out.result.empty()) {
        QueryMemoryEntry entry;
        entry.query_id = query_id;
        entry.query_embedding = query;
        entry.result = out.result;
        entry.footprint_bytes = kFloatBytes * static_cast<std::uint64_t>(query.size());
        for (const RetrievalHit& hit : out.result.hits) {
            entry.footprint_bytes += hit.passage.footprint_bytes;
        }
        if (entry.footprint_bytes > config_.w_max_bytes) {
            oversize_skips_ += 1;
            trace.skipped_oversize = 1;
        } else {
            entry.stored_at = ++clock_;
            used_bytes_ += entry.footprint_bytes;
            for (const RetrievalHit& hit : out.result.hits) {
                passage_refcount_[hit.passage.id] += 1;
            }
            const std::uint64_t new_stamp = entry.stored_at;
            const Embedding new_embedding = entry.query_embedding;
            trace.inserted_ids.push_back(entry.query_id);
            entries_.push_back(std::move(entry));

            while (used_bytes_ > config_.w_max_bytes) {
                std::size_t victim = entries_.size();
                float victim_dist = 0.0f;
                for (std::size_t i = 0; i < entries_.size(); ++i) {
                    const QueryMemoryEntry& e = entries_[i];
                    if (e.stored_at == new_stamp) {
                        continue;  // the just-stored pair is evicted only by fitting alone
                    }
                    bool better = false;
                    if (victim == entries_.size()) {
                        better = true;
                    } else if (kind_ == PolicyKind::Proximity) {
                        better = e.stored_at < entries_[victim].stored_at;
                    } else {
                        const float d = cosine_distance(e.query_embedding, new_embedding);
                        better = d < victim_dist ||
                                 (d == victim_dist && e.stored_at < entries_[victim].stored_at);
                    }
                    if (better) {
                        victim = i;
                        victim_dist = cosine_distance(e.query_embedding, new_embedding);
                    }
                }
                if (victim == entries_.size()) {
                    throw InternalError("query-memory eviction found no victim while over budget");
                }
                trace.evicted_ids.push_back(entries_[victim].query_id);
                erase_entry(victim);
            }
        }
    }

    const std::uint64_t actual = recompute_used_bytes();
    if (actual != used_bytes_) {
        throw InternalError("query-memory byte accounting drifted");
    }
    return out;
}

}  // namespace arc
