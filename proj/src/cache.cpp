#include "arc/cache.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <utility>

#include "arc/errors.hpp"
#include "arc/geometry.hpp"
#include "arc/hash.hpp"
#include "arc/search.hpp"

namespace arc {

using nlohmann::json;

PolicyKind policy_from_string(std::string name) {
    std::transform(name.begin(), name.end(), name.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (name == "arc") return PolicyKind::Arc;
    if (name == "lfu") return PolicyKind::Lfu;
    if (name == "fifo") return PolicyKind::Fifo;
    if (name == "proximity") return PolicyKind::Proximity;
    if (name == "semanticreuse" || name == "semantic" || name == "semantic_reuse")
        return PolicyKind::SemanticReuse;
    throw ConfigError("unknown policy '" + name + "'");
}

const char* to_string(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::Arc: return "arc";
        case PolicyKind::Lfu: return "lfu";
        case PolicyKind::Fifo: return "fifo";
        case PolicyKind::Proximity: return "proximity";
        case PolicyKind::SemanticReuse: return "semanticreuse";
    }
    return "?";
}

void CacheConfig::validate() const {
    if (w_max_bytes < 1) throw ConfigError("w_max_bytes must be >= 1");
    if (k_retrieve < 1) throw ConfigError("k_retrieve must be >= 1");
    if (k_hub < 1) throw ConfigError("k_hub must be >= 1");
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ConfigError("alpha must be > 0");
    if (!(beta >= 0.0 && beta <= 1.0)) throw ConfigError("beta must be in [0, 1]");
    if (!(tau > 0.0) || !std::isfinite(tau)) throw ConfigError("tau must be > 0 (set explicitly)");
    if (hub_refresh_period < 1) throw ConfigError("hub_refresh_period must be >= 1");
    if (!(dist_floor > 0.0)) throw ConfigError("dist_floor must be > 0");
}

std::uint64_t CacheConfig::hash() const {
    json j;
    j["w_max_bytes"] = w_max_bytes;
    j["k_retrieve"] = k_retrieve;
    j["k_hub"] = k_hub;
    j["alpha"] = alpha;
    j["beta"] = beta;
    j["tau"] = tau;
    j["hub_refresh_period"] = hub_refresh_period;
    j["dist_floor"] = dist_floor;
    return fnv1a64(j.dump());
}

const CacheItem* CacheState::find(const std::string& id) const {
    auto it = by_id_.find(id);
    return it == by_id_.end() ? nullptr : &items_[it->second];
}

CacheItem* CacheState::find(const std::string& id) {
    auto it = by_id_.find(id);
    return it == by_id_.end() ? nullptr : &items_[it->second];
}

std::uint64_t CacheState::recompute_used_bytes() const {
    std::uint64_t sum = 0;
    for (const CacheItem& item : items_) {
        sum += item.passage.footprint_bytes;
    }
    return sum;
}

void CacheState::check_conservation() const {
    const std::uint64_t actual = recompute_used_bytes();
    if (actual != used_bytes_) {
        throw InternalError("cache byte accounting drifted: tracked " +
                            std::to_string(used_bytes_) + " != actual " + std::to_string(actual));
    }
}

CacheItem& CacheState::insert(Passage passage, double drf) {
    if (by_id_.count(passage.id) != 0) {
        throw InternalError("insert of already-cached id '" + passage.id + "'");
    }
    if (passage.footprint_bytes == 0) {
        throw InternalError("insert of '" + passage.id + "' with zero footprint");
    }
    CacheItem item;
    item.drf = drf;
    item.inserted_at = next_stamp();
    item.last_access_at = item.inserted_at;
    used_bytes_ += passage.footprint_bytes;
    item.passage = std::move(passage);
    by_id_.emplace(item.passage.id, items_.size());
    items_.push_back(std::move(item));
    return items_.back();
}

void CacheState::remove(const std::string& id) {
    auto it = by_id_.find(id);
    if (it == by_id_.end()) {
        throw InternalError("remove of uncached id '" + id + "'");
    }
    const std::size_t pos = it->second;
    used_bytes_ -= items_[pos].passage.footprint_bytes;
    by_id_.erase(it);
    if (pos + 1 != items_.size()) {
        items_[pos] = std::move(items_.back());
        by_id_[items_[pos].passage.id] = pos;
    }
    items_.pop_back();
}

double dr_contribution(int rank, double distance, double alpha, double dist_floor) {
    if (rank < 1) {
        throw ContractError("dr_contribution: rank must be >= 1");
    }
    const double d = std::max(distance, dist_floor);
    return 1.0 / (static_cast<double>(rank) * std::pow(d, alpha));
}

double priority(const CacheItem& item, const CacheConfig& config) {
    const double centrality = std::log(static_cast<double>(item.hubness) + 1.0);
    const double numerator = config.beta * centrality + (1.0 - config.beta) * item.drf;
    return numerator / std::log(static_cast<double>(item.passage.footprint_bytes) + 1.0);
}

AccumulateOutcome accumulate_drf(CacheState& state, const RetrievalResult& result,
                                 const CacheConfig& config) {
    AccumulateOutcome out;
    for (const RetrievalHit& hit : result.hits) {
        const double dr = dr_contribution(hit.rank, static_cast<double>(hit.distance),
                                          config.alpha, config.dist_floor);
        if (CacheItem* item = state.find(hit.passage.id)) {
            item->drf += dr;
            item->access_count += 1;
            item->last_access_at = state.next_stamp();
        } else {
            out.misses += 1;
            if (hit.passage.footprint_bytes > config.w_max_bytes) {
                out.skipped_oversize += 1;
                state.oversize_skips += 1;
                continue;
            }
            CacheItem& inserted = state.insert(hit.passage, dr);
            inserted.access_count = 1;
            out.inserted_ids.push_back(hit.passage.id);
        }
    }
    state.check_conservation();
    return out;
}

void compute_hubness(CacheState& state, std::size_t k_hub) {
    auto& items = state.items();
    const std::size_t n = items.size();
    for (CacheItem& item : items) {
        item.hubness = 0;
    }
    if (n < 2) {
        return;
    }
    const std::size_t k_eff = std::min(k_hub, n - 1);
    std::vector<std::size_t> others;
    others.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
        others.clear();
        for (std::size_t i = 0; i < n; ++i) {
            if (i != j) others.push_back(i);
        }
        const auto neighbors = exact_top_k(
            others.size(),
            [&](std::size_t idx) -> const Embedding& {
                return items[others[idx]].passage.embedding;
            },
            [&](std::size_t idx) -> const std::string& { return items[others[idx]].passage.id; },
            items[j].passage.embedding, k_eff);
        for (const SearchHit& nb : neighbors) {
            items[others[nb.row]].hubness += 1;
        }
    }
}

namespace {

// Lexicographic victim key; smallest evicts first.
struct VictimKey {
    double score;
    std::uint64_t inserted_at;
    const std::string* id;

    bool operator<(const VictimKey& o) const {
        if (score != o.score) return score < o.score;
        if (inserted_at != o.inserted_at) return inserted_at < o.inserted_at;
        return *id < *o.id;
    }
};

double eviction_score(const CacheItem& item, const CacheConfig& config, PolicyKind scoring) {
    switch (scoring) {
        case PolicyKind::Arc: return priority(item, config);
        case PolicyKind::Lfu: return static_cast<double>(item.access_count);
        case PolicyKind::Fifo: return static_cast<double>(item.inserted_at);
        default: throw ContractError("eviction scoring requires an item-cache policy");
    }
}

}  // namespace

std::vector<std::string> evict_until_fits(CacheState& state, const CacheConfig& config,
                                          PolicyKind scoring) {
    std::vector<std::string> evicted;
    while (state.used_bytes() > config.w_max_bytes) {
        const auto& items = state.items();
        const CacheItem* victim = nullptr;
        VictimKey best{0.0, 0, nullptr};
        for (const CacheItem& item : items) {
            VictimKey key{eviction_score(item, config, scoring), item.inserted_at,
                          &item.passage.id};
            if (victim == nullptr || key < best) {
                victim = &item;
                best = key;
            }
        }
        evicted.push_back(victim->passage.id);
        state.remove(victim->passage.id);
    }
    state.check_conservation();
    return evicted;
}

ServeOutcome serve_query(CacheState& state, const Eigen::Ref<const Embedding>& query,
                         const Corpus& corpus, const CacheConfig& config, PolicyKind scoring) {
    using clock = std::chrono::steady_clock;
    ServeOutcome out;
    ServeTrace& trace = out.trace;

    const auto probe_start = clock::now();
    const auto probe = exact_top_k(
        state.size(),
        [&](std::size_t i) -> const Embedding& { return state.items()[i].passage.embedding; },
        [&](std::size_t i) -> const std::string& { return state.items()[i].passage.id; }, query,
        config.k_retrieve);
    trace.probe_empty = probe.empty();
    double mean_dist = 0.0;
    if (!probe.empty()) {
        double sum = 0.0;
        for (const SearchHit& h : probe) {
            sum += static_cast<double>(h.distance);
        }
        mean_dist = sum / static_cast<double>(probe.size());
    }
    trace.probe_mean_dist = mean_dist;
    trace.probe_seconds = std::chrono::duration<double>(clock::now() - probe_start).count();

    const bool escalate = probe.empty() || mean_dist > config.tau;
    if (escalate) {
        const auto corpus_start = clock::now();
        out.result = corpus.top_k(query, config.k_retrieve);
        trace.corpus_seconds = std::chrono::duration<double>(clock::now() - corpus_start).count();
    } else {
        out.result.provenance = Provenance::Cache;
        out.result.hits.reserve(probe.size());
        int rank = 1;
        for (const SearchHit& h : probe) {
            out.result.hits.push_back(
                RetrievalHit{state.items()[h.row].passage, rank++, h.distance});
        }
    }
    trace.provenance = out.result.provenance;
    trace.hits.reserve(out.result.hits.size());
    for (const RetrievalHit& hit : out.result.hits) {
        trace.hits.push_back(TraceHit{hit.passage.id, hit.rank, hit.distance});
    }

    AccumulateOutcome acc = accumulate_drf(state, out.result, config);
    trace.inserted_ids = std::move(acc.inserted_ids);
    trace.misses = acc.misses;
    trace.skipped_oversize = acc.skipped_oversize;

    if (scoring == PolicyKind::Arc) {
        state.queries_since_hub_refresh += 1;
        if (state.queries_since_hub_refresh >= config.hub_refresh_period ||
            !trace.inserted_ids.empty()) {
            compute_hubness(state, config.k_hub);
            state.queries_since_hub_refresh = 0;
        }
    }

    trace.evicted_ids = evict_until_fits(state, config, scoring);
    state.check_conservation();
    return out;
}

void export_snapshot(const CacheState& state, const CacheConfig& config, std::ostream& out) {
    json header;
    header["config_hash"] = config.hash();
    header["items"] = state.size();
    out << header.dump() << '\n';

    std::vector<const CacheItem*> ordered;
    ordered.reserve(state.size());
    for (const CacheItem& item : state.items()) {
        ordered.push_back(&item);
    }
    std::sort(ordered.begin(), ordered.end(),
              [](const CacheItem* a, const CacheItem* b) { return a->inserted_at < b->inserted_at; });
    for (const CacheItem* item : ordered) {
        json row;
        row["id"] = item->passage.id;
        row["drf"] = item->drf;
        row["hubness"] = item->hubness;
        row["inserted_at"] = item->inserted_at;
        row["footprint_bytes"] = item->passage.footprint_bytes;
        out << row.dump() << '\n';
    }
}

CacheState import_snapshot(std::istream& in, const Corpus& corpus, const CacheConfig& config) {
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError("snapshot: empty stream, expected a header line");
    }
    json header = json::parse(line, nullptr, false);
    if (header.is_discarded() || !header.is_object() || !header.contains("config_hash")) {
        throw DataError("snapshot:1: malformed header");
    }
    if (header["config_hash"].get<std::uint64_t>() != config.hash()) {
        throw DataError("snapshot: config hash mismatch; refusing to resume");
    }

    CacheState state;
    std::size_t lineno = 1;
    std::uint64_t max_stamp = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json row = json::parse(line, nullptr, false);
        if (row.is_discarded() || !row.is_object()) {
            throw DataError("snapshot:" + std::to_string(lineno) + ": malformed JSON");
        }
        const std::string id = row.at("id").get<std::string>();
        const Passage* p = corpus.find(id);
        if (p == nullptr) {
            throw DataError("snapshot:" + std::to_string(lineno) + ": id '" + id +
                            "' not present in the corpus");
        }
        if (row.at("footprint_bytes").get<std::uint64_t>() != p->footprint_bytes) {
            throw DataError("snapshot:" + std::to_string(lineno) + ": footprint mismatch for '" +
                            id + "'");
        }
        CacheItem& item = state.insert(*p, row.at("drf").get<double>());
        item.hubness = row.at("hubness").get<std::uint64_t>();
        item.inserted_at = row.at("inserted_at").get<std::uint64_t>();
        item.last_access_at = item.inserted_at;
        max_stamp = std::max(max_stamp, item.inserted_at);
    }
    state.advance_clock_to(max_stamp);
    state.check_conservation();
    return state;
}

}  // namespace arc
