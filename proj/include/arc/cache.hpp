#pragma once

#include <algorithm>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "arc/corpus.hpp"
#include "arc/types.hpp"

namespace arc {

// Eviction scoring families. Arc/Lfu/Fifo share the item-cache serve pipeline
// below; Proximity/SemanticReuse are query-memory policies (see baselines.hpp).
enum class PolicyKind { Arc, Lfu, Fifo, Proximity, SemanticReuse };

PolicyKind policy_from_string(std::string name);  // case-insensitive; ConfigError on unknown
const char* to_string(PolicyKind kind);

struct CacheConfig {
    std::uint64_t w_max_bytes = 0;  // required
    std::size_t k_retrieve = 50;
    std::size_t k_hub = 10;
    double alpha = 0.4;
    double beta = 0.0;
    double tau = 0.0;  // escalation threshold; required, no meaningful default
    std::uint64_t hub_refresh_period = 1;
    double dist_floor = 1e-6;

    void validate() const;  // ConfigError on violation
    std::uint64_t hash() const;
};

struct CacheItem {
    Passage passage;
    double drf = 0.0;
    std::uint64_t hubness = 0;       // as of the last hubness refresh
    std::uint64_t access_count = 0;  // served-result appearances (LFU scoring)
    std::uint64_t inserted_at = 0;
    std::uint64_t last_access_at = 0;
};

// Capacity-bounded item store. Single writer; iteration order is unspecified,
// every order-sensitive operation resolves ties through (score, inserted_at, id).
class CacheState {
public:
    std::size_t size() const { return items_.size(); }
    bool contains(const std::string& id) const { return by_id_.count(id) != 0; }
    const CacheItem* find(const std::string& id) const;
    CacheItem* find(const std::string& id);
    const std::vector<CacheItem>& items() const { return items_; }
    std::vector<CacheItem>& items() { return items_; }

    std::uint64_t used_bytes() const { return used_bytes_; }
    std::uint64_t recompute_used_bytes() const;
    // InternalError if the running byte count drifts from the recomputed sum.
    void check_conservation() const;

    std::uint64_t next_stamp() { return ++clock_; }
    void advance_clock_to(std::uint64_t stamp) { clock_ = std::max(clock_, stamp); }

    // Inserts with fresh inserted_at/last_access_at stamps. The item must not
    // already be present and must have a positive footprint.
    CacheItem& insert(Passage passage, double drf);
    void remove(const std::string& id);

    std::uint64_t queries_since_hub_refresh = 0;
    std::uint64_t oversize_skips = 0;

private:
    std::vector<CacheItem> items_;
    std::unordered_map<std::string, std::size_t> by_id_;
    std::uint64_t used_bytes_ = 0;
    std::uint64_t clock_ = 0;
};

// Demand credit of one retrieval: 1 / (rank * max(distance, dist_floor)^alpha).
// The floor keeps exact-duplicate hits (distance 0) finite. rank < 1 is a
// contract violation.
double dr_contribution(int rank, double distance, double alpha, double dist_floor);

// Combined keep-worthiness: (1/ln(w+1)) * [beta*ln(h+1) + (1-beta)*drf].
// Natural log throughout.
double priority(const CacheItem& item, const CacheConfig& config);

struct AccumulateOutcome {
    std::vector<std::string> inserted_ids;  // in result rank order
    int misses = 0;                         // result items absent before access
    std::uint64_t skipped_oversize = 0;     // footprint > w_max, never inserted
};

// Credits every result item: cached items accumulate drf, new ones are
// inserted with drf = their contribution (unless they exceed w_max outright).
AccumulateOutcome accumulate_drf(CacheState& state, const RetrievalResult& result,
                                 const CacheConfig& config);

// Recomputes every item's hubness: how many other cached items list it among
// their k_hub nearest neighbors (self excluded, ties by id). Sums to
// min(k_hub, n-1) * n.
void compute_hubness(CacheState& state, std::size_t k_hub);

// Greedy argmin eviction until used_bytes <= w_max_bytes. Victim score depends
// on the policy family: Arc -> priority(), Lfu -> access_count, Fifo ->
// insertion age. Ties go to the older inserted_at, then the smaller id.
// Returns evicted ids in order.
std::vector<std::string> evict_until_fits(CacheState& state, const CacheConfig& config,
                                          PolicyKind scoring = PolicyKind::Arc);

// One full maintenance-and-escalation round:
//   probe cache top-k -> escalate to the corpus when the probe is empty or its
//   mean distance exceeds tau -> credit/insert result items -> refresh hubness
//   (Arc scoring; on insertion or every hub_refresh_period queries) -> evict.
// The returned result is the pre-eviction ranked list.
ServeOutcome serve_query(CacheState& state, const Eigen::Ref<const Embedding>& query,
                         const Corpus& corpus, const CacheConfig& config,
                         PolicyKind scoring = PolicyKind::Arc);

// Snapshot JSONL: header {"config_hash", "items"}, then one
// {"id","drf","hubness","inserted_at","footprint_bytes"} line per item,
// ordered by inserted_at.
void export_snapshot(const CacheState& state, const CacheConfig& config, std::ostream& out);

// Rehydrates a snapshot against the corpus that produced it. The config hash
// must match and every id must resolve (DataError otherwise).
CacheState import_snapshot(std::istream& in, const Corpus& corpus, const CacheConfig& config);

}  // namespace arc
