// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Oracles here are written independently of the library paths they
// check (own scans, own sorts, own greedy loops); they share only the
// dot-product distance primitive so float ties resolve identically.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "arc/baselines.hpp"
#include "arc/harness.hpp"
#include "arc/metrics.hpp"
#include "arc/workload.hpp"
#include "reference_sim.hpp"
#include "test_support.hpp"

using namespace arc;

namespace {

struct Criterion {
    std::string name;
    std::function<bool(std::string&)> check;
};

std::mt19937_64 g_rng(0xACCE55ED);

Embedding perturbed(const Embedding& anchor, double sigma, std::mt19937_64& rng) {
    Embedding q = anchor;
    for (Eigen::Index d = 0; d < q.size(); ++d) {
        q[d] += static_cast<float>(sigma * gaussian(rng));
    }
    q.normalize();
    return q;
}

// ---------------------------------------------------------------- A1 --------

bool topk_oracle_equivalence(std::string& detail) {
    const Eigen::Index dims[] = {8, 64, 384};
    std::size_t checked = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const Eigen::Index dim = dims[trial % 3];
        std::size_t n;
        if (trial == 0) {
            n = 10000;  // pin one full-size instance
        } else {
            n = 1 + static_cast<std::size_t>(
                        std::exp(uniform01(g_rng) * std::log(10000.0)));
        }
        Corpus corpus = testsupport::random_corpus(n, dim, 9000 + static_cast<std::uint64_t>(trial));
        for (int qi = 0; qi < 3; ++qi) {
            const Embedding q = testsupport::random_unit(g_rng, dim);
            const std::size_t k = qi == 0 ? 50 : 1 + static_cast<std::size_t>(uniform01(g_rng) * 64);
            RetrievalResult got = corpus.top_k(q, k);

            // Oracle: exhaustive scan, full sort by (distance, id).
            struct Scored {
                float dist;
                const std::string* id;
            };
            std::vector<Scored> all;
            all.reserve(n);
            for (const Passage& p : corpus.passages()) {
                all.push_back(Scored{1.0f - p.embedding.dot(q), &p.id});
            }
            std::sort(all.begin(), all.end(), [](const Scored& a, const Scored& b) {
                if (a.dist != b.dist) return a.dist < b.dist;
                return *a.id < *b.id;
            });
            const std::size_t expect = std::min(k, n);
            if (got.size() != expect) {
                detail = "size mismatch";
                return false;
            }
            for (std::size_t i = 0; i < expect; ++i) {
                if (got.hits[i].passage.id != *all[i].id) {
                    detail = "id order mismatch at rank " + std::to_string(i + 1);
                    return false;
                }
                if (std::abs(static_cast<double>(got.hits[i].distance - all[i].dist)) > 1e-6) {
                    detail = "distance mismatch";
                    return false;
                }
                if (got.hits[i].rank != static_cast<int>(i) + 1) {
                    detail = "rank not consecutive";
                    return false;
                }
            }
            ++checked;
        }
    }
    detail = std::to_string(checked) + " queries over 200 corpora";
    return true;
}

// ---------------------------------------------------------------- A2 --------

bool hubness_oracle_equivalence(std::string& detail) {
    const std::size_t hub_ks[] = {1, 5, 10};
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t k_hub = hub_ks[trial % 3];
        std::size_t n;
        if (trial == 0) {
            n = 1000;
        } else {
            n = 2 + static_cast<std::size_t>(std::exp(uniform01(g_rng) * std::log(999.0)));
        }
        const Eigen::Index dim = trial % 2 == 0 ? 8 : 16;
        CacheState state;
        for (std::size_t i = 0; i < n; ++i) {
            state.insert(testsupport::make_passage(testsupport::padded_id("h", i),
                                                   testsupport::random_unit(g_rng, dim)),
                         1.0);
        }
        compute_hubness(state, k_hub);

        // Oracle: all pairwise distances, per-point top-k by (dist, id).
        const auto& items = state.items();
        std::map<std::string, std::uint64_t> expected;
        for (const CacheItem& it : items) expected[it.passage.id] = 0;
        for (std::size_t j = 0; j < n; ++j) {
            struct Entry {
                float dist;
                const std::string* id;
            };
            std::vector<Entry> entries;
            entries.reserve(n - 1);
            for (std::size_t i = 0; i < n; ++i) {
                if (i == j) continue;
                entries.push_back(Entry{
                    1.0f - items[i].passage.embedding.dot(items[j].passage.embedding),
                    &items[i].passage.id});
            }
            std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
                if (a.dist != b.dist) return a.dist < b.dist;
                return *a.id < *b.id;
            });
            const std::size_t k_eff = std::min(k_hub, n - 1);
            for (std::size_t m = 0; m < k_eff; ++m) expected[*entries[m].id] += 1;
        }
        std::uint64_t total = 0;
        for (const CacheItem& it : items) {
            if (it.hubness != expected[it.passage.id]) {
                detail = "hubness mismatch for " + it.passage.id;
                return false;
            }
            total += it.hubness;
        }
        if (total != std::min(k_hub, n - 1) * n) {
            detail = "sum rule violated";
            return false;
        }
    }
    detail = "100 caches, k_hub in {1,5,10}";
    return true;
}

// ---------------------------------------------------------------- A3 --------

bool closed_form_spot_checks(std::string& detail) {
    const double dr = dr_contribution(2, 0.5, 0.4, 1e-6);
    if (std::abs(dr - 0.65975) > 1e-4) {
        detail = "dr_contribution(2, 0.5, a=0.4) = " + std::to_string(dr);
        return false;
    }
    CacheItem item;
    item.passage.footprint_bytes = 100;
    item.hubness = 3;
    item.drf = 2.0;
    CacheConfig cfg;
    cfg.beta = 0.5;
    const double p = priority(item, cfg);
    if (std::abs(p - 0.3669) > 1e-4) {
        detail = "priority(w=100, h=3, drf=2, b=0.5) = " + std::to_string(p);
        return false;
    }
    detail = "dr=0.659754, priority=0.366869";
    return true;
}

// ---------------------------------------------------------------- A4 --------

bool capacity_safety_fuzz(std::string& detail) {
    CacheConfig cfg;
    cfg.w_max_bytes = 6000;
    cfg.k_retrieve = 5;
    cfg.k_hub = 6;
    cfg.alpha = 0.4;
    cfg.beta = 0.3;
    cfg.tau = 0.25;
    Corpus corpus = testsupport::random_corpus(300, 16, 0xF422);

    std::mt19937_64 rng(0xF423);
    std::vector<Embedding> anchors;
    for (int i = 0; i < 4; ++i) anchors.push_back(testsupport::random_unit(rng, 16));

    const PolicyKind kinds[] = {PolicyKind::Arc, PolicyKind::Lfu, PolicyKind::Fifo,
                                PolicyKind::Proximity, PolicyKind::SemanticReuse};
    std::uint64_t serves = 0;
    for (PolicyKind kind : kinds) {
        auto policy = make_policy(kind, cfg);
        std::mt19937_64 qrng(0xF424);
        for (int i = 0; i < 10000; ++i) {
            Embedding q;
            if (uniform01(qrng) < 0.7) {
                q = perturbed(anchors[static_cast<std::size_t>(uniform01(qrng) * 4.0)], 0.12, qrng);
            } else {
                q = testsupport::random_unit(qrng, 16);
            }
            policy->serve("q" + std::to_string(i), q, corpus);
            ++serves;
            if (policy->used_bytes() > policy->w_max_bytes()) {
                detail = std::string(to_string(kind)) + " exceeded capacity at query " +
                         std::to_string(i);
                return false;
            }
            if (policy->used_bytes() != policy->recompute_used_bytes()) {
                detail = std::string(to_string(kind)) + " byte accounting drifted at query " +
                         std::to_string(i);
                return false;
            }
        }
    }
    detail = std::to_string(serves) + " serves across 5 policies, zero violations";
    return true;
}

// ---------------------------------------------------------------- A5 --------

bool replay_equivalence(std::string& detail) {
    for (int trace = 0; trace < 20; ++trace) {
        CacheConfig cfg;
        cfg.w_max_bytes = 2000 + 300 * static_cast<std::uint64_t>(trace % 4);
        cfg.k_retrieve = 3 + static_cast<std::size_t>(trace % 3);
        cfg.k_hub = 2 + static_cast<std::size_t>(trace % 4);
        cfg.alpha = 0.4;
        cfg.beta = 0.1 * (trace % 7);
        cfg.tau = 0.25 + 0.05 * (trace % 4);
        cfg.hub_refresh_period = 1 + static_cast<std::uint64_t>(trace % 3);
        Corpus corpus =
            testsupport::random_corpus(50 + 10 * (trace % 3), 16, 0xA100 + static_cast<std::uint64_t>(trace));

        std::mt19937_64 rng(0xA200 + static_cast<std::uint64_t>(trace));
        Embedding anchor = testsupport::random_unit(rng, 16);
        CacheState state;
        refsim::ArcReference reference(cfg);
        std::vector<refsim::TraceRow> got, want;
        for (int i = 0; i < 100; ++i) {
            Embedding q = uniform01(rng) < 0.6 ? perturbed(anchor, 0.15, rng)
                                               : testsupport::random_unit(rng, 16);
            ServeOutcome out = serve_query(state, q, corpus, cfg);
            refsim::TraceRow row;
            row.from_cache = out.result.provenance == Provenance::Cache;
            row.inserted = out.trace.inserted_ids;
            row.evicted = out.trace.evicted_ids;
            got.push_back(row);
            want.push_back(reference.serve(q, corpus));
        }
        if (refsim::to_lines(got) != refsim::to_lines(want)) {
            detail = "trace " + std::to_string(trace) + " diverged";
            return false;
        }
    }
    detail = "20 traces x 100 queries, byte-identical";
    return true;
}

// ------------------------------------------------------------- A6-A8 --------

SyntheticSpec table_spec() {
    SyntheticSpec spec;
    spec.n_clusters = 2;
    spec.cluster_weights = {0.9, 0.1};
    spec.intra_cluster_noise_sigma = 0.06;
    spec.n_queries = 2000;
    spec.n_passages_per_cluster = 150;
    spec.dimension = 24;
    return spec;
}

std::uint64_t hot_cluster_footprint(const SyntheticWorkload& w) {
    std::uint64_t sum = 0;
    for (std::size_t i = 0; i < w.corpus.size(); ++i) {
        if (w.passage_cluster[i] == 0) sum += w.corpus.passage(i).footprint_bytes;
    }
    return sum;
}

CacheConfig table_cache(std::uint64_t w_max) {
    CacheConfig cfg;
    cfg.w_max_bytes = w_max;
    cfg.k_retrieve = 8;
    cfg.k_hub = 10;
    cfg.alpha = 0.4;
    cfg.beta = 0.25;
    // Well under the within-cluster probe mean, so most queries escalate and
    // the presence rate reflects what each policy retained.
    cfg.tau = 0.02;
    return cfg;
}

double replay_item_rate(PolicyKind kind, const CacheConfig& cfg, const SyntheticWorkload& w) {
    auto policy = make_policy(kind, cfg);
    std::uint64_t total_m = 0;
    std::uint64_t total_misses = 0;
    for (const QueryRecord& q : w.queries) {
        ServeOutcome out = policy->serve(q.id, q.embedding, w.corpus);
        total_m += out.result.size();
        total_misses += static_cast<std::uint64_t>(out.trace.misses);
    }
    return 1.0 - static_cast<double>(total_misses) / static_cast<double>(total_m);
}

bool table_ordering(std::string& detail) {
    double arc_mean = 0.0, arc0_mean = 0.0, lfu_mean = 0.0, fifo_mean = 0.0;
    int arc_strict_wins = 0;
    std::ostringstream log;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        SyntheticSpec spec = table_spec();
        spec.seed = seed;
        SyntheticWorkload w = generate_synthetic(spec);
        const std::uint64_t w_max = hot_cluster_footprint(w) / 4;

        CacheConfig arc_cfg = table_cache(w_max);
        CacheConfig arc0_cfg = arc_cfg;
        arc0_cfg.beta = 0.0;

        const double arc_rate = replay_item_rate(PolicyKind::Arc, arc_cfg, w);
        const double arc0_rate = replay_item_rate(PolicyKind::Arc, arc0_cfg, w);
        const double lfu_rate = replay_item_rate(PolicyKind::Lfu, arc_cfg, w);
        const double fifo_rate = replay_item_rate(PolicyKind::Fifo, arc_cfg, w);
        arc_mean += arc_rate / 5;
        arc0_mean += arc0_rate / 5;
        lfu_mean += lfu_rate / 5;
        fifo_mean += fifo_rate / 5;
        if (arc_rate > lfu_rate && arc_rate > fifo_rate) ++arc_strict_wins;
        log << " seed" << seed << "(arc=" << arc_rate << ",arc0=" << arc0_rate
            << ",lfu=" << lfu_rate << ",fifo=" << fifo_rate << ")";
    }
    const double best_classic = std::max(lfu_mean, fifo_mean);
    std::ostringstream means;
    means << "arc=" << arc_mean << " arc0=" << arc0_mean << " lfu=" << lfu_mean
          << " fifo=" << fifo_mean << " wins=" << arc_strict_wins << "/5";
    detail = means.str();
    if (arc_mean < arc0_mean) {
        detail += " [arc below arc(beta=0)]" + log.str();
        return false;
    }
    if (arc0_mean < best_classic - 0.02) {
        detail += " [arc(beta=0) more than 2pp below best classic]" + log.str();
        return false;
    }
    if (arc_strict_wins < 4) {
        detail += " [fewer than 4/5 strict wins]" + log.str();
        return false;
    }
    return true;
}

bool capacity_sweep_directional(std::string& detail) {
    SyntheticSpec spec = table_spec();
    spec.n_queries = 1500;
    const double fractions[] = {0.10, 0.175, 0.25, 0.375, 0.50};
    double arc_rates[5] = {0, 0, 0, 0, 0};
    double lfu_rates[5] = {0, 0, 0, 0, 0};
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        spec.seed = seed;
        SyntheticWorkload w = generate_synthetic(spec);
        const auto hot = static_cast<double>(hot_cluster_footprint(w));
        for (int i = 0; i < 5; ++i) {
            const auto w_max = static_cast<std::uint64_t>(hot * fractions[i]);
            const CacheConfig cfg = table_cache(w_max);
            arc_rates[i] += replay_item_rate(PolicyKind::Arc, cfg, w) / 5;
            lfu_rates[i] += replay_item_rate(PolicyKind::Lfu, cfg, w) / 5;
        }
    }
    std::ostringstream os;
    os << "arc:";
    for (double r : arc_rates) os << ' ' << r;
    os << " | lfu:";
    for (double r : lfu_rates) os << ' ' << r;
    detail = os.str();
    if (!(arc_rates[4] > arc_rates[0])) {
        detail += " [no gain from larger capacity]";
        return false;
    }
    for (int i = 0; i < 5; ++i) {
        if (arc_rates[i] < lfu_rates[i]) {
            detail += " [arc below lfu at point " + std::to_string(i) + "]";
            return false;
        }
    }
    return true;
}

bool streaming_curve_shape(std::string& detail) {
    double mean_gap = 0.0;
    std::ostringstream os;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        SyntheticSpec spec;
        spec.n_clusters = 2;
        spec.cluster_weights = {0.9, 0.1};
        spec.intra_cluster_noise_sigma = 0.05;
        spec.n_queries = 80;
        spec.n_passages_per_cluster = 60;
        spec.dimension = 16;
        spec.seed = seed;
        SyntheticWorkload w = generate_synthetic(spec);

        CacheConfig cfg = table_cache(hot_cluster_footprint(w) / 2);
        cfg.k_retrieve = 5;
        auto policy = make_policy(PolicyKind::Arc, cfg);

        std::uint64_t m_first = 0, miss_first = 0, m_last = 0, miss_last = 0;
        for (std::size_t t = 0; t < w.queries.size(); ++t) {
            ServeOutcome out = policy->serve(w.queries[t].id, w.queries[t].embedding, w.corpus);
            if (t < 20) {
                m_first += out.result.size();
                miss_first += static_cast<std::uint64_t>(out.trace.misses);
            } else if (t >= 60) {
                m_last += out.result.size();
                miss_last += static_cast<std::uint64_t>(out.trace.misses);
            }
        }
        const double first = 1.0 - static_cast<double>(miss_first) / static_cast<double>(m_first);
        const double last = 1.0 - static_cast<double>(miss_last) / static_cast<double>(m_last);
        mean_gap += (last - first) / 5;
        os << " seed" << seed << "(first=" << first << ",last=" << last << ")";
    }
    detail = "mean gap = " + std::to_string(mean_gap) + os.str();
    return mean_gap >= 0.10;
}

// ------------------------------------------------------------- A9-A11 -------

bool analytic_amat_identity(std::string& detail) {
    const double v = amat_analytic(0.8, 0.05, 1.0);
    if (std::abs(v - 0.25) > 1e-12) {
        detail = "amat(0.8, 0.05, 1.0) = " + std::to_string(v);
        return false;
    }
    std::mt19937_64 rng(0xA9);
    for (int i = 0; i < 1000; ++i) {
        double a = uniform01(rng);
        double b = uniform01(rng);
        if (a > b) std::swap(a, b);
        if (amat_analytic(b, 0.05, 1.0) > amat_analytic(a, 0.05, 1.0)) {
            detail = "monotonicity violated";
            return false;
        }
    }
    detail = "identity exact, monotone over 1000 pairs";
    return true;
}

bool metrics_formula_checks(std::string& detail) {
    std::mt19937_64 rng(0xA10);
    for (int trial = 0; trial < 50; ++trial) {
        const int m = 1 + static_cast<int>(uniform01(rng) * 10);
        const int T = 1 + static_cast<int>(uniform01(rng) * 100);
        std::vector<QueryOutcome> outcomes;
        std::uint64_t total_misses = 0;
        for (int t = 0; t < T; ++t) {
            QueryOutcome o;
            o.m = m;
            o.misses = static_cast<int>(uniform01(rng) * (m + 1));
            total_misses += static_cast<std::uint64_t>(o.misses);
            outcomes.push_back(o);
        }
        const double expected = 1.0 - static_cast<double>(total_misses) /
                                          (static_cast<double>(m) * static_cast<double>(T));
        if (std::abs(has_answer_rate_item(outcomes) - expected) > 1e-12) {
            detail = "formula mismatch";
            return false;
        }
    }
    std::vector<QueryOutcome> all_hit(7);
    for (auto& o : all_hit) {
        o.m = 4;
        o.misses = 0;
    }
    std::vector<QueryOutcome> all_miss(7);
    for (auto& o : all_miss) {
        o.m = 4;
        o.misses = 4;
    }
    if (has_answer_rate_item(all_hit) != 1.0 || has_answer_rate_item(all_miss) != 0.0) {
        detail = "endpoints wrong";
        return false;
    }
    detail = "50 random cases + endpoints, 1e-12";
    return true;
}

bool run_determinism(std::string& detail) {
    testsupport::TempDir dir_a("acc-det-a"), dir_b("acc-det-b");
    RunConfig config;
    SyntheticSpec spec = table_spec();
    spec.n_queries = 300;
    config.synthetic = spec;
    config.policy = PolicyKind::Arc;
    config.cache = table_cache(8000);
    config.seed = 3;
    config.snapshot = true;

    RunConfig a = config;
    a.output_dir = dir_a.path();
    run(a);
    RunConfig b = config;
    b.output_dir = dir_b.path();
    run(b);
    for (const char* name : {"report.json", "per_query.csv"}) {
        const std::string fa = testsupport::slurp(dir_a.path() / name);
        if (fa.empty() || fa != testsupport::slurp(dir_b.path() / name)) {
            detail = std::string(name) + " differs between identical runs";
            return false;
        }
    }
    detail = "report.json and per_query.csv byte-identical";
    return true;
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {"oracle equivalence: top-k vs exhaustive scan", topk_oracle_equivalence},
        {"oracle equivalence: hubness vs O(n^2) brute force", hubness_oracle_equivalence},
        {"closed-form spot checks: dr_contribution and priority", closed_form_spot_checks},
        {"capacity safety: 10k-query fuzz across all five policies", capacity_safety_fuzz},
        {"replay equivalence: serve pipeline vs reference simulator", replay_equivalence},
        {"directional ordering: arc vs arc(beta=0) vs lfu/fifo", table_ordering},
        {"directional capacity sweep: arc gains with capacity, >= lfu", capacity_sweep_directional},
        {"streaming curve: final quartile >= first quartile + 10pp", streaming_curve_shape},
        {"analytic amat identity and monotonicity", analytic_amat_identity},
        {"metrics formula: has-answer rate vs closed form", metrics_formula_checks},
        {"determinism: identical runs produce identical files", run_determinism},
    };

    int failures = 0;
    for (const Criterion& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        std::string detail;
        bool ok = false;
        try {
            ok = c.check(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("[%s] %-58s (%.1fs) %s\n", ok ? "PASS" : "FAIL", c.name.c_str(), secs,
                    detail.c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
    }
    if (failures > 0) {
        std::printf("%d of %zu acceptance criteria failed\n", failures, criteria.size());
    } else {
        std::printf("all %zu acceptance criteria passed\n", criteria.size());
    }
    return failures == 0 ? 0 : 1;
}
