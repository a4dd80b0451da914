#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "arc/types.hpp"

namespace arc {

struct QueryOutcome {
    std::string query_id;
    int m = 0;       // items requested (result length)
    int misses = 0;  // M_t
    bool served_from_cache = false;
    std::optional<bool> answer_found;  // absent when the query carries no answers
    double cache_latency_s = 0.0;
    std::optional<double> corpus_latency_s;  // present iff escalated
};

// Items absent from the cache immediately before their access, walking the
// result in rank order while the hypothetical cache absorbs each item.
int miss_count(const RetrievalResult& result,
               const std::unordered_set<std::string>& pre_access_cache_ids);

// 1 - sum(M_t) / (m*T); generalizes to 1 - sum(M_t)/sum(m_t) when m varies.
// Empty input is a contract violation (the rate is undefined).
double has_answer_rate_item(std::span<const QueryOutcome> outcomes);

// True when m is constant across all outcomes (the strict fixed-m form applies).
bool has_fixed_m(std::span<const QueryOutcome> outcomes);

// Fraction of answer-labelled queries served from cache whose served content
// contained a ground-truth answer; absent when nothing is labelled.
std::optional<double> has_answer_rate_answer(std::span<const QueryOutcome> outcomes);

// Case-insensitive, whitespace-normalized substring match of any answer in any
// served passage text.
bool answer_containment(const RetrievalResult& result, const std::vector<std::string>& answers);

enum class AmatMode { Analytic, Measured };

const char* to_string(AmatMode mode);
AmatMode amat_mode_from_string(std::string name);

// Mean of (cache latency + corpus latency when escalated). Escalated outcomes
// without a recorded corpus latency violate the contract.
double amat_measured(std::span<const QueryOutcome> outcomes);

// t_cache + (1 - cache_serve_rate) * t_corpus.
double amat_analytic(double cache_serve_rate, double t_cache_s, double t_corpus_s);

double cache_serve_rate(std::span<const QueryOutcome> outcomes);

// curve[t] = item-presence rate over outcomes[0..t].
std::vector<double> cumulative_item_rate_curve(std::span<const QueryOutcome> outcomes);

struct RunReport {
    std::vector<QueryOutcome> per_query;
    double has_answer_rate_item = 0.0;
    std::optional<double> has_answer_rate_answer;
    double amat_s = 0.0;
    AmatMode amat_mode = AmatMode::Analytic;
    std::vector<double> cumulative_curve;
    bool m_fixed = true;

    // run bookkeeping
    double cache_serve_rate = 0.0;
    std::uint64_t escalations = 0;
    std::uint64_t insertions = 0;
    std::uint64_t evictions = 0;
    std::uint64_t oversize_skips = 0;
    std::uint64_t final_items = 0;
    std::uint64_t final_used_bytes = 0;
};

void write_report_json(const RunReport& report, std::ostream& out);
void write_per_query_csv(const RunReport& report, std::ostream& out);

}  // namespace arc
