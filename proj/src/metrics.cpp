#include "arc/metrics.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "arc/errors.hpp"

namespace arc {

using nlohmann::json;

int miss_count(const RetrievalResult& result,
               const std::unordered_set<std::string>& pre_access_cache_ids) {
    std::unordered_set<std::string> cache = pre_access_cache_ids;
    int misses = 0;
    for (const RetrievalHit& hit : result.hits) {
        if (cache.count(hit.passage.id) == 0) {
            ++misses;
            cache.insert(hit.passage.id);
        }
    }
    return misses;
}

double has_answer_rate_item(std::span<const QueryOutcome> outcomes) {
    if (outcomes.empty()) {
        throw ContractError("has_answer_rate_item: rate undefined over zero queries");
    }
    std::uint64_t total_m = 0;
    std::uint64_t total_misses = 0;
    for (const QueryOutcome& o : outcomes) {
        total_m += static_cast<std::uint64_t>(o.m);
        total_misses += static_cast<std::uint64_t>(o.misses);
    }
    if (total_m == 0) {
        return 1.0;  // no items were ever requested; nothing was missed
    }
    return 1.0 - static_cast<double>(total_misses) / static_cast<double>(total_m);
}

bool has_fixed_m(std::span<const QueryOutcome> outcomes) {
    for (const QueryOutcome& o : outcomes) {
        if (o.m != outcomes.front().m) return false;
    }
    return true;
}

std::optional<double> has_answer_rate_answer(std::span<const QueryOutcome> outcomes) {
    std::uint64_t labelled = 0;
    std::uint64_t answered = 0;
    for (const QueryOutcome& o : outcomes) {
        if (!o.answer_found.has_value()) continue;
        ++labelled;
        if (o.served_from_cache && *o.answer_found) ++answered;
    }
    if (labelled == 0) return std::nullopt;
    return static_cast<double>(answered) / static_cast<double>(labelled);
}

namespace {

// Lowercased, runs of whitespace collapsed to one space, trimmed.
std::string normalize_text(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    for (unsigned char c : s) {
        if (std::isspace(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(static_cast<char>(std::tolower(c)));
    }
    return out;
}

}  // namespace

bool answer_containment(const RetrievalResult& result, const std::vector<std::string>& answers) {
    std::vector<std::string> needles;
    needles.reserve(answers.size());
    for (const std::string& a : answers) {
        std::string n = normalize_text(a);
        if (!n.empty()) needles.push_back(std::move(n));
    }
    if (needles.empty()) return false;
    for (const RetrievalHit& hit : result.hits) {
        const std::string haystack = normalize_text(hit.passage.text);
        for (const std::string& needle : needles) {
            if (haystack.find(needle) != std::string::npos) return true;
        }
    }
    return false;
}

const char* to_string(AmatMode mode) {
    return mode == AmatMode::Analytic ? "analytic" : "measured";
}

AmatMode amat_mode_from_string(std::string name) {
    std::transform(name.begin(), name.end(), name.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (name == "analytic") return AmatMode::Analytic;
    if (name == "measured") return AmatMode::Measured;
    throw ConfigError("unknown AMAT mode '" + name + "' (analytic|measured)");
}

double amat_measured(std::span<const QueryOutcome> outcomes) {
    if (outcomes.empty()) {
        throw ContractError("amat_measured: undefined over zero queries");
    }
    double total = 0.0;
    for (const QueryOutcome& o : outcomes) {
        if (!o.served_from_cache && !o.corpus_latency_s.has_value()) {
            throw ContractError("amat_measured: escalated query '" + o.query_id +
                                "' lacks a corpus latency");
        }
        total += o.cache_latency_s + o.corpus_latency_s.value_or(0.0);
    }
    return total / static_cast<double>(outcomes.size());
}

double amat_analytic(double cache_serve_rate, double t_cache_s, double t_corpus_s) {
    if (cache_serve_rate < 0.0 || cache_serve_rate > 1.0) {
        throw ContractError("amat_analytic: serve rate must be in [0, 1]");
    }
    if (t_cache_s < 0.0 || t_corpus_s < 0.0) {
        throw ContractError("amat_analytic: latencies must be non-negative");
    }
    return t_cache_s + (1.0 - cache_serve_rate) * t_corpus_s;
}

double cache_serve_rate(std::span<const QueryOutcome> outcomes) {
    if (outcomes.empty()) return 0.0;
    std::uint64_t hits = 0;
    for (const QueryOutcome& o : outcomes) {
        if (o.served_from_cache) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(outcomes.size());
}

std::vector<double> cumulative_item_rate_curve(std::span<const QueryOutcome> outcomes) {
    std::vector<double> curve;
    curve.reserve(outcomes.size());
    std::uint64_t total_m = 0;
    std::uint64_t total_misses = 0;
    for (const QueryOutcome& o : outcomes) {
        total_m += static_cast<std::uint64_t>(o.m);
        total_misses += static_cast<std::uint64_t>(o.misses);
        curve.push_back(total_m == 0 ? 1.0
                                     : 1.0 - static_cast<double>(total_misses) /
                                                 static_cast<double>(total_m));
    }
    return curve;
}

namespace {

json outcome_to_json(const QueryOutcome& o) {
    json j;
    j["query_id"] = o.query_id;
    j["m"] = o.m;
    j["misses"] = o.misses;
    j["served_from_cache"] = o.served_from_cache;
    if (o.answer_found.has_value()) {
        j["answer_found"] = *o.answer_found;
    } else {
        j["answer_found"] = nullptr;
    }
    j["cache_latency_s"] = o.cache_latency_s;
    if (o.corpus_latency_s.has_value()) {
        j["corpus_latency_s"] = *o.corpus_latency_s;
    } else {
        j["corpus_latency_s"] = nullptr;
    }
    return j;
}

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

}  // namespace

void write_report_json(const RunReport& report, std::ostream& out) {
    json j;
    j["has_answer_rate_item"] = report.has_answer_rate_item;
    if (report.has_answer_rate_answer.has_value()) {
        j["has_answer_rate_answer"] = *report.has_answer_rate_answer;
    } else {
        j["has_answer_rate_answer"] = nullptr;
    }
    j["amat_s"] = report.amat_s;
    j["amat_mode"] = to_string(report.amat_mode);
    j["m_fixed"] = report.m_fixed;
    j["cache_serve_rate"] = report.cache_serve_rate;
    j["n_queries"] = report.per_query.size();
    j["escalations"] = report.escalations;
    j["insertions"] = report.insertions;
    j["evictions"] = report.evictions;
    j["oversize_skips"] = report.oversize_skips;
    j["final_items"] = report.final_items;
    j["final_used_bytes"] = report.final_used_bytes;
    j["cumulative_curve"] = report.cumulative_curve;
    json pq = json::array();
    for (const QueryOutcome& o : report.per_query) {
        pq.push_back(outcome_to_json(o));
    }
    j["per_query"] = std::move(pq);
    out << j.dump(2) << '\n';
}

void write_per_query_csv(const RunReport& report, std::ostream& out) {
    out << "t,query_id,provenance,misses,m,answer_found,cache_latency_s,corpus_latency_s,"
           "cumulative_rate\n";
    for (std::size_t t = 0; t < report.per_query.size(); ++t) {
        const QueryOutcome& o = report.per_query[t];
        out << t << ',' << o.query_id << ',' << (o.served_from_cache ? "cache" : "corpus") << ','
            << o.misses << ',' << o.m << ',';
        if (o.answer_found.has_value()) {
            out << (*o.answer_found ? "true" : "false");
        }
        out << ',' << format_double(o.cache_latency_s) << ',';
        if (o.corpus_latency_s.has_value()) {
            out << format_double(*o.corpus_latency_s);
        }
        out << ',' << format_double(report.cumulative_curve[t]) << '\n';
    }
}

}  // namespace arc
