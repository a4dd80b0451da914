#include "arc/corpus.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>
#include <utility>

#include "arc/errors.hpp"
#include "arc/geometry.hpp"
#include "arc/search.hpp"

namespace arc {

using nlohmann::json;

Corpus::Corpus(Eigen::Index dimension, std::vector<Passage> passages)
    : dimension_(dimension), passages_(std::move(passages)) {
    if (dimension_ <= 0) {
        throw DataError("corpus dimension must be positive");
    }
    by_id_.reserve(passages_.size());
    for (std::size_t i = 0; i < passages_.size(); ++i) {
        Passage& p = passages_[i];
        if (p.embedding.size() != dimension_) {
            throw DataError("passage '" + p.id + "': embedding dimension " +
                            std::to_string(p.embedding.size()) + " != corpus dimension " +
                            std::to_string(dimension_));
        }
        if (!all_finite(p.embedding)) {
            throw DataError("passage '" + p.id + "': embedding has non-finite components");
        }
        if (!is_unit_norm(p.embedding)) {
            throw DataError("passage '" + p.id +
                            "': embedding is not unit-norm (ingest with normalization)");
        }
        p.footprint_bytes = passage_footprint(p.text, dimension_);
        total_footprint_bytes_ += p.footprint_bytes;
        if (!by_id_.emplace(p.id, i).second) {
            throw DataError("duplicate passage id '" + p.id + "'");
        }
    }
}

const Passage* Corpus::find(const std::string& id) const {
    auto it = by_id_.find(id);
    return it == by_id_.end() ? nullptr : &passages_[it->second];
}

RetrievalResult Corpus::top_k(const Eigen::Ref<const Embedding>& query, std::size_t k) const {
    if (!empty() && query.size() != dimension_) {
        throw ContractError("top_k: query dimension " + std::to_string(query.size()) +
                            " != corpus dimension " + std::to_string(dimension_));
    }
    RetrievalResult result;
    result.provenance = Provenance::Corpus;
    const auto hits = exact_top_k(
        passages_.size(), [&](std::size_t i) -> const Embedding& { return passages_[i].embedding; },
        [&](std::size_t i) -> const std::string& { return passages_[i].id; }, query, k);
    result.hits.reserve(hits.size());
    int rank = 1;
    for (const SearchHit& h : hits) {
        result.hits.push_back(RetrievalHit{passages_[h.row], rank++, h.distance});
    }
    return result;
}

namespace {

json parse_line(const std::string& line, std::size_t lineno, const std::string& source) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) {
        throw DataError(source + ":" + std::to_string(lineno) + ": malformed JSON");
    }
    return j;
}

Embedding vec_from_json(const json& arr, std::size_t lineno, const std::string& source) {
    if (!arr.is_array()) {
        throw DataError(source + ":" + std::to_string(lineno) + ": 'vec' must be an array");
    }
    Embedding v(static_cast<Eigen::Index>(arr.size()));
    Eigen::Index i = 0;
    for (const auto& x : arr) {
        if (!x.is_number()) {
            throw DataError(source + ":" + std::to_string(lineno) + ": non-numeric vector entry");
        }
        v[i++] = static_cast<float>(x.get<double>());
    }
    return v;
}

}  // namespace

Corpus parse_corpus_jsonl(std::istream& in, bool normalize, const std::string& source_name) {
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError(source_name + ": empty file, expected a {\"dim\",\"count\"} header");
    }
    const json header = parse_line(line, 1, source_name);
    if (!header.is_object() || !header.contains("dim") || !header.contains("count") ||
        !header["dim"].is_number_integer() || !header["count"].is_number_integer()) {
        throw DataError(source_name + ":1: header must be {\"dim\": d, \"count\": n}");
    }
    const auto dim = header["dim"].get<Eigen::Index>();
    const auto count = header["count"].get<std::int64_t>();
    if (dim <= 0) {
        throw DataError(source_name + ":1: header dim must be positive");
    }
    if (count < 0) {
        throw DataError(source_name + ":1: header count must be non-negative");
    }

    std::vector<Passage> passages;
    passages.reserve(static_cast<std::size_t>(count));
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        const json row = parse_line(line, lineno, source_name);
        if (!row.is_object() || !row.contains("id") || !row.contains("text") ||
            !row.contains("vec") || !row["id"].is_string() || !row["text"].is_string()) {
            throw DataError(source_name + ":" + std::to_string(lineno) +
                            ": row must be {\"id\", \"text\", \"vec\"}");
        }
        Passage p;
        p.id = row["id"].get<std::string>();
        p.text = row["text"].get<std::string>();
        p.embedding = vec_from_json(row["vec"], lineno, source_name);
        if (p.embedding.size() != dim) {
            throw DataError(source_name + ":" + std::to_string(lineno) + ": vector length " +
                            std::to_string(p.embedding.size()) + " != header dim " +
                            std::to_string(dim));
        }
        if (!all_finite(p.embedding)) {
            throw DataError(source_name + ":" + std::to_string(lineno) +
                            ": non-finite vector component");
        }
        if (normalize && !try_unit_normalize(p.embedding)) {
            throw DataError(source_name + ":" + std::to_string(lineno) +
                            ": zero-norm vector cannot be normalized");
        }
        passages.push_back(std::move(p));
    }
    if (passages.size() != static_cast<std::size_t>(count)) {
        throw DataError(source_name + ": header count " + std::to_string(count) + " != " +
                        std::to_string(passages.size()) + " rows");
    }
    return Corpus(dim, std::move(passages));
}

Corpus ingest_corpus(const std::filesystem::path& file, bool normalize) {
    std::ifstream in(file);
    if (!in) {
        throw DataError("cannot open corpus file: " + file.string());
    }
    return parse_corpus_jsonl(in, normalize, file.filename().string());
}

void write_corpus_jsonl(const Corpus& corpus, std::ostream& out) {
    json header;
    header["dim"] = corpus.dimension();
    header["count"] = corpus.size();
    out << header.dump() << '\n';
    for (const Passage& p : corpus.passages()) {
        json row;
        row["id"] = p.id;
        row["text"] = p.text;
        json vec = json::array();
        for (Eigen::Index i = 0; i < p.embedding.size(); ++i) {
            vec.push_back(static_cast<double>(p.embedding[i]));
        }
        row["vec"] = std::move(vec);
        out << row.dump() << '\n';
    }
}

}  // namespace arc
