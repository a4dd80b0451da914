#include <doctest.h>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <sstream>

#include "arc/corpus.hpp"
#include "arc/errors.hpp"
#include "test_support.hpp"

using namespace arc;
using testsupport::axis_vector;
using testsupport::make_passage;
using testsupport::random_corpus;

namespace {

Corpus two_axis_corpus() {
    std::vector<Passage> passages;
    passages.push_back(make_passage("p1", axis_vector(2, 0)));
    passages.push_back(make_passage("p2", axis_vector(2, 1)));
    return Corpus(2, std::move(passages));
}

}  // namespace

TEST_CASE("top_k identity query hits rank 1 at distance 0") {
    Corpus corpus = two_axis_corpus();
    RetrievalResult r = corpus.top_k(axis_vector(2, 0), 1);
    REQUIRE(r.size() == 1);
    CHECK(r.hits[0].passage.id == "p1");
    CHECK(r.hits[0].rank == 1);
    CHECK(r.hits[0].distance == doctest::Approx(0.0));
    CHECK(r.provenance == Provenance::Corpus);
}

TEST_CASE("top_k orthogonal pair") {
    Corpus corpus = two_axis_corpus();
    RetrievalResult r = corpus.top_k(axis_vector(2, 0), 2);
    REQUIRE(r.size() == 2);
    CHECK(r.hits[0].passage.id == "p1");
    CHECK(r.hits[0].distance == doctest::Approx(0.0));
    CHECK(r.hits[1].passage.id == "p2");
    CHECK(r.hits[1].distance == doctest::Approx(1.0));
    CHECK(r.hits[1].rank == 2);
}

TEST_CASE("top_k matches an exhaustive scan oracle on random corpora") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 8; ++trial) {
        const Eigen::Index dim = trial % 2 == 0 ? 8 : 24;
        Corpus corpus = random_corpus(200, dim, 100 + static_cast<std::uint64_t>(trial));
        const Embedding q = testsupport::random_unit(rng, dim);
        RetrievalResult r = corpus.top_k(q, 50);
        REQUIRE(r.size() == 50);

        // Independent oracle: compute every distance, full sort by (dist, id).
        struct Scored {
            float dist;
            const std::string* id;
        };
        std::vector<Scored> all;
        for (const Passage& p : corpus.passages()) {
            all.push_back(Scored{1.0f - p.embedding.dot(q), &p.id});
        }
        std::sort(all.begin(), all.end(), [](const Scored& a, const Scored& b) {
            if (a.dist != b.dist) return a.dist < b.dist;
            return *a.id < *b.id;
        });
        for (std::size_t i = 0; i < 50; ++i) {
            CHECK(r.hits[i].passage.id == *all[i].id);
            CHECK(r.hits[i].distance == all[i].dist);
            CHECK(r.hits[i].rank == static_cast<int>(i) + 1);
        }
    }
}

TEST_CASE("top_k distances are within [0,2] and non-decreasing with rank") {
    std::mt19937_64 rng(7);
    Corpus corpus = random_corpus(300, 16, 55);
    for (int trial = 0; trial < 20; ++trial) {
        RetrievalResult r = corpus.top_k(testsupport::random_unit(rng, 16), 40);
        for (std::size_t i = 0; i < r.size(); ++i) {
            CHECK(r.hits[i].distance >= -1e-5f);  // float slack around exact 0
            CHECK(r.hits[i].distance <= 2.0f + 1e-5f);
            if (i > 0) CHECK(r.hits[i].distance >= r.hits[i - 1].distance);
        }
    }
}

TEST_CASE("top_k breaks exact ties by ascending passage id") {
    std::vector<Passage> passages;
    passages.push_back(make_passage("b", axis_vector(4, 1)));
    passages.push_back(make_passage("a", axis_vector(4, 1)));
    passages.push_back(make_passage("c", axis_vector(4, 1)));
    Corpus corpus(4, std::move(passages));
    RetrievalResult r = corpus.top_k(axis_vector(4, 0), 3);
    CHECK(r.hits[0].passage.id == "a");
    CHECK(r.hits[1].passage.id == "b");
    CHECK(r.hits[2].passage.id == "c");
}

TEST_CASE("top_k on an empty corpus returns an empty result") {
    Corpus corpus;
    RetrievalResult r = corpus.top_k(axis_vector(4, 0), 5);
    CHECK(r.empty());
    CHECK(r.provenance == Provenance::Corpus);
}

TEST_CASE("top_k rejects bad arguments") {
    Corpus corpus = two_axis_corpus();
    CHECK_THROWS_AS(corpus.top_k(axis_vector(3, 0), 1), ContractError);
    CHECK_THROWS_AS(corpus.top_k(axis_vector(2, 0), 0), ContractError);
}

TEST_CASE("top_k clamps k to the corpus size") {
    Corpus corpus = two_axis_corpus();
    RetrievalResult r = corpus.top_k(axis_vector(2, 0), 10);
    CHECK(r.size() == 2);
}

TEST_CASE("top_k is deterministic across repeated calls") {
    std::mt19937_64 rng(11);
    Corpus corpus = random_corpus(500, 8, 77);
    const Embedding q = testsupport::random_unit(rng, 8);
    RetrievalResult a = corpus.top_k(q, 25);
    RetrievalResult b = corpus.top_k(q, 25);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a.hits[i].passage.id == b.hits[i].passage.id);
        CHECK(a.hits[i].distance == b.hits[i].distance);
    }
}

TEST_CASE("ingestion normalizes vectors") {
    std::stringstream file;
    file << R"({"dim": 4, "count": 2})" << '\n'
         << R"({"id": "p1", "text": "one", "vec": [1, 0, 0, 0]})" << '\n'
         << R"({"id": "p2", "text": "two", "vec": [0, 2, 0, 0]})" << '\n';
    Corpus corpus = parse_corpus_jsonl(file, true, "mem");
    REQUIRE(corpus.size() == 2);
    CHECK(corpus.passage(0).embedding[0] == doctest::Approx(1.0));
    CHECK(corpus.passage(1).embedding[1] == doctest::Approx(1.0));
    CHECK(corpus.passage(1).embedding.norm() == doctest::Approx(1.0));
}

TEST_CASE("ingestion of an empty corpus keeps the header dimension") {
    std::stringstream file;
    file << R"({"dim": 12, "count": 0})" << '\n';
    Corpus corpus = parse_corpus_jsonl(file, true, "mem");
    CHECK(corpus.empty());
    CHECK(corpus.dimension() == 12);
}

TEST_CASE("ingested footprints match an independent byte recount") {
    // Build a 100-passage synthetic file, then recount bytes straight from the
    // JSON rows without touching Corpus bookkeeping.
    std::mt19937_64 rng(3);
    std::stringstream file;
    file << R"({"dim": 8, "count": 100})" << '\n';
    std::vector<std::string> lines;
    for (int i = 0; i < 100; ++i) {
        nlohmann::json row;
        row["id"] = testsupport::padded_id("p", static_cast<std::size_t>(i));
        std::string text = "passage";
        const int extra = static_cast<int>(arc::uniform01(rng) * 60);
        for (int j = 0; j < extra; ++j) text += static_cast<char>('a' + (j % 26));
        row["text"] = text;
        Embedding v = testsupport::random_unit(rng, 8);
        nlohmann::json vec = nlohmann::json::array();
        for (Eigen::Index d = 0; d < 8; ++d) vec.push_back(static_cast<double>(v[d]));
        row["vec"] = vec;
        const std::string line = row.dump();
        lines.push_back(line);
        file << line << '\n';
    }
    Corpus corpus = parse_corpus_jsonl(file, true, "mem");
    REQUIRE(corpus.size() == 100);
    for (std::size_t i = 0; i < 100; ++i) {
        const auto row = nlohmann::json::parse(lines[i]);
        const std::uint64_t expected = row["text"].get<std::string>().size() + 4u * 8u;
        CHECK(corpus.passage(i).footprint_bytes == expected);
    }
}

TEST_CASE("ingestion errors are precise") {
    SUBCASE("malformed header") {
        std::stringstream file;
        file << "not json\n";
        CHECK_THROWS_AS(parse_corpus_jsonl(file, true, "mem"), DataError);
    }
    SUBCASE("missing header fields") {
        std::stringstream file;
        file << R"({"dim": 4})" << '\n';
        CHECK_THROWS_AS(parse_corpus_jsonl(file, true, "mem"), DataError);
    }
    SUBCASE("row dimension mismatch names the line") {
        std::stringstream file;
        file << R"({"dim": 4, "count": 2})" << '\n'
             << R"({"id": "p1", "text": "", "vec": [1, 0, 0, 0]})" << '\n'
             << R"({"id": "p2", "text": "", "vec": [1, 0]})" << '\n';
        try {
            parse_corpus_jsonl(file, true, "mem");
            FAIL("expected DataError");
        } catch (const DataError& e) {
            CHECK(std::string(e.what()).find(":3") != std::string::npos);
        }
    }
    SUBCASE("duplicate id") {
        std::stringstream file;
        file << R"({"dim": 2, "count": 2})" << '\n'
             << R"({"id": "p1", "text": "", "vec": [1, 0]})" << '\n'
             << R"({"id": "p1", "text": "", "vec": [0, 1]})" << '\n';
        CHECK_THROWS_AS(parse_corpus_jsonl(file, true, "mem"), DataError);
    }
    SUBCASE("zero-norm vector under normalization") {
        std::stringstream file;
        file << R"({"dim": 2, "count": 1})" << '\n'
             << R"({"id": "p1", "text": "", "vec": [0, 0]})" << '\n';
        CHECK_THROWS_AS(parse_corpus_jsonl(file, true, "mem"), DataError);
    }
    SUBCASE("count mismatch") {
        std::stringstream file;
        file << R"({"dim": 2, "count": 3})" << '\n'
             << R"({"id": "p1", "text": "", "vec": [1, 0]})" << '\n';
        CHECK_THROWS_AS(parse_corpus_jsonl(file, true, "mem"), DataError);
    }
    SUBCASE("non-unit vector without normalization") {
        std::stringstream file;
        file << R"({"dim": 2, "count": 1})" << '\n'
             << R"({"id": "p1", "text": "", "vec": [3, 0]})" << '\n';
        CHECK_THROWS_AS(parse_corpus_jsonl(file, false, "mem"), DataError);
    }
}

TEST_CASE("corpus JSONL write/parse round-trip is byte-stable") {
    Corpus corpus = random_corpus(20, 8, 99);
    std::stringstream first;
    write_corpus_jsonl(corpus, first);
    Corpus reloaded = parse_corpus_jsonl(first, false, "mem");
    std::stringstream second;
    write_corpus_jsonl(reloaded, second);
    CHECK(first.str() == second.str());
}
