#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "arc/errors.hpp"
#include "arc/geometry.hpp"
#include "arc/types.hpp"

namespace arc {

struct SearchHit {
    std::size_t row = 0;  // index into the searched collection
    float distance = 0.0f;
};

// Exact flat top-k over n rows, ascending (distance, id, row). Both the corpus
// index and the cache-side probe run through here, so ranking and tie handling
// are identical on either side of the escalation test.
//
// embedding_of(i) must be dottable against `query`; id_of(i) labels row i for
// deterministic tie-breaking. k is clamped to n; k < 1 is a contract violation.
template <typename EmbeddingOf, typename IdOf>
std::vector<SearchHit> exact_top_k(std::size_t n, const EmbeddingOf& embedding_of,
                                   const IdOf& id_of, const Eigen::Ref<const Embedding>& query,
                                   std::size_t k) {
    if (k < 1) {
        throw ContractError("exact_top_k: k must be >= 1");
    }
    if (n == 0) {
        return {};
    }
    if (embedding_of(0).size() != query.size()) {
        throw ContractError("exact_top_k: query dimension " + std::to_string(query.size()) +
                            " != item dimension " + std::to_string(embedding_of(0).size()));
    }

    std::vector<float> dist(n);
    for (std::size_t i = 0; i < n; ++i) {
        dist[i] = cosine_distance(embedding_of(i), query);
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    const auto closer = [&](std::size_t a, std::size_t b) {
        if (dist[a] != dist[b]) return dist[a] < dist[b];
        if (id_of(a) != id_of(b)) return id_of(a) < id_of(b);
        return a < b;
    };
    const std::size_t take = std::min(k, n);
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take),
                      order.end(), closer);

    std::vector<SearchHit> hits;
    hits.reserve(take);
    for (std::size_t i = 0; i < take; ++i) {
        hits.push_back(SearchHit{order[i], dist[order[i]]});
    }
    return hits;
}

}  // namespace arc
