#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "expertrank/corpus.hpp"
#include "expertrank/errors.hpp"

namespace expertrank {

// Directed citation graph over publications. Node index == publication index
// in the corpus. An edge runs from the citing paper to the cited paper and
// carries weight 1 / (number of authors of the citing paper), so a paper's
// endorsement is split across its author team before it is split across its
// reference list.
struct citation_graph {
    struct in_edge {
        std::uint32_t source = 0;
        double weight = 0.0;
    };
    std::vector<std::vector<in_edge>> in_edges;
    std::vector<double> out_weight; // total outgoing weight per node; 0 = dangling

    std::size_t size() const { return in_edges.size(); }
};

inline citation_graph build_citation_graph(const corpus& c) {
    citation_graph g;
    const std::size_t n = c.num_publications();
    g.in_edges.resize(n);
    g.out_weight.assign(n, 0.0);
    for (std::size_t src = 0; src < n; ++src) {
        const publication& p = c.pub_at(src);
        if (p.cited_ids.empty()) continue;
        const double w = 1.0 / static_cast<double>(p.author_ids.size());
        for (const auto& cited : p.cited_ids) {
            const auto dst = static_cast<std::uint32_t>(c.pub_index(cited));
            g.in_edges[dst].push_back({static_cast<std::uint32_t>(src), w});
            g.out_weight[src] += w;
        }
    }
    return g;
}

struct pagerank_params {
    double damping = 0.5;
    double tolerance = 1e-9; // L1 distance between successive iterates
    int max_iterations = 200;
};

struct pagerank_result {
    std::vector<double> scores;
    int iterations = 0;
    bool converged = false;
};

// Power iteration for Pr = (1-d)/N + d * W^T Pr with column-normalized
// weights. Mass parked on dangling nodes is spread uniformly each step, so
// every iterate stays a probability distribution.
inline pagerank_result pagerank(const citation_graph& g, const pagerank_params& p = {}) {
    const std::size_t n = g.size();
    if (n == 0) throw validation_error("pagerank requires a non-empty graph");

    pagerank_result res;
    std::vector<double> cur(n, 1.0 / static_cast<double>(n));
    std::vector<double> next(n, 0.0);
    const double base = (1.0 - p.damping) / static_cast<double>(n);

    for (int it = 1; it <= p.max_iterations; ++it) {
        double dangling = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if (g.out_weight[i] == 0.0) dangling += cur[i];
        const double spread = p.damping * dangling / static_cast<double>(n);

        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (const auto& e : g.in_edges[i])
                acc += e.weight * cur[e.source] / g.out_weight[e.source];
            next[i] = base + spread + p.damping * acc;
        }

        double delta = 0.0;
        for (std::size_t i = 0; i < n; ++i) delta += std::abs(next[i] - cur[i]);
        cur.swap(next);
        res.iterations = it;
        if (delta <= p.tolerance) {
            res.converged = true;
            break;
        }
    }
    res.scores = std::move(cur);
    return res;
}

// Sum / mean of the author's publication scores; both zero for authors
// without publications.
inline double author_pagerank_sum(const std::string& author_id,
                                  const std::vector<double>& scores, const corpus& c) {
    double s = 0.0;
    for (auto pi : c.author_pub_indices(c.author_index(author_id))) s += scores[pi];
    return s;
}

inline double author_pagerank_avg(const std::string& author_id,
                                  const std::vector<double>& scores, const corpus& c) {
    const auto& pubs = c.author_pub_indices(c.author_index(author_id));
    if (pubs.empty()) return 0.0;
    double s = 0.0;
    for (auto pi : pubs) s += scores[pi];
    return s / static_cast<double>(pubs.size());
}

} // namespace expertrank
