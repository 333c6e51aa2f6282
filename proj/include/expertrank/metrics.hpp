#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <unordered_set>
#include <vector>

#include "expertrank/corpus.hpp"
#include "expertrank/text.hpp"

namespace expertrank {

// Age-weighting parameters shared by the contemporary and trend variants.
struct index_params {
    double gamma = 4.0;
    double delta = 1.0;
    int current_year = 0;
};

// ---- list-based cores -----------------------------------------------------
// Everything downstream reduces to "largest h such that at least h entries
// score >= h". Candidates never exceed the number of entries.

inline int threshold_index(const std::vector<double>& scores) {
    const int n = static_cast<int>(scores.size());
    int best = 0;
    for (int h = 1; h <= n; ++h) {
        int cnt = 0;
        for (double s : scores)
            if (s >= static_cast<double>(h)) ++cnt;
        if (cnt >= h) best = h;
    }
    return best;
}

inline int h_index(const std::vector<int>& citation_counts) {
    std::vector<double> s(citation_counts.begin(), citation_counts.end());
    return threshold_index(s);
}

// N_c,tot / h^2; zero when h is zero.
inline double a_index(const std::vector<int>& citation_counts) {
    const int h = h_index(citation_counts);
    if (h == 0) return 0.0;
    const long long total =
        std::accumulate(citation_counts.begin(), citation_counts.end(), 0LL);
    return static_cast<double>(total) / (static_cast<double>(h) * static_cast<double>(h));
}

// Largest g with the top-g citation total >= g^2. g may exceed the number of
// articles; missing articles count as zero-citation entries.
inline int g_index(const std::vector<int>& citation_counts) {
    std::vector<int> sorted = citation_counts;
    std::sort(sorted.begin(), sorted.end(), std::greater<int>());
    const long long total = std::accumulate(sorted.begin(), sorted.end(), 0LL);
    int g = 0;
    long long cum = 0;
    for (int cand = 1;; ++cand) {
        cum += cand <= static_cast<int>(sorted.size()) ? sorted[cand - 1] : 0;
        if (cum < static_cast<long long>(cand) * cand) {
            if (static_cast<long long>(cand) * cand > total) break;
        } else {
            g = cand;
        }
    }
    return g;
}

namespace detail {
// h-core: the h most-cited entries. Ties broken by ascending position, which
// corresponds to ascending publication id for corpus-backed calls.
inline std::vector<std::size_t> h_core(const std::vector<int>& counts, int h) {
    std::vector<std::size_t> order(counts.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return counts[a] > counts[b];
    });
    order.resize(static_cast<std::size_t>(h));
    return order;
}
} // namespace detail

// sqrt(citations of the h-core minus h^2); zero when h is zero.
inline double e_index(const std::vector<int>& citation_counts) {
    const int h = h_index(citation_counts);
    if (h == 0) return 0.0;
    long long core_sum = 0;
    for (auto idx : detail::h_core(citation_counts, h)) core_sum += citation_counts[idx];
    return std::sqrt(static_cast<double>(core_sum - static_cast<long long>(h) * h));
}

// h divided by the mean author count of the h-core papers; zero when h is 0.
inline double individual_h_index_core(const std::vector<int>& citation_counts,
                                      const std::vector<int>& author_counts) {
    const int h = h_index(citation_counts);
    if (h == 0) return 0.0;
    double authors = 0.0;
    for (auto idx : detail::h_core(citation_counts, h))
        authors += static_cast<double>(author_counts[idx]);
    return static_cast<double>(h) / (authors / static_cast<double>(h));
}

// Publication ages clamp at one year, so articles dated after current_year
// weigh like current-year ones.
inline double contemporary_score(int pub_year, std::size_t citation_count,
                                 const index_params& p) {
    const int age = std::max(p.current_year - pub_year + 1, 1);
    return p.gamma * std::pow(static_cast<double>(age), -p.delta) *
           static_cast<double>(citation_count);
}

inline double trend_score(const std::vector<int>& citing_years, const index_params& p) {
    double s = 0.0;
    for (int y : citing_years) {
        const int age = std::max(p.current_year - y + 1, 1);
        s += std::pow(static_cast<double>(age), -p.delta);
    }
    return p.gamma * s;
}

// ---- corpus adapters ------------------------------------------------------

// Citation counts of the author's publications, in ascending pub-id order.
inline std::vector<int> author_citation_counts(const std::string& author_id,
                                               const corpus& c) {
    std::vector<int> counts;
    for (auto pi : c.author_pub_indices(c.author_index(author_id)))
        counts.push_back(static_cast<int>(c.citation_count(pi)));
    return counts;
}

inline int author_h_index(const std::string& author_id, const corpus& c) {
    return h_index(author_citation_counts(author_id, c));
}

inline double author_a_index(const std::string& author_id, const corpus& c) {
    return a_index(author_citation_counts(author_id, c));
}

inline int author_g_index(const std::string& author_id, const corpus& c) {
    return g_index(author_citation_counts(author_id, c));
}

inline double author_e_index(const std::string& author_id, const corpus& c) {
    return e_index(author_citation_counts(author_id, c));
}

inline double author_individual_h_index(const std::string& author_id, const corpus& c) {
    std::vector<int> counts, authors;
    for (auto pi : c.author_pub_indices(c.author_index(author_id))) {
        counts.push_back(static_cast<int>(c.citation_count(pi)));
        authors.push_back(static_cast<int>(c.pub_at(pi).author_ids.size()));
    }
    return individual_h_index_core(counts, authors);
}

inline int contemporary_h_index(const std::string& author_id, const index_params& p,
                                const corpus& c) {
    std::vector<double> scores;
    for (auto pi : c.author_pub_indices(c.author_index(author_id)))
        scores.push_back(contemporary_score(c.pub_at(pi).year, c.citation_count(pi), p));
    return threshold_index(scores);
}

inline int trend_h_index(const std::string& author_id, const index_params& p,
                         const corpus& c) {
    std::vector<double> scores;
    for (auto pi : c.author_pub_indices(c.author_index(author_id))) {
        std::vector<int> citing_years;
        for (auto ci : c.citers_of(pi)) citing_years.push_back(c.pub_at(ci).year);
        scores.push_back(trend_score(citing_years, p));
    }
    return threshold_index(scores);
}

// h-index of the set of publications matching the query.
inline int hb_index(const query& q, const corpus& c) {
    std::vector<int> counts;
    for (std::size_t pi = 0; pi < c.num_publications(); ++pi)
        if (document_matches(q, c.pub_at(pi)))
            counts.push_back(static_cast<int>(c.citation_count(pi)));
    return h_index(counts);
}

// Pooled citation counts of every publication authored by anyone at the
// institution; a paper with two such authors counts once. Ascending pub-id
// order, like the per-author lists. Empty when the institution string is
// empty.
inline std::vector<int> institution_citation_counts(const std::string& institution,
                                                    const corpus& c) {
    std::vector<int> counts;
    if (institution.empty()) return counts;
    std::vector<std::uint32_t> pubs;
    for (std::size_t ai = 0; ai < c.num_authors(); ++ai) {
        if (c.author_at(ai).institution != institution) continue;
        const auto& v = c.author_pub_indices(ai);
        pubs.insert(pubs.end(), v.begin(), v.end());
    }
    std::sort(pubs.begin(), pubs.end());
    pubs.erase(std::unique(pubs.begin(), pubs.end()), pubs.end());
    std::sort(pubs.begin(), pubs.end(), [&](std::uint32_t a, std::uint32_t b) {
        return c.pub_at(a).id < c.pub_at(b).id;
    });
    counts.reserve(pubs.size());
    for (auto pi : pubs) counts.push_back(static_cast<int>(c.citation_count(pi)));
    return counts;
}

inline int institution_h_index(const std::string& author_id, const corpus& c) {
    const auto& inst = c.author_at(c.author_index(author_id)).institution;
    return h_index(institution_citation_counts(inst, c));
}

inline double institution_a_index(const std::string& author_id, const corpus& c) {
    const auto& inst = c.author_at(c.author_index(author_id)).institution;
    return a_index(institution_citation_counts(inst, c));
}

inline int institution_g_index(const std::string& author_id, const corpus& c) {
    const auto& inst = c.author_at(c.author_index(author_id)).institution;
    return g_index(institution_citation_counts(inst, c));
}

// Career span in whole years, floored at one so per-year rates stay defined
// for single-year authors. Zero publications also map to one.
inline int career_span_years(const std::string& author_id, const corpus& c) {
    int lo = 0, hi = 0;
    bool any = false;
    for (auto pi : c.author_pub_indices(c.author_index(author_id))) {
        const int y = c.pub_at(pi).year;
        if (!any) { lo = hi = y; any = true; }
        else { lo = std::min(lo, y); hi = std::max(hi, y); }
    }
    return any ? std::max(hi - lo, 1) : 1;
}

// Raw span (last year minus first year); 0 for authors with < 2 pub years.
inline int career_span_raw(const std::string& author_id, const corpus& c) {
    int lo = 0, hi = 0;
    bool any = false;
    for (auto pi : c.author_pub_indices(c.author_index(author_id))) {
        const int y = c.pub_at(pi).year;
        if (!any) { lo = hi = y; any = true; }
        else { lo = std::min(lo, y); hi = std::max(hi, y); }
    }
    return any ? hi - lo : 0;
}

struct citation_summary {
    double total_matching = 0.0;  // citations of the author's matching papers
    double avg_matching = 0.0;
    double max_matching = 0.0;
    double per_year = 0.0;        // all papers' citations / career span
    std::size_t collaborators = 0; // distinct co-authors over all papers
};

inline citation_summary citation_stats(const std::string& author_id, const query& q,
                                       const corpus& c) {
    citation_summary out;
    const std::size_t ai = c.author_index(author_id);
    long long total_all = 0;
    long long total_match = 0, max_match = 0;
    std::size_t n_match = 0;
    std::unordered_set<std::string_view> collab;
    for (auto pi : c.author_pub_indices(ai)) {
        const auto& p = c.pub_at(pi);
        const long long cites = static_cast<long long>(c.citation_count(pi));
        total_all += cites;
        if (document_matches(q, p)) {
            ++n_match;
            total_match += cites;
            max_match = std::max(max_match, cites);
        }
        for (const auto& co : p.author_ids)
            if (co != author_id) collab.insert(co);
    }
    out.total_matching = static_cast<double>(total_match);
    out.avg_matching = n_match > 0
        ? static_cast<double>(total_match) / static_cast<double>(n_match) : 0.0;
    out.max_matching = n_match > 0 ? static_cast<double>(max_match) : 0.0;
    out.per_year = static_cast<double>(total_all) /
                   static_cast<double>(career_span_years(author_id, c));
    out.collaborators = collab.size();
    return out;
}

} // namespace expertrank
