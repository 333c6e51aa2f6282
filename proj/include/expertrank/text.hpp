#pragma once

#include <cmath>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "expertrank/corpus.hpp"
#include "expertrank/errors.hpp"
#include "expertrank/tokenize.hpp"

namespace expertrank {

// A search topic. Terms keep their order and multiplicity, which makes the
// scoring functions exactly additive over the term list.
struct query {
    std::string id;
    std::vector<std::string> terms;

    static query from_text(std::string id, std::string_view text) {
        query q;
        q.id = std::move(id);
        q.terms = tokenize(text);
        if (q.terms.empty())
            throw validation_error("query " + q.id + " has no terms after normalization");
        return q;
    }
};

struct bm25_params {
    double k1 = 1.2;
    double b = 0.75;
};

// Collection-level statistics of one stream. |D| counts documents that have
// at least one token in the stream, matching how the corpus splits into a
// title stream and a (smaller) abstract stream.
class term_stats {
public:
    term_stats() = default;

    term_stats(const corpus& c, stream_kind s) : stream_(s) {
        std::size_t total_len = 0;
        for (const auto& p : c.publications()) {
            const auto& toks = p.tokens(s);
            if (toks.empty()) continue;
            ++doc_count_;
            total_len += toks.size();
            std::unordered_set<std::string_view> uniq(toks.begin(), toks.end());
            for (auto t : uniq) ++doc_freq_[std::string(t)];
        }
        if (doc_count_ > 0)
            avg_doc_len_ = static_cast<double>(total_len) / static_cast<double>(doc_count_);
    }

    stream_kind stream() const { return stream_; }
    std::size_t doc_count() const { return doc_count_; }
    double avg_doc_len() const { return avg_doc_len_; }

    std::size_t doc_freq(const std::string& term) const {
        auto it = doc_freq_.find(term);
        return it == doc_freq_.end() ? 0 : it->second;
    }

private:
    stream_kind stream_ = stream_kind::title;
    std::size_t doc_count_ = 0;
    double avg_doc_len_ = 0.0;
    std::unordered_map<std::string, std::size_t> doc_freq_;
};

namespace detail {
inline std::size_t count_occurrences(const std::vector<std::string>& tokens,
                                     const std::string& term) {
    std::size_t n = 0;
    for (const auto& t : tokens)
        if (t == term) ++n;
    return n;
}
} // namespace detail

// TF_{q,a} = sum over Docs(a), sum over Terms(q) of Freq(i,d)/|d|.
// Documents with no tokens in the stream contribute zero.
inline double term_frequency(const query& q, const std::string& author_id,
                             stream_kind s, const corpus& c) {
    double tf = 0.0;
    for (auto pi : c.author_pub_indices(c.author_index(author_id))) {
        const auto& toks = c.pub_at(pi).tokens(s);
        if (toks.empty()) continue;
        const double len = static_cast<double>(toks.size());
        for (const auto& term : q.terms)
            tf += static_cast<double>(detail::count_occurrences(toks, term)) / len;
    }
    return tf;
}

// IDF_q = sum over Terms(q) of ln(|D| / f_{i,D}). Unseen terms are smoothed
// as f = 1, which also keeps every summand nonnegative.
inline double inverse_document_frequency(const query& q, const term_stats& st) {
    if (st.doc_count() == 0)
        throw validation_error("idf undefined: no documents in the " +
                               std::string(stream_name(st.stream())) + " stream");
    double idf = 0.0;
    const double d = static_cast<double>(st.doc_count());
    for (const auto& term : q.terms) {
        std::size_t f = st.doc_freq(term);
        idf += std::log(d / static_cast<double>(f == 0 ? 1 : f));
    }
    return idf;
}

// BM25 with normalized within-document frequencies: each term contributes
//
//   ln((N - Freq(i) + 0.5) / (Freq(i) + 0.5)) *
//     (k1 + 1) * r / (r + k1 * (1 - b + b * |d|/A)),   r = Freq(i,d)/|d|.
//
// The log component is not clamped; document frequencies above N/2 yield
// negative contributions.
inline double bm25(const query& q, const publication& doc, stream_kind s,
                   const term_stats& st, const bm25_params& params = {}) {
    const auto& toks = doc.tokens(s);
    if (toks.empty() || st.doc_count() == 0 || st.avg_doc_len() <= 0.0) return 0.0;
    const double len = static_cast<double>(toks.size());
    const double n_docs = static_cast<double>(st.doc_count());
    const double len_norm =
        params.k1 * (1.0 - params.b + params.b * len / st.avg_doc_len());
    double score = 0.0;
    for (const auto& term : q.terms) {
        const double freq_d = static_cast<double>(detail::count_occurrences(toks, term));
        if (freq_d == 0.0) continue;
        const double df = static_cast<double>(st.doc_freq(term));
        const double idf_part = std::log((n_docs - df + 0.5) / (df + 0.5));
        const double ratio = freq_d / len;
        score += idf_part * (params.k1 + 1.0) * ratio / (ratio + len_norm);
    }
    return score;
}

// Per-author BM25 feature: sum of bm25(q, d) over Docs(a).
inline double bm25_author(const query& q, const std::string& author_id, stream_kind s,
                          const corpus& c, const term_stats& st,
                          const bm25_params& params = {}) {
    double sum = 0.0;
    for (auto pi : c.author_pub_indices(c.author_index(author_id)))
        sum += bm25(q, c.pub_at(pi), s, st, params);
    return sum;
}

// True iff every query term occurs in the union of the document's title and
// abstract token sets. This is the "contains the query topics" predicate
// used uniformly by the topic-restricted features.
inline bool document_matches(const query& q, const publication& doc) {
    for (const auto& term : q.terms) {
        bool found = false;
        for (const auto& t : doc.title_tokens)
            if (t == term) { found = true; break; }
        if (!found)
            for (const auto& t : doc.abstract_tokens)
                if (t == term) { found = true; break; }
        if (!found) return false;
    }
    return true;
}

// Total token count of the author's publications in one stream.
inline std::size_t author_stream_length(const std::string& author_id, stream_kind s,
                                        const corpus& c) {
    std::size_t total = 0;
    for (auto pi : c.author_pub_indices(c.author_index(author_id)))
        total += c.pub_at(pi).tokens(s).size();
    return total;
}

// Number of distinct authors over all documents matching the query. Query
// level: identical for every candidate under the same query.
inline std::size_t matching_author_count(const query& q, const corpus& c) {
    std::unordered_set<std::string_view> uniq;
    for (const auto& p : c.publications())
        if (document_matches(q, p))
            for (const auto& aid : p.author_ids) uniq.insert(aid);
    return uniq.size();
}

// Years between the author's earliest and latest publications that match the
// query; 0 when fewer than two publications match.
inline int matching_year_span(const query& q, const std::string& author_id,
                              const corpus& c) {
    int lo = 0, hi = 0;
    bool any = false;
    for (auto pi : c.author_pub_indices(c.author_index(author_id))) {
        const auto& p = c.pub_at(pi);
        if (!document_matches(q, p)) continue;
        if (!any) { lo = hi = p.year; any = true; }
        else { lo = std::min(lo, p.year); hi = std::max(hi, p.year); }
    }
    return any ? hi - lo : 0;
}

} // namespace expertrank
