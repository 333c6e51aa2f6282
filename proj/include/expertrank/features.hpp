#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "expertrank/corpus.hpp"
#include "expertrank/errors.hpp"
#include "expertrank/graph.hpp"
#include "expertrank/metrics.hpp"
#include "expertrank/rng.hpp"
#include "expertrank/text.hpp"

namespace expertrank {

// ---- feature table --------------------------------------------------------
// The slot order is frozen; exchange files index it 1-based. docs/features.md
// and docs/features.tsv mirror this table and a test keeps them in sync.

enum class feature_group { text, profile, graph };

struct feature_info {
    const char* name;
    feature_group group;
};

inline constexpr std::size_t feature_count = 35;

inline constexpr std::array<feature_info, feature_count> feature_table{{
    {"title_bm25", feature_group::text},            // 1
    {"title_tf", feature_group::text},              // 2
    {"title_idf", feature_group::text},             // 3
    {"title_length", feature_group::text},          // 4
    {"abstract_bm25", feature_group::text},         // 5
    {"abstract_tf", feature_group::text},           // 6
    {"abstract_idf", feature_group::text},          // 7
    {"abstract_length", feature_group::text},       // 8
    {"matching_author_count", feature_group::text}, // 9
    {"matching_year_span", feature_group::text},    // 10
    {"career_years", feature_group::profile},       // 11
    {"conference_pubs_per_year", feature_group::profile}, // 12
    {"journal_pubs_per_year", feature_group::profile},    // 13
    {"conference_with_topic", feature_group::profile},    // 14
    {"conference_without_topic", feature_group::profile}, // 15
    {"journal_with_topic", feature_group::profile},       // 16
    {"journal_without_topic", feature_group::profile},    // 17
    {"citations_matching_total", feature_group::graph},   // 18
    {"citations_matching_avg", feature_group::graph},     // 19
    {"citations_matching_max", feature_group::graph},     // 20
    {"citations_per_year", feature_group::graph},         // 21
    {"collaborators", feature_group::graph},              // 22
    {"h_index", feature_group::graph},                    // 23
    {"h_index_institution", feature_group::graph},        // 24
    {"hb_index", feature_group::graph},                   // 25
    {"contemporary_h_index", feature_group::graph},       // 26
    {"trend_h_index", feature_group::graph},              // 27
    {"individual_h_index", feature_group::graph},         // 28
    {"a_index", feature_group::graph},                    // 29
    {"a_index_institution", feature_group::graph},        // 30
    {"g_index", feature_group::graph},                    // 31
    {"g_index_institution", feature_group::graph},        // 32
    {"e_index", feature_group::graph},                    // 33
    {"pagerank_sum", feature_group::graph},               // 34
    {"pagerank_avg", feature_group::graph},               // 35
}};

struct feature_mask {
    bool text = true;
    bool profile = true;
    bool graph = true;

    bool enabled(feature_group g) const {
        switch (g) {
        case feature_group::text: return text;
        case feature_group::profile: return profile;
        case feature_group::graph: return graph;
        }
        return false;
    }
    bool any() const { return text || profile || graph; }
};

struct feature_vector {
    std::string query_id;
    std::string author_id;
    std::array<double, feature_count> values{};
    std::optional<int> label; // binary relevance when judged
};

struct judgment {
    std::string query_id;
    std::string author_id;
    int relevance = 0;
};

// Vectors of all judged authors for one query. Pools read back from exchange
// files carry only the query id; the query text lives in the judgments file.
struct query_pool {
    std::string query_id;
    std::vector<feature_vector> vectors;
};

// ---- extraction context ---------------------------------------------------
// Owns every corpus-level precomputation the extractor needs, plus memo maps
// for the query-independent slots. Build once per corpus, reuse across all
// (query, author) pairs.
class feature_context {
public:
    feature_context(const corpus& c, bm25_params bp, index_params ip, pagerank_params pp)
        : corp_(c), bm25_(bp), idx_(ip),
          title_stats_(c, stream_kind::title),
          abstract_stats_(c, stream_kind::abstract) {
        if (idx_.current_year == 0)
            idx_.current_year = c.compute_stats().current_year;
        pagerank_ = pagerank(build_citation_graph(c), pp);
    }

    explicit feature_context(const corpus& c)
        : feature_context(c, bm25_params{}, index_params{}, pagerank_params{}) {}

    const corpus& corp() const { return corp_; }
    const term_stats& title_stats() const { return title_stats_; }
    const term_stats& abstract_stats() const { return abstract_stats_; }
    const pagerank_result& pagerank_scores() const { return pagerank_; }
    const bm25_params& bm25() const { return bm25_; }
    const index_params& index_parameters() const { return idx_; }

    struct author_cache {
        double career_years = 0;
        double conf_total = 0, journal_total = 0;
        double conf_per_year = 0, journal_per_year = 0;
        double cit_per_year = 0;
        double collaborators = 0;
        double h = 0, inst_h = 0;
        double contemporary = 0, trend = 0, individual = 0;
        double a = 0, inst_a = 0;
        double g = 0, inst_g = 0;
        double e = 0;
        double pr_sum = 0, pr_avg = 0;
    };

    struct query_cache {
        double matching_authors = 0;
        double hb = 0;
        double title_idf = 0;
        double abstract_idf = 0;
    };

    const author_cache& for_author(const std::string& author_id) {
        auto it = authors_.find(author_id);
        if (it != authors_.end()) return it->second;
        author_cache a;
        const std::size_t ai = corp_.author_index(author_id);

        a.career_years = static_cast<double>(career_span_raw(author_id, corp_));
        const double span = static_cast<double>(career_span_years(author_id, corp_));
        for (auto pi : corp_.author_pub_indices(ai)) {
            if (corp_.pub_at(pi).venue == venue_kind::conference) a.conf_total += 1;
            else a.journal_total += 1;
        }
        a.conf_per_year = a.conf_total / span;
        a.journal_per_year = a.journal_total / span;

        long long total_cites = 0;
        for (auto pi : corp_.author_pub_indices(ai))
            total_cites += static_cast<long long>(corp_.citation_count(pi));
        a.cit_per_year = static_cast<double>(total_cites) / span;

        std::unordered_set<std::string_view> collab;
        for (auto pi : corp_.author_pub_indices(ai))
            for (const auto& co : corp_.pub_at(pi).author_ids)
                if (co != author_id) collab.insert(co);
        a.collaborators = static_cast<double>(collab.size());

        a.h = author_h_index(author_id, corp_);
        a.contemporary = contemporary_h_index(author_id, idx_, corp_);
        a.trend = trend_h_index(author_id, idx_, corp_);
        a.individual = author_individual_h_index(author_id, corp_);
        a.a = author_a_index(author_id, corp_);
        a.g = author_g_index(author_id, corp_);
        a.e = author_e_index(author_id, corp_);

        const auto& inst = institution_metrics(corp_.author_at(ai).institution);
        a.inst_h = inst.h;
        a.inst_a = inst.a;
        a.inst_g = inst.g;

        a.pr_sum = author_pagerank_sum(author_id, pagerank_.scores, corp_);
        a.pr_avg = author_pagerank_avg(author_id, pagerank_.scores, corp_);

        return authors_.emplace(author_id, a).first->second;
    }

    const query_cache& for_query(const query& q) {
        auto it = queries_.find(q.id);
        if (it != queries_.end()) return it->second;
        query_cache qc;
        qc.matching_authors = static_cast<double>(matching_author_count(q, corp_));
        qc.hb = static_cast<double>(hb_index(q, corp_));
        qc.title_idf = title_stats_.doc_count() > 0
            ? inverse_document_frequency(q, title_stats_) : 0.0;
        qc.abstract_idf = abstract_stats_.doc_count() > 0
            ? inverse_document_frequency(q, abstract_stats_) : 0.0;
        return queries_.emplace(q.id, qc).first->second;
    }

private:
    struct inst_cache {
        double h = 0, a = 0, g = 0;
    };

    const inst_cache& institution_metrics(const std::string& inst) {
        auto it = institutions_.find(inst);
        if (it != institutions_.end()) return it->second;
        inst_cache ic;
        if (!inst.empty()) {
            const auto counts = institution_citation_counts(inst, corp_);
            ic.h = h_index(counts);
            ic.a = a_index(counts);
            ic.g = g_index(counts);
        }
        return institutions_.emplace(inst, ic).first->second;
    }

    const corpus& corp_;
    bm25_params bm25_;
    index_params idx_;
    term_stats title_stats_;
    term_stats abstract_stats_;
    pagerank_result pagerank_;
    std::unordered_map<std::string, author_cache> authors_;
    std::unordered_map<std::string, query_cache> queries_;
    std::unordered_map<std::string, inst_cache> institutions_;
};

// Fills every slot; masked-out groups are zeroed but keep their positions so
// the vector width never varies.
inline feature_vector extract_features(const query& q, const std::string& author_id,
                                       feature_context& ctx,
                                       const feature_mask& mask = {}) {
    const corpus& c = ctx.corp();
    feature_vector fv;
    fv.query_id = q.id;
    fv.author_id = author_id;
    auto& v = fv.values;

    const auto& qc = ctx.for_query(q);
    const auto& ac = ctx.for_author(author_id);

    v[0] = bm25_author(q, author_id, stream_kind::title, c, ctx.title_stats(), ctx.bm25());
    v[1] = term_frequency(q, author_id, stream_kind::title, c);
    v[2] = qc.title_idf;
    v[3] = static_cast<double>(author_stream_length(author_id, stream_kind::title, c));
    v[4] = bm25_author(q, author_id, stream_kind::abstract, c, ctx.abstract_stats(),
                       ctx.bm25());
    v[5] = term_frequency(q, author_id, stream_kind::abstract, c);
    v[6] = qc.abstract_idf;
    v[7] = static_cast<double>(author_stream_length(author_id, stream_kind::abstract, c));
    v[8] = qc.matching_authors;
    v[9] = static_cast<double>(matching_year_span(q, author_id, c));

    double conf_match = 0, journal_match = 0;
    for (auto pi : c.author_pub_indices(c.author_index(author_id))) {
        const auto& p = c.pub_at(pi);
        if (!document_matches(q, p)) continue;
        if (p.venue == venue_kind::conference) conf_match += 1;
        else journal_match += 1;
    }
    v[10] = ac.career_years;
    v[11] = ac.conf_per_year;
    v[12] = ac.journal_per_year;
    v[13] = conf_match;
    v[14] = ac.conf_total - conf_match;
    v[15] = journal_match;
    v[16] = ac.journal_total - journal_match;

    const auto cs = citation_stats(author_id, q, c);
    v[17] = cs.total_matching;
    v[18] = cs.avg_matching;
    v[19] = cs.max_matching;
    v[20] = ac.cit_per_year;
    v[21] = ac.collaborators;
    v[22] = ac.h;
    v[23] = ac.inst_h;
    v[24] = qc.hb;
    v[25] = ac.contemporary;
    v[26] = ac.trend;
    v[27] = ac.individual;
    v[28] = ac.a;
    v[29] = ac.inst_a;
    v[30] = ac.g;
    v[31] = ac.inst_g;
    v[32] = ac.e;
    v[33] = ac.pr_sum;
    v[34] = ac.pr_avg;

    for (std::size_t i = 0; i < feature_count; ++i)
        if (!mask.enabled(feature_table[i].group)) v[i] = 0.0;
    return fv;
}

// ---- negative sampling ----------------------------------------------------
// Half the negatives are the strongest non-relevant candidates by summed
// title + abstract BM25; the other half is a uniform seeded draw from what
// remains. The two halves never overlap and never touch the relevant set.
inline std::vector<std::string> sample_negatives(const query& q,
                                                 const std::vector<std::string>& relevant,
                                                 feature_context& ctx,
                                                 std::uint64_t seed) {
    const std::size_t n = relevant.size();
    if (n < 2)
        throw validation_error("negative sampling needs at least two relevant authors "
                               "for query " + q.id);
    const std::unordered_set<std::string> rel(relevant.begin(), relevant.end());

    const corpus& c = ctx.corp();
    std::vector<std::string> candidates;
    for (std::size_t ai = 0; ai < c.num_authors(); ++ai) {
        const auto& id = c.author_at(ai).id;
        if (!rel.count(id)) candidates.push_back(id);
    }
    if (candidates.size() < n)
        throw validation_error("corpus has too few non-relevant authors for query " +
                               q.id);
    std::sort(candidates.begin(), candidates.end());

    const std::size_t n_top = n / 2;
    const std::size_t n_rand = n - n_top;

    std::vector<std::pair<double, std::string>> scored;
    scored.reserve(candidates.size());
    for (const auto& id : candidates) {
        const double s =
            bm25_author(q, id, stream_kind::title, c, ctx.title_stats(), ctx.bm25()) +
            bm25_author(q, id, stream_kind::abstract, c, ctx.abstract_stats(), ctx.bm25());
        scored.emplace_back(s, id);
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });

    std::vector<std::string> out;
    std::unordered_set<std::string> taken;
    for (std::size_t i = 0; i < n_top; ++i) {
        out.push_back(scored[i].second);
        taken.insert(scored[i].second);
    }

    std::vector<std::string> rest;
    for (const auto& id : candidates)
        if (!taken.count(id)) rest.push_back(id);

    rng gen(mix_seed(seed, q.id));
    for (std::size_t i = 0; i < n_rand; ++i) {
        const std::size_t pick = gen.below(rest.size() - i);
        std::swap(rest[pick], rest[rest.size() - 1 - i]);
        out.push_back(rest[rest.size() - 1 - i]);
    }
    return out;
}

// ---- normalization --------------------------------------------------------
// Per-query, per-feature min-max to [0,1]. A constant column carries no
// ranking signal, so it collapses to zero whatever its value.
inline query_pool normalize_pool(const query_pool& pool) {
    if (pool.vectors.empty())
        throw validation_error("cannot normalize an empty pool for query " +
                               pool.query_id);
    query_pool out = pool;
    for (std::size_t f = 0; f < feature_count; ++f) {
        double lo = pool.vectors.front().values[f];
        double hi = lo;
        for (const auto& fv : pool.vectors) {
            lo = std::min(lo, fv.values[f]);
            hi = std::max(hi, fv.values[f]);
        }
        for (auto& fv : out.vectors)
            fv.values[f] = hi > lo ? (fv.values[f] - lo) / (hi - lo) : 0.0;
    }
    return out;
}

// ---- exchange format ------------------------------------------------------
// One vector per line: `<label> qid:<id> 1:<v> ... K:<v> # <author>`.
// Values print in shortest round-trip decimal form, so write→read is exact.

namespace detail {
inline std::string format_double(double v) {
    std::array<char, 64> buf;
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

inline double parse_double(std::string_view sv, std::size_t line_no,
                           const std::string& what) {
    double v = 0.0;
    auto res = std::from_chars(sv.data(), sv.data() + sv.size(), v);
    if (res.ec != std::errc{} || res.ptr != sv.data() + sv.size())
        throw parse_error("bad " + what + " value '" + std::string(sv) + "'", line_no);
    if (!std::isfinite(v))
        throw parse_error(what + " value not finite", line_no);
    return v;
}
} // namespace detail

inline void write_vectors(const std::vector<query_pool>& pools, std::ostream& os) {
    for (const auto& pool : pools) {
        for (const auto& fv : pool.vectors) {
            if (!fv.label)
                throw validation_error("unlabeled vector for author " + fv.author_id +
                                       " in query " + pool.query_id);
            os << *fv.label << " qid:" << pool.query_id;
            for (std::size_t i = 0; i < feature_count; ++i)
                os << ' ' << (i + 1) << ':' << detail::format_double(fv.values[i]);
            os << " # " << fv.author_id << '\n';
        }
    }
}

inline void write_vectors(const std::vector<query_pool>& pools,
                          const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw error("cannot open " + path + " for writing");
    write_vectors(pools, os);
    if (!os) throw error("failed writing " + path);
}

inline std::vector<query_pool> read_vectors(std::istream& is) {
    std::vector<query_pool> pools;
    std::unordered_map<std::string, std::size_t> pool_of;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string tok;

        if (!(ls >> tok)) throw parse_error("missing label", line_no);
        if (tok != "0" && tok != "1")
            throw parse_error("label must be 0 or 1, got '" + tok + "'", line_no);
        feature_vector fv;
        fv.label = tok == "1" ? 1 : 0;

        if (!(ls >> tok) || tok.rfind("qid:", 0) != 0 || tok.size() == 4)
            throw parse_error("expected qid:<id>", line_no);
        fv.query_id = tok.substr(4);

        for (std::size_t want = 1; want <= feature_count; ++want) {
            if (!(ls >> tok))
                throw parse_error("expected feature " + std::to_string(want) +
                                               ", line ends early", line_no);
            const auto colon = tok.find(':');
            if (colon == std::string::npos)
                throw parse_error("expected index:value, got '" + tok + "'", line_no);
            std::size_t idx = 0;
            const std::string_view idx_sv(tok.data(), colon);
            auto res = std::from_chars(idx_sv.data(), idx_sv.data() + idx_sv.size(), idx);
            if (res.ec != std::errc{} || res.ptr != idx_sv.data() + idx_sv.size())
                throw parse_error("bad feature index '" + std::string(idx_sv) +
                                               "'", line_no);
            if (idx != want)
                throw parse_error("feature indices must be dense from 1; "
                                           "expected " + std::to_string(want) +
                                           ", got " + std::to_string(idx), line_no);
            fv.values[want - 1] = detail::parse_double(
                std::string_view(tok).substr(colon + 1), line_no, "feature");
        }

        if (!(ls >> tok) || tok != "#")
            throw parse_error("expected '# <author>' after features", line_no);
        std::string author;
        std::getline(ls, author);
        const auto start = author.find_first_not_of(' ');
        if (start == std::string::npos)
            throw parse_error("missing author id after '#'", line_no);
        fv.author_id = author.substr(start);

        auto it = pool_of.find(fv.query_id);
        if (it == pool_of.end()) {
            it = pool_of.emplace(fv.query_id, pools.size()).first;
            pools.push_back({fv.query_id, {}});
        }
        pools[it->second].vectors.push_back(std::move(fv));
    }
    return pools;
}

inline std::vector<query_pool> read_vectors(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw error("cannot open " + path);
    return read_vectors(is);
}

// ---- judgments ------------------------------------------------------------
// TAB-separated: query_id, query text, author_id, relevance (0/1). The text
// must agree across every row of the same query.

struct judgments_file {
    std::vector<query> queries; // unique, first-seen order
    std::vector<judgment> entries;
};

inline judgments_file read_judgments(std::istream& is) {
    judgments_file jf;
    std::unordered_map<std::string, std::size_t> qidx;
    std::unordered_set<std::string> seen_pairs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::size_t pos = 0;
        while (true) {
            const auto tab = line.find('\t', pos);
            f.push_back(line.substr(pos, tab == std::string::npos ? tab : tab - pos));
            if (tab == std::string::npos) break;
            pos = tab + 1;
        }
        if (f.size() != 4)
            throw parse_error("expected 4 tab-separated fields, got " +
                                           std::to_string(f.size()), line_no);
        if (f[0].empty()) throw parse_error("empty query id", line_no);
        if (f[2].empty()) throw parse_error("empty author id", line_no);
        if (f[3] != "0" && f[3] != "1")
            throw parse_error("relevance must be 0 or 1, got '" + f[3] + "'", line_no);

        auto it = qidx.find(f[0]);
        if (it == qidx.end()) {
            qidx.emplace(f[0], jf.queries.size());
            try {
                jf.queries.push_back(query::from_text(f[0], f[1]));
            } catch (const validation_error&) {
                throw parse_error("query " + f[0] + " has no usable terms", line_no);
            }
        } else if (jf.queries[it->second].terms != tokenize(f[1])) {
            throw parse_error("query " + f[0] +
                                           " has inconsistent text across rows", line_no);
        }
        const std::string key = f[0] + '\t' + f[2];
        if (!seen_pairs.insert(key).second)
            throw parse_error("duplicate judgment for query " + f[0] +
                                           ", author " + f[2], line_no);
        jf.entries.push_back({f[0], f[2], f[3] == "1" ? 1 : 0});
    }
    return jf;
}

inline judgments_file read_judgments(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw error("cannot open " + path);
    return read_judgments(is);
}

// ---- pool assembly --------------------------------------------------------
// For each query: relevant authors are the label-1 judgments. Explicit
// label-0 judgments are used as the negatives when present; otherwise the
// sampling construction above supplies them. Queries that cannot form a
// trainable pool are skipped and reported through `warnings`.
inline std::vector<query_pool> build_pools(const judgments_file& jf,
                                           feature_context& ctx, std::uint64_t seed,
                                           const feature_mask& mask,
                                           std::vector<std::string>* warnings = nullptr) {
    const auto warn = [&](const std::string& msg) {
        if (warnings) warnings->push_back(msg);
    };
    std::vector<query_pool> pools;
    for (const auto& q : jf.queries) {
        std::vector<std::string> relevant, explicit_neg;
        for (const auto& j : jf.entries) {
            if (j.query_id != q.id) continue;
            ctx.corp().author_index(j.author_id); // unknown author -> not_found
            (j.relevance == 1 ? relevant : explicit_neg).push_back(j.author_id);
        }
        if (relevant.empty()) {
            warn("query " + q.id + " skipped: no relevant authors");
            continue;
        }
        std::vector<std::string> negatives = explicit_neg;
        if (negatives.empty()) {
            if (relevant.size() < 2) {
                warn("query " + q.id + " skipped: too few relevant authors to sample "
                     "negatives");
                continue;
            }
            negatives = sample_negatives(q, relevant, ctx, seed);
        }

        query_pool pool;
        pool.query_id = q.id;
        std::vector<std::pair<std::string, int>> members;
        for (const auto& id : relevant) members.emplace_back(id, 1);
        for (const auto& id : negatives) members.emplace_back(id, 0);
        std::sort(members.begin(), members.end());
        for (const auto& [id, label] : members) {
            feature_vector fv = extract_features(q, id, ctx, mask);
            fv.label = label;
            pool.vectors.push_back(std::move(fv));
        }
        pools.push_back(normalize_pool(pool));
    }
    return pools;
}

} // namespace expertrank
