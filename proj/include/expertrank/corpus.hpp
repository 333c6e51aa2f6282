#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "expertrank/errors.hpp"
#include "expertrank/tokenize.hpp"

namespace expertrank {

enum class venue_kind : std::uint8_t { conference, journal };

// One paper. Token lists are derived from title/abstract at load time and
// are not part of the persisted state.
struct publication {
    std::string id;
    int year = 0;
    venue_kind venue = venue_kind::conference;
    std::string venue_name;
    std::vector<std::string> author_ids;   // ordered as given
    std::vector<std::string> cited_ids;    // cleaned: resolvable, no self refs, no dups
    std::string title;
    std::string abstract;                  // empty when the source had none

    std::vector<std::string> title_tokens;
    std::vector<std::string> abstract_tokens;

    const std::vector<std::string>& tokens(stream_kind s) const {
        return s == stream_kind::title ? title_tokens : abstract_tokens;
    }
};

struct author {
    std::string id;
    std::string name;
    std::string institution;               // empty = unknown
    std::vector<std::string> publication_ids; // sorted ascending
};

struct corpus_stats {
    std::size_t num_publications = 0;
    std::size_t num_authors = 0;
    std::size_t num_citation_links = 0;
    std::size_t num_with_abstract = 0;
    std::size_t num_conference = 0;
    std::size_t num_journal = 0;
    std::size_t num_dropped_citations = 0;
    double avg_doc_length_title = 0.0;
    double avg_doc_length_abstract = 0.0;
    int current_year = 0;
};

// Immutable after load; safe for unrestricted concurrent reads.
class corpus {
public:
    corpus() = default;

    // ---- construction -----------------------------------------------------

    // Loads the TAB-separated publication file and, when non-empty, the
    // author file. Authors referenced by publications but absent from the
    // author file are created with empty name/institution.
    static corpus load(const std::string& publications_path,
                       const std::string& authors_path = "");

    // Builds a corpus from in-memory records, running the same validation
    // and cleanup as load(). Author metadata may be empty.
    static corpus build(std::vector<publication> pubs, std::vector<author> meta = {});

    // ---- lookups ----------------------------------------------------------

    std::size_t num_publications() const { return pubs_.size(); }
    std::size_t num_authors() const { return authors_.size(); }
    std::size_t dropped_citations() const { return dropped_citations_; }

    const std::vector<publication>& publications() const { return pubs_; }
    const std::vector<author>& authors() const { return authors_; }

    const publication& pub_at(std::size_t idx) const { return pubs_[idx]; }
    const author& author_at(std::size_t idx) const { return authors_[idx]; }

    bool has_pub(std::string_view id) const { return pub_index_.count(std::string(id)) != 0; }
    bool has_author(std::string_view id) const { return author_index_.count(std::string(id)) != 0; }

    std::size_t pub_index(const std::string& id) const {
        auto it = pub_index_.find(id);
        if (it == pub_index_.end()) throw not_found_error("unknown publication: " + id);
        return it->second;
    }
    std::size_t author_index(const std::string& id) const {
        auto it = author_index_.find(id);
        if (it == author_index_.end()) throw not_found_error("unknown author: " + id);
        return it->second;
    }

    // Docs(a): the author's publications in ascending publication-id order.
    std::vector<const publication*> author_publications(const std::string& author_id) const {
        const author& a = authors_[author_index(author_id)];
        std::vector<const publication*> out;
        out.reserve(a.publication_ids.size());
        for (const auto& pid : a.publication_ids) out.push_back(&pubs_[pub_index_.at(pid)]);
        return out;
    }

    // Publication indices of Docs(a), ascending id order.
    const std::vector<std::uint32_t>& author_pub_indices(std::size_t author_idx) const {
        return author_pubs_[author_idx];
    }

    // Indices of publications citing pub idx (ascending).
    const std::vector<std::uint32_t>& citers_of(std::size_t pub_idx) const {
        return citers_[pub_idx];
    }
    std::size_t citation_count(std::size_t pub_idx) const { return citers_[pub_idx].size(); }

    // ---- statistics -------------------------------------------------------

    corpus_stats compute_stats(std::optional<int> current_year_override = {}) const {
        if (pubs_.empty()) throw validation_error("cannot compute stats of an empty corpus");
        corpus_stats st;
        st.num_publications = pubs_.size();
        st.num_authors = authors_.size();
        st.num_dropped_citations = dropped_citations_;
        std::size_t title_docs = 0, title_tokens = 0;
        std::size_t abs_docs = 0, abs_tokens = 0;
        int max_year = 0;
        for (const auto& p : pubs_) {
            st.num_citation_links += p.cited_ids.size();
            if (!p.abstract.empty()) ++st.num_with_abstract;
            if (p.venue == venue_kind::conference) ++st.num_conference; else ++st.num_journal;
            if (!p.title_tokens.empty()) { ++title_docs; title_tokens += p.title_tokens.size(); }
            if (!p.abstract_tokens.empty()) { ++abs_docs; abs_tokens += p.abstract_tokens.size(); }
            max_year = std::max(max_year, p.year);
        }
        // Averages are over documents that actually appear in the stream.
        if (title_docs > 0)
            st.avg_doc_length_title = static_cast<double>(title_tokens) / static_cast<double>(title_docs);
        if (abs_docs > 0)
            st.avg_doc_length_abstract = static_cast<double>(abs_tokens) / static_cast<double>(abs_docs);
        st.current_year = current_year_override.value_or(max_year);
        return st;
    }

    // ---- persistence ------------------------------------------------------

    void save_snapshot(const std::string& path) const;
    static corpus load_snapshot(const std::string& path);

private:
    void finalize();

    std::vector<publication> pubs_;
    std::vector<author> authors_;
    std::unordered_map<std::string, std::size_t> pub_index_;
    std::unordered_map<std::string, std::size_t> author_index_;
    std::vector<std::vector<std::uint32_t>> author_pubs_;
    std::vector<std::vector<std::uint32_t>> citers_;
    std::size_t dropped_citations_ = 0;
};

// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.emplace_back(s.substr(start));
            return out;
        }
        out.emplace_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

inline std::vector<std::string> split_ids(std::string_view s) {
    std::vector<std::string> out;
    for (auto& part : split(s, ';'))
        if (!part.empty()) out.push_back(std::move(part));
    return out;
}

inline int parse_year(const std::string& s, std::size_t line) {
    std::size_t pos = 0;
    int y = 0;
    try {
        y = std::stoi(s, &pos);
    } catch (const std::exception&) {
        throw parse_error("invalid year '" + s + "'", line);
    }
    if (pos != s.size()) throw parse_error("invalid year '" + s + "'", line);
    return y;
}

} // namespace detail

inline corpus corpus::load(const std::string& publications_path,
                           const std::string& authors_path) {
    std::ifstream in(publications_path);
    if (!in) throw error("cannot open publication file: " + publications_path);

    std::vector<publication> pubs;
    std::string linebuf;
    std::size_t lineno = 0;
    while (std::getline(in, linebuf)) {
        ++lineno;
        if (!linebuf.empty() && linebuf.back() == '\r') linebuf.pop_back();
        if (linebuf.empty()) continue;
        auto fields = detail::split(linebuf, '\t');
        if (fields.size() != 8)
            throw parse_error("expected 8 TAB-separated fields, got " +
                              std::to_string(fields.size()), lineno);
        publication p;
        p.id = fields[0];
        if (p.id.empty()) throw parse_error("empty publication id", lineno);
        p.year = detail::parse_year(fields[1], lineno);
        if (p.year <= 0) throw validation_error("line " + std::to_string(lineno) +
                                                ": year must be positive");
        if (fields[2] == "C") p.venue = venue_kind::conference;
        else if (fields[2] == "J") p.venue = venue_kind::journal;
        else throw parse_error("venue kind must be 'C' or 'J', got '" + fields[2] + "'", lineno);
        p.venue_name = fields[3];
        p.author_ids = detail::split_ids(fields[4]);
        if (p.author_ids.empty())
            throw validation_error("line " + std::to_string(lineno) +
                                   ": publication " + p.id + " has no authors");
        p.cited_ids = detail::split_ids(fields[5]);
        p.title = fields[6];
        p.abstract = fields[7];
        pubs.push_back(std::move(p));
    }

    std::vector<author> meta;
    if (!authors_path.empty()) {
        std::ifstream ain(authors_path);
        if (!ain) throw error("cannot open author file: " + authors_path);
        std::size_t aline = 0;
        while (std::getline(ain, linebuf)) {
            ++aline;
            if (!linebuf.empty() && linebuf.back() == '\r') linebuf.pop_back();
            if (linebuf.empty()) continue;
            auto fields = detail::split(linebuf, '\t');
            if (fields.size() != 3)
                throw parse_error("expected 3 TAB-separated fields, got " +
                                  std::to_string(fields.size()), aline);
            if (fields[0].empty()) throw parse_error("empty author id", aline);
            meta.push_back(author{fields[0], fields[1], fields[2], {}});
        }
    }
    return build(std::move(pubs), std::move(meta));
}

inline corpus corpus::build(std::vector<publication> pubs, std::vector<author> meta) {
    corpus c;
    c.pubs_ = std::move(pubs);
    for (std::size_t i = 0; i < c.pubs_.size(); ++i) {
        auto [it, inserted] = c.pub_index_.emplace(c.pubs_[i].id, i);
        if (!inserted)
            throw validation_error("duplicate publication id: " + c.pubs_[i].id);
    }
    for (auto& a : meta) {
        auto [it, inserted] = c.author_index_.emplace(a.id, c.authors_.size());
        if (!inserted) throw validation_error("duplicate author id: " + a.id);
        c.authors_.push_back(std::move(a));
    }
    c.finalize();
    return c;
}

inline void corpus::finalize() {
    // Authors implied by publications but missing from the metadata file.
    for (const auto& p : pubs_) {
        for (const auto& aid : p.author_ids) {
            if (author_index_.emplace(aid, authors_.size()).second)
                authors_.push_back(author{aid, "", "", {}});
        }
    }

    // Clean citation lists: drop dangling targets, self references, duplicates.
    dropped_citations_ = 0;
    for (auto& p : pubs_) {
        std::vector<std::string> kept;
        std::unordered_set<std::string> seen;
        for (auto& cid : p.cited_ids) {
            if (cid == p.id || pub_index_.find(cid) == pub_index_.end() || !seen.insert(cid).second) {
                ++dropped_citations_;
                continue;
            }
            kept.push_back(std::move(cid));
        }
        p.cited_ids = std::move(kept);
    }

    // Inverse maps.
    author_pubs_.assign(authors_.size(), {});
    citers_.assign(pubs_.size(), {});
    for (std::size_t pi = 0; pi < pubs_.size(); ++pi) {
        auto& p = pubs_[pi];
        std::unordered_set<std::string> seen_authors;
        for (const auto& aid : p.author_ids) {
            if (seen_authors.insert(aid).second)
                author_pubs_[author_index_.at(aid)].push_back(static_cast<std::uint32_t>(pi));
        }
        for (const auto& cid : p.cited_ids)
            citers_[pub_index_.at(cid)].push_back(static_cast<std::uint32_t>(pi));
    }

    auto by_pub_id = [this](std::uint32_t a, std::uint32_t b) {
        return pubs_[a].id < pubs_[b].id;
    };
    for (std::size_t ai = 0; ai < authors_.size(); ++ai) {
        auto& v = author_pubs_[ai];
        std::sort(v.begin(), v.end(), by_pub_id);
        authors_[ai].publication_ids.clear();
        for (auto pi : v) authors_[ai].publication_ids.push_back(pubs_[pi].id);
    }
    for (auto& v : citers_) std::sort(v.begin(), v.end(), by_pub_id);

    // Token caches.
    for (auto& p : pubs_) {
        p.title_tokens = tokenize(p.title);
        p.abstract_tokens = tokenize(p.abstract);
    }
}

// ---- snapshot -------------------------------------------------------------
//
// Internal binary format: magic, version, then length-prefixed fields in
// load order. Writing the same corpus twice produces identical bytes.

namespace detail {

inline void put_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

inline std::uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    if (!is) throw error("truncated snapshot");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

inline void put_str(std::ostream& os, const std::string& s) {
    put_u32(os, static_cast<std::uint32_t>(s.size()));
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string get_str(std::istream& is) {
    std::uint32_t n = get_u32(is);
    std::string s(n, '\0');
    is.read(s.data(), n);
    if (!is) throw error("truncated snapshot");
    return s;
}

inline void put_str_list(std::ostream& os, const std::vector<std::string>& v) {
    put_u32(os, static_cast<std::uint32_t>(v.size()));
    for (const auto& s : v) put_str(os, s);
}

inline std::vector<std::string> get_str_list(std::istream& is) {
    std::uint32_t n = get_u32(is);
    std::vector<std::string> v;
    v.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) v.push_back(get_str(is));
    return v;
}

constexpr std::uint32_t snapshot_magic = 0x45524b43; // "CKRE" little-endian
constexpr std::uint32_t snapshot_version = 1;

} // namespace detail

inline void corpus::save_snapshot(const std::string& path) const {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw error("cannot write snapshot: " + path);
    detail::put_u32(os, detail::snapshot_magic);
    detail::put_u32(os, detail::snapshot_version);
    detail::put_u32(os, static_cast<std::uint32_t>(dropped_citations_));
    detail::put_u32(os, static_cast<std::uint32_t>(pubs_.size()));
    for (const auto& p : pubs_) {
        detail::put_str(os, p.id);
        detail::put_u32(os, static_cast<std::uint32_t>(p.year));
        detail::put_u32(os, p.venue == venue_kind::conference ? 0u : 1u);
        detail::put_str(os, p.venue_name);
        detail::put_str_list(os, p.author_ids);
        detail::put_str_list(os, p.cited_ids);
        detail::put_str(os, p.title);
        detail::put_str(os, p.abstract);
    }
    // Only authors with metadata; implied authors are rebuilt on load.
    std::uint32_t with_meta = 0;
    for (const auto& a : authors_)
        if (!a.name.empty() || !a.institution.empty()) ++with_meta;
    detail::put_u32(os, with_meta);
    for (const auto& a : authors_) {
        if (a.name.empty() && a.institution.empty()) continue;
        detail::put_str(os, a.id);
        detail::put_str(os, a.name);
        detail::put_str(os, a.institution);
    }
    if (!os) throw error("write failure: " + path);
}

inline corpus corpus::load_snapshot(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw error("cannot open snapshot: " + path);
    if (detail::get_u32(is) != detail::snapshot_magic) throw error("not a corpus snapshot: " + path);
    if (detail::get_u32(is) != detail::snapshot_version) throw error("unsupported snapshot version");
    std::size_t dropped = detail::get_u32(is);
    std::uint32_t npubs = detail::get_u32(is);
    std::vector<publication> pubs;
    pubs.reserve(npubs);
    for (std::uint32_t i = 0; i < npubs; ++i) {
        publication p;
        p.id = detail::get_str(is);
        p.year = static_cast<int>(detail::get_u32(is));
        p.venue = detail::get_u32(is) == 0 ? venue_kind::conference : venue_kind::journal;
        p.venue_name = detail::get_str(is);
        p.author_ids = detail::get_str_list(is);
        p.cited_ids = detail::get_str_list(is);
        p.title = detail::get_str(is);
        p.abstract = detail::get_str(is);
        pubs.push_back(std::move(p));
    }
    std::uint32_t nauthors = detail::get_u32(is);
    std::vector<author> meta;
    meta.reserve(nauthors);
    for (std::uint32_t i = 0; i < nauthors; ++i) {
        author a;
        a.id = detail::get_str(is);
        a.name = detail::get_str(is);
        a.institution = detail::get_str(is);
        meta.push_back(std::move(a));
    }
    corpus c = build(std::move(pubs), std::move(meta));
    // Cited lists in a snapshot are already clean, so the rebuild drops
    // nothing; restore the original ingest counter.
    c.dropped_citations_ = dropped;
    return c;
}

} // namespace expertrank
