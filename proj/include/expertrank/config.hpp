#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "expertrank/errors.hpp"
#include "expertrank/features.hpp"
#include "expertrank/l2r.hpp"

namespace expertrank {

// One flat key/value record drives every subcommand; command-line flags
// override file values after loading.
struct run_config {
    std::string publications;
    std::string authors;
    std::string judgments;
    std::string snapshot;
    std::string features_file;
    std::string model_file;
    std::string report_file;

    std::string groups = "text,profile,graph";

    double bm25_k1 = 1.2;
    double bm25_b = 0.75;

    double gamma = 4.0;
    double delta = 1.0;
    int current_year = 0; // 0 = newest publication year in the corpus

    double pagerank_damping = 0.5;
    double pagerank_tol = 1e-9;
    int pagerank_max_iter = 200;

    std::string trainer = "pairwise";
    std::string c_grid = "0.01,0.1,1,10";
    double c_param = 1.0;
    int folds = 4;
    std::uint64_t seed = 42;

    int max_iterations = 2000;
    double epsilon = 1e-3;
    int max_cutting_planes = 200;

    int top_k = 10;
};

namespace detail {
inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

template <typename T>
inline T parse_number(const std::string& v, std::size_t line_no, const std::string& key) {
    T out{};
    auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
        throw parse_error("bad value '" + v + "' for key " + key, line_no);
    return out;
}
} // namespace detail

// `key = value` lines; '#' starts a comment; unknown keys are rejected so a
// typo cannot silently fall back to a default.
inline run_config load_config(std::istream& is, run_config cfg = {}) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        const std::string t = detail::trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw parse_error("expected key = value, got '" + t + "'", line_no);
        const std::string key = detail::trim(t.substr(0, eq));
        const std::string val = detail::trim(t.substr(eq + 1));
        if (key.empty()) throw parse_error("empty key", line_no);

        if (key == "publications") cfg.publications = val;
        else if (key == "authors") cfg.authors = val;
        else if (key == "judgments") cfg.judgments = val;
        else if (key == "snapshot") cfg.snapshot = val;
        else if (key == "features_file") cfg.features_file = val;
        else if (key == "model_file") cfg.model_file = val;
        else if (key == "report_file") cfg.report_file = val;
        else if (key == "groups") cfg.groups = val;
        else if (key == "bm25_k1") cfg.bm25_k1 = detail::parse_number<double>(val, line_no, key);
        else if (key == "bm25_b") cfg.bm25_b = detail::parse_number<double>(val, line_no, key);
        else if (key == "gamma") cfg.gamma = detail::parse_number<double>(val, line_no, key);
        else if (key == "delta") cfg.delta = detail::parse_number<double>(val, line_no, key);
        else if (key == "current_year") cfg.current_year = detail::parse_number<int>(val, line_no, key);
        else if (key == "pagerank_damping") cfg.pagerank_damping = detail::parse_number<double>(val, line_no, key);
        else if (key == "pagerank_tol") cfg.pagerank_tol = detail::parse_number<double>(val, line_no, key);
        else if (key == "pagerank_max_iter") cfg.pagerank_max_iter = detail::parse_number<int>(val, line_no, key);
        else if (key == "trainer") cfg.trainer = val;
        else if (key == "c_grid") cfg.c_grid = val;
        else if (key == "c_param") cfg.c_param = detail::parse_number<double>(val, line_no, key);
        else if (key == "folds") cfg.folds = detail::parse_number<int>(val, line_no, key);
        else if (key == "seed") cfg.seed = detail::parse_number<std::uint64_t>(val, line_no, key);
        else if (key == "max_iterations") cfg.max_iterations = detail::parse_number<int>(val, line_no, key);
        else if (key == "epsilon") cfg.epsilon = detail::parse_number<double>(val, line_no, key);
        else if (key == "max_cutting_planes") cfg.max_cutting_planes = detail::parse_number<int>(val, line_no, key);
        else if (key == "top_k") cfg.top_k = detail::parse_number<int>(val, line_no, key);
        else throw parse_error("unknown config key '" + key + "'", line_no);
    }
    return cfg;
}

inline run_config load_config(const std::string& path, run_config cfg = {}) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw error("cannot open " + path);
    return load_config(is, cfg);
}

inline feature_mask parse_mask(const std::string& groups) {
    feature_mask m{false, false, false};
    std::stringstream ss(groups);
    std::string part;
    while (std::getline(ss, part, ',')) {
        const std::string g = detail::trim(part);
        if (g.empty()) continue;
        if (g == "text") m.text = true;
        else if (g == "profile") m.profile = true;
        else if (g == "graph") m.graph = true;
        else throw validation_error("unknown feature group '" + g + "'");
    }
    if (!m.any()) throw validation_error("feature group mask is empty");
    return m;
}

inline std::vector<double> parse_c_grid(const std::string& grid) {
    std::vector<double> out;
    std::stringstream ss(grid);
    std::string part;
    while (std::getline(ss, part, ',')) {
        const std::string v = detail::trim(part);
        if (v.empty()) continue;
        double c = 0.0;
        auto res = std::from_chars(v.data(), v.data() + v.size(), c);
        if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
            throw validation_error("bad C grid value '" + v + "'");
        if (c <= 0.0) throw validation_error("C grid values must be positive");
        out.push_back(c);
    }
    if (out.empty()) throw validation_error("empty C grid");
    return out;
}

} // namespace expertrank
