#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "expertrank/errors.hpp"
#include "expertrank/features.hpp"
#include "expertrank/l2r.hpp"
#include "expertrank/rng.hpp"

namespace expertrank {

inline constexpr std::array<std::size_t, 4> report_cutoffs{5, 10, 15, 20};

// r(k)/k with a fixed denominator: ranked lists shorter than k contribute
// their missing tail as non-relevant.
inline double precision_at_k(const std::vector<int>& labels, std::size_t k) {
    if (k == 0) throw validation_error("precision@k needs k >= 1");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < std::min(k, labels.size()); ++i)
        if (labels[i] == 1) ++hits;
    return static_cast<double>(hits) / static_cast<double>(k);
}

// Mean of the precision values at each relevant rank, over the number of
// relevant items in the judged list.
inline double average_precision(const std::vector<int>& labels) {
    std::size_t total_rel = 0;
    for (int l : labels)
        if (l == 1) ++total_rel;
    if (total_rel == 0)
        throw validation_error("average precision undefined without relevant items");
    double sum = 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != 1) continue;
        ++hits;
        sum += static_cast<double>(hits) / static_cast<double>(i + 1);
    }
    return sum / static_cast<double>(total_rel);
}

inline double mean_average_precision(const std::vector<std::vector<int>>& per_query) {
    if (per_query.empty())
        throw validation_error("mean average precision needs at least one query");
    double sum = 0.0;
    for (const auto& labels : per_query) sum += average_precision(labels);
    return sum / static_cast<double>(per_query.size());
}

// Labels of the pool in model-ranked order.
inline std::vector<int> ranked_labels(const ranking_model& m, const query_pool& pool) {
    std::vector<int> labels;
    for (const auto& e : rank(m, pool)) {
        if (!e.label)
            throw validation_error("unlabeled vector in query " + pool.query_id);
        labels.push_back(*e.label);
    }
    return labels;
}

struct eval_report {
    struct query_row {
        std::string query_id;
        int fold = 0;
        double ap = 0.0;
        std::array<double, 4> p{};
    };
    struct fold_row {
        int fold = 0;
        double chosen_c = 0.0;
        std::size_t num_queries = 0;
        double map = 0.0;
        std::array<double, 4> p{};
    };
    std::vector<query_row> per_query; // ascending query id
    std::vector<fold_row> per_fold;   // ascending fold number
    double map = 0.0;                 // mean of per-query AP over all queries
    std::array<double, 4> p{};        // mean of per-query P@k over all queries
};

struct cv_options {
    model_kind trainer = model_kind::pairwise;
    int folds = 4;
    std::vector<double> c_grid{0.01, 0.1, 1.0, 10.0};
    std::uint64_t seed = 42;
    train_options topt;
};

namespace detail {
inline eval_report::query_row evaluate_query(const ranking_model& m,
                                             const query_pool& pool) {
    eval_report::query_row row;
    row.query_id = pool.query_id;
    const auto labels = ranked_labels(m, pool);
    row.ap = average_precision(labels);
    for (std::size_t i = 0; i < report_cutoffs.size(); ++i)
        row.p[i] = precision_at_k(labels, report_cutoffs[i]);
    return row;
}

inline double train_set_map(const ranking_model& m,
                            const std::vector<query_pool>& pools) {
    double sum = 0.0;
    for (const auto& pool : pools) sum += average_precision(ranked_labels(m, pool));
    return sum / static_cast<double>(pools.size());
}
} // namespace detail

// Query-level k-fold: queries are shuffled by seed and split into contiguous
// blocks. Per fold, C is picked from the grid by MAP on the training folds
// themselves (ties prefer the smaller C), then the chosen model is scored on
// the held-out fold.
inline eval_report cross_validate(const std::vector<query_pool>& pools,
                                  const cv_options& opt) {
    if (opt.folds < 2) throw validation_error("cross-validation needs >= 2 folds");
    if (pools.size() < static_cast<std::size_t>(opt.folds))
        throw validation_error("need at least one query per fold: " +
                               std::to_string(pools.size()) + " queries, " +
                               std::to_string(opt.folds) + " folds");
    if (opt.c_grid.empty()) throw validation_error("empty C grid");
    for (double c : opt.c_grid)
        if (c <= 0.0) throw validation_error("C grid values must be positive");

    std::vector<std::size_t> order(pools.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return pools[a].query_id < pools[b].query_id;
    });
    rng gen(mix_seed(opt.seed, "folds"));
    gen.shuffle(order);

    const std::size_t q = order.size();
    const auto folds = static_cast<std::size_t>(opt.folds);
    const std::size_t base = q / folds, extra = q % folds;

    eval_report report;
    std::size_t cursor = 0;
    for (std::size_t f = 0; f < folds; ++f) {
        const std::size_t size = base + (f < extra ? 1 : 0);
        std::vector<query_pool> test_pools, train_pools;
        for (std::size_t i = 0; i < q; ++i) {
            const auto& pool = pools[order[i]];
            if (i >= cursor && i < cursor + size) test_pools.push_back(pool);
            else train_pools.push_back(pool);
        }
        cursor += size;

        double best_c = opt.c_grid.front();
        double best_map = -1.0;
        ranking_model best_model;
        for (double c : opt.c_grid) {
            auto m = train(opt.trainer, train_pools, c, opt.topt);
            const double train_map = detail::train_set_map(m, train_pools);
            if (train_map > best_map) {
                best_map = train_map;
                best_c = c;
                best_model = std::move(m);
            }
        }

        eval_report::fold_row frow;
        frow.fold = static_cast<int>(f);
        frow.chosen_c = best_c;
        frow.num_queries = test_pools.size();
        for (const auto& pool : test_pools) {
            auto row = detail::evaluate_query(best_model, pool);
            row.fold = static_cast<int>(f);
            frow.map += row.ap;
            for (std::size_t i = 0; i < row.p.size(); ++i) frow.p[i] += row.p[i];
            report.per_query.push_back(std::move(row));
        }
        frow.map /= static_cast<double>(frow.num_queries);
        for (auto& v : frow.p) v /= static_cast<double>(frow.num_queries);
        report.per_fold.push_back(frow);
    }

    for (const auto& row : report.per_query) {
        report.map += row.ap;
        for (std::size_t i = 0; i < row.p.size(); ++i) report.p[i] += row.p[i];
    }
    report.map /= static_cast<double>(report.per_query.size());
    for (auto& v : report.p) v /= static_cast<double>(report.per_query.size());

    std::sort(report.per_query.begin(), report.per_query.end(),
              [](const auto& a, const auto& b) { return a.query_id < b.query_id; });
    return report;
}

// TAB-separated: one Q row per query, one F row per fold, one ALL summary.
// Column heads are P@5 P@10 P@15 P@20 plus AP/MAP.
inline void write_report(const eval_report& r, std::ostream& os) {
    os << "#Q\tquery\tfold\tAP\tP@5\tP@10\tP@15\tP@20\n";
    for (const auto& row : r.per_query) {
        os << "Q\t" << row.query_id << '\t' << row.fold << '\t'
           << detail::format_double(row.ap);
        for (double v : row.p) os << '\t' << detail::format_double(v);
        os << '\n';
    }
    os << "#F\tfold\tC\tqueries\tMAP\tP@5\tP@10\tP@15\tP@20\n";
    for (const auto& row : r.per_fold) {
        os << "F\t" << row.fold << '\t' << detail::format_double(row.chosen_c) << '\t'
           << row.num_queries << '\t' << detail::format_double(row.map);
        for (double v : row.p) os << '\t' << detail::format_double(v);
        os << '\n';
    }
    os << "#ALL\tMAP\tP@5\tP@10\tP@15\tP@20\n";
    os << "ALL\t" << detail::format_double(r.map);
    for (double v : r.p) os << '\t' << detail::format_double(v);
    os << '\n';
}

inline void write_report(const eval_report& r, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw error("cannot open " + path + " for writing");
    write_report(r, os);
    if (!os) throw error("failed writing " + path);
}

} // namespace expertrank
