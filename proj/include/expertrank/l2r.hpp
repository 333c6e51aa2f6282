#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "expertrank/errors.hpp"
#include "expertrank/features.hpp"

namespace expertrank {

enum class model_kind { pairwise, listwise };

inline std::string_view model_kind_name(model_kind k) {
    return k == model_kind::pairwise ? "pairwise" : "listwise";
}

inline model_kind parse_model_kind(std::string_view s) {
    if (s == "pairwise") return model_kind::pairwise;
    if (s == "listwise") return model_kind::listwise;
    throw validation_error("unknown trainer kind '" + std::string(s) + "'");
}

struct training_meta {
    int iterations = 0;
    double objective = 0.0;
    bool converged = false;
    std::vector<double> objective_trace; // listwise: incumbent objective per pass
};

struct ranking_model {
    model_kind kind = model_kind::pairwise;
    double c_param = 1.0;
    std::vector<double> weights;
    training_meta meta;
};

struct train_options {
    int max_iterations = 2000;      // subgradient steps per solve
    std::size_t polish_evals = 2000; // objective-evaluation budget for refinement
    double epsilon = 1e-3;          // cutting-plane violation slack
    int max_cutting_planes = 200;
};

// ---- shared numeric core --------------------------------------------------
// Both trainers minimize 0.5*|w|^2 + C * sum over groups of
// max(0, max over the group's terms of (target - w . diff)).
// A pairwise problem uses one singleton group per document pair with
// target 1; the listwise restricted problem uses one group per query whose
// terms are the working-set constraints (target = the labeling's loss).

namespace detail {

struct hinge_term {
    double target = 0.0;
    std::vector<double> diff;
};

struct hinge_group {
    std::vector<hinge_term> terms;
};

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double hinge_objective(const std::vector<double>& w, double C,
                              const std::vector<hinge_group>& groups) {
    double obj = 0.0;
    for (double x : w) obj += x * x;
    obj *= 0.5;
    for (const auto& g : groups) {
        double worst = 0.0;
        for (const auto& t : g.terms) worst = std::max(worst, t.target - dot(w, t.diff));
        obj += C * worst;
    }
    return obj;
}

struct hinge_solution {
    std::vector<double> w;
    double objective = 0.0;
    bool refined = false; // pattern search exhausted its step schedule
};

// Deterministic projected subgradient with step 1/t, exact objective tracking
// of the best iterate and of the running average, then an axis-direction
// pattern search around the winner. Every argmax tie resolves to the first
// index, so reruns are bit-identical.
inline hinge_solution solve_hinge(std::size_t dim, double C,
                                  const std::vector<hinge_group>& groups,
                                  const std::vector<double>& w0,
                                  int iterations, std::size_t polish_budget) {
    double at_zero = 0.0;
    for (const auto& g : groups) {
        double worst = 0.0;
        for (const auto& t : g.terms) worst = std::max(worst, t.target);
        at_zero += C * worst;
    }
    const double radius = std::sqrt(2.0 * at_zero) + 1e-12;

    auto project = [&](std::vector<double>& w) {
        double norm2 = 0.0;
        for (double x : w) norm2 += x * x;
        if (norm2 > radius * radius) {
            const double scale = radius / std::sqrt(norm2);
            for (double& x : w) x *= scale;
        }
    };

    std::vector<double> w = w0;
    w.resize(dim, 0.0);
    project(w);

    std::vector<double> best_w = w;
    double best_obj = hinge_objective(w, C, groups);
    std::vector<double> avg(dim, 0.0);
    std::vector<double> grad(dim);

    for (int t = 1; t <= iterations; ++t) {
        grad.assign(w.begin(), w.end());
        for (const auto& g : groups) {
            const hinge_term* active = nullptr;
            double worst = 0.0;
            for (const auto& term : g.terms) {
                const double v = term.target - dot(w, term.diff);
                if (v > worst) { worst = v; active = &term; }
            }
            if (active)
                for (std::size_t i = 0; i < dim; ++i)
                    grad[i] -= C * active->diff[i];
        }
        const double eta = 1.0 / static_cast<double>(t);
        for (std::size_t i = 0; i < dim; ++i) w[i] -= eta * grad[i];
        project(w);

        const double obj = hinge_objective(w, C, groups);
        if (obj < best_obj) { best_obj = obj; best_w = w; }
        for (std::size_t i = 0; i < dim; ++i) avg[i] += w[i];
    }

    if (iterations > 0) {
        for (double& x : avg) x /= static_cast<double>(iterations);
        const double avg_obj = hinge_objective(avg, C, groups);
        if (avg_obj < best_obj) { best_obj = avg_obj; best_w = avg; }
    }

    // Local refinement. Axis moves alone can stall on a hinge kink, so a
    // sweep that finds nothing retries with paired-coordinate diagonals
    // before halving the step.
    hinge_solution sol;
    double step = 0.25;
    std::size_t evals = 0;
    std::vector<double> trial = best_w;
    const auto probe = [&](std::size_t i, double di, std::size_t j, double dj) {
        trial = best_w;
        trial[i] += di * step;
        trial[j] += dj * step;
        const double obj = hinge_objective(trial, C, groups);
        ++evals;
        if (obj < best_obj) {
            best_obj = obj;
            best_w = trial;
            return true;
        }
        return false;
    };
    while (step >= 1e-7 && evals < polish_budget) {
        bool improved = false;
        for (std::size_t i = 0; i < dim && evals < polish_budget; ++i)
            for (double sign : {1.0, -1.0}) {
                if (evals >= polish_budget) break;
                improved |= probe(i, sign, i, 0.0);
            }
        if (!improved) {
            for (std::size_t i = 0; i + 1 < dim && !improved; ++i)
                for (std::size_t j = i + 1; j < dim && !improved; ++j)
                    for (double si : {1.0, -1.0})
                        for (double sj : {1.0, -1.0}) {
                            if (evals >= polish_budget || improved) break;
                            improved = probe(i, si, j, sj);
                        }
        }
        if (!improved) step *= 0.5;
    }
    sol.refined = step < 1e-7;
    sol.w = std::move(best_w);
    sol.objective = best_obj;
    return sol;
}

inline void check_trainable(const std::vector<query_pool>& pools, double C) {
    if (C <= 0.0) throw validation_error("C must be positive");
    if (pools.empty()) throw validation_error("no pools to train on");
    for (const auto& pool : pools) {
        std::size_t pos = 0, neg = 0;
        for (const auto& fv : pool.vectors) {
            if (!fv.label)
                throw validation_error("unlabeled vector in query " + pool.query_id);
            (*fv.label == 1 ? pos : neg) += 1;
        }
        if (pos == 0 || neg == 0)
            throw validation_error("query " + pool.query_id +
                                   " needs at least one relevant and one "
                                   "non-relevant vector");
    }
}

} // namespace detail

// ---- pairwise trainer -----------------------------------------------------
// Minimizes 0.5*|w|^2 + C * sum of hinge(1 - w.(x_u - x_v)) over all
// within-query pairs with label(u) > label(v).
inline ranking_model train_pairwise(const std::vector<query_pool>& pools, double C,
                                    const train_options& opt = {}) {
    detail::check_trainable(pools, C);
    std::vector<detail::hinge_group> groups;
    for (const auto& pool : pools) {
        for (const auto& u : pool.vectors) {
            if (*u.label != 1) continue;
            for (const auto& v : pool.vectors) {
                if (*v.label != 0) continue;
                detail::hinge_term t;
                t.target = 1.0;
                t.diff.resize(feature_count);
                for (std::size_t i = 0; i < feature_count; ++i)
                    t.diff[i] = u.values[i] - v.values[i];
                groups.push_back({{std::move(t)}});
            }
        }
    }
    if (groups.empty()) throw validation_error("no ranking pairs in the pools");

    auto sol = detail::solve_hinge(feature_count, C, groups,
                                   std::vector<double>(feature_count, 0.0),
                                   opt.max_iterations, opt.polish_evals);
    ranking_model m;
    m.kind = model_kind::pairwise;
    m.c_param = C;
    m.weights = std::move(sol.w);
    m.meta.iterations = opt.max_iterations;
    m.meta.objective = sol.objective;
    m.meta.converged = sol.refined;
    return m;
}

// ---- most-violated constraint ---------------------------------------------
// Candidate labelings are described by counts c_k = number of non-relevant
// items ranked above the k-th relevant item (both sides ordered by
// descending score, ties by ascending author id). Counts are monotone
// non-decreasing for any total order, AP depends on counts alone, and for
// fixed counts the score-sorted interleaving maximizes the model term, so a
// dynamic program over (k, c) finds the exact maximizer.

struct most_violated_result {
    std::vector<int> counts;            // c_k per score-ranked relevant item
    double loss = 0.0;                  // 1 - AP of the labeling
    double violation = 0.0;             // loss + w . psi(candidate)
    double margin_violation = 0.0;      // loss - w . delta_psi
    std::vector<double> delta_psi;      // psi(truth) - psi(candidate)
};

inline most_violated_result find_most_violated(const query_pool& pool,
                                               const std::vector<double>& w) {
    struct item {
        const feature_vector* fv;
        double score;
    };
    std::vector<item> rel, non;
    for (const auto& fv : pool.vectors) {
        if (!fv.label)
            throw validation_error("unlabeled vector in query " + pool.query_id);
        double s = 0.0;
        for (std::size_t i = 0; i < feature_count; ++i) s += w[i] * fv.values[i];
        (*fv.label == 1 ? rel : non).push_back({&fv, s});
    }
    const std::size_t m = rel.size(), n = non.size();
    if (m == 0 || n == 0)
        throw validation_error("query " + pool.query_id +
                               " needs both relevant and non-relevant vectors");
    auto by_score = [](const item& a, const item& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.fv->author_id < b.fv->author_id;
    };
    std::sort(rel.begin(), rel.end(), by_score);
    std::sort(non.begin(), non.end(), by_score);

    std::vector<double> b_prefix(n + 1, 0.0); // top-c non-relevant score sums
    for (std::size_t j = 0; j < n; ++j) b_prefix[j + 1] = b_prefix[j] + non[j].score;
    const double s_n = b_prefix[n];
    const double mn = static_cast<double>(m) * static_cast<double>(n);

    // Per-item value of choosing count c for relevant item k (1-based):
    // -(1/m) * k/(k+c) + (1/(mn)) * ((n-2c)*a_k - s_n + 2*B_c).
    auto cell = [&](std::size_t k, std::size_t c) {
        const double a_k = rel[k - 1].score;
        const double ap_part = -static_cast<double>(k) /
                               (static_cast<double>(k + c) * static_cast<double>(m));
        const double psi_part =
            ((static_cast<double>(n) - 2.0 * static_cast<double>(c)) * a_k - s_n +
             2.0 * b_prefix[c]) / mn;
        return ap_part + psi_part;
    };

    // best[k][c]: max total over items 1..k with c_k == c; prefix max keeps
    // the c_1 <= ... <= c_m constraint.
    std::vector<std::vector<double>> best(m + 1, std::vector<double>(n + 1, 0.0));
    for (std::size_t k = 1; k <= m; ++k) {
        double run = -1e300;
        for (std::size_t c = 0; c <= n; ++c) {
            run = std::max(run, best[k - 1][c]);
            best[k][c] = cell(k, c) + run;
        }
    }

    most_violated_result out;
    out.counts.assign(m, 0);
    std::size_t limit = n;
    {
        std::size_t arg = 0;
        for (std::size_t c = 1; c <= n; ++c)
            if (best[m][c] > best[m][arg]) arg = c;
        out.counts[m - 1] = static_cast<int>(arg);
        limit = arg;
    }
    for (std::size_t k = m - 1; k >= 1; --k) {
        std::size_t arg = 0;
        for (std::size_t c = 1; c <= limit; ++c)
            if (best[k][c] > best[k][arg]) arg = c;
        out.counts[k - 1] = static_cast<int>(arg);
        limit = arg;
    }

    double ap = 0.0, w_psi = 0.0;
    for (std::size_t k = 1; k <= m; ++k) {
        const auto c = static_cast<std::size_t>(out.counts[k - 1]);
        ap += static_cast<double>(k) / static_cast<double>(k + c);
        w_psi += ((static_cast<double>(n) - 2.0 * static_cast<double>(c)) *
                      rel[k - 1].score - s_n + 2.0 * b_prefix[c]) / mn;
    }
    ap /= static_cast<double>(m);
    out.loss = 1.0 - ap;
    out.violation = out.loss + w_psi;

    // delta_psi = (2/(mn)) * sum over flipped pairs of (x_rel - x_non); the
    // pairs flipped at relevant item k are the top-c_k non-relevant vectors.
    out.delta_psi.assign(feature_count, 0.0);
    for (std::size_t k = 0; k < m; ++k) {
        const auto c = static_cast<std::size_t>(out.counts[k]);
        for (std::size_t i = 0; i < feature_count; ++i)
            out.delta_psi[i] += static_cast<double>(c) * rel[k].fv->values[i];
    }
    // non-relevant item v_j appears in every flipped pair with c_k > j
    for (std::size_t j = 0; j < n; ++j) {
        std::size_t times = 0;
        for (std::size_t k = 0; k < m; ++k)
            if (static_cast<std::size_t>(out.counts[k]) > j) ++times;
        if (times == 0) continue;
        for (std::size_t i = 0; i < feature_count; ++i)
            out.delta_psi[i] -= static_cast<double>(times) * non[j].fv->values[i];
    }
    for (std::size_t i = 0; i < feature_count; ++i) out.delta_psi[i] *= 2.0 / mn;

    double wd = 0.0;
    for (std::size_t i = 0; i < feature_count; ++i) wd += w[i] * out.delta_psi[i];
    out.margin_violation = out.loss - wd;
    return out;
}

// ---- listwise trainer -----------------------------------------------------
// Cutting-plane loop: grow per-query working sets with the most violated
// labeling, re-solve the restricted problem, stop when nothing violates by
// more than epsilon. The reported objective trace is the running best of the
// exact structured objective, evaluated with a fresh most-violated search
// each pass.
inline ranking_model train_listwise(const std::vector<query_pool>& pools, double C,
                                    const train_options& opt = {}) {
    detail::check_trainable(pools, C);

    struct stored_constraint {
        std::vector<int> counts;
        double loss = 0.0;
        std::vector<double> delta_psi;
    };
    std::vector<std::vector<stored_constraint>> working(pools.size());

    std::vector<double> w(feature_count, 0.0);
    std::vector<double> best_w = w;
    double best_obj = 1e300;
    training_meta meta;

    const auto evaluate_and_grow = [&](bool grow) {
        double obj = 0.0;
        for (double x : w) obj += x * x;
        obj *= 0.5;
        std::size_t added = 0;
        for (std::size_t qi = 0; qi < pools.size(); ++qi) {
            auto mv = find_most_violated(pools[qi], w);
            obj += C * std::max(0.0, mv.margin_violation);
            if (!grow) continue;
            double slack = 0.0;
            for (const auto& sc : working[qi])
                slack = std::max(slack, sc.loss - detail::dot(w, sc.delta_psi));
            if (mv.margin_violation > slack + opt.epsilon) {
                bool dup = false;
                for (const auto& sc : working[qi])
                    if (sc.counts == mv.counts) { dup = true; break; }
                if (!dup) {
                    working[qi].push_back(
                        {std::move(mv.counts), mv.loss, std::move(mv.delta_psi)});
                    ++added;
                }
            }
        }
        if (obj < best_obj) { best_obj = obj; best_w = w; }
        meta.objective_trace.push_back(best_obj);
        return added;
    };

    for (int pass = 1; pass <= opt.max_cutting_planes; ++pass) {
        meta.iterations = pass;
        const std::size_t added = evaluate_and_grow(true);
        if (added == 0) {
            meta.converged = true;
            break;
        }
        std::vector<detail::hinge_group> groups;
        groups.reserve(pools.size());
        for (const auto& wset : working) {
            detail::hinge_group g;
            for (const auto& sc : wset) g.terms.push_back({sc.loss, sc.delta_psi});
            if (!g.terms.empty()) groups.push_back(std::move(g));
        }
        auto sol = detail::solve_hinge(feature_count, C, groups, w,
                                       opt.max_iterations, opt.polish_evals);
        w = std::move(sol.w);
    }
    if (!meta.converged) evaluate_and_grow(false); // final iterate still counts

    ranking_model model;
    model.kind = model_kind::listwise;
    model.c_param = C;
    model.weights = std::move(best_w);
    model.meta = std::move(meta);
    model.meta.objective = best_obj;
    return model;
}

inline ranking_model train(model_kind kind, const std::vector<query_pool>& pools,
                           double C, const train_options& opt = {}) {
    return kind == model_kind::pairwise ? train_pairwise(pools, C, opt)
                                        : train_listwise(pools, C, opt);
}

// ---- scoring --------------------------------------------------------------

inline double score(const ranking_model& m, const feature_vector& fv) {
    if (m.weights.size() != feature_count)
        throw validation_error("model has " + std::to_string(m.weights.size()) +
                               " weights, expected " + std::to_string(feature_count));
    double s = 0.0;
    for (std::size_t i = 0; i < feature_count; ++i) s += m.weights[i] * fv.values[i];
    return s;
}

struct ranked_entry {
    std::string author_id;
    double score = 0.0;
    std::optional<int> label;
};

// Descending score; equal scores order by ascending author id.
inline std::vector<ranked_entry> rank(const ranking_model& m, const query_pool& pool) {
    std::vector<ranked_entry> out;
    out.reserve(pool.vectors.size());
    for (const auto& fv : pool.vectors)
        out.push_back({fv.author_id, score(m, fv), fv.label});
    std::sort(out.begin(), out.end(), [](const ranked_entry& a, const ranked_entry& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.author_id < b.author_id;
    });
    return out;
}

// ---- model files ----------------------------------------------------------
// Four lines: kind, C, space-separated weights, metadata. Numbers use
// shortest round-trip decimals, so write -> read -> write is byte-stable.

inline void write_model(const ranking_model& m, std::ostream& os) {
    os << model_kind_name(m.kind) << '\n';
    os << detail::format_double(m.c_param) << '\n';
    for (std::size_t i = 0; i < m.weights.size(); ++i) {
        if (i) os << ' ';
        os << detail::format_double(m.weights[i]);
    }
    os << '\n';
    os << "iterations=" << m.meta.iterations
       << " objective=" << detail::format_double(m.meta.objective)
       << " converged=" << (m.meta.converged ? 1 : 0) << '\n';
}

inline void write_model(const ranking_model& m, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw error("cannot open " + path + " for writing");
    write_model(m, os);
    if (!os) throw error("failed writing " + path);
}

inline ranking_model read_model(std::istream& is) {
    std::string kind_line, c_line, w_line, meta_line;
    if (!std::getline(is, kind_line)) throw parse_error("missing model kind line", 1);
    if (!std::getline(is, c_line)) throw parse_error("missing C line", 2);
    if (!std::getline(is, w_line)) throw parse_error("missing weights line", 3);
    if (!std::getline(is, meta_line)) throw parse_error("missing metadata line", 4);

    ranking_model m;
    try {
        m.kind = parse_model_kind(kind_line);
    } catch (const validation_error& e) {
        throw parse_error(e.what(), 1);
    }
    m.c_param = detail::parse_double(c_line, 2, "C");
    if (m.c_param <= 0.0) throw parse_error("C must be positive", 2);

    std::istringstream ws(w_line);
    std::string tok;
    while (ws >> tok) m.weights.push_back(detail::parse_double(tok, 3, "weight"));
    if (m.weights.size() != feature_count)
        throw parse_error("expected " + std::to_string(feature_count) +
                                 " weights, got " + std::to_string(m.weights.size()), 3);

    std::istringstream ms(meta_line);
    while (ms >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos)
            throw parse_error("expected key=value metadata, got '" + tok + "'", 4);
        const std::string key = tok.substr(0, eq);
        const std::string val = tok.substr(eq + 1);
        if (key == "iterations") {
            auto res = std::from_chars(val.data(), val.data() + val.size(),
                                       m.meta.iterations);
            if (res.ec != std::errc{} || res.ptr != val.data() + val.size())
                throw parse_error("bad iterations value '" + val + "'", 4);
        } else if (key == "objective") {
            m.meta.objective = detail::parse_double(val, 4, "objective");
        } else if (key == "converged") {
            if (val != "0" && val != "1")
                throw parse_error("converged must be 0 or 1", 4);
            m.meta.converged = val == "1";
        } else {
            throw parse_error("unknown metadata key '" + key + "'", 4);
        }
    }
    return m;
}

inline ranking_model read_model(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw error("cannot open " + path);
    return read_model(is);
}

} // namespace expertrank
