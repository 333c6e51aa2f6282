// Command-line front end: ingest, metrics, features, train, evaluate, rank.
// Exit codes: 0 success, 1 usage, 2 validation/input errors, 3 runtime.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include <expertrank/expertrank.hpp>

namespace ex = expertrank;

namespace {

ex::corpus load_corpus(const ex::run_config& cfg, bool want_snapshot_input) {
    if (want_snapshot_input && !cfg.snapshot.empty() && cfg.publications.empty())
        return ex::corpus::load_snapshot(cfg.snapshot);
    if (!cfg.publications.empty()) return ex::corpus::load(cfg.publications, cfg.authors);
    if (want_snapshot_input && !cfg.snapshot.empty())
        return ex::corpus::load_snapshot(cfg.snapshot);
    throw ex::validation_error(want_snapshot_input
                                   ? "no corpus input: set --snapshot or --publications"
                                   : "no corpus input: set --publications");
}

ex::feature_context make_context(const ex::run_config& cfg, const ex::corpus& c) {
    ex::bm25_params bp{cfg.bm25_k1, cfg.bm25_b};
    ex::index_params ip{cfg.gamma, cfg.delta, cfg.current_year};
    ex::pagerank_params pp{cfg.pagerank_damping, cfg.pagerank_tol, cfg.pagerank_max_iter};
    return ex::feature_context(c, bp, ip, pp);
}

ex::train_options train_opts(const ex::run_config& cfg) {
    ex::train_options t;
    t.max_iterations = cfg.max_iterations;
    t.epsilon = cfg.epsilon;
    t.max_cutting_planes = cfg.max_cutting_planes;
    return t;
}

std::string fmt(double v) { return ex::detail::format_double(v); }

void cmd_ingest(const ex::run_config& cfg) {
    if (cfg.publications.empty())
        throw ex::validation_error("ingest needs --publications");
    ex::corpus c = ex::corpus::load(cfg.publications, cfg.authors);
    const auto st = c.compute_stats(
        cfg.current_year > 0 ? std::optional<int>(cfg.current_year) : std::nullopt);
    if (!cfg.snapshot.empty()) c.save_snapshot(cfg.snapshot);
    std::cout << "publications\t" << st.num_publications << '\n'
              << "authors\t" << st.num_authors << '\n'
              << "citation_links\t" << st.num_citation_links << '\n'
              << "with_abstract\t" << st.num_with_abstract << '\n'
              << "conference\t" << st.num_conference << '\n'
              << "journal\t" << st.num_journal << '\n'
              << "dropped_citations\t" << st.num_dropped_citations << '\n'
              << "avg_title_length\t" << fmt(st.avg_doc_length_title) << '\n'
              << "avg_abstract_length\t" << fmt(st.avg_doc_length_abstract) << '\n'
              << "current_year\t" << st.current_year << '\n';
}

void cmd_metrics(const ex::run_config& cfg, const std::string& author_id,
                 const std::string& query_text) {
    if (author_id.empty()) throw ex::validation_error("metrics needs --author");
    ex::corpus c = load_corpus(cfg, true);
    const int year = cfg.current_year > 0 ? cfg.current_year
                                          : c.compute_stats().current_year;
    const ex::index_params ip{cfg.gamma, cfg.delta, year};

    std::cout << "h_index\t" << ex::author_h_index(author_id, c) << '\n'
              << "g_index\t" << ex::author_g_index(author_id, c) << '\n'
              << "a_index\t" << fmt(ex::author_a_index(author_id, c)) << '\n'
              << "e_index\t" << fmt(ex::author_e_index(author_id, c)) << '\n'
              << "individual_h_index\t"
              << fmt(ex::author_individual_h_index(author_id, c)) << '\n'
              << "contemporary_h_index\t" << ex::contemporary_h_index(author_id, ip, c)
              << '\n'
              << "trend_h_index\t" << ex::trend_h_index(author_id, ip, c) << '\n'
              << "institution_h_index\t" << ex::institution_h_index(author_id, c) << '\n'
              << "institution_a_index\t" << fmt(ex::institution_a_index(author_id, c))
              << '\n'
              << "institution_g_index\t" << ex::institution_g_index(author_id, c) << '\n'
              << "career_years\t" << ex::career_span_raw(author_id, c) << '\n';
    if (!query_text.empty()) {
        const auto q = ex::query::from_text("adhoc", query_text);
        const auto cs = ex::citation_stats(author_id, q, c);
        std::cout << "hb_index\t" << ex::hb_index(q, c) << '\n'
                  << "citations_matching_total\t" << fmt(cs.total_matching) << '\n'
                  << "citations_matching_avg\t" << fmt(cs.avg_matching) << '\n'
                  << "citations_matching_max\t" << fmt(cs.max_matching) << '\n'
                  << "citations_per_year\t" << fmt(cs.per_year) << '\n'
                  << "collaborators\t" << cs.collaborators << '\n';
    }
}

void cmd_features(const ex::run_config& cfg) {
    if (cfg.judgments.empty()) throw ex::validation_error("features needs --judgments");
    if (cfg.features_file.empty()) throw ex::validation_error("features needs --output");
    ex::corpus c = load_corpus(cfg, true);
    auto ctx = make_context(cfg, c);
    const auto mask = ex::parse_mask(cfg.groups);
    const auto jf = ex::read_judgments(cfg.judgments);
    std::vector<std::string> warnings;
    auto pools = ex::build_pools(jf, ctx, cfg.seed, mask, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
    if (pools.empty()) throw ex::validation_error("no trainable pools");
    ex::write_vectors(pools, cfg.features_file);
    std::size_t vectors = 0;
    for (const auto& p : pools) vectors += p.vectors.size();
    std::cout << "queries\t" << pools.size() << '\n' << "vectors\t" << vectors << '\n';
}

void cmd_train(const ex::run_config& cfg) {
    if (cfg.features_file.empty()) throw ex::validation_error("train needs --features");
    if (cfg.model_file.empty()) throw ex::validation_error("train needs --output");
    const auto pools = ex::read_vectors(cfg.features_file);
    const auto kind = ex::parse_model_kind(cfg.trainer);
    const auto model = ex::train(kind, pools, cfg.c_param, train_opts(cfg));
    ex::write_model(model, cfg.model_file);
    std::cout << "kind\t" << ex::model_kind_name(model.kind) << '\n'
              << "objective\t" << fmt(model.meta.objective) << '\n'
              << "iterations\t" << model.meta.iterations << '\n'
              << "converged\t" << (model.meta.converged ? 1 : 0) << '\n';
}

void cmd_evaluate(const ex::run_config& cfg) {
    if (cfg.features_file.empty())
        throw ex::validation_error("evaluate needs --features");
    const auto pools = ex::read_vectors(cfg.features_file);
    ex::cv_options opt;
    opt.trainer = ex::parse_model_kind(cfg.trainer);
    opt.folds = cfg.folds;
    opt.c_grid = ex::parse_c_grid(cfg.c_grid);
    opt.seed = cfg.seed;
    opt.topt = train_opts(cfg);
    const auto report = ex::cross_validate(pools, opt);
    if (cfg.report_file.empty()) {
        ex::write_report(report, std::cout);
    } else {
        ex::write_report(report, cfg.report_file);
        std::cout << "MAP\t" << fmt(report.map) << '\n';
        for (std::size_t i = 0; i < ex::report_cutoffs.size(); ++i)
            std::cout << "P@" << ex::report_cutoffs[i] << '\t' << fmt(report.p[i])
                      << '\n';
    }
}

void cmd_rank(const ex::run_config& cfg, const std::string& query_text) {
    if (query_text.empty()) throw ex::validation_error("rank needs --query");
    if (cfg.model_file.empty()) throw ex::validation_error("rank needs --model");
    if (cfg.top_k < 1) throw ex::validation_error("rank needs k >= 1");
    ex::corpus c = load_corpus(cfg, true);
    auto ctx = make_context(cfg, c);
    const auto mask = ex::parse_mask(cfg.groups);
    const auto model = ex::read_model(cfg.model_file);
    const auto q = ex::query::from_text("adhoc", query_text);

    ex::query_pool pool;
    pool.query_id = q.id;
    std::vector<std::string> ids;
    for (std::size_t ai = 0; ai < c.num_authors(); ++ai)
        ids.push_back(c.author_at(ai).id);
    std::sort(ids.begin(), ids.end());
    for (const auto& id : ids)
        pool.vectors.push_back(ex::extract_features(q, id, ctx, mask));
    pool = ex::normalize_pool(pool);

    const auto ranked = ex::rank(model, pool);
    const auto k = std::min<std::size_t>(static_cast<std::size_t>(cfg.top_k),
                                         ranked.size());
    for (std::size_t i = 0; i < k; ++i)
        std::cout << (i + 1) << '\t' << ranked[i].author_id << '\t'
                  << fmt(ranked[i].score) << '\n';
}

} // namespace

int main(int argc, char** argv) {
    ex::run_config cfg;

    // The config file loads before flag parsing so that flags always win.
    try {
        for (int i = 1; i < argc; ++i) {
            const std::string arg = argv[i];
            if (arg == "--config" && i + 1 < argc) {
                cfg = ex::load_config(argv[i + 1], cfg);
            } else if (arg.rfind("--config=", 0) == 0) {
                cfg = ex::load_config(arg.substr(9), cfg);
            }
        }
    } catch (const ex::error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }

    CLI::App app{"Expert search over publication corpora: feature extraction, "
                 "max-margin ranker training, and evaluation."};
    app.require_subcommand(1);
    std::string config_path; // recognized here, handled by the pre-pass above
    app.add_option("--config", config_path, "flat key = value configuration file");

    std::string author_id, query_text;

    auto add_corpus_opts = [&](CLI::App* sub) {
        sub->add_option("--publications", cfg.publications, "publication TSV file");
        sub->add_option("--authors", cfg.authors, "author metadata TSV file");
        sub->add_option("--snapshot", cfg.snapshot, "binary corpus snapshot");
    };
    auto add_param_opts = [&](CLI::App* sub) {
        sub->add_option("--k1", cfg.bm25_k1, "BM25 k1");
        sub->add_option("--b", cfg.bm25_b, "BM25 b");
        sub->add_option("--gamma", cfg.gamma, "age-weighting gamma");
        sub->add_option("--delta", cfg.delta, "age-weighting delta");
        sub->add_option("--current-year", cfg.current_year,
                        "reference year (0 = newest publication)");
        sub->add_option("--pagerank-damping", cfg.pagerank_damping, "damping factor");
        sub->add_option("--pagerank-tol", cfg.pagerank_tol, "L1 convergence tolerance");
        sub->add_option("--pagerank-max-iter", cfg.pagerank_max_iter,
                        "power-iteration cap");
    };
    auto add_train_opts = [&](CLI::App* sub) {
        sub->add_option("--trainer", cfg.trainer, "pairwise or listwise");
        sub->add_option("--max-iter", cfg.max_iterations, "subgradient steps");
        sub->add_option("--epsilon", cfg.epsilon, "cutting-plane slack");
        sub->add_option("--cutting-planes", cfg.max_cutting_planes,
                        "cutting-plane pass cap");
    };

    auto* ingest = app.add_subcommand("ingest", "load a corpus, report stats, "
                                                "optionally write a snapshot");
    ingest->add_option("--publications", cfg.publications, "publication TSV file");
    ingest->add_option("--authors", cfg.authors, "author metadata TSV file");
    ingest->add_option("--snapshot", cfg.snapshot, "snapshot output path");
    ingest->add_option("--current-year", cfg.current_year, "reference year override");

    auto* metrics = app.add_subcommand("metrics", "print one author's indices");
    add_corpus_opts(metrics);
    metrics->add_option("--author", author_id, "author id")->required();
    metrics->add_option("--query", query_text, "optional topic for query-bound indices");
    metrics->add_option("--gamma", cfg.gamma, "age-weighting gamma");
    metrics->add_option("--delta", cfg.delta, "age-weighting delta");
    metrics->add_option("--current-year", cfg.current_year, "reference year override");

    auto* features = app.add_subcommand("features", "build labeled feature vectors");
    add_corpus_opts(features);
    add_param_opts(features);
    features->add_option("--judgments", cfg.judgments, "judgments TSV file");
    features->add_option("--output", cfg.features_file, "feature file to write");
    features->add_option("--groups", cfg.groups, "feature groups: text,profile,graph");
    features->add_option("--seed", cfg.seed, "sampling seed");

    auto* train = app.add_subcommand("train", "train a ranking model");
    train->add_option("--features", cfg.features_file, "feature file");
    train->add_option("--output", cfg.model_file, "model file to write");
    train->add_option("--c", cfg.c_param, "regularization C");
    add_train_opts(train);

    auto* evaluate = app.add_subcommand("evaluate", "cross-validated evaluation");
    evaluate->add_option("--features", cfg.features_file, "feature file");
    evaluate->add_option("--report", cfg.report_file, "report file (stdout if unset)");
    evaluate->add_option("--folds", cfg.folds, "number of query folds");
    evaluate->add_option("--c-grid", cfg.c_grid, "comma-separated C grid");
    evaluate->add_option("--seed", cfg.seed, "fold-assignment seed");
    add_train_opts(evaluate);

    auto* rankc = app.add_subcommand("rank", "rank authors for a free-text query");
    add_corpus_opts(rankc);
    add_param_opts(rankc);
    rankc->add_option("--model", cfg.model_file, "trained model file");
    rankc->add_option("--query", query_text, "query text");
    rankc->add_option("--k", cfg.top_k, "how many authors to print");
    rankc->add_option("--groups", cfg.groups, "feature groups used at training time");

    // Accepted after the subcommand too; the pre-pass has already read it.
    for (CLI::App* sub : {ingest, metrics, features, train, evaluate, rankc})
        sub->add_option("--config", config_path,
                        "flat key = value configuration file");

    try {
        app.parse(argc, argv);
        if (app.got_subcommand(ingest)) cmd_ingest(cfg);
        else if (app.got_subcommand(metrics)) cmd_metrics(cfg, author_id, query_text);
        else if (app.got_subcommand(features)) cmd_features(cfg);
        else if (app.got_subcommand(train)) cmd_train(cfg);
        else if (app.got_subcommand(evaluate)) cmd_evaluate(cfg);
        else if (app.got_subcommand(rankc)) cmd_rank(cfg, query_text);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const ex::parse_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const ex::validation_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const ex::not_found_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
