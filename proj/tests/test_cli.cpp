// Configuration parsing plus end-to-end runs of the command-line tool.
// Process-level tests shell out to the built binary and assert on exit
// codes and exact stdout/stderr, so they double as a contract for scripts
// that drive the tool.

#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <expertrank/expertrank.hpp>

#include "synth_corpus.hpp"
#include "util.hpp"

namespace ex = expertrank;
using testutil::read_file;
using testutil::run_cli;
using testutil::temp_dir;
using testutil::write_file;

namespace {

// Three publications with easily hand-checked statistics.
//   p1 (2000, C) a1+a2, cited by p2 and p3
//   p2 (2001, J) a1, cites p1, no abstract
//   p3 (2002, C) a2, cites p1 and p2
const char* kTinyPubs =
    "p1\t2000\tC\tICML\ta1;a2\t\talpha beta\tgamma delta\n"
    "p2\t2001\tJ\tJMLR\ta1\tp1\tbeta gamma\t\n"
    "p3\t2002\tC\tICML\ta2\tp1;p2\talpha alpha\tdelta\n";

const char* kTinyAuthors =
    "a1\tAlice\tMIT\n"
    "a2\tBob\tCMU\n";

struct tiny_corpus_files {
    temp_dir dir;
    std::string pubs, authors;

    tiny_corpus_files() {
        pubs = dir.file("pubs.tsv");
        authors = dir.file("authors.tsv");
        write_file(pubs, kTinyPubs);
        write_file(authors, kTinyAuthors);
    }
};

synth::config small_synth() {
    synth::config cfg;
    cfg.topics = 2;
    cfg.experts_per_topic = 3;
    cfg.background_authors = 24;
    cfg.expert_pubs_each = 4;
    cfg.background_pubs = 80;
    cfg.institutions = 4;
    return cfg;
}

// Lines of a string, '\n'-separated, final empty tail dropped.
std::vector<std::string> lines_of(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur)) out.push_back(cur);
    return out;
}

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(line);
    while (std::getline(is, cur, '\t')) out.push_back(cur);
    return out;
}

std::string zero_model_text() {
    std::string w;
    for (int i = 0; i < 35; ++i) w += i ? " 0" : "0";
    return "pairwise\n1\n" + w + "\niterations=0 objective=0 converged=1\n";
}

} // namespace

TEST_CASE("config files parse with layering and comments") {
    ex::run_config base;
    base.seed = 99;

    std::istringstream is(
        "# corpus\n"
        "publications = pubs.tsv\n"
        "authors=meta.tsv   # inline comment\n"
        "\n"
        "bm25_k1 = 2.0\n"
        "current_year = 2010\n"
        "trainer = listwise\n"
        "c_grid = 0.5,5\n"
        "folds = 3\n"
        "top_k = 7\n");
    const auto cfg = ex::load_config(is, base);

    CHECK(cfg.publications == "pubs.tsv");
    CHECK(cfg.authors == "meta.tsv");
    CHECK(cfg.bm25_k1 == 2.0);
    CHECK(cfg.current_year == 2010);
    CHECK(cfg.trainer == "listwise");
    CHECK(cfg.c_grid == "0.5,5");
    CHECK(cfg.folds == 3);
    CHECK(cfg.top_k == 7);
    // untouched keys keep the values of the layered-in base
    CHECK(cfg.seed == 99);
    CHECK(cfg.bm25_b == 0.75);
    CHECK(cfg.trainer != ex::run_config{}.trainer);
}

TEST_CASE("config defaults match the documented values") {
    ex::run_config cfg;
    CHECK(cfg.groups == "text,profile,graph");
    CHECK(cfg.bm25_k1 == 1.2);
    CHECK(cfg.bm25_b == 0.75);
    CHECK(cfg.gamma == 4.0);
    CHECK(cfg.delta == 1.0);
    CHECK(cfg.current_year == 0);
    CHECK(cfg.pagerank_damping == 0.5);
    CHECK(cfg.pagerank_tol == 1e-9);
    CHECK(cfg.pagerank_max_iter == 200);
    CHECK(cfg.trainer == "pairwise");
    CHECK(cfg.c_grid == "0.01,0.1,1,10");
    CHECK(cfg.c_param == 1.0);
    CHECK(cfg.folds == 4);
    CHECK(cfg.seed == 42);
    CHECK(cfg.max_iterations == 2000);
    CHECK(cfg.epsilon == 1e-3);
    CHECK(cfg.max_cutting_planes == 200);
    CHECK(cfg.top_k == 10);
}

TEST_CASE("config rejects malformed input with line numbers") {
    const auto load = [](const std::string& text) {
        std::istringstream is(text);
        return ex::load_config(is);
    };

    CHECK_THROWS_WITH(load("folds = 3\nshiny = 1\n"),
                      Catch::Matchers::ContainsSubstring("unknown config key") &&
                          Catch::Matchers::ContainsSubstring("line 2"));
    CHECK_THROWS_WITH(load("just words\n"),
                      Catch::Matchers::ContainsSubstring("key = value"));
    CHECK_THROWS_WITH(load("folds = x\n"),
                      Catch::Matchers::ContainsSubstring("bad value"));
    CHECK_THROWS_WITH(load("= 3\n"), Catch::Matchers::ContainsSubstring("empty key"));
    CHECK_THROWS_AS(load("seed = -1\n"), ex::parse_error);
    CHECK_THROWS_AS(ex::load_config("/nonexistent/cfg.txt"), ex::error);
}

TEST_CASE("feature group masks parse") {
    const auto all = ex::parse_mask("text,profile,graph");
    CHECK((all.text && all.profile && all.graph));

    const auto some = ex::parse_mask(" text , graph ");
    CHECK(some.text);
    CHECK_FALSE(some.profile);
    CHECK(some.graph);

    CHECK_THROWS_AS(ex::parse_mask("text,bogus"), ex::validation_error);
    CHECK_THROWS_AS(ex::parse_mask(""), ex::validation_error);
    CHECK_THROWS_AS(ex::parse_mask(",,"), ex::validation_error);
}

TEST_CASE("C grids parse") {
    CHECK(ex::parse_c_grid("0.01,0.1,1,10") ==
          std::vector<double>{0.01, 0.1, 1.0, 10.0});
    CHECK(ex::parse_c_grid(" 2 , 4 ") == std::vector<double>{2.0, 4.0});
    CHECK_THROWS_AS(ex::parse_c_grid("1,zero"), ex::validation_error);
    CHECK_THROWS_AS(ex::parse_c_grid("1,-2"), ex::validation_error);
    CHECK_THROWS_AS(ex::parse_c_grid("0"), ex::validation_error);
    CHECK_THROWS_AS(ex::parse_c_grid(""), ex::validation_error);
}

TEST_CASE("cli usage errors exit 1") {
    temp_dir dir;

    auto r = run_cli(dir, "");
    CHECK(r.exit_code == 1);

    r = run_cli(dir, "ingest --no-such-flag");
    CHECK(r.exit_code == 1);

    r = run_cli(dir, "frobnicate");
    CHECK(r.exit_code == 1);

    r = run_cli(dir, "--help");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("ingest") != std::string::npos);

    // metrics declares --author required, so CLI parsing itself fails
    tiny_corpus_files t;
    r = run_cli(dir, "metrics --publications " + t.pubs);
    CHECK(r.exit_code == 1);
}

TEST_CASE("cli input errors exit 2, missing files exit 3") {
    temp_dir dir;
    tiny_corpus_files t;

    auto r = run_cli(dir, "ingest");
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("ingest needs --publications") != std::string::npos);

    r = run_cli(dir, "ingest --publications " + dir.file("nope.tsv"));
    CHECK(r.exit_code == 3);
    CHECK(r.err.find("nope.tsv") != std::string::npos);

    const auto dup = dir.file("dup.tsv");
    write_file(dup, std::string(kTinyPubs) +
                        "p1\t2004\tJ\tX\ta1\t\tdup title\t\n");
    r = run_cli(dir, "ingest --publications " + dup);
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("p1") != std::string::npos);

    r = run_cli(dir, "metrics --publications " + t.pubs + " --authors " +
                         t.authors + " --author a_nope");
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("a_nope") != std::string::npos);

    r = run_cli(dir, "train --features " + dir.file("missing.letor") +
                         " --output " + dir.file("m.txt"));
    CHECK(r.exit_code == 3);

    r = run_cli(dir, "train");
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("train needs --features") != std::string::npos);
}

TEST_CASE("cli ingest reports corpus statistics") {
    tiny_corpus_files t;

    auto r = run_cli(t.dir, "ingest --publications " + t.pubs + " --authors " +
                                t.authors);
    REQUIRE(r.exit_code == 0);
    CHECK(r.out ==
          "publications\t3\n"
          "authors\t2\n"
          "citation_links\t3\n"
          "with_abstract\t2\n"
          "conference\t2\n"
          "journal\t1\n"
          "dropped_citations\t0\n"
          "avg_title_length\t2\n"
          "avg_abstract_length\t1.5\n"
          "current_year\t2002\n");

    r = run_cli(t.dir, "ingest --publications " + t.pubs + " --current-year 2024");
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("current_year\t2024\n") != std::string::npos);
}

TEST_CASE("cli metrics prints hand-checked indices") {
    tiny_corpus_files t;

    // Snapshot written by ingest, then consumed instead of the TSVs.
    const auto snap = t.dir.file("corpus.bin");
    auto r = run_cli(t.dir, "ingest --publications " + t.pubs + " --authors " +
                                t.authors + " --snapshot " + snap);
    REQUIRE(r.exit_code == 0);

    r = run_cli(t.dir, "metrics --snapshot " + snap +
                           " --author a1 --query \"alpha beta\"");
    REQUIRE(r.exit_code == 0);
    CHECK(r.out ==
          "h_index\t1\n"
          "g_index\t1\n"
          "a_index\t3\n"
          "e_index\t1\n"
          "individual_h_index\t0.5\n"
          "contemporary_h_index\t2\n"
          "trend_h_index\t2\n"
          "institution_h_index\t1\n"
          "institution_a_index\t3\n"
          "institution_g_index\t1\n"
          "career_years\t1\n"
          "hb_index\t1\n"
          "citations_matching_total\t2\n"
          "citations_matching_avg\t2\n"
          "citations_matching_max\t2\n"
          "citations_per_year\t3\n"
          "collaborators\t1\n");

    // Without --query the report stops after the query-free block.
    r = run_cli(t.dir, "metrics --snapshot " + snap + " --author a1");
    REQUIRE(r.exit_code == 0);
    CHECK(lines_of(r.out).size() == 11);
    CHECK(r.out.find("hb_index") == std::string::npos);
}

TEST_CASE("cli feature extraction is deterministic and snapshot-agnostic") {
    temp_dir dir;
    const auto data = synth::generate(small_synth());
    synth::write_tsv(data, dir.path.string());
    const auto pubs = dir.file("publications.tsv");
    const auto authors = dir.file("authors.tsv");
    const auto judg = dir.file("judgments.tsv");

    const std::string base = "features --publications " + pubs + " --authors " +
                             authors + " --judgments " + judg;

    auto r = run_cli(dir, base + " --output " + dir.file("f1.letor"));
    REQUIRE(r.exit_code == 0);
    // 3 relevant plus 3 sampled non-relevant per topic
    CHECK(r.out == "queries\t2\nvectors\t12\n");

    r = run_cli(dir, base + " --output " + dir.file("f2.letor"));
    REQUIRE(r.exit_code == 0);
    CHECK(read_file(dir.file("f1.letor")) == read_file(dir.file("f2.letor")));

    // The snapshot round-trips into bit-identical features.
    const auto snap = dir.file("corpus.bin");
    r = run_cli(dir, "ingest --publications " + pubs + " --authors " + authors +
                         " --snapshot " + snap);
    REQUIRE(r.exit_code == 0);
    r = run_cli(dir, "features --snapshot " + snap + " --judgments " + judg +
                         " --output " + dir.file("f3.letor"));
    REQUIRE(r.exit_code == 0);
    CHECK(read_file(dir.file("f1.letor")) == read_file(dir.file("f3.letor")));

    // Unknown judged author is a lookup failure, not a crash.
    write_file(dir.file("bad_judg.tsv"), "q0\tneural networks\ta_nope\t1\n");
    r = run_cli(dir, "features --snapshot " + snap + " --judgments " +
                         dir.file("bad_judg.tsv") + " --output " +
                         dir.file("f4.letor"));
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("a_nope") != std::string::npos);
}

TEST_CASE("cli train, evaluate, and rank round trip") {
    temp_dir dir;
    const auto data = synth::generate(small_synth());
    synth::write_tsv(data, dir.path.string());
    const auto pubs = dir.file("publications.tsv");
    const auto authors = dir.file("authors.tsv");
    const auto feats = dir.file("f.letor");

    auto r = run_cli(dir, "features --publications " + pubs + " --authors " +
                              authors + " --judgments " +
                              dir.file("judgments.tsv") + " --output " + feats);
    REQUIRE(r.exit_code == 0);

    const auto model = dir.file("model.txt");
    r = run_cli(dir, "train --features " + feats + " --output " + model +
                         " --c 1 --max-iter 500");
    REQUIRE(r.exit_code == 0);
    {
        const auto out_lines = lines_of(r.out);
        REQUIRE(out_lines.size() == 4);
        CHECK(out_lines[0] == "kind\tpairwise");
        CHECK(out_lines[1].rfind("objective\t", 0) == 0);
        CHECK(out_lines[2].rfind("iterations\t", 0) == 0);
        CHECK(out_lines[3].rfind("converged\t", 0) == 0);
        CHECK(lines_of(read_file(model)).size() == 4);
    }

    r = run_cli(dir, "train --features " + feats + " --output " +
                         dir.file("model_lw.txt") +
                         " --c 1 --trainer listwise --max-iter 500");
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.rfind("kind\tlistwise\n", 0) == 0);

    r = run_cli(dir, "train --features " + feats + " --output " +
                         dir.file("m2.txt") + " --trainer pointwise");
    CHECK(r.exit_code == 2);

    // evaluate: report on stdout by default, summary when writing to a file
    const std::string eval_cmd = "evaluate --features " + feats +
                                 " --folds 2 --max-iter 500";
    r = run_cli(dir, eval_cmd);
    REQUIRE(r.exit_code == 0);
    const std::string report_text = r.out;
    {
        // three headed sections: 2 query rows, 2 fold rows, 1 overall row
        const auto out_lines = lines_of(report_text);
        REQUIRE(out_lines.size() == 8);
        CHECK(out_lines[0].rfind("#Q\tquery\tfold", 0) == 0);
        CHECK(out_lines[3].rfind("#F\tfold\tC", 0) == 0);
        CHECK(out_lines[6].rfind("#ALL\t", 0) == 0);
        CHECK(out_lines[7].rfind("ALL\t", 0) == 0);
    }

    r = run_cli(dir, eval_cmd); // byte-identical replay
    REQUIRE(r.exit_code == 0);
    CHECK(r.out == report_text);

    const auto report_file = dir.file("report.tsv");
    r = run_cli(dir, eval_cmd + " --report " + report_file);
    REQUIRE(r.exit_code == 0);
    CHECK(read_file(report_file) == report_text);
    {
        const auto out_lines = lines_of(r.out);
        REQUIRE(out_lines.size() == 5);
        CHECK(out_lines[0].rfind("MAP\t", 0) == 0);
        CHECK(out_lines[1].rfind("P@5\t", 0) == 0);
        CHECK(out_lines[4].rfind("P@20\t", 0) == 0);
    }

    // default folds (4) exceed the 2 queries on file
    r = run_cli(dir, "evaluate --features " + feats);
    CHECK(r.exit_code == 2);

    // rank with the trained model: k well-formed lines
    r = run_cli(dir, "rank --publications " + pubs + " --authors " + authors +
                         " --model " + model + " --query \"neural networks\"" +
                         " --k 5");
    REQUIRE(r.exit_code == 0);
    {
        const auto out_lines = lines_of(r.out);
        REQUIRE(out_lines.size() == 5);
        for (std::size_t i = 0; i < out_lines.size(); ++i) {
            const auto cols = split_tabs(out_lines[i]);
            REQUIRE(cols.size() == 3);
            CHECK(cols[0] == std::to_string(i + 1));
            CHECK_FALSE(cols[1].empty());
            CHECK_NOTHROW(std::stod(cols[2]));
        }
    }

    r = run_cli(dir, "rank --publications " + pubs + " --model " + model +
                         " --query \"neural networks\" --k 0");
    CHECK(r.exit_code == 2);
}

TEST_CASE("cli rank breaks score ties by author id") {
    tiny_corpus_files t;
    const auto model = t.dir.file("zero.txt");
    write_file(model, zero_model_text());

    auto r = run_cli(t.dir, "rank --publications " + t.pubs + " --authors " +
                                t.authors + " --model " + model +
                                " --query \"alpha beta\" --k 10");
    REQUIRE(r.exit_code == 0);
    // both scores are 0, so order falls back to ascending author id
    CHECK(r.out == "1\ta1\t0\n2\ta2\t0\n");
}

TEST_CASE("cli config file is honored and flags override it") {
    tiny_corpus_files t;
    const auto model = t.dir.file("zero.txt");
    write_file(model, zero_model_text());

    const auto cfg_path = t.dir.file("run.cfg");
    write_file(cfg_path, "publications = " + t.pubs +
                             "\n"
                             "authors = " +
                             t.authors +
                             "\n"
                             "model_file = " +
                             model +
                             "\n"
                             "top_k = 1\n");

    auto r = run_cli(t.dir, "rank --config " + cfg_path + " --query \"alpha beta\"");
    REQUIRE(r.exit_code == 0);
    CHECK(r.out == "1\ta1\t0\n");

    // --config=path spelling, plus a flag overriding the file's top_k
    r = run_cli(t.dir, "rank --config=" + cfg_path +
                           " --query \"alpha beta\" --k 2");
    REQUIRE(r.exit_code == 0);
    CHECK(r.out == "1\ta1\t0\n2\ta2\t0\n");

    // the option is also accepted ahead of the subcommand
    r = run_cli(t.dir, "--config " + cfg_path + " rank --query \"alpha beta\"");
    REQUIRE(r.exit_code == 0);
    CHECK(r.out == "1\ta1\t0\n");

    write_file(t.dir.file("bad.cfg"), "top_k = 1\nshiny = yes\n");
    r = run_cli(t.dir, "rank --config " + t.dir.file("bad.cfg") +
                           " --query \"alpha beta\"");
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("unknown config key") != std::string::npos);

    r = run_cli(t.dir, "rank --config " + t.dir.file("absent.cfg") +
                           " --query \"alpha beta\"");
    CHECK(r.exit_code == 2);
}

TEST_CASE("feature documentation stays in sync with the table") {
    const std::string path =
        std::string(EXPERTRANK_SOURCE_DIR) + "/docs/features.tsv";
    std::ifstream is(path);
    REQUIRE(is);

    std::string line;
    REQUIRE(std::getline(is, line));
    CHECK(line == "id\tname\tgroup\tdescription");

    const auto group_name = [](ex::feature_group g) {
        switch (g) {
        case ex::feature_group::text: return "text";
        case ex::feature_group::profile: return "profile";
        case ex::feature_group::graph: return "graph";
        }
        return "?";
    };

    std::size_t row = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto cols = split_tabs(line);
        REQUIRE(cols.size() == 4);
        REQUIRE(row < ex::feature_count);
        CHECK(cols[0] == std::to_string(row + 1));
        CHECK(cols[1] == ex::feature_table[row].name);
        CHECK(cols[2] == group_name(ex::feature_table[row].group));
        CHECK_FALSE(cols[3].empty());
        ++row;
    }
    CHECK(row == ex::feature_count);
}
