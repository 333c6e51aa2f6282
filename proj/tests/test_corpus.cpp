#include <catch2/catch_amalgamated.hpp>

#include <expertrank/corpus.hpp>

#include "util.hpp"

using namespace expertrank;

namespace {

// Four publications, two with metadata-backed authors.
const char* kPubs =
    "p1\t2001\tC\tICML\ta1;a2\tp2;p3\tDeep Learning Methods\tWe study deep nets.\n"
    "p2\t1999\tJ\tJMLR\ta2\t\tKernel Machines\t\n"
    "p3\t2005\tC\tKDD\ta3;a1\tp1\tGraph Mining at Scale\tMining graphs, at scale!\n"
    "p4\t2010\tJ\tTKDE\ta3\tp1;p1;p4;p_missing\tStream Processing\tStreams.\n";

const char* kAuthors =
    "a1\tAlice\tMIT\n"
    "a2\tBob\tCMU\n";

corpus load_sample() {
    testutil::temp_dir dir;
    testutil::write_file(dir.file("pubs.tsv"), kPubs);
    testutil::write_file(dir.file("authors.tsv"), kAuthors);
    return corpus::load(dir.file("pubs.tsv"), dir.file("authors.tsv"));
}

} // namespace

TEST_CASE("tsv load parses every field") {
    corpus c = load_sample();
    REQUIRE(c.num_publications() == 4);
    const publication& p1 = c.pub_at(c.pub_index("p1"));
    CHECK(p1.year == 2001);
    CHECK(p1.venue == venue_kind::conference);
    CHECK(p1.venue_name == "ICML");
    CHECK(p1.author_ids == std::vector<std::string>{"a1", "a2"});
    CHECK(p1.cited_ids == std::vector<std::string>{"p2", "p3"});
    CHECK(p1.title == "Deep Learning Methods");
    CHECK(p1.abstract == "We study deep nets.");
    CHECK(p1.title_tokens == std::vector<std::string>{"deep", "learning", "methods"});
    CHECK(p1.abstract_tokens == std::vector<std::string>{"we", "study", "deep", "nets"});

    const publication& p2 = c.pub_at(c.pub_index("p2"));
    CHECK(p2.venue == venue_kind::journal);
    CHECK(p2.abstract.empty());
    CHECK(p2.cited_ids.empty());
}

TEST_CASE("authors come from metadata plus implied ids") {
    corpus c = load_sample();
    REQUIRE(c.num_authors() == 3); // a3 implied by p3/p4
    const author& a1 = c.author_at(c.author_index("a1"));
    CHECK(a1.name == "Alice");
    CHECK(a1.institution == "MIT");
    const author& a3 = c.author_at(c.author_index("a3"));
    CHECK(a3.name.empty());
    CHECK(a3.institution.empty());
}

TEST_CASE("author publication lists are sorted by publication id") {
    corpus c = load_sample();
    const author& a1 = c.author_at(c.author_index("a1"));
    CHECK(a1.publication_ids == std::vector<std::string>{"p1", "p3"});
    auto pubs = c.author_publications("a3");
    REQUIRE(pubs.size() == 2);
    CHECK(pubs[0]->id == "p3");
    CHECK(pubs[1]->id == "p4");
}

TEST_CASE("citation cleanup drops self refs, duplicates, and dangling targets") {
    corpus c = load_sample();
    // p4 cited p1;p1;p4;p_missing -> keeps one p1, drops dup + self + dangling.
    const publication& p4 = c.pub_at(c.pub_index("p4"));
    CHECK(p4.cited_ids == std::vector<std::string>{"p1"});
    CHECK(c.dropped_citations() == 3);

    // p1 is cited by p3 and p4; citers come back in ascending id order.
    auto& citers = c.citers_of(c.pub_index("p1"));
    REQUIRE(citers.size() == 2);
    CHECK(c.pub_at(citers[0]).id == "p3");
    CHECK(c.pub_at(citers[1]).id == "p4");
    CHECK(c.citation_count(c.pub_index("p1")) == 2);
    CHECK(c.citation_count(c.pub_index("p4")) == 0);
}

TEST_CASE("stats are hand checkable") {
    corpus c = load_sample();
    corpus_stats st = c.compute_stats();
    CHECK(st.num_publications == 4);
    CHECK(st.num_authors == 3);
    CHECK(st.num_citation_links == 4); // p1->2, p3->1, p4->1 after cleanup
    CHECK(st.num_with_abstract == 3);
    CHECK(st.num_conference == 2);
    CHECK(st.num_journal == 2);
    CHECK(st.num_dropped_citations == 3);
    // Title lengths 3,2,4,2 over 4 docs; abstracts 4,4,1 over 3 docs.
    CHECK(st.avg_doc_length_title == Catch::Approx(11.0 / 4.0));
    CHECK(st.avg_doc_length_abstract == Catch::Approx(9.0 / 3.0));
    CHECK(st.current_year == 2010);
    CHECK(c.compute_stats(2024).current_year == 2024);
}

TEST_CASE("empty lines and CRLF endings are tolerated") {
    testutil::temp_dir dir;
    testutil::write_file(dir.file("pubs.tsv"),
                         "p1\t2001\tC\tV\ta1\t\tTitle Words\tBody\r\n"
                         "\r\n"
                         "p2\t2002\tJ\tW\ta1\t\tOther Words\t\n");
    corpus c = corpus::load(dir.file("pubs.tsv"));
    REQUIRE(c.num_publications() == 2);
    CHECK(c.pub_at(c.pub_index("p1")).abstract == "Body");
}

TEST_CASE("malformed publication rows fail with the offending line number") {
    testutil::temp_dir dir;
    auto expect_parse = [&](const std::string& content, std::size_t line) {
        testutil::write_file(dir.file("bad.tsv"), content);
        try {
            corpus::load(dir.file("bad.tsv"));
            FAIL("expected parse_error");
        } catch (const parse_error& e) {
            CHECK(e.line() == line);
        }
    };
    expect_parse("p1\t2001\tC\tV\ta1\t\tT\n", 1);                          // 7 fields
    expect_parse("p1\t2001\tC\tV\ta1\t\tT\tA\np2\tabc\tC\tV\ta1\t\tT\tA\n", 2); // bad year
    expect_parse("p1\t2001\tX\tV\ta1\t\tT\tA\n", 1);                       // bad venue
    expect_parse("\t2001\tC\tV\ta1\t\tT\tA\n", 1);                         // empty id
}

TEST_CASE("semantic violations fail with the offending id") {
    testutil::temp_dir dir;
    testutil::write_file(dir.file("noauth.tsv"), "p1\t2001\tC\tV\t\t\tT\tA\n");
    CHECK_THROWS_MATCHES(corpus::load(dir.file("noauth.tsv")), validation_error,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("p1")));

    testutil::write_file(dir.file("dup.tsv"),
                         "p1\t2001\tC\tV\ta1\t\tT\tA\n"
                         "p1\t2002\tJ\tW\ta2\t\tT\tA\n");
    CHECK_THROWS_MATCHES(corpus::load(dir.file("dup.tsv")), validation_error,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("p1")));

    testutil::write_file(dir.file("ok.tsv"), "p1\t2001\tC\tV\ta1\t\tT\tA\n");
    testutil::write_file(dir.file("dupauth.tsv"), "a1\tA\tX\na1\tB\tY\n");
    CHECK_THROWS_MATCHES(corpus::load(dir.file("ok.tsv"), dir.file("dupauth.tsv")),
                         validation_error,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("a1")));

    testutil::write_file(dir.file("year0.tsv"), "p1\t0\tC\tV\ta1\t\tT\tA\n");
    CHECK_THROWS_AS(corpus::load(dir.file("year0.tsv")), validation_error);
}

TEST_CASE("missing files and unknown ids are reported") {
    testutil::temp_dir dir;
    CHECK_THROWS_AS(corpus::load(dir.file("nope.tsv")), error);
    corpus c = load_sample();
    CHECK_THROWS_AS(c.pub_index("p_nope"), not_found_error);
    CHECK_THROWS_AS(c.author_index("a_nope"), not_found_error);
    CHECK_THROWS_AS(c.author_publications("a_nope"), not_found_error);
}

TEST_CASE("stats of an empty corpus are rejected") {
    corpus c;
    CHECK_THROWS_AS(c.compute_stats(), validation_error);
}

TEST_CASE("snapshot round trip preserves the corpus and is byte stable") {
    corpus c = load_sample();
    testutil::temp_dir dir;
    c.save_snapshot(dir.file("c.bin"));
    c.save_snapshot(dir.file("c2.bin"));
    CHECK(testutil::read_file(dir.file("c.bin")) == testutil::read_file(dir.file("c2.bin")));

    corpus r = corpus::load_snapshot(dir.file("c.bin"));
    CHECK(r.num_publications() == c.num_publications());
    CHECK(r.num_authors() == c.num_authors());
    CHECK(r.dropped_citations() == c.dropped_citations());
    for (std::size_t i = 0; i < c.num_publications(); ++i) {
        const auto& a = c.pub_at(i);
        const auto& b = r.pub_at(r.pub_index(a.id));
        CHECK(a.year == b.year);
        CHECK(a.venue == b.venue);
        CHECK(a.venue_name == b.venue_name);
        CHECK(a.author_ids == b.author_ids);
        CHECK(a.cited_ids == b.cited_ids);
        CHECK(a.title == b.title);
        CHECK(a.abstract == b.abstract);
    }
    const author& a1 = r.author_at(r.author_index("a1"));
    CHECK(a1.name == "Alice");
    CHECK(a1.institution == "MIT");
    CHECK(r.author_at(r.author_index("a3")).name.empty());

    // Re-saving the reloaded corpus reproduces the identical bytes.
    r.save_snapshot(dir.file("c3.bin"));
    CHECK(testutil::read_file(dir.file("c.bin")) == testutil::read_file(dir.file("c3.bin")));

    testutil::write_file(dir.file("junk.bin"), "not a snapshot");
    CHECK_THROWS_AS(corpus::load_snapshot(dir.file("junk.bin")), error);
    CHECK_THROWS_AS(corpus::load_snapshot(dir.file("absent.bin")), error);
}

TEST_CASE("build from records applies the same validation as load") {
    std::vector<publication> pubs(2);
    pubs[0].id = "x1";
    pubs[0].year = 2000;
    pubs[0].author_ids = {"a"};
    pubs[0].title = "one";
    pubs[1] = pubs[0];
    CHECK_THROWS_AS(corpus::build(std::move(pubs)), validation_error);

    std::vector<publication> ok(1);
    ok[0].id = "x1";
    ok[0].year = 2000;
    ok[0].author_ids = {"a", "a"}; // repeated author credited once
    ok[0].title = "one";
    corpus c = corpus::build(std::move(ok));
    CHECK(c.author_at(c.author_index("a")).publication_ids ==
          std::vector<std::string>{"x1"});
}
