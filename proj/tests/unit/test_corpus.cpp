#include <algorithm>
#include <map>
#include <random>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "storychain/corpus.hpp"
#include "storychain/errors.hpp"

using namespace storychain;
using storychain::testing::article;
using storychain::testing::TempDir;

using Tokens = std::vector<std::string>;

TEST_CASE("tokenize splits on non-alphanumeric bytes and lowercases") {
    CHECK(tokenize("").empty());
    CHECK(tokenize("Boston Marathon bombing") == Tokens{"boston", "marathon", "bombing"});
    CHECK(tokenize("£3.5m jackpot!") == Tokens{"3", "5m", "jackpot"});
    CHECK(tokenize("  --  ").empty());
    CHECK(tokenize("UK's PM, 10-Downing St.") == Tokens{"uk", "s", "pm", "10", "downing", "st"});
}

TEST_CASE("tokenize is idempotent on its own joined output") {
    std::mt19937_64 rng(7);
    const std::string alphabet = "abcXYZ019 .,;'-!\xc2\xa3\t\n";
    for (int round = 0; round < 500; ++round) {
        std::string text;
        const auto len = rng() % 60;
        for (std::size_t i = 0; i < len; ++i) text += alphabet[rng() % alphabet.size()];
        const auto once = tokenize(text);
        std::string joined;
        for (const auto& t : once) joined += t + " ";
        CHECK(tokenize(joined) == once);
    }
}

TEST_CASE("timestamps normalise to UTC") {
    CHECK(format_timestamp(*parse_timestamp("2013-04-15")) == "2013-04-15T00:00:00Z");
    CHECK(format_timestamp(*parse_timestamp("2013-04-15T14:50:00Z")) == "2013-04-15T14:50:00Z");
    CHECK(format_timestamp(*parse_timestamp("2013-04-15 14:50:00.25+01:00")) == "2013-04-15T13:50:00Z");
    CHECK(format_timestamp(*parse_timestamp("2013-04-15T14:50-0230")) == "2013-04-15T17:20:00Z");
    CHECK_FALSE(parse_timestamp("yesterday"));
    CHECK_FALSE(parse_timestamp("2013-13-01"));
    CHECK_FALSE(parse_timestamp("2013-02-30T00:00:00Z"));
    CHECK_FALSE(parse_timestamp(""));
}

TEST_CASE("corpus orders by time and rejects duplicate ids") {
    auto c = Corpus::from_articles({article("b", "", "x", "2013-04-16T00:00:00Z"),
                                    article("a", "", "y", "2013-04-15T00:00:00Z"),
                                    article("c", "", "z", "2013-04-15T00:00:00Z")});
    REQUIRE(c.size() == 3);
    CHECK(c[0].id == "a");
    CHECK(c[1].id == "c");
    CHECK(c[2].id == "b");
    CHECK(c.find("b") == DocId{2});
    CHECK_FALSE(c.find("zz"));

    try {
        Corpus::from_articles({article("a1", "", "x", "2013-04-15"), article("a1", "", "y", "2013-04-16")});
        FAIL("duplicate id accepted");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("a1") != std::string::npos);
    }
}

TEST_CASE("load_corpus reads JSON lines and tallies malformed records") {
    TempDir dir;
    const auto path = dir.write("c.jsonl",
                                R"({"id":"a2","source":"bbc","title":"T2","body":"b two","published":"2013-04-16T10:00:00Z"})"
                                "\n"
                                R"({"id":"a1","source":"bbc","title":"T1","body":"b one","published":"2013-04-15T10:00:00Z","url":"http://x"})"
                                "\n\n"
                                R"({"id":"a3","source":"sun","title":"T3","body":"b three","published":"2013-04-15T09:00:00+01:00"})"
                                "\n");
    const auto result = load_corpus(path, CorpusFormat::jsonl);
    CHECK(result.report.rejected == 0);
    REQUIRE(result.corpus.size() == 3);
    CHECK(result.corpus[0].id == "a3");
    CHECK(result.corpus[1].id == "a1");
    CHECK(result.corpus[1].url == "http://x");
    CHECK(result.corpus[2].id == "a2");

    const auto bad = dir.write("bad.jsonl",
                               R"({"id":"a1","source":"bbc","title":"T1","published":"2013-04-15T10:00:00Z"})"
                               "\n"
                               R"({"id":"a2","source":"bbc","title":"T","body":"b","published":"2013-04-15T10:00:00Z"})"
                               "\n"
                               R"({"id":"a3","source":"bbc","title":"T","body":"b","published":"soon"})"
                               "\n"
                               "{not json\n"
                               R"({"id":"a4","source":"bbc","title":7,"body":"b","published":"2013-04-15"})"
                               "\n");
    const auto partial = load_corpus(bad, CorpusFormat::jsonl);
    CHECK(partial.corpus.size() == 1);
    CHECK(partial.report.accepted == 1);
    CHECK(partial.report.rejected == 4);
    REQUIRE(partial.report.reasons.size() == 4);
    CHECK(partial.report.reasons[0] == "line 1: missing field 'body'");
    CHECK(partial.report.reasons[1].rfind("line 3:", 0) == 0);
    CHECK(partial.report.reasons[2] == "line 4: malformed JSON");

    const auto dup = dir.write("dup.jsonl",
                               R"({"id":"a1","source":"s","title":"t","body":"b","published":"2013-04-15"})"
                               "\n"
                               R"({"id":"a1","source":"s","title":"t","body":"c","published":"2013-04-16"})"
                               "\n");
    CHECK_THROWS_AS(load_corpus(dup, CorpusFormat::jsonl), DataError);
    CHECK_THROWS_AS(load_corpus(dir / "missing.jsonl", CorpusFormat::jsonl), IoError);
}

TEST_CASE("load_corpus reads CSV with quoted fields") {
    TempDir dir;
    const auto path = dir.write("c.csv",
                                "id,source,title,body,published\n"
                                "a1,bbc,\"Title, with comma\",\"Body with \"\"quotes\"\"\nand a newline\",2013-04-15T10:00:00Z\n"
                                "a2,sun,T2,short,2013-04-14T10:00:00Z\n"
                                "a3,sun,T3,too,many,2013-04-14T10:00:00Z\n");
    const auto result = load_corpus(path, CorpusFormat::csv);
    CHECK(result.report.rejected == 1);
    REQUIRE(result.corpus.size() == 2);
    CHECK(result.corpus[1].title == "Title, with comma");
    CHECK(result.corpus[1].body == "Body with \"quotes\"\nand a newline");
    CHECK(result.report.reasons[0].rfind("line 5:", 0) == 0);

    const auto headless = dir.write("h.csv", "id,source,title,published\na,b,c,2013-04-15\n");
    CHECK_THROWS_AS(load_corpus(headless, CorpusFormat::csv), DataError);
}

TEST_CASE("corpus survives a JSON lines round trip") {
    TempDir dir;
    auto a = article("x", "Tab\there", "Unicode \xc3\xa9 and \"quotes\"", "2013-04-15T10:00:00Z");
    a.url = "http://example.org/x";
    const auto c = Corpus::from_articles({a, article("y", "T", "B", "2013-04-14T10:00:00Z")});
    write_corpus_jsonl(c, dir / "out.jsonl");
    const auto back = load_corpus(dir / "out.jsonl", CorpusFormat::jsonl);
    CHECK(back.report.rejected == 0);
    CHECK(back.corpus.content_hash() == c.content_hash());
}

TEST_CASE("build_stats counts") {
    SUBCASE("single document") {
        const auto c = Corpus::from_articles({article("d", "", "a a b", "2013-04-15")});
        const auto s = build_stats(c);
        const auto ta = *s.find_term("a");
        const auto tb = *s.find_term("b");
        CHECK(s.document_count() == 1);
        CHECK(s.corpus_frequency(ta) == 2);
        CHECK(s.corpus_frequency(tb) == 1);
        CHECK(s.field_length(0, Field::body) == 3);
        CHECK(s.average_field_length(Field::body) == 3.0);
        CHECK(s.document_frequency(ta) == 1);
        CHECK(s.total_tokens() == 3);
    }
    SUBCASE("shared term") {
        const auto c = Corpus::from_articles({article("d1", "", "a", "2013-04-15"), article("d2", "", "a", "2013-04-16")});
        const auto s = build_stats(c);
        const auto ta = *s.find_term("a");
        CHECK(s.document_frequency(ta) == 2);
        CHECK(s.corpus_frequency(ta) == 2);
    }
    SUBCASE("fields are counted separately") {
        const auto c = Corpus::from_articles({article("d1", "Bomb blast", "blast at the marathon blast", "2013-04-15"),
                                              article("d2", "Marathon", "the race", "2013-04-16")});
        const auto s = build_stats(c);
        const auto blast = *s.find_term("blast");
        const auto marathon = *s.find_term("marathon");
        CHECK(s.occurrences(0, Field::title, blast) == 1);
        CHECK(s.occurrences(0, Field::body, blast) == 2);
        CHECK(s.occurrences(0, blast) == 3);
        CHECK(s.occurrences(1, Field::title, marathon) == 1);
        CHECK(s.occurrences(1, Field::body, marathon) == 0);
        CHECK(s.field_length(0, Field::title) == 2);
        CHECK(s.field_length(1, Field::title) == 1);
        CHECK(s.average_field_length(Field::title) == 1.5);
        CHECK(s.average_field_length(Field::body) == 3.5);
        CHECK(s.corpus_frequency(marathon) == 2);
        CHECK(s.document_frequency(marathon) == 2);
        CHECK(s.total_tokens() == 10);
        CHECK_FALSE(s.find_term("runner"));
    }
    CHECK_THROWS_AS(build_stats(Corpus{}), std::invalid_argument);
}

namespace {

Corpus random_corpus(std::mt19937_64& rng, std::size_t n) {
    const char* words[] = {"alpha", "beta", "gamma", "delta", "eps", "zeta", "eta", "theta", "iota", "kappa"};
    std::vector<Article> articles;
    for (std::size_t i = 0; i < n; ++i) {
        std::string title, body;
        for (auto k = rng() % 4; k > 0; --k) title += std::string(words[rng() % 10]) + " ";
        for (auto k = rng() % 30; k > 0; --k) body += std::string(words[rng() % 10]) + ", ";
        Article a = article("d" + std::to_string(i), title, body, "2013-04-15");
        a.published += std::chrono::seconds(rng() % 1000000);
        articles.push_back(std::move(a));
    }
    return Corpus::from_articles(std::move(articles));
}

}  // namespace

TEST_CASE("stats conserve counts") {
    std::mt19937_64 rng(11);
    for (int round = 0; round < 50; ++round) {
        const auto c = random_corpus(rng, 1 + rng() % 20);
        const auto s = build_stats(c);
        std::vector<std::uint64_t> f(s.vocabulary_size(), 0);
        std::vector<std::uint32_t> df(s.vocabulary_size(), 0);
        std::uint64_t tokens = 0;
        std::array<double, kFieldCount> length_sum{};
        for (DocId d = 0; d < c.size(); ++d) {
            for (const auto& tc : s.doc_terms(d)) {
                f[tc.term] += tc.count;
                ++df[tc.term];
                CHECK(tc.count == s.occurrences(d, Field::title, tc.term) + s.occurrences(d, Field::body, tc.term));
            }
            tokens += s.doc_length(d);
            for (const Field fld : kFields) length_sum[static_cast<std::size_t>(fld)] += s.field_length(d, fld);
        }
        for (TermId t = 0; t < s.vocabulary_size(); ++t) {
            CHECK(f[t] == s.corpus_frequency(t));
            CHECK(df[t] == s.document_frequency(t));
            CHECK(df[t] <= c.size());
        }
        CHECK(tokens == s.total_tokens());
        for (const Field fld : kFields) {
            CHECK(s.average_field_length(fld) ==
                  doctest::Approx(length_sum[static_cast<std::size_t>(fld)] / c.size()).epsilon(1e-12));
        }
    }
}

TEST_CASE("reloading a corpus yields identical stats and cache round-trips") {
    std::mt19937_64 rng(3);
    TempDir dir;
    const auto c = random_corpus(rng, 30);
    write_corpus_jsonl(c, dir / "c.jsonl");
    const auto first = load_corpus(dir / "c.jsonl", CorpusFormat::jsonl);
    const auto second = load_corpus(dir / "c.jsonl", CorpusFormat::jsonl);
    const auto s1 = build_stats(first.corpus);
    CHECK(s1 == build_stats(second.corpus));

    const auto hash = first.corpus.content_hash();
    save_stats_cache(s1, hash, dir / "stats.cache");
    const auto cached = load_stats_cache(dir / "stats.cache", hash);
    REQUIRE(cached);
    CHECK(*cached == s1);
    CHECK(cached->find_term("alpha") == s1.find_term("alpha"));
    CHECK_FALSE(load_stats_cache(dir / "stats.cache", hash + 1));
    CHECK_FALSE(load_stats_cache(dir / "nothing.cache", hash));
    dir.write("junk.cache", "not a cache");
    CHECK_FALSE(load_stats_cache(dir / "junk.cache", hash));
}
