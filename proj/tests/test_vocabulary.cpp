#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "bugenrich/error.hpp"
#include "bugenrich/vocabulary.hpp"
#include "fixtures.hpp"

using namespace bugenrich;

namespace {

std::vector<VocabularyEntry> parse(const std::string& tsv) {
    std::istringstream in(tsv);
    return parse_vocabulary(in, "mem");
}

std::vector<VocabularyEntry> numbered(std::size_t n) {
    std::vector<VocabularyEntry> v;
    for (std::size_t i = 0; i < n; ++i) v.push_back({"t" + std::to_string(i), "e", VocabSource::glossary});
    return v;
}

}  // namespace

TEST(LoadVocabulary, ApiDocRow) {
    const auto v = parse("java.io\tProvides for system input and output through data streams\tapi_doc\n");
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0].term, "java.io");
    EXPECT_EQ(v[0].explanation, "Provides for system input and output through data streams");
    EXPECT_EQ(v[0].source, VocabSource::api_doc);
}

TEST(LoadVocabulary, BlankLinesSkipped) {
    EXPECT_EQ(parse("a\tx\tglossary\n\nb\ty\tstackoverflow\nc\tz\tapi_doc\n").size(), 3u);
}

TEST(LoadVocabulary, BadRowsAreParseErrors) {
    try {
        parse("a\tx\tglossary\nb\ty\n");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
    }
    EXPECT_THROW(parse("a\tx\twikipedia\n"), ParseError);
    EXPECT_THROW(load_vocabulary("/nonexistent.tsv"), FileError);
}

TEST(CleanEntry, Examples) {
    auto e = clean_entry({"Thread", "<p>running threads</p>", VocabSource::glossary});
    ASSERT_TRUE(e);
    EXPECT_EQ(e->term, "thread");
    EXPECT_EQ(e->explanation, "run thread");
    e = clean_entry({"x", "see http://a.b for details", VocabSource::glossary});
    ASSERT_TRUE(e);
    EXPECT_EQ(e->explanation, "see for detail");
    EXPECT_FALSE(clean_entry({"x", "<br/>", VocabSource::glossary}));
}

TEST(CleanVocabulary, CountsDrops) {
    const std::vector<VocabularyEntry> in{{"a", "<br/>", VocabSource::glossary}, {"b", "ok", VocabSource::glossary}};
    const auto r = clean_vocabulary(in);
    EXPECT_EQ(r.entries.size(), 1u);
    EXPECT_EQ(r.dropped, 1u);
}

TEST(Dedupe, SourcePriority) {
    const std::vector<VocabularyEntry> in{{"t", "so", VocabSource::stackoverflow},
                                          {"t", "api", VocabSource::api_doc},
                                          {"u", "so", VocabSource::stackoverflow},
                                          {"u", "gl", VocabSource::glossary},
                                          {"v", "only", VocabSource::stackoverflow}};
    const auto d = dedupe(in);
    ASSERT_EQ(d.size(), 3u);
    EXPECT_EQ(d[0].explanation, "api");
    EXPECT_EQ(d[1].explanation, "gl");
    EXPECT_EQ(d[2].explanation, "only");
    EXPECT_EQ(dedupe(d), d);
    const auto no_collisions = numbered(5);
    EXPECT_EQ(dedupe(no_collisions), no_collisions);
}

TEST(SplitDataset, Sizes) {
    const auto s100 = split_dataset(numbered(100), {0.8, 0.1, 0.1}, 42);
    EXPECT_EQ(s100.train.size(), 80u);
    EXPECT_EQ(s100.validation.size(), 10u);
    EXPECT_EQ(s100.test.size(), 10u);
    const auto s10 = split_dataset(numbered(10), {0.8, 0.1, 0.1}, 1);
    EXPECT_EQ(s10.train.size(), 8u);
    EXPECT_EQ(s10.validation.size(), 1u);
    EXPECT_EQ(s10.test.size(), 1u);
}

TEST(SplitDataset, PartitionAndDeterminism) {
    const auto v = numbered(37);
    const auto a = split_dataset(v, {0.8, 0.1, 0.1}, 9);
    const auto b = split_dataset(v, {0.8, 0.1, 0.1}, 9);
    EXPECT_EQ(a.train, b.train);
    EXPECT_EQ(a.test, b.test);
    std::set<std::string> seen;
    for (const auto* part : {&a.train, &a.validation, &a.test}) {
        for (const auto& e : *part) EXPECT_TRUE(seen.insert(e.term).second);
    }
    EXPECT_EQ(seen.size(), 37u);
    EXPECT_EQ(a.train.size(), 29u);  // floor(0.8 * 37)
    EXPECT_EQ(a.validation.size(), 3u);
    const auto c = split_dataset(v, {0.8, 0.1, 0.1}, 10);
    EXPECT_NE(a.train, c.train);
}

TEST(SplitDataset, Errors) {
    EXPECT_THROW(split_dataset(numbered(10), {0.8, 0.1, 0.2}, 1), ArgumentError);
    EXPECT_THROW(split_dataset(numbered(10), {1.1, -0.1, 0.0}, 1), ArgumentError);
    EXPECT_THROW(split_dataset({}, {0.8, 0.1, 0.1}, 1), ArgumentError);
}

TEST(Bleu, IdentityAndEdges) {
    EXPECT_DOUBLE_EQ(bleu("provides for system input and output", "provides for system input and output"), 1.0);
    EXPECT_DOUBLE_EQ(bleu("", "a b c d"), 0.0);
    EXPECT_DOUBLE_EQ(bleu("x y z w", "a b c d"), 0.0);
    const double v = bleu("a b c d e", "a b x d e f");
    EXPECT_GT(v, 0.0);
    EXPECT_LE(v, 1.0);
}

TEST(Bleu, JointRenamingInvariant) {
    EXPECT_DOUBLE_EQ(bleu("alpha beta gamma delta eps", "alpha beta zeta delta"),
                     bleu("one two three four five", "one two six four"));
}

TEST(Bleu, MatchesReferenceFixture) {
    const auto fx = testing_support::load_json("bleu_fixtures.json");
    const int max_n = fx["max_n"].get<int>();
    ASSERT_EQ(fx["cases"].size(), 10u);
    for (const auto& c : fx["cases"]) {
        EXPECT_NEAR(bleu(c["candidate"].get<std::string>(), c["reference"].get<std::string>(), max_n),
                    c["bleu"].get<double>(), 1e-6)
            << c["candidate"];
    }
}
