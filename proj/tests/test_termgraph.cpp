#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "bugenrich/error.hpp"
#include "bugenrich/termgraph.hpp"

using namespace bugenrich;

namespace {

TokenStream stream(std::vector<Sentence> sentences) { return {"r", std::move(sentences)}; }

double total(const GraphScores& g) {
    double s = 0.0;
    for (const auto& [t, v] : g.scores) s += v;
    return s;
}

}  // namespace

TEST(CooccurrenceGraph, AdjacentWindow) {
    const auto g = build_cooccurrence_graph(stream({{"a", "b", "c"}}), 2);
    EXPECT_EQ(g.vertex_count(), 3u);
    EXPECT_EQ(g.edge_count(), 2u);
    EXPECT_EQ(g.weight("a", "b"), 1);
    EXPECT_EQ(g.weight("b", "c"), 1);
    EXPECT_EQ(g.weight("a", "c"), 0);
}

TEST(CooccurrenceGraph, WeightsAccumulateAcrossSentences) {
    const auto g = build_cooccurrence_graph(stream({{"a", "b"}, {"a", "b"}}), 2);
    EXPECT_EQ(g.weight("a", "b"), 2);
    EXPECT_EQ(g.weight("b", "a"), 2);
}

TEST(CooccurrenceGraph, SingleTokenIsIsolatedVertex) {
    const auto g = build_cooccurrence_graph(stream({{"a"}}), 2);
    EXPECT_EQ(g.vertex_count(), 1u);
    EXPECT_EQ(g.edge_count(), 0u);
}

TEST(CooccurrenceGraph, WiderWindowAndNoSelfLoops) {
    const auto g = build_cooccurrence_graph(stream({{"a", "a", "b"}}), 3);
    EXPECT_EQ(g.weight("a", "a"), 0);
    EXPECT_EQ(g.weight("a", "b"), 2);
    // No sentence crossing.
    const auto h = build_cooccurrence_graph(stream({{"a"}, {"b"}}), 5);
    EXPECT_EQ(h.edge_count(), 0u);
}

TEST(CooccurrenceGraph, WindowBelowTwoThrows) {
    EXPECT_THROW(build_cooccurrence_graph(stream({{"a"}}), 1), ArgumentError);
}

TEST(PosTagger, LexiconAndRules) {
    const auto tagged = pos_tag(stream({{"compiler", "crashes"}, {"serialization", "xqzt"}}));
    ASSERT_EQ(tagged.size(), 2u);
    EXPECT_EQ(tagged[0][0].pos, Pos::noun);
    EXPECT_EQ(tagged[0][1].pos, Pos::verb);
    EXPECT_EQ(tagged[1][0].pos, Pos::noun);
    EXPECT_EQ(tagged[1][1].pos, Pos::other);
}

TEST(PosTagger, SuffixRules) {
    EXPECT_EQ(pos_by_suffix("tokenization"), Pos::noun);
    EXPECT_EQ(pos_by_suffix("normalize"), Pos::verb);
    EXPECT_EQ(pos_by_suffix("serializable"), Pos::adjective);
    EXPECT_EQ(pos_by_suffix("qqq"), std::nullopt);
    EXPECT_GE(PosLexicon::bundled().size(), 5000u);
}

TEST(PosTagger, SidecarOverridesAndChecksShape) {
    std::istringstream in(R"({"report_id":"r","sentences":[[["parse","VB"],["tree","NN"]]]})"
                          "\n");
    const auto sidecar = PosSidecar::parse(in);
    const auto tagged = pos_tag(stream({{"parse", "tree"}}), sidecar);
    EXPECT_EQ(tagged[0][0].pos, Pos::verb);
    EXPECT_EQ(tagged[0][1].pos, Pos::noun);
    try {
        pos_tag(stream({{"parse", "tree", "extra"}}), sidecar);
        FAIL() << "expected ValidationError";
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("r"), std::string::npos);
    }
}

TEST(PosGraph, EdgeRule) {
    const std::vector<PosTaggedSentence> one{{{"null", Pos::noun}, {"is", Pos::other}}};
    EXPECT_EQ(build_pos_graph(one, 2).weight("null", "is"), 1);
    const std::vector<PosTaggedSentence> none{{{"is", Pos::other}, {"of", Pos::other}}};
    EXPECT_EQ(build_pos_graph(none, 2).edge_count(), 0u);
    const std::vector<PosTaggedSentence> both{{{"parse", Pos::verb}, {"tree", Pos::noun}}};
    EXPECT_EQ(build_pos_graph(both, 2).weight("parse", "tree"), 1);
    EXPECT_THROW(build_pos_graph(both, 1), ArgumentError);
}

TEST(RankGraph, CompleteGraphIsUniform) {
    TextGraph g;
    for (const char* u : {"a", "b", "c"}) {
        for (const char* v : {"a", "b", "c"}) {
            if (std::string(u) < v) g.add_edge(u, v);
        }
    }
    const auto r = rank_graph(g);
    EXPECT_TRUE(r.converged);
    for (const auto& [t, s] : r.scores) EXPECT_NEAR(s, 1.0 / 3.0, 1e-9);
}

TEST(RankGraph, PathCentreWins) {
    TextGraph g;
    g.add_edge("a", "b");
    g.add_edge("b", "c");
    const auto r = rank_graph(g);
    EXPECT_GT(r.scores.at("b"), r.scores.at("a"));
    EXPECT_NEAR(r.scores.at("a"), r.scores.at("c"), 1e-12);
    EXPECT_NEAR(total(r), 1.0, 1e-6 * 3);
    EXPECT_EQ(r.ordered_terms(), (std::vector<std::string>{"b", "a", "c"}));
}

TEST(RankGraph, IsolatedVertexScoresOne) {
    TextGraph g;
    g.add_vertex("x");
    const auto r = rank_graph(g);
    EXPECT_NEAR(r.scores.at("x"), 1.0, 1e-12);
}

TEST(RankGraph, EmptyGraphAndBadOptionsThrow) {
    EXPECT_THROW(rank_graph(TextGraph{}), ArgumentError);
    TextGraph g;
    g.add_vertex("x");
    EXPECT_THROW(rank_graph(g, {1.5, 1e-6, 100}), ArgumentError);
}

TEST(RankGraph, NonConvergenceIsFlagged) {
    TextGraph g;
    g.add_edge("a", "b", 5);
    g.add_edge("b", "c");
    g.add_edge("c", "d", 3);
    const auto r = rank_graph(g, {0.85, 1e-15, 1});
    EXPECT_FALSE(r.converged);
    EXPECT_EQ(r.iterations, 1);
    EXPECT_NEAR(total(r), 1.0, 1e-9);
}

TEST(Doi, Values) {
    EXPECT_DOUBLE_EQ(doi(1, 10).value(), 0.1);
    EXPECT_EQ(doi(7, 7), Rational(1, 1));
    EXPECT_THROW(doi(0, 5), ArgumentError);
    EXPECT_THROW(doi(6, 5), ArgumentError);
    EXPECT_THROW(doi(1, 0), ArgumentError);
    for (int i = 1; i < 9; ++i) EXPECT_LT(doi(i, 9), doi(i + 1, 9));
}

TEST(Fuse, IdenticalListsKeepOrder) {
    const std::vector<std::vector<std::string>> lists{{"x", "y", "z"}, {"x", "y", "z"}};
    EXPECT_EQ(fuse_rankings(lists).terms(), (std::vector<std::string>{"x", "y", "z"}));
}

TEST(Fuse, TieBrokenLexicographically) {
    const std::vector<std::vector<std::string>> lists{{"y", "x"}, {"x", "y"}};
    const auto f = fuse_rankings(lists);
    EXPECT_EQ(f.terms(), (std::vector<std::string>{"x", "y"}));
    EXPECT_EQ(f.entries[0].fused_doi, Rational(3, 2));
    EXPECT_EQ(f.entries[1].fused_doi, Rational(3, 2));
}

TEST(Fuse, MissingTermCountsOne) {
    const std::vector<std::vector<std::string>> lists{{"x", "y"}, {"y"}};
    const auto f = fuse_rankings(lists);
    EXPECT_EQ(f.terms(), (std::vector<std::string>{"x", "y"}));
    EXPECT_EQ(f.entries[0].fused_doi, Rational(3, 2));
    EXPECT_EQ(f.entries[1].fused_doi, Rational(2, 1));
    EXPECT_EQ(f.entries[0].position, 1u);
    EXPECT_EQ(f.entries[1].position, 2u);
}

TEST(Fuse, EmptyAndRepeatedTerms) {
    const std::vector<std::vector<std::string>> empty{{}, {}};
    EXPECT_TRUE(fuse_rankings(empty).empty());
    const std::vector<std::vector<std::string>> bad{{"x", "x"}, {}};
    EXPECT_THROW(fuse_rankings(bad), ArgumentError);
}

TEST(MergeNer, Rules) {
    const std::vector<std::vector<std::string>> lists{{"a", "b"}, {"a", "b"}};
    const auto fused = fuse_rankings(lists);
    const auto same = merge_ner_terms(fused, {});
    EXPECT_EQ(same.terms(), fused.terms());
    EXPECT_EQ(same.sources, fused.sources);

    EXPECT_EQ(merge_ner_terms(fused, {"a"}).terms().front(), "a");

    const std::vector<std::vector<std::string>> one{{"a"}, {"a"}};
    const auto merged = merge_ner_terms(fuse_rankings(one), {"jvm"});
    ASSERT_EQ(merged.size(), 2u);
    EXPECT_EQ(merged.entries[1].term, "jvm");
    EXPECT_EQ(merged.entries[1].fused_doi, Rational(3, 1));
}

TEST(TopK, Clamp) {
    std::vector<std::string> many;
    for (int i = 0; i < 25; ++i) many.push_back("t" + std::to_string(100 + i));
    const std::vector<std::vector<std::string>> lists{many, many};
    const auto f = fuse_rankings(lists);
    EXPECT_EQ(top_k_terms(f, 10).size(), 10u);
    EXPECT_EQ(top_k_terms(f, 1), (std::vector<std::string>{"t100"}));
    const std::vector<std::vector<std::string>> three{{"a", "b", "c"}, {"a", "b", "c"}};
    EXPECT_EQ(top_k_terms(fuse_rankings(three), 10).size(), 3u);
    EXPECT_THROW(top_k_terms(f, 0), ArgumentError);
}

TEST(NerSidecar, NormalisesTerms) {
    std::istringstream in(R"({"report_id":"r","terms":["JVM","  Garbage   Collector ","jvm"]})"
                          "\n");
    const auto ner = NerSidecar::parse(in);
    ASSERT_NE(ner.find("r"), nullptr);
    EXPECT_EQ(*ner.find("r"), (std::vector<std::string>{"jvm", "garbage collector"}));
    EXPECT_EQ(ner.find("zz"), nullptr);
}

TEST(ExtractTerms, ShortReportKeepsEveryTerm) {
    const auto ts = stream({{"javadoc", "hover", "module", "name"}, {"module", "composer"}});
    const auto e = extract_terms(ts, {});
    EXPECT_EQ(e.top_terms.size(), 5u);
    EXPECT_EQ(e.top_terms.front(), "module");
    const auto empty = extract_terms(stream({}), {});
    EXPECT_TRUE(empty.top_terms.empty());
}
