#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "bugenrich/error.hpp"
#include "bugenrich/metrics.hpp"

using namespace bugenrich;

namespace {

BugReport report(std::string id, std::int64_t t, std::optional<std::string> master = std::nullopt) {
    return {std::move(id), "s", "d", t, std::move(master), std::nullopt, "p", std::nullopt};
}

RankedList list(std::string q, std::vector<std::string> ids) {
    RankedList out{std::move(q), {}};
    double s = static_cast<double>(ids.size());
    for (auto& id : ids) out.ranking.push_back({std::move(id), s--});
    return out;
}

}  // namespace

TEST(GroundTruth, Policies) {
    const Corpus c{{report("m", 1), report("d1", 2, "m"), report("d2", 3, "m"), report("x", 4)}};
    const auto master_only = build_ground_truth(c, HitPolicy::master_only);
    ASSERT_EQ(master_only.size(), 2u);
    EXPECT_EQ(master_only.at("d2"), (std::set<std::string>{"m"}));
    const auto group = build_ground_truth(c, HitPolicy::any_in_group);
    EXPECT_EQ(group.at("d2"), (std::set<std::string>{"m", "d1"}));
    EXPECT_EQ(group.at("d1"), (std::set<std::string>{"m", "d2"}));
}

TEST(RecallRate, HitAtRankOne) {
    const GroundTruth truth{{"q", {"m"}}};
    const std::vector<RankedList> lists{list("q", {"m", "x", "y"})};
    for (int k : {1, 5, 10}) EXPECT_DOUBLE_EQ(recall_rate_at_k(lists, truth, k), 1.0);
}

TEST(RecallRate, HitAtRankSeven) {
    const GroundTruth truth{{"q", {"m"}}};
    const std::vector<RankedList> lists{list("q", {"a", "b", "c", "d", "e", "f", "m"})};
    EXPECT_DOUBLE_EQ(recall_rate_at_k(lists, truth, 5), 0.0);
    EXPECT_DOUBLE_EQ(recall_rate_at_k(lists, truth, 10), 1.0);
    EXPECT_EQ(first_hit_rank(lists[0], truth.at("q")), 7u);
}

TEST(RecallRate, FractionAndMonotone) {
    const GroundTruth truth{{"q1", {"m"}}, {"q2", {"m"}}, {"q3", {"m"}}, {"q4", {"m"}}};
    const std::vector<RankedList> lists{list("q1", {"m"}), list("q2", {"a", "m"}), list("q3", {"a", "b", "c"}),
                                        list("q4", {"a", "b", "m"})};
    EXPECT_DOUBLE_EQ(recall_rate_at_k(lists, truth, 1), 0.25);
    EXPECT_DOUBLE_EQ(recall_rate_at_k(lists, truth, 2), 0.5);
    EXPECT_DOUBLE_EQ(recall_rate_at_k(lists, truth, 3), 0.75);
    double prev = 0.0;
    for (int k = 1; k <= 20; ++k) {
        const double r = recall_rate_at_k(lists, truth, k);
        EXPECT_GE(r, prev);
        prev = r;
    }
}

TEST(RecallRate, Errors) {
    const GroundTruth truth{{"q", {"m"}}};
    const std::vector<RankedList> lists{list("q", {"m"})};
    EXPECT_THROW(recall_rate_at_k(lists, truth, 0), ArgumentError);
    EXPECT_THROW(recall_rate_at_k({}, truth, 1), ValidationError);
}

TEST(Classification, Examples) {
    const auto m = classification_metrics({8, 2, 4, 86});
    EXPECT_DOUBLE_EQ(m.precision, 0.8);
    EXPECT_NEAR(m.recall, 8.0 / 12.0, 1e-12);
    EXPECT_NEAR(m.f1, 2 * 0.8 * (8.0 / 12.0) / (0.8 + 8.0 / 12.0), 1e-12);
    const auto z = classification_metrics({0, 0, 0, 10});
    EXPECT_EQ(z.precision, 0.0);
    EXPECT_EQ(z.recall, 0.0);
    EXPECT_EQ(z.f1, 0.0);
}

TEST(Auc, PerfectRandomAndMixed) {
    const std::vector<ScoreLabel> perfect{{0.9, true}, {0.8, true}, {0.2, false}, {0.1, false}};
    EXPECT_DOUBLE_EQ(auc(perfect), 1.0);
    const std::vector<ScoreLabel> tied{{0.5, true}, {0.5, false}, {0.5, true}, {0.5, false}};
    EXPECT_DOUBLE_EQ(auc(tied), 0.5);
    // positives 0.8, 0.4 vs negatives 0.6, 0.2: 3 of 4 orderings correct
    const std::vector<ScoreLabel> mixed{{0.8, true}, {0.4, true}, {0.6, false}, {0.2, false}};
    EXPECT_DOUBLE_EQ(auc(mixed), 0.75);
    const std::vector<ScoreLabel> one_class{{0.8, true}, {0.4, true}};
    EXPECT_THROW(auc(one_class), ArgumentError);
}

TEST(Threshold, PredictionsAndBestF1) {
    const std::vector<ScoreLabel> s{{0.9, true}, {0.7, true}, {0.6, false}, {0.3, true}, {0.1, false}};
    const auto c = threshold_predictions(s, 0.65);
    EXPECT_EQ(c, (ConfusionCounts{2, 0, 1, 2}));
    EXPECT_EQ(threshold_predictions(s, 0.7).tp, 2u);  // inclusive
    // t=0.3 gives P=3/4 R=1 F1=6/7; t=0.7 gives P=1 R=2/3 F1=0.8
    EXPECT_DOUBLE_EQ(best_f1_threshold(s), 0.3);
    EXPECT_EQ(best_f1_threshold({}), std::numeric_limits<double>::infinity());
}

TEST(Stratify, SplitsByCategory) {
    const std::vector<int> items{0, 1, 2, 3, 4};
    const auto strata = stratify<int>(items, [](int i) -> std::optional<PairCategory> {
        if (i == 4) return std::nullopt;
        return i % 2 ? PairCategory::similar : PairCategory::dissimilar;
    });
    EXPECT_EQ(strata.similar, (std::vector<int>{1, 3}));
    EXPECT_EQ(strata.dissimilar, (std::vector<int>{0, 2}));
    EXPECT_EQ(strata.unlabeled, 1u);
}

TEST(Subsample, SeededDrawsWithoutReplacement) {
    std::vector<std::size_t> seen_sizes;
    const auto metric = [&](std::span<const std::size_t> idx) {
        std::set<std::size_t> uniq(idx.begin(), idx.end());
        EXPECT_EQ(uniq.size(), idx.size());
        for (auto i : idx) EXPECT_LT(i, 10u);
        seen_sizes.push_back(idx.size());
        double s = 0;
        for (auto i : idx) s += static_cast<double>(i);
        return s;
    };
    const auto a = subsample(10, metric, 20, 0.8, 7);
    const auto b = subsample(10, metric, 20, 0.8, 7);
    const auto c = subsample(10, metric, 20, 0.8, 8);
    EXPECT_EQ(a.size(), 20u);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, c);
    for (auto n : seen_sizes) EXPECT_EQ(n, 8u);
    EXPECT_THROW(subsample(10, metric, 2, 0.0, 1), ArgumentError);
    EXPECT_THROW(subsample(10, metric, 2, 1.5, 1), ArgumentError);
}

TEST(KSweep, GridAndValues) {
    EXPECT_EQ(sweep_ks(1, 100, 5).front(), 1);
    EXPECT_EQ(sweep_ks(1, 100, 5).back(), 96);
    EXPECT_EQ(sweep_ks(1, 100, 5).size(), 20u);
    const GroundTruth truth{{"q", {"m"}}};
    const std::vector<RankedList> lists{list("q", {"a", "b", "c", "d", "e", "f", "m"})};
    const auto values = k_sweep(lists, truth, 1, 11, 5);
    EXPECT_EQ(values, (std::vector<double>{0.0, 0.0, 1.0}));  // k = 1, 6, 11
}

TEST(HitPolicy, Names) {
    EXPECT_EQ(parse_hit_policy("master_only"), HitPolicy::master_only);
    EXPECT_EQ(parse_hit_policy("any_in_group"), HitPolicy::any_in_group);
    EXPECT_EQ(parse_hit_policy("all"), std::nullopt);
}
