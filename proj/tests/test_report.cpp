#include <gtest/gtest.h>

#include <json.hpp>
#include <limits>
#include <sstream>

#include "bugenrich/error.hpp"
#include "bugenrich/report.hpp"

using namespace bugenrich;

namespace {

MetricsReport sample_report(bool with_strata) {
    MetricsReport r;
    r.meta = {"bm25", "original", "master_only", 42};
    r.overall.queries = 10;
    r.overall.recall_rate = {{1, 0.1}, {5, 0.4}, {10, 0.6}};
    r.overall.classification = ClassificationBlock{0.75, 0.6, 2 * 0.75 * 0.6 / 1.35, 0.8125, 3.25, {3, 1, 2, 4}};
    if (with_strata) {
        r.similar = MetricBlock{5, {{1, 0.2}, {5, 0.8}, {10, 1.0}}, std::nullopt};
        r.dissimilar = MetricBlock{5, {{1, 0.0}, {5, 0.0}, {10, 0.2}}, std::nullopt};
    }
    r.sweep = {{1, 6, 11}, {0.1, 0.5, 0.6}};
    r.subsamples = {0.375, 0.5, 0.25};
    return r;
}

std::size_t count_lines(const std::string& s) {
    std::size_t n = 0;
    for (char c : s) n += c == '\n';
    return n;
}

}  // namespace

TEST(Report, JsonRoundTrip) {
    for (bool strata : {true, false}) {
        const auto r = sample_report(strata);
        const auto back = metrics_from_json(metrics_to_json(r));
        EXPECT_EQ(back, r);
        EXPECT_EQ(metrics_to_table(back), metrics_to_table(r));
        EXPECT_EQ(metrics_to_csv(back), metrics_to_csv(r));
    }
}

TEST(Report, InfiniteThresholdSurvivesJson) {
    auto r = sample_report(false);
    r.overall.classification->threshold = std::numeric_limits<double>::infinity();
    EXPECT_EQ(metrics_from_json(metrics_to_json(r)), r);
}

TEST(Report, TableOmitsAbsentStrata) {
    const auto with = metrics_to_table(sample_report(true));
    const auto without = metrics_to_table(sample_report(false));
    EXPECT_NE(with.find("similar"), std::string::npos);
    EXPECT_NE(with.find("dissimilar"), std::string::npos);
    EXPECT_EQ(without.find("similar"), std::string::npos);
    EXPECT_EQ(count_lines(with), count_lines(without) + 2);
    EXPECT_NE(with.find("0.4000"), std::string::npos);
}

TEST(Report, CsvHasOneRowPerK) {
    const auto csv = metrics_to_csv(sample_report(true));
    EXPECT_EQ(count_lines(csv), 1u + 3u);
    EXPECT_EQ(csv.substr(0, csv.find('\n')),
              "k,recall_rate,recall_rate_similar,recall_rate_dissimilar,precision,recall,f1,auc");
    const auto plain = metrics_to_csv(sample_report(false));
    EXPECT_EQ(plain.substr(0, plain.find('\n')), "k,recall_rate,precision,recall,f1,auc");
}

TEST(Report, MalformedJson) {
    EXPECT_THROW(metrics_from_json("{"), ParseError);
    EXPECT_THROW(metrics_from_json("{\"overall\": 3}"), ParseError);
}

TEST(Report, FormatNames) {
    EXPECT_EQ(parse_report_format("json"), ReportFormat::json);
    EXPECT_EQ(parse_report_format("table"), ReportFormat::table);
    EXPECT_EQ(parse_report_format("csv"), ReportFormat::csv);
    try {
        parse_report_format("xml");
        FAIL() << "expected ArgumentError";
    } catch (const ArgumentError& e) {
        EXPECT_NE(std::string(e.what()).find("xml"), std::string::npos);
    }
}

TEST(Report, SweepCsv) {
    EXPECT_EQ(k_sweep_to_csv({{1, 6}, {0.5, 1.0}}).substr(0, 14), "k,recall_rate\n");
}

TEST(Report, CompareJsonHasDeltaAndSignificance) {
    CompareReport c;
    c.original = sample_report(true);
    c.enriched = sample_report(true);
    c.enriched.meta.corpus_variant = "enriched";
    c.enriched.overall.recall_rate[5] = 0.7;
    stats::SignificanceReport sig;
    sig.test_name = "wilcoxon_signed_rank";
    sig.effect_name = "cliffs_delta";
    sig.p_value = 0.001;
    sig.normality_p = {0.01, 0.02};
    c.significance = {{"overall", {sig, ""}}, {"similar", {std::nullopt, "degenerate"}}};
    const auto j = nlohmann::json::parse(compare_to_json(c));
    EXPECT_EQ(j["primary_k"], 5);
    EXPECT_NEAR(j["delta"]["overall"]["recall_rate"]["5"].get<double>(), 0.3, 1e-12);
    EXPECT_EQ(j["significance"]["overall"]["test"], "wilcoxon_signed_rank");
    EXPECT_EQ(j["significance"]["similar"]["error"], "degenerate");
    EXPECT_NE(compare_to_table(c).find("wilcoxon_signed_rank"), std::string::npos);
    EXPECT_NE(emit_compare(c, ReportFormat::csv).find("dataset,stratum,k,recall_rate"), std::string::npos);
}
