#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bugenrich/metrics.hpp"
#include "bugenrich/stats.hpp"

namespace bugenrich {

/// Pair-classification results on the test share of the labeled pairs.
struct ClassificationBlock {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double auc = 0.0;
    double threshold = 0.0;
    ConfusionCounts counts;

    friend bool operator==(const ClassificationBlock&, const ClassificationBlock&) = default;
};

struct MetricBlock {
    std::size_t queries = 0;
    std::map<int, double> recall_rate;  // k -> Recall-rate@k
    std::optional<ClassificationBlock> classification;

    friend bool operator==(const MetricBlock&, const MetricBlock&) = default;
};

struct RunMetadata {
    std::string backend;
    std::string corpus_variant;  // original | enriched
    std::string hit_policy;
    std::optional<std::uint64_t> seed;

    friend bool operator==(const RunMetadata&, const RunMetadata&) = default;
};

struct KSweep {
    std::vector<int> ks;
    std::vector<double> recall_rate;

    bool empty() const noexcept { return ks.empty(); }
    friend bool operator==(const KSweep&, const KSweep&) = default;
};

struct MetricsReport {
    RunMetadata meta;
    MetricBlock overall;
    std::optional<MetricBlock> similar;
    std::optional<MetricBlock> dissimilar;
    std::size_t unlabeled_queries = 0;
    KSweep sweep;
    /// Recall-rate at the primary k over each seeded subsample.
    std::vector<double> subsamples;

    friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

/// A significance run that could not be carried out keeps only the reason.
struct SignificanceOutcome {
    std::optional<stats::SignificanceReport> report;
    std::string error;
};

struct CompareReport {
    int primary_k = 5;
    MetricsReport original;
    MetricsReport enriched;
    /// (stratum, outcome) for "overall", then "similar" and "dissimilar" when present.
    std::vector<std::pair<std::string, SignificanceOutcome>> significance;
};

enum class ReportFormat { json, table, csv };

/// Throws ArgumentError naming the format when unknown.
ReportFormat parse_report_format(std::string_view s);

std::string metrics_to_json(const MetricsReport& report);
/// Inverse of metrics_to_json. Throws ParseError on a malformed document.
MetricsReport metrics_from_json(std::string_view text);

/// Aligned columns: one row per stratum; Recall-rate@k for ascending k, then
/// P, R, F1 and AUC. Strata that are absent are omitted.
std::string metrics_to_table(const MetricsReport& report);
/// One row per k; classification columns repeat on every row.
std::string metrics_to_csv(const MetricsReport& report);
std::string emit_report(const MetricsReport& report, ReportFormat format);

std::string k_sweep_to_csv(const KSweep& sweep);

std::string significance_to_json(const stats::SignificanceReport& report);

std::string compare_to_json(const CompareReport& report);
std::string compare_to_table(const CompareReport& report);
/// Rows: variant, stratum, k, recall_rate.
std::string compare_to_csv(const CompareReport& report);
std::string emit_compare(const CompareReport& report, ReportFormat format);

}  // namespace bugenrich
