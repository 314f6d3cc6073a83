#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "bugenrich/corpus.hpp"
#include "bugenrich/retrieval.hpp"

namespace bugenrich {

/// Which retrieved report counts as a hit for a duplicate query.
enum class HitPolicy {
    master_only,  // the report's own master
    any_in_group  // any report sharing the same master, or the master itself
};

std::string_view to_string(HitPolicy p) noexcept;
std::optional<HitPolicy> parse_hit_policy(std::string_view s) noexcept;

/// query id -> ids whose retrieval counts as detecting the duplicate.
using GroundTruth = std::map<std::string, std::set<std::string>>;

GroundTruth build_ground_truth(const Corpus& corpus, HitPolicy policy = HitPolicy::master_only);

/// N_detected / N_total over every query in `truth`. A query is detected when
/// one of its truth ids sits within the first k entries of its list.
/// Throws ArgumentError when k < 1, ValidationError when a query has no list.
double recall_rate_at_k(std::span<const RankedList> lists, const GroundTruth& truth, int k);

/// 1-based rank of the first truth id in the list, or nullopt.
std::optional<std::size_t> first_hit_rank(const RankedList& list, const std::set<std::string>& truth);

struct ConfusionCounts {
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;

    std::size_t total() const noexcept { return tp + fp + fn + tn; }
    friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

struct Classification {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// Any 0/0 term is defined as 0.
Classification classification_metrics(const ConfusionCounts& counts);

struct ScoreLabel {
    double score = 0.0;
    bool positive = false;
};

/// Mann-Whitney form of ROC AUC with average ranks for tied scores.
/// Throws ArgumentError unless both classes are present.
double auc(std::span<const ScoreLabel> scored);

/// score >= threshold predicts a duplicate.
ConfusionCounts threshold_predictions(std::span<const ScoreLabel> scored, double threshold);

/// Threshold among the observed scores that maximises F1; the larger
/// threshold wins ties. Returns +inf when there is nothing to choose from.
double best_f1_threshold(std::span<const ScoreLabel> scored);

template <typename T>
struct Strata {
    std::vector<T> similar;
    std::vector<T> dissimilar;
    std::size_t unlabeled = 0;
};

template <typename T, typename CategoryOf>
Strata<T> stratify(std::span<const T> items, CategoryOf&& category_of) {
    Strata<T> out;
    for (const auto& item : items) {
        const std::optional<PairCategory> c = category_of(item);
        if (!c) {
            ++out.unlabeled;
        } else if (*c == PairCategory::similar) {
            out.similar.push_back(item);
        } else {
            out.dissimilar.push_back(item);
        }
    }
    return out;
}

/// Recomputes `metric` on n_samples seeded draws of round(fraction * n)
/// item indices (at least 1) without replacement. Throws ArgumentError
/// unless 0 < fraction <= 1.
std::vector<double> subsample(std::size_t n_items, const std::function<double(std::span<const std::size_t>)>& metric,
                              int n_samples, double fraction, std::uint64_t seed);

/// k = k_from, k_from + step, ... while k <= k_to.
std::vector<int> sweep_ks(int k_from, int k_to, int step);
std::vector<double> k_sweep(std::span<const RankedList> lists, const GroundTruth& truth, int k_from = 1,
                            int k_to = 100, int step = 5);

}  // namespace bugenrich
