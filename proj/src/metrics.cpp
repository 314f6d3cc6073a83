#include "bugenrich/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "bugenrich/error.hpp"
#include "bugenrich/rng.hpp"

namespace bugenrich {

std::string_view to_string(HitPolicy p) noexcept {
    return p == HitPolicy::master_only ? "master_only" : "any_in_group";
}

std::optional<HitPolicy> parse_hit_policy(std::string_view s) noexcept {
    if (s == "master_only") return HitPolicy::master_only;
    if (s == "any_in_group") return HitPolicy::any_in_group;
    return std::nullopt;
}

GroundTruth build_ground_truth(const Corpus& corpus, HitPolicy policy) {
    std::map<std::string, std::set<std::string>> groups;  // master -> members
    for (const auto& r : corpus.reports()) {
        if (r.master_id) groups[*r.master_id].insert(r.id);
    }
    GroundTruth truth;
    for (const auto& r : corpus.reports()) {
        if (!r.master_id) continue;
        auto& hits = truth[r.id];
        hits.insert(*r.master_id);
        if (policy == HitPolicy::any_in_group) {
            for (const auto& member : groups[*r.master_id]) {
                if (member != r.id) hits.insert(member);
            }
        }
    }
    return truth;
}

std::optional<std::size_t> first_hit_rank(const RankedList& list, const std::set<std::string>& truth) {
    for (std::size_t i = 0; i < list.ranking.size(); ++i) {
        if (truth.contains(list.ranking[i].id)) return i + 1;
    }
    return std::nullopt;
}

double recall_rate_at_k(std::span<const RankedList> lists, const GroundTruth& truth, int k) {
    if (k < 1) throw ArgumentError("k must be >= 1");
    if (truth.empty()) return 0.0;
    std::unordered_map<std::string, const RankedList*> by_query;
    for (const auto& l : lists) by_query.emplace(l.query_id, &l);
    std::size_t detected = 0;
    for (const auto& [query, hits] : truth) {
        const auto it = by_query.find(query);
        if (it == by_query.end()) throw ValidationError("no ranked list for query " + query, {query});
        const auto rank = first_hit_rank(*it->second, hits);
        if (rank && *rank <= static_cast<std::size_t>(k)) ++detected;
    }
    return static_cast<double>(detected) / static_cast<double>(truth.size());
}

Classification classification_metrics(const ConfusionCounts& c) {
    const auto ratio = [](std::size_t num, std::size_t den) {
        return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
    };
    Classification m;
    m.precision = ratio(c.tp, c.tp + c.fp);
    m.recall = ratio(c.tp, c.tp + c.fn);
    const double sum = m.precision + m.recall;
    m.f1 = sum == 0.0 ? 0.0 : 2.0 * m.precision * m.recall / sum;
    return m;
}

double auc(std::span<const ScoreLabel> scored) {
    std::size_t pos = 0;
    for (const auto& s : scored) pos += s.positive ? 1 : 0;
    const std::size_t neg = scored.size() - pos;
    if (pos == 0 || neg == 0) throw ArgumentError("AUC needs at least one positive and one negative label");

    std::vector<std::size_t> order(scored.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scored[a].score < scored[b].score; });

    // Sum of average ranks of positives (1-based).
    double rank_sum = 0.0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j < order.size() && scored[order[j]].score == scored[order[i]].score) ++j;
        const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t t = i; t < j; ++t) {
            if (scored[order[t]].positive) rank_sum += avg_rank;
        }
        i = j;
    }
    const double p = static_cast<double>(pos);
    const double n = static_cast<double>(neg);
    return (rank_sum - p * (p + 1.0) / 2.0) / (p * n);
}

ConfusionCounts threshold_predictions(std::span<const ScoreLabel> scored, double threshold) {
    ConfusionCounts c;
    for (const auto& s : scored) {
        const bool predicted = s.score >= threshold;
        if (predicted && s.positive) ++c.tp;
        else if (predicted) ++c.fp;
        else if (s.positive) ++c.fn;
        else ++c.tn;
    }
    return c;
}

double best_f1_threshold(std::span<const ScoreLabel> scored) {
    std::vector<double> candidates;
    for (const auto& s : scored) candidates.push_back(s.score);
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    double best = std::numeric_limits<double>::infinity();
    double best_f1 = -1.0;
    for (auto it = candidates.rbegin(); it != candidates.rend(); ++it) {
        const double f1 = classification_metrics(threshold_predictions(scored, *it)).f1;
        if (f1 > best_f1) {
            best_f1 = f1;
            best = *it;
        }
    }
    return best;
}

std::vector<double> subsample(std::size_t n_items, const std::function<double(std::span<const std::size_t>)>& metric,
                              int n_samples, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction <= 1.0)) throw ArgumentError("subsample fraction must lie in (0, 1]");
    if (n_samples < 0) throw ArgumentError("n_samples must be >= 0");
    const auto size = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n_items))));
    SeededRng rng(seed);
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(n_samples));
    for (int s = 0; s < n_samples; ++s) {
        auto idx = rng.sample_indices(n_items, size);
        std::sort(idx.begin(), idx.end());
        values.push_back(metric(idx));
    }
    return values;
}

std::vector<int> sweep_ks(int k_from, int k_to, int step) {
    if (k_from < 1 || k_from > k_to || step < 1) throw ArgumentError("sweep requires 1 <= k_from <= k_to and step >= 1");
    std::vector<int> ks;
    for (int k = k_from; k <= k_to; k += step) ks.push_back(k);
    return ks;
}

std::vector<double> k_sweep(std::span<const RankedList> lists, const GroundTruth& truth, int k_from, int k_to,
                            int step) {
    std::vector<double> out;
    for (int k : sweep_ks(k_from, k_to, step)) out.push_back(recall_rate_at_k(lists, truth, k));
    return out;
}

}  // namespace bugenrich
