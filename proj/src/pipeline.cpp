#include "bugenrich/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <set>

#include <json.hpp>

#include "bugenrich/error.hpp"
#include "bugenrich/parallel.hpp"
#include "bugenrich/rng.hpp"

namespace bugenrich {

namespace {

using ordered_json = nlohmann::ordered_json;

// Independent streams derived from the run seed.
constexpr std::uint64_t kSplitStream = 0x9e3779b97f4a7c15ULL;

std::uint64_t required_seed(const RunConfig& config, const char* what) {
    if (!config.seed) throw ConfigError(std::string("seed is required for ") + what);
    return *config.seed;
}

std::optional<PairCategory> query_category(const Corpus& corpus, const std::string& id) {
    const auto* r = corpus.find(id);
    return r ? r->pair_category : std::nullopt;
}

bool in_stratum(const Corpus& corpus, const std::string& id, const std::string& stratum) {
    if (stratum == "overall") return true;
    const auto c = query_category(corpus, id);
    if (!c) return false;
    return stratum == to_string(*c);
}

MetricBlock recall_block(std::span<const RankedList> lists, const GroundTruth& truth, const std::vector<int>& ks) {
    MetricBlock b;
    b.queries = truth.size();
    for (int k : ks) b.recall_rate[k] = recall_rate_at_k(lists, truth, k);
    return b;
}

struct PairScores {
    std::vector<ScoreLabel> scored;
    std::vector<std::optional<PairCategory>> category;
    std::vector<bool> validation;  // false: test share
};

std::optional<ClassificationBlock> classify(const PairScores& ps, double threshold,
                                            const std::optional<PairCategory>& positive_stratum, bool stratified) {
    std::vector<ScoreLabel> test;
    for (std::size_t i = 0; i < ps.scored.size(); ++i) {
        if (ps.validation[i]) continue;
        // Stratum views keep all negatives but only the stratum's positives.
        if (stratified && ps.scored[i].positive && ps.category[i] != positive_stratum) continue;
        test.push_back(ps.scored[i]);
    }
    const bool has_pos = std::any_of(test.begin(), test.end(), [](const ScoreLabel& s) { return s.positive; });
    const bool has_neg = std::any_of(test.begin(), test.end(), [](const ScoreLabel& s) { return !s.positive; });
    if (!has_pos || !has_neg) return std::nullopt;
    ClassificationBlock c;
    c.threshold = threshold;
    c.counts = threshold_predictions(test, threshold);
    const auto m = classification_metrics(c.counts);
    c.precision = m.precision;
    c.recall = m.recall;
    c.f1 = m.f1;
    c.auc = auc(test);
    return c;
}

}  // namespace

std::vector<TokenStream> preprocess_corpus(const Corpus& corpus, const StopwordSet& stopwords, unsigned jobs) {
    std::vector<TokenStream> out(corpus.size());
    parallel_for(corpus.size(), jobs, [&](std::size_t i) { out[i] = preprocess(corpus[i], stopwords); });
    return out;
}

std::vector<Extraction> extract_corpus(std::span<const TokenStream> tokens, const ExtractionOptions& options,
                                       const PosSidecar* pos_sidecar, const NerSidecar* ner, unsigned jobs) {
    std::vector<Extraction> out(tokens.size());
    parallel_for(tokens.size(), jobs,
                 [&](std::size_t i) { out[i] = extract_terms(tokens[i], options, pos_sidecar, ner); });
    return out;
}

void write_extractions(std::ostream& out, std::span<const Extraction> extractions) {
    for (const auto& e : extractions) {
        ordered_json j;
        j["report_id"] = e.report_id;
        j["terms"] = e.top_terms;
        out << j.dump() << '\n';
    }
}

std::map<std::string, std::vector<std::string>> read_extractions(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileError(path);
    std::map<std::string, std::vector<std::string>> out;
    std::size_t line_no = 0;
    for (std::string line; std::getline(in, line);) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto j = ordered_json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("report_id") || !j["report_id"].is_string() ||
            !j.contains("terms") || !j["terms"].is_array()) {
            throw ParseError(path, line_no, "expected {\"report_id\": string, \"terms\": [string, ...]}");
        }
        std::vector<std::string> terms;
        for (const auto& t : j["terms"]) {
            if (!t.is_string()) throw ParseError(path, line_no, "terms must be strings");
            terms.push_back(t.get<std::string>());
        }
        out[j["report_id"].get<std::string>()] = std::move(terms);
    }
    return out;
}

EnrichmentRun enrich_corpus(const Corpus& corpus, std::span<const std::vector<std::string>> terms,
                            const ProviderChain& providers, unsigned jobs) {
    if (terms.size() != corpus.size()) throw ArgumentError("one term list per report is required");
    std::vector<EnrichedReport> details(corpus.size());
    parallel_for(corpus.size(), jobs, [&](std::size_t i) { details[i] = enrich_report(corpus[i], terms[i], providers); });
    EnrichmentRun run;
    run.reports.reserve(corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        run.reports.push_back(to_enriched_record(corpus[i], details[i]));
        run.explained += details[i].explained_terms.size();
        run.unexplained += details[i].unexplained_terms.size();
        const bool glossary = std::any_of(details[i].insertions.begin(), details[i].insertions.end(),
                                          [](const Insertion& ins) { return ins.term.empty(); });
        if (glossary) ++run.glossary_reports;
    }
    return run;
}

ProviderChain make_providers(const RunConfig& config) {
    ProviderChain chain;
    for (const auto& name : config.enrichment.providers) {
        if (name == "vocabulary") {
            if (config.paths.vocabulary.empty()) {
                throw ConfigError("config field 'paths.vocabulary' is required by the vocabulary provider");
            }
            const auto entries = dedupe(load_vocabulary(config.paths.vocabulary));
            chain.add(std::make_shared<VocabularyIndex>(entries));
        } else {
            if (config.enrichment.endpoint.empty()) {
                throw ConfigError("config field 'enrichment.endpoint' is required by the remote provider");
            }
            chain.add(std::make_shared<RemoteExplainer>(
                RemoteOptions{config.enrichment.endpoint, config.enrichment.timeout_s, config.enrichment.retries}));
        }
    }
    return chain;
}

Ranker PreparedCorpus::ranker(const RetrievalConfig& config) const {
    if (config.backend == Backend::external_scores && !external) {
        throw ConfigError("retrieval.backend external_scores needs an external score file");
    }
    return Ranker(corpus, tokens, index, config.backend, {config.k1, config.b}, external ? &*external : nullptr);
}

std::unique_ptr<PreparedCorpus> prepare_corpus(Corpus corpus, const StopwordSet& stopwords,
                                               const std::string& external_scores_path, unsigned jobs) {
    auto p = std::make_unique<PreparedCorpus>();
    p->corpus = std::move(corpus);
    p->tokens = preprocess_corpus(p->corpus, stopwords, jobs);
    p->index = Index::build(p->tokens);
    if (!external_scores_path.empty()) p->external = ExternalScores::load(external_scores_path);
    return p;
}

std::vector<std::string> duplicate_queries(const Corpus& corpus) {
    std::vector<std::string> out;
    for (const auto& r : corpus.reports()) {
        if (r.master_id) out.push_back(r.id);
    }
    return out;
}

std::vector<RankedList> rank_queries(const Ranker& ranker, std::span<const std::string> queries, unsigned jobs) {
    std::vector<RankedList> out(queries.size());
    parallel_for(queries.size(), jobs, [&](std::size_t i) { out[i] = ranker.rank(queries[i]); });
    return out;
}

std::vector<LabeledPair> generate_pairs(const Corpus& corpus, int negatives_per_positive, std::uint64_t seed) {
    if (negatives_per_positive < 0) throw ArgumentError("negatives_per_positive must be >= 0");
    // Group key: the master id, or the report's own id for unlinked reports.
    const auto group_of = [](const BugReport& r) { return r.master_id ? *r.master_id : r.id; };
    SeededRng rng(seed);
    std::vector<LabeledPair> pairs;
    for (const auto& r : corpus.reports()) {
        if (!r.master_id) continue;
        pairs.push_back({r.id, *r.master_id, true});
        const std::string group = group_of(r);
        std::vector<const BugReport*> pool;
        for (const auto& other : corpus.reports()) {
            if (group_of(other) != group) pool.push_back(&other);
        }
        const auto picks = rng.sample_indices(pool.size(), static_cast<std::size_t>(negatives_per_positive));
        std::vector<std::size_t> sorted(picks.begin(), picks.end());
        std::sort(sorted.begin(), sorted.end());
        for (auto i : sorted) pairs.push_back({r.id, pool[i]->id, false});
    }
    return pairs;
}

std::optional<PairCategory> pair_category(const Corpus& corpus, const LabeledPair& pair) {
    if (!pair.duplicate) return std::nullopt;
    const auto* a = corpus.find(pair.a);
    const auto* b = corpus.find(pair.b);
    if (!a || !b) return std::nullopt;
    const auto related = [](const BugReport& dup, const BugReport& other) {
        return dup.master_id && (*dup.master_id == other.id || (other.master_id && *other.master_id == *dup.master_id));
    };
    if (related(*a, *b) && a->pair_category) return a->pair_category;
    if (related(*b, *a) && b->pair_category) return b->pair_category;
    return std::nullopt;
}

std::vector<double> stratum_subsamples(const Corpus& corpus, std::span<const RankedList> lists,
                                       const RunConfig& config, const std::string& stratum) {
    const auto& ev = config.evaluation;
    if (ev.n_subsamples == 0) return {};
    const std::uint64_t seed = required_seed(config, "subsampling (evaluation.n_subsamples > 0)");
    const auto truth = build_ground_truth(corpus, config.retrieval.hit_policy);
    std::map<std::string, const RankedList*> by_query;
    for (const auto& l : lists) by_query.emplace(l.query_id, &l);

    std::vector<bool> hit;
    for (const auto& [query, ids] : truth) {
        if (!in_stratum(corpus, query, stratum)) continue;
        const auto it = by_query.find(query);
        if (it == by_query.end()) throw ValidationError("no ranked list for query " + query, {query});
        const auto rank = first_hit_rank(*it->second, ids);
        hit.push_back(rank && *rank <= static_cast<std::size_t>(ev.primary_k));
    }
    if (hit.empty()) return {};
    return subsample(
        hit.size(),
        [&](std::span<const std::size_t> idx) {
            std::size_t n = 0;
            for (auto i : idx) n += hit[i] ? 1 : 0;
            return static_cast<double>(n) / static_cast<double>(idx.size());
        },
        ev.n_subsamples, ev.subsample_fraction, seed);
}

MetricsReport evaluate_run(const Corpus& corpus, std::span<const RankedList> lists, const Ranker& ranker,
                           std::span<const LabeledPair> pairs, const RunConfig& config, const std::string& variant,
                           unsigned jobs) {
    const auto& ev = config.evaluation;
    MetricsReport report;
    report.meta = {std::string(to_string(config.retrieval.backend)), variant,
                   std::string(to_string(config.retrieval.hit_policy)), config.seed};

    const auto truth = build_ground_truth(corpus, config.retrieval.hit_policy);
    std::vector<int> ks = ev.k_list;
    if (std::find(ks.begin(), ks.end(), ev.primary_k) == ks.end()) {
        ks.push_back(ev.primary_k);
        std::sort(ks.begin(), ks.end());
    }
    report.overall = recall_block(lists, truth, ks);

    GroundTruth similar, dissimilar;
    for (const auto& [query, ids] : truth) {
        const auto c = query_category(corpus, query);
        if (!c) {
            ++report.unlabeled_queries;
        } else {
            (*c == PairCategory::similar ? similar : dissimilar).emplace(query, ids);
        }
    }
    if (!similar.empty()) report.similar = recall_block(lists, similar, ks);
    if (!dissimilar.empty()) report.dissimilar = recall_block(lists, dissimilar, ks);

    const auto sweep = sweep_ks(ev.sweep.k_from, ev.sweep.k_to, ev.sweep.step);
    report.sweep.ks = sweep;
    report.sweep.recall_rate.resize(sweep.size());
    parallel_for(sweep.size(), jobs,
                 [&](std::size_t i) { report.sweep.recall_rate[i] = recall_rate_at_k(lists, truth, sweep[i]); });

    report.subsamples = stratum_subsamples(corpus, lists, config, "overall");

    if (!pairs.empty()) {
        PairScores ps;
        ps.scored.resize(pairs.size());
        ps.category.resize(pairs.size());
        parallel_for(pairs.size(), jobs, [&](std::size_t i) {
            ps.scored[i] = {ranker.pair_score(pairs[i].a, pairs[i].b), pairs[i].duplicate};
            ps.category[i] = pair_category(corpus, pairs[i]);
        });
        ps.validation.assign(pairs.size(), false);
        double threshold = ev.threshold;
        if (ev.threshold_policy == ThresholdPolicy::validation_f1) {
            SeededRng rng(config.seed.value_or(0) ^ kSplitStream);
            const auto n_val = std::max<std::size_t>(
                1, static_cast<std::size_t>(std::llround(ev.validation_fraction * static_cast<double>(pairs.size()))));
            std::vector<ScoreLabel> val;
            for (auto i : rng.sample_indices(pairs.size(), std::min(n_val, pairs.size() - 1))) {
                ps.validation[i] = true;
            }
            for (std::size_t i = 0; i < pairs.size(); ++i) {
                if (ps.validation[i]) val.push_back(ps.scored[i]);
            }
            threshold = best_f1_threshold(val);
        }
        report.overall.classification = classify(ps, threshold, std::nullopt, false);
        if (report.similar) report.similar->classification = classify(ps, threshold, PairCategory::similar, true);
        if (report.dissimilar) {
            report.dissimilar->classification = classify(ps, threshold, PairCategory::dissimilar, true);
        }
    }
    return report;
}

CompareReport compare_runs(const PreparedCorpus& original, const PreparedCorpus& enriched, const RunConfig& config,
                           std::span<const LabeledPair> pairs, unsigned jobs) {
    if (original.corpus.size() != enriched.corpus.size()) {
        throw ValidationError("original and enriched corpora differ in size");
    }
    std::vector<std::string> mismatched;
    for (std::size_t i = 0; i < original.corpus.size(); ++i) {
        const auto& a = original.corpus[i];
        const auto& b = enriched.corpus[i];
        if (a.id != b.id || a.created_at != b.created_at || a.master_id != b.master_id) mismatched.push_back(a.id);
    }
    if (!mismatched.empty()) {
        throw ValidationError("enriched corpus does not line up with the original", std::move(mismatched));
    }

    const auto queries = duplicate_queries(original.corpus);
    const Ranker r_orig = original.ranker(config.retrieval);
    const Ranker r_enr = enriched.ranker(config.retrieval);
    const auto lists_orig = rank_queries(r_orig, queries, jobs);
    const auto lists_enr = rank_queries(r_enr, queries, jobs);

    CompareReport out;
    out.primary_k = config.evaluation.primary_k;
    out.original = evaluate_run(original.corpus, lists_orig, r_orig, pairs, config, "original", jobs);
    out.enriched = evaluate_run(enriched.corpus, lists_enr, r_enr, pairs, config, "enriched", jobs);

    std::vector<std::string> strata{"overall"};
    if (out.original.similar) strata.emplace_back("similar");
    if (out.original.dissimilar) strata.emplace_back("dissimilar");
    for (const auto& name : strata) {
        SignificanceOutcome outcome;
        if (config.evaluation.n_subsamples == 0) {
            outcome.error = "subsampling disabled (evaluation.n_subsamples = 0)";
        } else {
            const auto a = stratum_subsamples(enriched.corpus, lists_enr, config, name);
            const auto b = stratum_subsamples(original.corpus, lists_orig, config, name);
            try {
                outcome.report = stats::significance_pipeline(a, b, config.evaluation.alpha, config.evaluation.normality);
            } catch (const ArgumentError& e) {
                outcome.error = e.what();
            }
        }
        out.significance.emplace_back(name, std::move(outcome));
    }
    return out;
}

}  // namespace bugenrich
