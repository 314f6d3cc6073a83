#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bugenrich/config.hpp"
#include "bugenrich/corpus.hpp"
#include "bugenrich/enrichment.hpp"
#include "bugenrich/report.hpp"
#include "bugenrich/retrieval.hpp"
#include "bugenrich/termgraph.hpp"

// Whole-corpus orchestration. Every stage works per report or per query on
// up to `jobs` threads and writes results by index, so output never depends
// on the worker count.
namespace bugenrich {

std::vector<TokenStream> preprocess_corpus(const Corpus& corpus, const StopwordSet& stopwords, unsigned jobs = 1);

std::vector<Extraction> extract_corpus(std::span<const TokenStream> tokens, const ExtractionOptions& options,
                                       const PosSidecar* pos_sidecar = nullptr, const NerSidecar* ner = nullptr,
                                       unsigned jobs = 1);

/// JSON lines {"report_id": ..., "terms": [...]}.
void write_extractions(std::ostream& out, std::span<const Extraction> extractions);
/// report id -> terms, from write_extractions output.
std::map<std::string, std::vector<std::string>> read_extractions(const std::string& path);

struct EnrichmentRun {
    std::vector<BugReport> reports;  // enriched records, corpus order
    std::size_t explained = 0;       // term explanations injected
    std::size_t unexplained = 0;     // extracted terms nobody could explain
    std::size_t glossary_reports = 0;
};

/// terms[i] holds the extracted terms of corpus[i].
EnrichmentRun enrich_corpus(const Corpus& corpus, std::span<const std::vector<std::string>> terms,
                            const ProviderChain& providers, unsigned jobs = 1);

/// Builds the configured provider chain. Throws ConfigError when a provider
/// lacks its input (vocabulary path, endpoint).
ProviderChain make_providers(const RunConfig& config);

/// A corpus with its token streams and index, ready for ranking. Held by
/// pointer because the ranker keeps references into it.
struct PreparedCorpus {
    Corpus corpus;
    std::vector<TokenStream> tokens;
    Index index;
    std::optional<ExternalScores> external;

    Ranker ranker(const RetrievalConfig& config) const;
};

std::unique_ptr<PreparedCorpus> prepare_corpus(Corpus corpus, const StopwordSet& stopwords,
                                               const std::string& external_scores_path = {}, unsigned jobs = 1);

/// Ids of reports linked to a master, in corpus order.
std::vector<std::string> duplicate_queries(const Corpus& corpus);

std::vector<RankedList> rank_queries(const Ranker& ranker, std::span<const std::string> queries, unsigned jobs = 1);

/// One positive (duplicate, master) pair per duplicate plus
/// `negatives_per_positive` seeded negatives drawn from reports outside the
/// duplicate's group. Output order is deterministic for a seed.
std::vector<LabeledPair> generate_pairs(const Corpus& corpus, int negatives_per_positive, std::uint64_t seed);

/// Category of the duplicate side of a positive pair, nullopt otherwise.
std::optional<PairCategory> pair_category(const Corpus& corpus, const LabeledPair& pair);

/// Recall-rate over k_list and the sweep, optional classification on the
/// pairs, similar/dissimilar strata and seeded subsamples of the primary k.
MetricsReport evaluate_run(const Corpus& corpus, std::span<const RankedList> lists, const Ranker& ranker,
                           std::span<const LabeledPair> pairs, const RunConfig& config, const std::string& variant,
                           unsigned jobs = 1);

/// Subsample values of Recall-rate@primary_k restricted to one stratum
/// ("overall", "similar", "dissimilar").
std::vector<double> stratum_subsamples(const Corpus& corpus, std::span<const RankedList> lists,
                                       const RunConfig& config, const std::string& stratum);

/// Ranks and evaluates both corpus variants over the same queries and pairs
/// and tests Recall-rate@primary_k subsamples of BR_E against BR per stratum.
CompareReport compare_runs(const PreparedCorpus& original, const PreparedCorpus& enriched, const RunConfig& config,
                           std::span<const LabeledPair> pairs, unsigned jobs = 1);

}  // namespace bugenrich
