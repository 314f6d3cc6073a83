#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bugenrich/metrics.hpp"
#include "bugenrich/retrieval.hpp"
#include "bugenrich/stats.hpp"
#include "bugenrich/termgraph.hpp"

namespace bugenrich {

struct PathsConfig {
    std::string corpus;
    std::string enriched;  // enriched corpus, read or written
    std::string vocabulary;
    std::string stopwords;  // empty: bundled list
    std::string pos_tags;
    std::string ner_terms;
    std::string pairs;
    std::string external_scores;
    std::string external_scores_enriched;
};

struct ExtractionConfig {
    int window = 2;
    double damping = 0.85;
    double tol = 1e-6;
    int max_iter = 100;
    int k_terms = 10;

    ExtractionOptions options() const { return {window, {damping, tol, max_iter}, k_terms}; }
};

struct EnrichmentConfig {
    std::vector<std::string> providers{"vocabulary"};  // vocabulary | remote, in lookup order
    std::string endpoint;
    double timeout_s = 10.0;
    int retries = 1;
};

struct RetrievalConfig {
    Backend backend = Backend::bm25;
    double k1 = 1.2;
    double b = 0.75;
    HitPolicy hit_policy = HitPolicy::master_only;
};

struct SweepConfig {
    int k_from = 1;
    int k_to = 100;
    int step = 5;
};

enum class ThresholdPolicy { validation_f1, fixed };

struct EvaluationConfig {
    std::vector<int> k_list{1, 5, 10};
    int primary_k = 5;
    SweepConfig sweep;
    double alpha = 0.05;
    stats::NormalityTarget normality = stats::NormalityTarget::both_samples;
    int n_subsamples = 20;
    double subsample_fraction = 0.8;
    ThresholdPolicy threshold_policy = ThresholdPolicy::validation_f1;
    double threshold = 0.5;
    double validation_fraction = 0.2;
    int negatives_per_positive = 1;
};

struct RunConfig {
    PathsConfig paths;
    ExtractionConfig extraction;
    EnrichmentConfig enrichment;
    RetrievalConfig retrieval;
    EvaluationConfig evaluation;
    std::optional<std::uint64_t> seed;
};

/// Name of the environment variable that overrides enrichment.endpoint.
inline constexpr const char* kEndpointEnv = "BUGENRICH_ENDPOINT";

/// Layers, lowest first: built-in defaults, the JSON config file (optional),
/// the endpoint environment variable, then `key.path=value` overrides in
/// order. Override values are read as JSON when they parse, else as strings.
/// Throws ConfigError naming the field on unknown keys, type mismatches or
/// out-of-range values, FileError when the file cannot be read.
RunConfig load_config(const std::string& path, const std::vector<std::pair<std::string, std::string>>& overrides = {},
                      const char* endpoint_env = nullptr);
RunConfig parse_config(std::string_view json_text,
                       const std::vector<std::pair<std::string, std::string>>& overrides = {},
                       const char* endpoint_env = nullptr);

/// Splits "a.b=value" at the first '='. Throws ConfigError when missing.
std::pair<std::string, std::string> parse_override(std::string_view spec);

/// Canonical JSON of every field, keys in a fixed order.
std::string config_to_json(const RunConfig& config, bool pretty = false);

}  // namespace bugenrich
