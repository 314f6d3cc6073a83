#pragma once

#include <atomic>
#include <cstddef>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "bugenrich/corpus.hpp"
#include "bugenrich/vocabulary.hpp"

namespace bugenrich {

class ExplanationProvider {
public:
    virtual ~ExplanationProvider() = default;
    virtual std::optional<std::string> explain(const std::string& term) const = 0;
    virtual std::string_view name() const noexcept = 0;
};

/// Local provider over a deduplicated vocabulary: exact term, then
/// case-folded term, then lemmatized term; first hit wins.
class VocabularyIndex final : public ExplanationProvider {
public:
    explicit VocabularyIndex(std::span<const VocabularyEntry> entries);

    std::optional<std::string> lookup(std::string_view term) const;
    std::optional<std::string> explain(const std::string& term) const override { return lookup(term); }
    std::string_view name() const noexcept override { return "vocabulary"; }

    std::size_t size() const noexcept { return exact_.size(); }

private:
    std::unordered_map<std::string, std::string> exact_;
    std::unordered_map<std::string, std::string> folded_;
    std::unordered_map<std::string, std::string> lemmatized_;
};

std::optional<std::string> lookup_explanation(std::string_view term, const VocabularyIndex& vocabulary);

struct RemoteOptions {
    std::string endpoint;  // http://host:port/path
    double timeout_s = 10.0;
    int retries = 1;
};

/// JSON request body sent for `term`: {"prompt": "explain the technical term: <term>", "term": "<term>"}.
std::string explanation_request_body(std::string_view term);

/// Reads {"explanation": string}; blank explanations map to std::nullopt.
/// Throws ParseError when the body is not of that shape.
std::optional<std::string> parse_explanation_response(std::string_view body);

/// One POST to the endpoint plus `retries` retries on transport failure,
/// timeout, non-200 status or malformed body. Failure after the last attempt
/// yields std::nullopt and a warning on stderr; `warnings` is bumped if given.
std::optional<std::string> request_explanation(std::string_view term, const RemoteOptions& options,
                                               std::atomic<std::size_t>* warnings = nullptr,
                                               std::atomic<std::size_t>* attempts = nullptr);

/// Remote provider with an in-memory per-term cache. Safe to share across
/// threads; each request opens its own connection.
class RemoteExplainer final : public ExplanationProvider {
public:
    explicit RemoteExplainer(RemoteOptions options) : options_(std::move(options)) {}

    std::optional<std::string> explain(const std::string& term) const override;
    std::string_view name() const noexcept override { return "remote"; }

    const RemoteOptions& options() const noexcept { return options_; }
    /// explain() invocations, cached or not.
    std::size_t calls() const noexcept { return calls_; }
    /// HTTP attempts, retries included.
    std::size_t requests() const noexcept { return requests_; }
    std::size_t warnings() const noexcept { return warnings_; }

private:
    RemoteOptions options_;
    mutable std::atomic<std::size_t> calls_{0};
    mutable std::atomic<std::size_t> requests_{0};
    mutable std::atomic<std::size_t> warnings_{0};
    mutable std::mutex cache_mutex_;
    mutable std::unordered_map<std::string, std::optional<std::string>> cache_;
};

/// Ordered providers; the first one with an explanation answers.
class ProviderChain {
public:
    ProviderChain() = default;
    explicit ProviderChain(std::vector<std::shared_ptr<const ExplanationProvider>> providers)
        : providers_(std::move(providers)) {}

    void add(std::shared_ptr<const ExplanationProvider> provider) { providers_.push_back(std::move(provider)); }
    std::optional<std::string> explain(const std::string& term) const;
    bool empty() const noexcept { return providers_.empty(); }

private:
    std::vector<std::shared_ptr<const ExplanationProvider>> providers_;
};

/// A span of enriched_text that was not in the original.
struct Insertion {
    std::size_t offset = 0;         // in enriched_text
    std::size_t length = 0;
    std::size_t source_offset = 0;  // insertion point in the original text
    std::string term;               // empty for the glossary block
};

struct EnrichedReport {
    std::string report_id;
    std::string enriched_text;
    ExplainedTerms explained_terms;  // in term order
    std::vector<std::string> unexplained_terms;
    std::vector<Insertion> insertions;  // ascending offset; glossary last when present

    /// Removes every insertion, reproducing the original text byte for byte.
    std::string original_text() const;
};

/// First case-insensitive whole-word occurrence of `term` in `text` as a
/// [begin, end) byte range. Runs of '-', '_' or whitespace inside the term
/// match any such run in the text, so "null-analysis" finds "null analysis".
std::optional<std::pair<std::size_t, std::size_t>> find_term(std::string_view text, std::string_view term);

/// Injects " (<explanation>)" after the first occurrence of each explained
/// term. Explained terms that never occur are listed on a trailing line
/// "Glossary: term \u2014 explanation; ...". Repeated terms are processed once.
EnrichedReport enrich_text(std::string_view report_id, std::string_view text, std::span<const std::string> terms,
                           const ProviderChain& providers);

/// enrich_text over report.text() (summary + " " + description).
EnrichedReport enrich_report(const BugReport& report, std::span<const std::string> terms,
                             const ProviderChain& providers);

/// The enriched record: summary/description are the enriched segments on
/// either side of the original separator and explained_terms is set.
BugReport to_enriched_record(const BugReport& original, const EnrichedReport& enriched);

}  // namespace bugenrich
