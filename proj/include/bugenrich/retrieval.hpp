#pragma once

#include <algorithm>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "bugenrich/corpus.hpp"

namespace bugenrich {

struct DocumentStats {
    std::string id;
    std::size_t length = 0;                  // tokens
    std::map<std::string, std::size_t> tf;  // term -> frequency
};

/// Term statistics over a fixed document set, in input order.
class Index {
public:
    /// Throws ArgumentError on an empty document set or repeated ids.
    static Index build(std::span<const TokenStream> documents);

    std::size_t doc_count() const noexcept { return docs_.size(); }
    double avg_length() const noexcept { return avg_length_; }
    std::size_t df(std::string_view term) const;
    const std::map<std::string, std::size_t>& document_frequencies() const noexcept { return df_; }

    const DocumentStats& doc(std::size_t i) const { return docs_[i]; }
    std::optional<std::size_t> find(std::string_view id) const;

    friend bool operator==(const Index& a, const Index& b) {
        return a.avg_length_ == b.avg_length_ && a.df_ == b.df_ && a.docs_.size() == b.docs_.size() &&
               std::equal(a.docs_.begin(), a.docs_.end(), b.docs_.begin(), [](const auto& x, const auto& y) {
                   return x.id == y.id && x.length == y.length && x.tf == y.tf;
               });
    }

private:
    std::vector<DocumentStats> docs_;
    std::map<std::string, std::size_t> df_;
    std::unordered_map<std::string, std::size_t> by_id_;
    double avg_length_ = 0.0;
};

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

/// ln(1 + (N - df + 0.5) / (df + 0.5)).
double bm25_idf(const Index& index, std::string_view term);

/// Okapi BM25 of document `doc` for the distinct terms of `query_terms`.
double bm25_score(std::span<const std::string> query_terms, std::size_t doc, const Index& index,
                  const Bm25Params& params = {});

/// ln(1 + N / df); strictly positive for indexed terms.
double cosine_idf(const Index& index, std::string_view term);

/// Cosine between ln(1 + tf) * idf vectors of the query tokens and the document.
double tfidf_cosine(std::span<const std::string> query_tokens, std::size_t doc, const Index& index);

enum class Backend { bm25, tfidf_cosine, external_scores };

std::string_view to_string(Backend b) noexcept;
std::optional<Backend> parse_backend(std::string_view s) noexcept;

/// Precomputed similarity scores: CSV with header query_id,candidate_id,score.
class ExternalScores {
public:
    static ExternalScores load(const std::string& path);
    static ExternalScores parse(std::istream& in, const std::string& source = "<stream>");

    std::optional<double> find(std::string_view query_id, std::string_view candidate_id) const;
    std::size_t size() const noexcept { return scores_.size(); }

private:
    std::map<std::pair<std::string, std::string>, double, std::less<>> scores_;
};

struct ScoredCandidate {
    std::string id;
    double score = 0.0;

    friend bool operator==(const ScoredCandidate&, const ScoredCandidate&) = default;
};

struct RankedList {
    std::string query_id;
    std::vector<ScoredCandidate> ranking;  // descending score, ties by ascending id

    friend bool operator==(const RankedList&, const RankedList&) = default;
};

/// Reports created strictly before the query (so the query itself and any
/// same-timestamp report are excluded), in corpus order.
std::vector<std::string> candidate_set(const BugReport& query, const Corpus& corpus);

/// Descending score, ties by ascending id.
void sort_ranking(std::vector<ScoredCandidate>& ranking);

/// Scores reports of one corpus against each other. The corpus, token
/// streams and index must line up one-to-one in the same order.
class Ranker {
public:
    Ranker(const Corpus& corpus, std::span<const TokenStream> tokens, const Index& index, Backend backend,
           Bm25Params params = {}, const ExternalScores* external = nullptr);

    Backend backend() const noexcept { return backend_; }

    /// Directed similarity of candidate to query. Throws ValidationError for
    /// unknown ids or a missing external score.
    double score(std::string_view query_id, std::string_view candidate_id) const;

    /// Ranks candidate_set(query). Throws ArgumentError when it is empty.
    RankedList rank(std::string_view query_id) const;

    /// score() with the pair put in canonical (ascending id) order first,
    /// so the result is symmetric.
    double pair_score(std::string_view a, std::string_view b) const;

private:
    const Corpus& corpus_;
    std::span<const TokenStream> tokens_;
    const Index& index_;
    Backend backend_;
    Bm25Params params_;
    const ExternalScores* external_;
};

RankedList rank_candidates(std::string_view query_id, const Ranker& ranker);

struct LabeledPair {
    std::string a;
    std::string b;
    bool duplicate = false;
};

struct ScoredPair {
    LabeledPair pair;
    double score = 0.0;
};

std::vector<ScoredPair> score_pairs(std::span<const LabeledPair> pairs, const Ranker& ranker);

/// JSON lines {"query_id": ..., "ranking": [[id, score], ...]}.
void write_ranked_lists(std::ostream& out, std::span<const RankedList> lists);
std::vector<RankedList> read_ranked_lists(std::istream& in, const std::string& source = "<stream>");
std::vector<RankedList> read_ranked_lists(const std::string& path);

/// CSV with header a,b,label (label 1/0 or true/false).
std::vector<LabeledPair> read_labeled_pairs(const std::string& path);
std::vector<LabeledPair> parse_labeled_pairs(std::istream& in, const std::string& source = "<stream>");

}  // namespace bugenrich
