#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "bugenrich/corpus.hpp"

namespace bugenrich {

// ---------------------------------------------------------------------------
// Part-of-speech tagging

enum class Pos { noun, verb, adjective, other };

std::string_view to_string(Pos p) noexcept;
/// Accepts our class names and Penn Treebank tags (NN*, VB*, JJ*).
std::optional<Pos> parse_pos(std::string_view s) noexcept;

struct TaggedToken {
    std::string token;
    Pos pos = Pos::other;

    friend bool operator==(const TaggedToken&, const TaggedToken&) = default;
};
using PosTaggedSentence = std::vector<TaggedToken>;

/// Suffix fallback: -tion/-ment/-ness/-ity noun, -ize/-ify verb,
/// -ous/-ful/-able adjective.
std::optional<Pos> pos_by_suffix(std::string_view word) noexcept;

class PosLexicon {
public:
    PosLexicon() = default;
    explicit PosLexicon(std::unordered_map<std::string, Pos> words) : words_(std::move(words)) {}

    static const PosLexicon& bundled();

    std::optional<Pos> lookup(std::string_view word) const;
    /// Lexicon hit, else suffix rule, else other.
    Pos tag(std::string_view word) const;
    std::size_t size() const noexcept { return words_.size(); }

private:
    std::unordered_map<std::string, Pos> words_;
};

/// Pre-tagged sentences keyed by report id, read from JSON lines
/// {"report_id": ..., "sentences": [[[token, pos], ...], ...]}.
class PosSidecar {
public:
    static PosSidecar load(const std::string& path);
    static PosSidecar parse(std::istream& in, const std::string& source = "<stream>");

    const std::vector<PosTaggedSentence>* find(std::string_view report_id) const;
    std::size_t size() const noexcept { return tags_.size(); }

private:
    std::unordered_map<std::string, std::vector<PosTaggedSentence>> tags_;
};

std::vector<PosTaggedSentence> pos_tag(const TokenStream& tokens, const PosLexicon& lexicon = PosLexicon::bundled());

/// Uses the sidecar entry for this report when present, else the lexicon.
/// Throws ValidationError naming the report when sentence shapes disagree.
std::vector<PosTaggedSentence> pos_tag(const TokenStream& tokens, const PosSidecar& sidecar,
                                       const PosLexicon& lexicon = PosLexicon::bundled());

// ---------------------------------------------------------------------------
// Text graphs

/// Undirected graph over unique terms with positive integer edge weights.
/// Adjacency is keyed by term so iteration order is lexicographic.
class TextGraph {
public:
    struct Edge {
        std::string u, v;  // u < v
        std::int64_t weight;
    };

    void add_vertex(const std::string& term);
    /// Adds `weight` (>= 1) to the u-v edge. Self loops are ignored.
    void add_edge(const std::string& u, const std::string& v, std::int64_t weight = 1);

    std::size_t vertex_count() const noexcept { return adjacency_.size(); }
    std::size_t edge_count() const noexcept;
    bool empty() const noexcept { return adjacency_.empty(); }
    bool contains(std::string_view term) const;

    std::vector<std::string> vertices() const;
    std::vector<Edge> edges() const;
    /// 0 when absent.
    std::int64_t weight(std::string_view u, std::string_view v) const;
    const std::map<std::string, std::int64_t, std::less<>>& neighbours(std::string_view term) const;
    std::int64_t incident_weight(std::string_view term) const;

private:
    std::map<std::string, std::map<std::string, std::int64_t, std::less<>>, std::less<>> adjacency_;
};

/// Every pair of distinct terms less than `window` positions apart within a
/// sentence adds 1 to their edge. Throws ArgumentError when window < 2.
TextGraph build_cooccurrence_graph(const TokenStream& tokens, int window = 2);

/// Same windowing, but a pair is linked only when at least one endpoint is a
/// noun, verb or adjective.
TextGraph build_pos_graph(std::span<const PosTaggedSentence> sentences, int window = 2);

struct PageRankOptions {
    double damping = 0.85;
    double tol = 1e-6;
    int max_iter = 100;
};

struct GraphScores {
    std::map<std::string, double> scores;
    int iterations = 0;
    bool converged = false;

    /// Terms by descending score, ties broken lexicographically.
    std::vector<std::string> ordered_terms() const;
};

/// Weighted PageRank power iteration from the uniform vector. Mass of
/// vertices without edges is spread uniformly, so scores always sum to 1.
/// Throws ArgumentError on an empty graph or invalid options.
GraphScores rank_graph(const TextGraph& graph, const PageRankOptions& options = {});

// ---------------------------------------------------------------------------
// Degree-of-interest fusion

/// Exact non-negative fraction; DOI values are compared without rounding.
class Rational {
public:
    constexpr Rational() = default;
    Rational(std::int64_t num, std::int64_t den);

    std::int64_t num() const noexcept { return num_; }
    std::int64_t den() const noexcept { return den_; }
    double value() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }

    Rational operator+(const Rational& o) const;
    std::strong_ordering operator<=>(const Rational& o) const;
    bool operator==(const Rational& o) const = default;

private:
    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

/// position / count. Throws ArgumentError unless 1 <= position <= count.
Rational doi(std::int64_t position, std::int64_t count);

struct TermEntry {
    std::string term;
    std::size_t position = 0;          // 1-based position in the fused order
    std::vector<Rational> source_doi;  // one per input list; 1 when absent
    Rational fused_doi;
};

struct TermRanking {
    std::vector<TermEntry> entries;
    /// The ranked lists this ranking was fused from, in input order.
    std::vector<std::vector<std::string>> sources;

    std::size_t size() const noexcept { return entries.size(); }
    bool empty() const noexcept { return entries.empty(); }
    std::vector<std::string> terms() const;
};

/// Sums per-list DOI (absent term counts 1) and sorts ascending, ties by term.
/// Throws ArgumentError when a list repeats a term.
TermRanking fuse_rankings(std::span<const std::vector<std::string>> lists);

/// Refuses the graph lists together with the NER list as a third source.
/// An empty NER list returns the input unchanged.
TermRanking merge_ner_terms(const TermRanking& fused, const std::vector<std::string>& ner_terms);

/// First min(k, N) terms. Throws ArgumentError when k < 1.
std::vector<std::string> top_k_terms(const TermRanking& ranking, int k);

/// NER output keyed by report id, JSON lines {"report_id": ..., "terms": [...]}.
class NerSidecar {
public:
    static NerSidecar load(const std::string& path);
    static NerSidecar parse(std::istream& in, const std::string& source = "<stream>");

    const std::vector<std::string>* find(std::string_view report_id) const;

private:
    std::unordered_map<std::string, std::vector<std::string>> terms_;
};

struct ExtractionOptions {
    int window = 2;
    PageRankOptions pagerank;
    int k_terms = 10;
};

struct Extraction {
    std::string report_id;
    TermRanking ranking;
    std::vector<std::string> top_terms;
};

/// Full per-report pipeline: both graphs, both rankings, fusion, optional
/// NER merge, top-k. A report without tokens yields an empty ranking.
Extraction extract_terms(const TokenStream& tokens, const ExtractionOptions& options,
                         const PosSidecar* pos_sidecar = nullptr, const NerSidecar* ner = nullptr);

}  // namespace bugenrich
