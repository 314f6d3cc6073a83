#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace bugenrich {

enum class PairCategory { similar, dissimilar };

std::string_view to_string(PairCategory c) noexcept;
std::optional<PairCategory> parse_pair_category(std::string_view s) noexcept;

/// Ordered term -> explanation pairs attached by enrichment.
using ExplainedTerms = std::vector<std::pair<std::string, std::string>>;

struct BugReport {
    std::string id;
    std::string summary;
    std::string description;
    std::int64_t created_at = 0;  // epoch seconds, UTC
    std::optional<std::string> master_id;
    std::optional<PairCategory> pair_category;
    std::string project;
    /// Present only on enriched corpora.
    std::optional<ExplainedTerms> explained_terms;

    /// Document text used everywhere downstream: summary, one space, description.
    std::string text() const { return summary + " " + description; }

    friend bool operator==(const BugReport&, const BugReport&) = default;
};

/// Immutable set of reports keyed by id. Construction does not validate;
/// use load_corpus() or validate_corpus() for that.
class Corpus {
public:
    Corpus() = default;
    explicit Corpus(std::vector<BugReport> reports);

    std::span<const BugReport> reports() const noexcept { return reports_; }
    std::size_t size() const noexcept { return reports_.size(); }
    bool empty() const noexcept { return reports_.empty(); }
    const BugReport& operator[](std::size_t i) const { return reports_[i]; }

    const BugReport* find(std::string_view id) const;
    std::optional<std::size_t> index_of(std::string_view id) const;

    /// Number of reports that carry a master link.
    std::size_t duplicate_count() const;
    std::map<std::string, std::size_t> project_counts() const;

private:
    std::vector<BugReport> reports_;
    std::unordered_map<std::string, std::size_t> by_id_;
};

struct ValidationIssue {
    enum class Kind { id_collision, dangling_master, acausal_master, category_without_master, empty_text };
    Kind kind;
    std::string report_id;
    std::string detail;
};

std::string_view to_string(ValidationIssue::Kind k) noexcept;

struct ValidationReport {
    std::vector<ValidationIssue> issues;

    bool ok() const noexcept { return issues.empty(); }
    std::size_t count(ValidationIssue::Kind k) const;
};

/// Reads JSON-lines records without checking cross-record invariants.
/// Throws ParseError (with 1-based line number) on malformed lines.
std::vector<BugReport> read_reports(std::istream& in, const std::string& source = "<stream>");
std::vector<BugReport> read_reports(const std::string& path);

/// read_reports + invariant check. Throws ValidationError naming offenders on
/// id collisions, dangling or acausal master links, or labels without links.
Corpus load_corpus(const std::string& path);
Corpus load_corpus(std::istream& in, const std::string& source = "<stream>");

void write_report(std::ostream& out, const BugReport& r);
void write_corpus(std::ostream& out, std::span<const BugReport> reports);
void write_corpus(const std::string& path, std::span<const BugReport> reports);

/// Report-only: never throws, never mutates.
ValidationReport validate_corpus(std::span<const BugReport> reports);

// ---------------------------------------------------------------------------
// Preprocessing

/// Splits after '.', '!' or '?' when followed by whitespace or end of text,
/// and at every newline. Pieces are trimmed; empty pieces are dropped.
std::vector<std::string> split_sentences(std::string_view text);

using Sentence = std::vector<std::string>;

struct TokenStream {
    std::string report_id;
    std::vector<Sentence> sentences;

    std::size_t token_count() const;
    std::vector<std::string> flat() const;
    /// Sentences joined by '\n', tokens by ' '. preprocess() of this text
    /// reproduces the stream.
    std::string render() const;

    friend bool operator==(const TokenStream&, const TokenStream&) = default;
};

class StopwordSet {
public:
    StopwordSet() = default;
    explicit StopwordSet(std::unordered_set<std::string> words) : words_(std::move(words)) {}

    static const StopwordSet& bundled();
    /// One lowercase word per line; blank lines and '#' comments ignored.
    static StopwordSet load(const std::string& path);

    bool contains(std::string_view w) const { return words_.contains(std::string(w)); }
    std::size_t size() const noexcept { return words_.size(); }

private:
    std::unordered_set<std::string> words_;
};

/// HTML tags -> URLs -> sentences -> alnum tokens -> lowercase -> stopwords
/// -> purely numeric tokens. Sentences left empty are dropped.
TokenStream preprocess_text(std::string_view report_id, std::string_view text, const StopwordSet& stopwords);
TokenStream preprocess(const BugReport& report, const StopwordSet& stopwords);

}  // namespace bugenrich
