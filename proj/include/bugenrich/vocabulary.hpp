#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bugenrich {

enum class VocabSource { stackoverflow, api_doc, glossary };

std::string_view to_string(VocabSource s) noexcept;
std::optional<VocabSource> parse_vocab_source(std::string_view s) noexcept;

/// Collision priority used by dedupe(): api_doc > glossary > stackoverflow.
int source_priority(VocabSource s) noexcept;

struct VocabularyEntry {
    std::string term;
    std::string explanation;
    VocabSource source = VocabSource::stackoverflow;

    friend bool operator==(const VocabularyEntry&, const VocabularyEntry&) = default;
};

/// TSV rows `term<TAB>explanation<TAB>source`; blank lines skipped.
/// Throws ParseError with the line number on a bad row.
std::vector<VocabularyEntry> parse_vocabulary(std::istream& in, const std::string& source = "<stream>");
std::vector<VocabularyEntry> load_vocabulary(const std::string& path);

void write_vocabulary(std::ostream& out, std::span<const VocabularyEntry> entries);
void write_vocabulary(const std::string& path, std::span<const VocabularyEntry> entries);

/// Strips tags and URLs from the explanation, lemmatizes its words and
/// lowercases the term. std::nullopt when either side ends up empty.
std::optional<VocabularyEntry> clean_entry(const VocabularyEntry& entry);

struct CleanResult {
    std::vector<VocabularyEntry> entries;
    std::size_t dropped = 0;
};
CleanResult clean_vocabulary(std::span<const VocabularyEntry> entries);

/// One entry per exact term; on collision the higher-priority source wins,
/// earlier entry on equal priority. Output follows first-seen term order.
std::vector<VocabularyEntry> dedupe(std::span<const VocabularyEntry> entries);

struct VocabSplit {
    std::vector<VocabularyEntry> train;
    std::vector<VocabularyEntry> validation;
    std::vector<VocabularyEntry> test;
};

/// Seeded shuffle then contiguous slices of floor(r0*n), floor(r1*n) and the
/// remainder. Throws ArgumentError if the ratios do not sum to 1 (+-1e-9),
/// any ratio is negative, or entries is empty.
VocabSplit split_dataset(std::span<const VocabularyEntry> entries, std::array<double, 3> ratios, std::uint64_t seed);

/// Lowercased maximal [a-z0-9] runs; the tokenization BLEU scores over.
std::vector<std::string> bleu_tokens(std::string_view s);

/// Single-reference sentence BLEU: geometric mean of clipped n-gram
/// precisions (n = 1..max_n) times the brevity penalty. An order with zero
/// matches gets precision 1/(c_n + 1), c_n being the candidate's n-gram
/// count. No unigram match at all, or an empty candidate, scores 0.
double bleu(std::string_view candidate, std::string_view reference, int max_n = 4);
double bleu(std::span<const std::string> candidate, std::span<const std::string> reference, int max_n = 4);

}  // namespace bugenrich
