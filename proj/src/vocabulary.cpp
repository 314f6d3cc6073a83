#include "bugenrich/vocabulary.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <unordered_map>

#include "bugenrich/error.hpp"
#include "bugenrich/rng.hpp"
#include "bugenrich/text.hpp"

namespace bugenrich {

std::string_view to_string(VocabSource s) noexcept {
    switch (s) {
        case VocabSource::stackoverflow: return "stackoverflow";
        case VocabSource::api_doc: return "api_doc";
        case VocabSource::glossary: return "glossary";
    }
    return "stackoverflow";
}

std::optional<VocabSource> parse_vocab_source(std::string_view s) noexcept {
    if (s == "stackoverflow") return VocabSource::stackoverflow;
    if (s == "api_doc") return VocabSource::api_doc;
    if (s == "glossary") return VocabSource::glossary;
    return std::nullopt;
}

int source_priority(VocabSource s) noexcept {
    switch (s) {
        case VocabSource::api_doc: return 3;
        case VocabSource::glossary: return 2;
        case VocabSource::stackoverflow: return 1;
    }
    return 0;
}

std::vector<VocabularyEntry> parse_vocabulary(std::istream& in, const std::string& source) {
    std::vector<VocabularyEntry> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (text::trim(line).empty()) continue;
        const auto cols = text::split(line, '\t');
        if (cols.size() != 3) {
            throw ParseError(source, lineno, "expected 3 tab-separated columns, got " + std::to_string(cols.size()));
        }
        const auto src = parse_vocab_source(text::trim(cols[2]));
        if (!src) throw ParseError(source, lineno, "unknown source '" + cols[2] + "'");
        out.push_back({cols[0], cols[1], *src});
    }
    return out;
}

std::vector<VocabularyEntry> load_vocabulary(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileError(path);
    return parse_vocabulary(in, path);
}

void write_vocabulary(std::ostream& out, std::span<const VocabularyEntry> entries) {
    for (const auto& e : entries) out << e.term << '\t' << e.explanation << '\t' << to_string(e.source) << '\n';
}

void write_vocabulary(const std::string& path, std::span<const VocabularyEntry> entries) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FileError(path, "cannot write file");
    write_vocabulary(out, entries);
}

std::optional<VocabularyEntry> clean_entry(const VocabularyEntry& entry) {
    VocabularyEntry out;
    out.source = entry.source;
    out.term = text::to_lower(text::squeeze_spaces(entry.term));
    out.explanation = text::squeeze_spaces(text::lemmatize_text(text::strip_urls(text::strip_html(entry.explanation))));
    if (out.term.empty() || out.explanation.empty()) return std::nullopt;
    return out;
}

CleanResult clean_vocabulary(std::span<const VocabularyEntry> entries) {
    CleanResult result;
    for (const auto& e : entries) {
        if (auto cleaned = clean_entry(e)) {
            result.entries.push_back(std::move(*cleaned));
        } else {
            ++result.dropped;
        }
    }
    return result;
}

std::vector<VocabularyEntry> dedupe(std::span<const VocabularyEntry> entries) {
    std::vector<VocabularyEntry> out;
    std::unordered_map<std::string, std::size_t> slot;
    for (const auto& e : entries) {
        const auto [it, inserted] = slot.emplace(e.term, out.size());
        if (inserted) {
            out.push_back(e);
        } else if (source_priority(e.source) > source_priority(out[it->second].source)) {
            out[it->second] = e;
        }
    }
    return out;
}

VocabSplit split_dataset(std::span<const VocabularyEntry> entries, std::array<double, 3> ratios, std::uint64_t seed) {
    if (entries.empty()) throw ArgumentError("cannot split an empty vocabulary");
    for (double r : ratios) {
        if (r < 0.0) throw ArgumentError("split ratios must be non-negative");
    }
    if (std::abs(ratios[0] + ratios[1] + ratios[2] - 1.0) > 1e-9) throw ArgumentError("split ratios must sum to 1");

    std::vector<VocabularyEntry> shuffled(entries.begin(), entries.end());
    SeededRng rng(seed);
    rng.shuffle(shuffled);

    const std::size_t n = shuffled.size();
    // The epsilon keeps exact products like 0.1 * 70 from flooring to 6.
    const auto share = [n](double r) { return static_cast<std::size_t>(std::floor(r * static_cast<double>(n) + 1e-9)); };
    const std::size_t n_train = std::min(n, share(ratios[0]));
    const std::size_t n_val = std::min(n - n_train, share(ratios[1]));

    VocabSplit split;
    auto first = shuffled.begin();
    split.train.assign(first, first + static_cast<std::ptrdiff_t>(n_train));
    split.validation.assign(first + static_cast<std::ptrdiff_t>(n_train),
                            first + static_cast<std::ptrdiff_t>(n_train + n_val));
    split.test.assign(first + static_cast<std::ptrdiff_t>(n_train + n_val), shuffled.end());
    return split;
}

std::vector<std::string> bleu_tokens(std::string_view s) {
    auto runs = text::alnum_runs(s);
    for (auto& r : runs) r = text::to_lower(r);
    return runs;
}

double bleu(std::span<const std::string> candidate, std::span<const std::string> reference, int max_n) {
    if (max_n < 1) throw ArgumentError("max_n must be >= 1");
    if (candidate.empty()) return 0.0;

    const auto ngram_counts = [](std::span<const std::string> toks, std::size_t n) {
        std::map<std::vector<std::string>, std::size_t> counts;
        for (std::size_t i = 0; i + n <= toks.size(); ++i) {
            ++counts[std::vector<std::string>(toks.begin() + static_cast<std::ptrdiff_t>(i),
                                              toks.begin() + static_cast<std::ptrdiff_t>(i + n))];
        }
        return counts;
    };

    double log_sum = 0.0;
    for (int order = 1; order <= max_n; ++order) {
        const auto n = static_cast<std::size_t>(order);
        const auto cand = ngram_counts(candidate, n);
        const auto ref = ngram_counts(reference, n);
        std::size_t matches = 0;
        for (const auto& [gram, count] : cand) {
            const auto it = ref.find(gram);
            if (it != ref.end()) matches += std::min(count, it->second);
        }
        const std::size_t total = candidate.size() >= n ? candidate.size() - n + 1 : 0;
        if (matches == 0) {
            if (order == 1) return 0.0;
            log_sum += std::log(1.0 / static_cast<double>(total + 1));
        } else {
            log_sum += std::log(static_cast<double>(matches) / static_cast<double>(total));
        }
    }

    const double c = static_cast<double>(candidate.size());
    const double r = static_cast<double>(reference.size());
    const double bp = c > r ? 1.0 : std::exp(1.0 - r / c);
    return bp * std::exp(log_sum / static_cast<double>(max_n));
}

double bleu(std::string_view candidate, std::string_view reference, int max_n) {
    const auto c = bleu_tokens(candidate);
    const auto r = bleu_tokens(reference);
    return bleu(c, r, max_n);
}

}  // namespace bugenrich
