#pragma once

#include <string>
#include <string_view>
#include <vector>

// ASCII text helpers shared by the corpus, vocabulary and enrichment code.
namespace bugenrich::text {

inline bool is_alnum(char c) noexcept {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}
inline bool is_alpha(char c) noexcept { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
inline bool is_digit(char c) noexcept { return c >= '0' && c <= '9'; }
inline bool is_space(char c) noexcept {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}
inline char fold(char c) noexcept { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);

/// Collapses runs of whitespace to a single space and trims the ends.
std::string squeeze_spaces(std::string_view s);

/// Replaces every `<...>` markup tag with a single space.
std::string strip_html(std::string_view s);

/// Replaces http(s)/ftp URLs and bare `www.` hosts with a single space.
std::string strip_urls(std::string_view s);

/// Maximal runs of ASCII letters/digits, in source order, case preserved.
std::vector<std::string> alnum_runs(std::string_view s);

bool is_numeric(std::string_view token) noexcept;

/// Rule-based suffix lemmatizer: plural -s/-es/-ies, -ing and -ed with
/// consonant-doubling undo. Case of the retained stem is preserved.
std::string lemmatize_word(std::string_view word);

/// Lemmatizes each alphabetic run in `s`, leaving everything else untouched.
std::string lemmatize_text(std::string_view s);

std::vector<std::string> split(std::string_view s, char sep);

}  // namespace bugenrich::text
