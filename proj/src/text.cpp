#include "bugenrich/text.hpp"

#include <array>

namespace bugenrich::text {

namespace {

bool starts_with_ci(std::string_view s, std::size_t pos, std::string_view prefix) {
    if (s.size() - pos < prefix.size()) return false;
    for (std::size_t i = 0; i < prefix.size(); ++i) {
        if (fold(s[pos + i]) != prefix[i]) return false;
    }
    return true;
}

bool ends_with_ci(std::string_view s, std::string_view suffix) {
    if (s.size() < suffix.size()) return false;
    return starts_with_ci(s, s.size() - suffix.size(), suffix);
}

bool is_vowel(char c) noexcept {
    c = fold(c);
    return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u';
}

bool has_vowel(std::string_view s) {
    for (char c : s) {
        if (is_vowel(c) || fold(c) == 'y') return true;
    }
    return false;
}

// "runn" -> "run", "stopp" -> "stop"; keeps "fall", "pass", "buzz".
std::string undo_doubling(std::string stem) {
    const std::size_t n = stem.size();
    if (n >= 3 && fold(stem[n - 1]) == fold(stem[n - 2]) && is_alpha(stem[n - 1]) && !is_vowel(stem[n - 1])) {
        const char c = fold(stem[n - 1]);
        if (c != 'l' && c != 's' && c != 'z') stem.pop_back();
    }
    return stem;
}

}  // namespace

std::string to_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = fold(c);
    return out;
}

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && is_space(s[b])) ++b;
    while (e > b && is_space(s[e - 1])) --e;
    return std::string(s.substr(b, e - b));
}

std::string squeeze_spaces(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending = false;
    for (char c : s) {
        if (is_space(c)) {
            pending = !out.empty();
            continue;
        }
        if (pending) out.push_back(' ');
        pending = false;
        out.push_back(c);
    }
    return out;
}

std::string strip_html(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        if (s[i] == '<' && i + 1 < s.size() &&
            (is_alpha(s[i + 1]) || s[i + 1] == '/' || s[i + 1] == '!' || s[i + 1] == '?')) {
            const std::size_t close = s.find('>', i + 1);
            if (close != std::string_view::npos) {
                out.push_back(' ');
                i = close + 1;
                continue;
            }
        }
        out.push_back(s[i++]);
    }
    return out;
}

std::string strip_urls(std::string_view s) {
    static constexpr std::array<std::string_view, 4> kPrefixes{"http://", "https://", "ftp://", "www."};
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        const bool boundary = i == 0 || !is_alnum(s[i - 1]);
        bool url = false;
        if (boundary) {
            for (auto p : kPrefixes) {
                if (starts_with_ci(s, i, p)) {
                    url = true;
                    break;
                }
            }
        }
        if (url) {
            while (i < s.size() && !is_space(s[i])) ++i;
            out.push_back(' ');
            continue;
        }
        out.push_back(s[i++]);
    }
    return out;
}

std::vector<std::string> alnum_runs(std::string_view s) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && !is_alnum(s[i])) ++i;
        const std::size_t start = i;
        while (i < s.size() && is_alnum(s[i])) ++i;
        if (i > start) out.emplace_back(s.substr(start, i - start));
    }
    return out;
}

bool is_numeric(std::string_view token) noexcept {
    if (token.empty()) return false;
    for (char c : token) {
        if (!is_digit(c)) return false;
    }
    return true;
}

std::string lemmatize_word(std::string_view word) {
    const std::size_t n = word.size();
    if (n <= 3) return std::string(word);
    for (char c : word) {
        if (!is_alpha(c)) return std::string(word);
    }
    if (ends_with_ci(word, "ies") && n > 4) {
        return std::string(word.substr(0, n - 3)) + "y";
    }
    if (ends_with_ci(word, "sses") || ends_with_ci(word, "shes") || ends_with_ci(word, "ches") ||
        ends_with_ci(word, "xes")) {
        return std::string(word.substr(0, n - 2));
    }
    if (ends_with_ci(word, "s")) {
        if (ends_with_ci(word, "ss") || ends_with_ci(word, "us") || ends_with_ci(word, "is")) {
            return std::string(word);
        }
        return std::string(word.substr(0, n - 1));
    }
    if (ends_with_ci(word, "ing") && n >= 6) {
        const auto stem = word.substr(0, n - 3);
        if (has_vowel(stem)) return undo_doubling(std::string(stem));
    }
    if (ends_with_ci(word, "ed") && n >= 5) {
        const auto stem = word.substr(0, n - 2);
        if (has_vowel(stem) && fold(stem.back()) != 'e') return undo_doubling(std::string(stem));
    }
    return std::string(word);
}

std::string lemmatize_text(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        if (!is_alpha(s[i])) {
            out.push_back(s[i++]);
            continue;
        }
        const std::size_t start = i;
        while (i < s.size() && is_alpha(s[i])) ++i;
        // Alphanumeric identifiers like "utf8" or "java11" are left alone.
        if (i < s.size() && is_digit(s[i])) {
            while (i < s.size() && is_alnum(s[i])) ++i;
            out.append(s.substr(start, i - start));
            continue;
        }
        if (start > 0 && is_digit(s[start - 1])) {
            out.append(s.substr(start, i - start));
            continue;
        }
        out += lemmatize_word(s.substr(start, i - start));
    }
    return out;
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.emplace_back(s.substr(start));
            return out;
        }
        out.emplace_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

}  // namespace bugenrich::text
