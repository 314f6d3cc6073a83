#include "bugenrich/enrichment.hpp"

#include <algorithm>
#include <iostream>
#include <unordered_set>

#include <httplib.h>
#include <json.hpp>

#include "bugenrich/error.hpp"
#include "bugenrich/text.hpp"

namespace bugenrich {

namespace {

std::string lemmatize_term(std::string_view term) { return text::to_lower(text::lemmatize_text(term)); }

std::mutex& log_mutex() {
    static std::mutex m;
    return m;
}

void warn(const std::string& msg) {
    std::lock_guard lock(log_mutex());
    std::cerr << "[warn] " << msg << '\n';
}

bool is_separator(char c) noexcept { return c == '-' || c == '_' || text::is_space(c); }

}  // namespace

// ---------------------------------------------------------------------------
// Vocabulary provider

VocabularyIndex::VocabularyIndex(std::span<const VocabularyEntry> entries) {
    for (const auto& e : entries) {
        exact_.try_emplace(e.term, e.explanation);
        folded_.try_emplace(text::to_lower(e.term), e.explanation);
        lemmatized_.try_emplace(lemmatize_term(e.term), e.explanation);
    }
}

std::optional<std::string> VocabularyIndex::lookup(std::string_view term) const {
    const std::string key(term);
    if (auto it = exact_.find(key); it != exact_.end()) return it->second;
    if (auto it = folded_.find(text::to_lower(key)); it != folded_.end()) return it->second;
    if (auto it = lemmatized_.find(lemmatize_term(key)); it != lemmatized_.end()) return it->second;
    return std::nullopt;
}

std::optional<std::string> lookup_explanation(std::string_view term, const VocabularyIndex& vocabulary) {
    return vocabulary.lookup(term);
}

// ---------------------------------------------------------------------------
// Remote provider

std::string explanation_request_body(std::string_view term) {
    nlohmann::ordered_json body;
    body["prompt"] = "explain the technical term: " + std::string(term);
    body["term"] = std::string(term);
    return body.dump();
}

std::optional<std::string> parse_explanation_response(std::string_view body) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("response", 0, std::string("malformed JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("explanation") || !doc["explanation"].is_string()) {
        throw ParseError("response", 0, "expected {\"explanation\": string}");
    }
    auto explanation = text::squeeze_spaces(doc["explanation"].get<std::string>());
    if (explanation.empty()) return std::nullopt;
    return explanation;
}

namespace {

struct Endpoint {
    std::string origin;  // scheme://host[:port]
    std::string path;
};

Endpoint split_endpoint(const std::string& url) {
    const auto scheme = url.find("://");
    if (scheme == std::string::npos) throw ConfigError("endpoint must look like http://host:port/path: " + url);
    const auto slash = url.find('/', scheme + 3);
    if (slash == std::string::npos) return {url, "/"};
    return {url.substr(0, slash), url.substr(slash)};
}

}  // namespace

std::optional<std::string> request_explanation(std::string_view term, const RemoteOptions& options,
                                               std::atomic<std::size_t>* warnings,
                                               std::atomic<std::size_t>* attempts) {
    if (options.endpoint.empty()) throw ConfigError("remote explanation endpoint is not configured");
    const auto endpoint = split_endpoint(options.endpoint);
    const auto body = explanation_request_body(term);

    const auto seconds = static_cast<time_t>(options.timeout_s);
    const auto micros = static_cast<time_t>((options.timeout_s - static_cast<double>(seconds)) * 1e6);

    std::string last_error;
    const int total_attempts = 1 + std::max(0, options.retries);
    for (int attempt = 0; attempt < total_attempts; ++attempt) {
        if (attempts) ++*attempts;
        httplib::Client client(endpoint.origin);
        client.set_connection_timeout(seconds, micros);
        client.set_read_timeout(seconds, micros);
        client.set_write_timeout(seconds, micros);
        auto res = client.Post(endpoint.path, body, "application/json");
        if (!res) {
            last_error = httplib::to_string(res.error());
            continue;
        }
        if (res->status != 200) {
            last_error = "HTTP status " + std::to_string(res->status);
            continue;
        }
        try {
            return parse_explanation_response(res->body);
        } catch (const ParseError& e) {
            last_error = e.what();
        }
    }
    if (warnings) ++*warnings;
    warn("no remote explanation for '" + std::string(term) + "' after " + std::to_string(total_attempts) +
         " attempt(s): " + last_error);
    return std::nullopt;
}

std::optional<std::string> RemoteExplainer::explain(const std::string& term) const {
    ++calls_;
    {
        std::lock_guard lock(cache_mutex_);
        if (auto it = cache_.find(term); it != cache_.end()) return it->second;
    }
    auto result = request_explanation(term, options_, &warnings_, &requests_);
    std::lock_guard lock(cache_mutex_);
    return cache_.try_emplace(term, std::move(result)).first->second;
}

std::optional<std::string> ProviderChain::explain(const std::string& term) const {
    for (const auto& p : providers_) {
        if (auto e = p->explain(term)) return e;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Injection

std::optional<std::pair<std::size_t, std::size_t>> find_term(std::string_view text, std::string_view term) {
    std::vector<std::string_view> parts;
    {
        std::size_t i = 0;
        while (i < term.size()) {
            while (i < term.size() && is_separator(term[i])) ++i;
            const std::size_t start = i;
            while (i < term.size() && !is_separator(term[i])) ++i;
            if (i > start) parts.push_back(term.substr(start, i - start));
        }
    }
    if (parts.empty()) return std::nullopt;

    const auto match_part = [&](std::size_t pos, std::string_view part) {
        if (text.size() - pos < part.size()) return false;
        for (std::size_t k = 0; k < part.size(); ++k) {
            if (text::fold(text[pos + k]) != text::fold(part[k])) return false;
        }
        return true;
    };

    for (std::size_t start = 0; start < text.size(); ++start) {
        if (start > 0 && text::is_alnum(text[start - 1]) && text::is_alnum(text[start])) continue;
        std::size_t pos = start;
        bool ok = true;
        for (std::size_t p = 0; p < parts.size() && ok; ++p) {
            if (!match_part(pos, parts[p])) {
                ok = false;
                break;
            }
            pos += parts[p].size();
            if (p + 1 < parts.size()) {
                const std::size_t sep_start = pos;
                while (pos < text.size() && is_separator(text[pos])) ++pos;
                ok = pos > sep_start;
            }
        }
        if (!ok) continue;
        if (pos < text.size() && text::is_alnum(text[pos]) && text::is_alnum(text[pos - 1])) continue;
        return std::pair{start, pos};
    }
    return std::nullopt;
}

std::string EnrichedReport::original_text() const {
    std::string out = enriched_text;
    for (auto it = insertions.rbegin(); it != insertions.rend(); ++it) out.erase(it->offset, it->length);
    return out;
}

EnrichedReport enrich_text(std::string_view report_id, std::string_view text, std::span<const std::string> terms,
                           const ProviderChain& providers) {
    struct Planned {
        std::size_t at;
        std::size_t order;
        std::string insert;
        std::string term;
    };

    EnrichedReport out;
    out.report_id = std::string(report_id);
    std::vector<Planned> planned;
    std::vector<std::pair<std::string, std::string>> glossary;
    std::unordered_set<std::string> seen;

    for (std::size_t i = 0; i < terms.size(); ++i) {
        const std::string& term = terms[i];
        if (text::trim(term).empty() || !seen.insert(term).second) continue;
        std::optional<std::string> explanation = providers.explain(term);
        if (explanation) *explanation = text::squeeze_spaces(*explanation);
        if (!explanation || explanation->empty()) {
            out.unexplained_terms.push_back(term);
            continue;
        }
        out.explained_terms.emplace_back(term, *explanation);
        if (const auto match = find_term(text, term)) {
            planned.push_back({match->second, i, " (" + *explanation + ")", term});
        } else {
            glossary.emplace_back(term, *explanation);
        }
    }

    std::stable_sort(planned.begin(), planned.end(), [](const Planned& a, const Planned& b) {
        return a.at != b.at ? a.at < b.at : a.order < b.order;
    });

    std::size_t cursor = 0;
    for (const auto& p : planned) {
        out.enriched_text.append(text.substr(cursor, p.at - cursor));
        cursor = p.at;
        out.insertions.push_back({out.enriched_text.size(), p.insert.size(), p.at, p.term});
        out.enriched_text += p.insert;
    }
    out.enriched_text.append(text.substr(cursor));

    if (!glossary.empty()) {
        std::string block = "\nGlossary: ";
        for (std::size_t i = 0; i < glossary.size(); ++i) {
            if (i) block += "; ";
            block += glossary[i].first + " \xE2\x80\x94 " + glossary[i].second;
        }
        out.insertions.push_back({out.enriched_text.size(), block.size(), text.size(), {}});
        out.enriched_text += block;
    }
    return out;
}

EnrichedReport enrich_report(const BugReport& report, std::span<const std::string> terms,
                             const ProviderChain& providers) {
    return enrich_text(report.id, report.text(), terms, providers);
}

BugReport to_enriched_record(const BugReport& original, const EnrichedReport& enriched) {
    const std::size_t summary_end = original.summary.size();
    std::size_t grown = 0;
    for (const auto& ins : enriched.insertions) {
        if (ins.source_offset <= summary_end) grown += ins.length;
    }
    BugReport out = original;
    const std::size_t cut = summary_end + grown;
    out.summary = enriched.enriched_text.substr(0, cut);
    // Skip the single space that joined summary and description.
    out.description = cut < enriched.enriched_text.size() ? enriched.enriched_text.substr(cut + 1) : std::string{};
    out.explained_terms = enriched.explained_terms;
    return out;
}

}  // namespace bugenrich
