#include "bugenrich/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "bugenrich/error.hpp"
#include "bugenrich/text.hpp"

namespace bugenrich {

namespace detail {
extern const std::string_view kBundledStopwords;
}

using ordered_json = nlohmann::ordered_json;

std::string_view to_string(PairCategory c) noexcept {
    return c == PairCategory::similar ? "similar" : "dissimilar";
}

std::optional<PairCategory> parse_pair_category(std::string_view s) noexcept {
    if (s == "similar") return PairCategory::similar;
    if (s == "dissimilar") return PairCategory::dissimilar;
    return std::nullopt;
}

Corpus::Corpus(std::vector<BugReport> reports) : reports_(std::move(reports)) {
    by_id_.reserve(reports_.size());
    for (std::size_t i = 0; i < reports_.size(); ++i) {
        by_id_.emplace(reports_[i].id, i);  // first occurrence wins on collision
    }
}

const BugReport* Corpus::find(std::string_view id) const {
    const auto it = by_id_.find(std::string(id));
    return it == by_id_.end() ? nullptr : &reports_[it->second];
}

std::optional<std::size_t> Corpus::index_of(std::string_view id) const {
    const auto it = by_id_.find(std::string(id));
    if (it == by_id_.end()) return std::nullopt;
    return it->second;
}

std::size_t Corpus::duplicate_count() const {
    return static_cast<std::size_t>(
        std::count_if(reports_.begin(), reports_.end(), [](const BugReport& r) { return r.master_id.has_value(); }));
}

std::map<std::string, std::size_t> Corpus::project_counts() const {
    std::map<std::string, std::size_t> counts;
    for (const auto& r : reports_) ++counts[r.project];
    return counts;
}

std::string_view to_string(ValidationIssue::Kind k) noexcept {
    switch (k) {
        case ValidationIssue::Kind::id_collision: return "id_collision";
        case ValidationIssue::Kind::dangling_master: return "dangling_master";
        case ValidationIssue::Kind::acausal_master: return "acausal_master";
        case ValidationIssue::Kind::category_without_master: return "category_without_master";
        case ValidationIssue::Kind::empty_text: return "empty_text";
    }
    return "unknown";
}

std::size_t ValidationReport::count(ValidationIssue::Kind k) const {
    return static_cast<std::size_t>(
        std::count_if(issues.begin(), issues.end(), [k](const ValidationIssue& i) { return i.kind == k; }));
}

namespace {

const ordered_json& require(const ordered_json& rec, const char* key, const std::string& source, std::size_t line) {
    const auto it = rec.find(key);
    if (it == rec.end()) throw ParseError(source, line, std::string("missing field '") + key + "'");
    return *it;
}

std::string require_string(const ordered_json& rec, const char* key, const std::string& source, std::size_t line) {
    const auto& v = require(rec, key, source, line);
    if (!v.is_string()) throw ParseError(source, line, std::string("field '") + key + "' must be a string");
    return v.get<std::string>();
}

BugReport parse_record(const ordered_json& rec, const std::string& source, std::size_t line) {
    if (!rec.is_object()) throw ParseError(source, line, "record is not a JSON object");
    static const std::unordered_set<std::string> kKnown{"id",          "summary", "description",
                                                        "created_at",  "master_id", "pair_category",
                                                        "project",     "explained_terms"};
    for (const auto& [key, _] : rec.items()) {
        if (!kKnown.contains(key)) throw ParseError(source, line, "unknown field '" + key + "'");
    }

    BugReport r;
    r.id = require_string(rec, "id", source, line);
    if (r.id.empty()) throw ParseError(source, line, "field 'id' is empty");
    r.summary = require_string(rec, "summary", source, line);
    r.description = require_string(rec, "description", source, line);
    r.project = require_string(rec, "project", source, line);

    const auto& ts = require(rec, "created_at", source, line);
    if (!ts.is_number_integer()) throw ParseError(source, line, "field 'created_at' must be integer epoch seconds");
    r.created_at = ts.get<std::int64_t>();

    if (const auto it = rec.find("master_id"); it != rec.end() && !it->is_null()) {
        if (!it->is_string() || it->get<std::string>().empty()) {
            throw ParseError(source, line, "field 'master_id' must be a non-empty string or null");
        }
        r.master_id = it->get<std::string>();
    }
    if (const auto it = rec.find("pair_category"); it != rec.end() && !it->is_null()) {
        const auto cat = it->is_string() ? parse_pair_category(it->get<std::string>()) : std::nullopt;
        if (!cat) throw ParseError(source, line, "field 'pair_category' must be \"similar\" or \"dissimilar\"");
        r.pair_category = cat;
    }
    if (const auto it = rec.find("explained_terms"); it != rec.end()) {
        if (!it->is_object()) throw ParseError(source, line, "field 'explained_terms' must be an object");
        ExplainedTerms terms;
        for (const auto& [term, expl] : it->items()) {
            if (!expl.is_string()) throw ParseError(source, line, "explained_terms values must be strings");
            terms.emplace_back(term, expl.get<std::string>());
        }
        r.explained_terms = std::move(terms);
    }
    return r;
}

}  // namespace

std::vector<BugReport> read_reports(std::istream& in, const std::string& source) {
    std::vector<BugReport> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (text::trim(line).empty()) continue;
        // ordered_json keeps explained_terms in emission order.
        ordered_json rec;
        try {
            rec = ordered_json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(source, lineno, std::string("malformed JSON: ") + e.what());
        }
        out.push_back(parse_record(rec, source, lineno));
    }
    return out;
}

std::vector<BugReport> read_reports(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileError(path);
    return read_reports(in, path);
}

namespace {

Corpus checked(std::vector<BugReport> reports) {
    const auto report = validate_corpus(reports);
    std::vector<std::string> offenders;
    std::string kinds;
    for (const auto& issue : report.issues) {
        if (issue.kind == ValidationIssue::Kind::empty_text) continue;
        offenders.push_back(issue.kind == ValidationIssue::Kind::dangling_master ? issue.detail : issue.report_id);
        if (kinds.find(to_string(issue.kind)) == std::string::npos) {
            if (!kinds.empty()) kinds += ", ";
            kinds += to_string(issue.kind);
        }
    }
    if (!offenders.empty()) {
        std::string msg = "corpus validation failed (" + kinds + "): ";
        for (std::size_t i = 0; i < offenders.size(); ++i) {
            if (i) msg += ", ";
            msg += offenders[i];
        }
        throw ValidationError(msg, std::move(offenders));
    }
    return Corpus(std::move(reports));
}

}  // namespace

Corpus load_corpus(const std::string& path) { return checked(read_reports(path)); }

Corpus load_corpus(std::istream& in, const std::string& source) { return checked(read_reports(in, source)); }

void write_report(std::ostream& out, const BugReport& r) {
    ordered_json rec;
    rec["id"] = r.id;
    rec["summary"] = r.summary;
    rec["description"] = r.description;
    rec["created_at"] = r.created_at;
    if (r.master_id) rec["master_id"] = *r.master_id;
    if (r.pair_category) rec["pair_category"] = to_string(*r.pair_category);
    rec["project"] = r.project;
    if (r.explained_terms) {
        ordered_json terms = ordered_json::object();
        for (const auto& [term, expl] : *r.explained_terms) terms[term] = expl;
        rec["explained_terms"] = std::move(terms);
    }
    out << rec.dump() << '\n';
}

void write_corpus(std::ostream& out, std::span<const BugReport> reports) {
    for (const auto& r : reports) write_report(out, r);
}

void write_corpus(const std::string& path, std::span<const BugReport> reports) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FileError(path, "cannot write file");
    write_corpus(out, reports);
}

ValidationReport validate_corpus(std::span<const BugReport> reports) {
    using Kind = ValidationIssue::Kind;
    ValidationReport report;
    std::unordered_map<std::string, std::size_t> first;
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const auto [it, inserted] = first.emplace(reports[i].id, i);
        if (!inserted) {
            report.issues.push_back({Kind::id_collision, reports[i].id,
                                     "id also used by record " + std::to_string(it->second + 1)});
        }
    }
    for (const auto& r : reports) {
        if (r.master_id) {
            const auto it = first.find(*r.master_id);
            if (it == first.end()) {
                report.issues.push_back({Kind::dangling_master, r.id, *r.master_id});
            } else if (reports[it->second].created_at > r.created_at) {
                report.issues.push_back({Kind::acausal_master, r.id,
                                         "master " + *r.master_id + " created after this report"});
            }
        } else if (r.pair_category) {
            report.issues.push_back({Kind::category_without_master, r.id, "pair_category set without master_id"});
        }
        if (text::trim(r.summary).empty() && text::trim(r.description).empty()) {
            report.issues.push_back({Kind::empty_text, r.id, "summary and description are empty"});
        }
    }
    return report;
}

std::vector<std::string> split_sentences(std::string_view text) {
    std::vector<std::string> out;
    auto flush = [&](std::size_t b, std::size_t e) {
        auto s = text::trim(text.substr(b, e - b));
        if (!s.empty()) out.push_back(std::move(s));
    };
    std::size_t start = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (c == '\n') {
            flush(start, i);
            start = i + 1;
        } else if ((c == '.' || c == '!' || c == '?') && (i + 1 == text.size() || text::is_space(text[i + 1]))) {
            flush(start, i + 1);
            start = i + 1;
        }
    }
    if (start < text.size()) flush(start, text.size());
    return out;
}

std::size_t TokenStream::token_count() const {
    std::size_t n = 0;
    for (const auto& s : sentences) n += s.size();
    return n;
}

std::vector<std::string> TokenStream::flat() const {
    std::vector<std::string> out;
    out.reserve(token_count());
    for (const auto& s : sentences) out.insert(out.end(), s.begin(), s.end());
    return out;
}

std::string TokenStream::render() const {
    std::string out;
    for (std::size_t i = 0; i < sentences.size(); ++i) {
        if (i) out.push_back('\n');
        for (std::size_t j = 0; j < sentences[i].size(); ++j) {
            if (j) out.push_back(' ');
            out += sentences[i][j];
        }
    }
    return out;
}

namespace {

StopwordSet parse_stopwords(std::istream& in) {
    std::unordered_set<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        auto w = text::trim(line);
        if (w.empty() || w.front() == '#') continue;
        words.insert(text::to_lower(w));
    }
    return StopwordSet(std::move(words));
}

}  // namespace

const StopwordSet& StopwordSet::bundled() {
    static const StopwordSet set = [] {
        std::istringstream in{std::string(detail::kBundledStopwords)};
        return parse_stopwords(in);
    }();
    return set;
}

StopwordSet StopwordSet::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileError(path);
    return parse_stopwords(in);
}

TokenStream preprocess_text(std::string_view report_id, std::string_view raw, const StopwordSet& stopwords) {
    TokenStream ts;
    ts.report_id = std::string(report_id);
    const std::string cleaned = text::strip_urls(text::strip_html(raw));
    for (const auto& sentence : split_sentences(cleaned)) {
        Sentence tokens;
        for (auto& tok : text::alnum_runs(sentence)) {
            auto lower = text::to_lower(tok);
            if (stopwords.contains(lower) || text::is_numeric(lower)) continue;
            tokens.push_back(std::move(lower));
        }
        if (!tokens.empty()) ts.sentences.push_back(std::move(tokens));
    }
    return ts;
}

TokenStream preprocess(const BugReport& report, const StopwordSet& stopwords) {
    return preprocess_text(report.id, report.text(), stopwords);
}

}  // namespace bugenrich
