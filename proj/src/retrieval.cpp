#include "bugenrich/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include <json.hpp>

#include "bugenrich/error.hpp"
#include "bugenrich/text.hpp"

namespace bugenrich {

Index Index::build(std::span<const TokenStream> documents) {
    if (documents.empty()) throw ArgumentError("cannot build an index over an empty corpus");
    Index index;
    index.docs_.reserve(documents.size());
    std::size_t total = 0;
    for (const auto& ts : documents) {
        DocumentStats doc;
        doc.id = ts.report_id;
        for (const auto& sentence : ts.sentences) {
            for (const auto& tok : sentence) ++doc.tf[tok];
            doc.length += sentence.size();
        }
        for (const auto& [term, _] : doc.tf) ++index.df_[term];
        total += doc.length;
        if (!index.by_id_.emplace(doc.id, index.docs_.size()).second) {
            throw ArgumentError("duplicate document id in index: " + doc.id);
        }
        index.docs_.push_back(std::move(doc));
    }
    index.avg_length_ = static_cast<double>(total) / static_cast<double>(index.docs_.size());
    return index;
}

std::size_t Index::df(std::string_view term) const {
    const auto it = df_.find(std::string(term));
    return it == df_.end() ? 0 : it->second;
}

std::optional<std::size_t> Index::find(std::string_view id) const {
    const auto it = by_id_.find(std::string(id));
    if (it == by_id_.end()) return std::nullopt;
    return it->second;
}

double bm25_idf(const Index& index, std::string_view term) {
    const double n = static_cast<double>(index.doc_count());
    const double df = static_cast<double>(index.df(term));
    return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

double bm25_score(std::span<const std::string> query_terms, std::size_t doc, const Index& index,
                  const Bm25Params& params) {
    const auto& d = index.doc(doc);
    const double avg = index.avg_length();
    // An index of empty documents has avg 0; every tf is 0 there anyway.
    const double norm = avg > 0.0 ? static_cast<double>(d.length) / avg : 0.0;
    const std::set<std::string> distinct(query_terms.begin(), query_terms.end());
    double score = 0.0;
    for (const auto& term : distinct) {
        const auto it = d.tf.find(term);
        if (it == d.tf.end()) continue;
        const double tf = static_cast<double>(it->second);
        score += bm25_idf(index, term) * tf * (params.k1 + 1.0) /
                 (tf + params.k1 * (1.0 - params.b + params.b * norm));
    }
    return score;
}

double cosine_idf(const Index& index, std::string_view term) {
    const std::size_t df = index.df(term);
    if (df == 0) return 0.0;
    return std::log(1.0 + static_cast<double>(index.doc_count()) / static_cast<double>(df));
}

double tfidf_cosine(std::span<const std::string> query_tokens, std::size_t doc, const Index& index) {
    std::map<std::string, std::size_t> qtf;
    for (const auto& t : query_tokens) ++qtf[t];
    const auto& d = index.doc(doc);

    double dot = 0.0, qnorm = 0.0, dnorm = 0.0;
    for (const auto& [term, tf] : qtf) {
        const double w = std::log1p(static_cast<double>(tf)) * cosine_idf(index, term);
        qnorm += w * w;
        if (const auto it = d.tf.find(term); it != d.tf.end()) {
            dot += w * std::log1p(static_cast<double>(it->second)) * cosine_idf(index, term);
        }
    }
    for (const auto& [term, tf] : d.tf) {
        const double w = std::log1p(static_cast<double>(tf)) * cosine_idf(index, term);
        dnorm += w * w;
    }
    if (qnorm == 0.0 || dnorm == 0.0) return 0.0;
    return std::clamp(dot / (std::sqrt(qnorm) * std::sqrt(dnorm)), 0.0, 1.0);
}

std::string_view to_string(Backend b) noexcept {
    switch (b) {
        case Backend::bm25: return "bm25";
        case Backend::tfidf_cosine: return "tfidf_cosine";
        case Backend::external_scores: return "external_scores";
    }
    return "bm25";
}

std::optional<Backend> parse_backend(std::string_view s) noexcept {
    if (s == "bm25") return Backend::bm25;
    if (s == "tfidf_cosine") return Backend::tfidf_cosine;
    if (s == "external_scores") return Backend::external_scores;
    return std::nullopt;
}

namespace {

std::vector<std::string> csv_fields(const std::string& line) {
    auto fields = text::split(line, ',');
    for (auto& f : fields) f = text::trim(f);
    return fields;
}

}  // namespace

ExternalScores ExternalScores::parse(std::istream& in, const std::string& source) {
    ExternalScores out;
    std::string line;
    std::size_t lineno = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (text::trim(line).empty()) continue;
        const auto f = csv_fields(line);
        if (!header) {
            if (f != std::vector<std::string>{"query_id", "candidate_id", "score"}) {
                throw ParseError(source, lineno, "expected header query_id,candidate_id,score");
            }
            header = true;
            continue;
        }
        if (f.size() != 3) throw ParseError(source, lineno, "expected 3 comma-separated fields");
        double score = 0.0;
        try {
            std::size_t used = 0;
            score = std::stod(f[2], &used);
            if (used != f[2].size()) throw std::invalid_argument(f[2]);
        } catch (const std::exception&) {
            throw ParseError(source, lineno, "score is not a number: " + f[2]);
        }
        out.scores_[{f[0], f[1]}] = score;
    }
    if (!header) throw ParseError(source, 0, "empty score file");
    return out;
}

ExternalScores ExternalScores::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileError(path);
    return parse(in, path);
}

std::optional<double> ExternalScores::find(std::string_view query_id, std::string_view candidate_id) const {
    const auto it = scores_.find(std::pair{std::string(query_id), std::string(candidate_id)});
    if (it == scores_.end()) return std::nullopt;
    return it->second;
}

std::vector<std::string> candidate_set(const BugReport& query, const Corpus& corpus) {
    std::vector<std::string> out;
    for (const auto& r : corpus.reports()) {
        if (r.created_at < query.created_at && r.id != query.id) out.push_back(r.id);
    }
    return out;
}

void sort_ranking(std::vector<ScoredCandidate>& ranking) {
    std::sort(ranking.begin(), ranking.end(), [](const ScoredCandidate& a, const ScoredCandidate& b) {
        return a.score != b.score ? a.score > b.score : a.id < b.id;
    });
}

Ranker::Ranker(const Corpus& corpus, std::span<const TokenStream> tokens, const Index& index, Backend backend,
               Bm25Params params, const ExternalScores* external)
    : corpus_(corpus), tokens_(tokens), index_(index), backend_(backend), params_(params), external_(external) {
    if (tokens_.size() != corpus_.size() || index_.doc_count() != corpus_.size()) {
        throw ArgumentError("corpus, token streams and index must have the same size");
    }
    if (backend_ == Backend::external_scores && !external_) {
        throw ArgumentError("external_scores backend needs a score file");
    }
}

double Ranker::score(std::string_view query_id, std::string_view candidate_id) const {
    const auto q = corpus_.index_of(query_id);
    const auto c = corpus_.index_of(candidate_id);
    if (!q || !c) {
        const std::string missing(q ? candidate_id : query_id);
        throw ValidationError("unknown report id: " + missing, {missing});
    }
    switch (backend_) {
        case Backend::bm25: {
            const auto query = tokens_[*q].flat();
            return bm25_score(query, *index_.find(candidate_id), index_, params_);
        }
        case Backend::tfidf_cosine: {
            const auto query = tokens_[*q].flat();
            return tfidf_cosine(query, *index_.find(candidate_id), index_);
        }
        case Backend::external_scores: {
            if (auto s = external_->find(query_id, candidate_id)) return *s;
            const std::string pair = std::string(query_id) + "," + std::string(candidate_id);
            throw ValidationError("external score file has no entry for pair (" + pair + ")", {pair});
        }
    }
    return 0.0;
}

RankedList Ranker::rank(std::string_view query_id) const {
    const auto* query = corpus_.find(query_id);
    if (!query) throw ValidationError("unknown report id: " + std::string(query_id), {std::string(query_id)});
    const auto candidates = candidate_set(*query, corpus_);
    if (candidates.empty()) throw ArgumentError("query " + query->id + " has no earlier candidates");

    RankedList list;
    list.query_id = query->id;
    list.ranking.reserve(candidates.size());
    const auto q = *corpus_.index_of(query_id);
    const auto query_tokens = tokens_[q].flat();
    for (const auto& id : candidates) {
        double s = 0.0;
        switch (backend_) {
            case Backend::bm25: s = bm25_score(query_tokens, *index_.find(id), index_, params_); break;
            case Backend::tfidf_cosine: s = tfidf_cosine(query_tokens, *index_.find(id), index_); break;
            case Backend::external_scores: s = score(query_id, id); break;
        }
        list.ranking.push_back({id, s});
    }
    sort_ranking(list.ranking);
    return list;
}

double Ranker::pair_score(std::string_view a, std::string_view b) const {
    const auto lo = std::min(a, b);
    const auto hi = std::max(a, b);
    if (backend_ == Backend::external_scores && corpus_.find(lo) && corpus_.find(hi)) {
        if (auto s = external_->find(lo, hi)) return *s;
        if (auto s = external_->find(hi, lo)) return *s;
    }
    return score(lo, hi);
}

RankedList rank_candidates(std::string_view query_id, const Ranker& ranker) { return ranker.rank(query_id); }

std::vector<ScoredPair> score_pairs(std::span<const LabeledPair> pairs, const Ranker& ranker) {
    std::vector<ScoredPair> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) out.push_back({p, ranker.pair_score(p.a, p.b)});
    return out;
}

void write_ranked_lists(std::ostream& out, std::span<const RankedList> lists) {
    for (const auto& list : lists) {
        nlohmann::ordered_json rec;
        rec["query_id"] = list.query_id;
        auto ranking = nlohmann::ordered_json::array();
        for (const auto& c : list.ranking) ranking.push_back({c.id, c.score});
        rec["ranking"] = std::move(ranking);
        out << rec.dump() << '\n';
    }
}

std::vector<RankedList> read_ranked_lists(std::istream& in, const std::string& source) {
    std::vector<RankedList> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (text::trim(line).empty()) continue;
        nlohmann::json rec;
        try {
            rec = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(source, lineno, std::string("malformed JSON: ") + e.what());
        }
        if (!rec.is_object() || !rec.contains("query_id") || !rec["query_id"].is_string() ||
            !rec.contains("ranking") || !rec["ranking"].is_array()) {
            throw ParseError(source, lineno, "expected {\"query_id\": string, \"ranking\": [[id, score], ...]}");
        }
        RankedList list;
        list.query_id = rec["query_id"].get<std::string>();
        for (const auto& item : rec["ranking"]) {
            if (!item.is_array() || item.size() != 2 || !item[0].is_string() || !item[1].is_number()) {
                throw ParseError(source, lineno, "ranking entries must be [id, score]");
            }
            list.ranking.push_back({item[0].get<std::string>(), item[1].get<double>()});
        }
        out.push_back(std::move(list));
    }
    return out;
}

std::vector<RankedList> read_ranked_lists(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileError(path);
    return read_ranked_lists(in, path);
}

std::vector<LabeledPair> parse_labeled_pairs(std::istream& in, const std::string& source) {
    std::vector<LabeledPair> out;
    std::string line;
    std::size_t lineno = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (text::trim(line).empty()) continue;
        const auto f = csv_fields(line);
        if (!header) {
            if (f != std::vector<std::string>{"a", "b", "label"}) throw ParseError(source, lineno, "expected header a,b,label");
            header = true;
            continue;
        }
        if (f.size() != 3) throw ParseError(source, lineno, "expected 3 comma-separated fields");
        bool label;
        if (f[2] == "1" || f[2] == "true") {
            label = true;
        } else if (f[2] == "0" || f[2] == "false") {
            label = false;
        } else {
            throw ParseError(source, lineno, "label must be 1/0 or true/false");
        }
        out.push_back({f[0], f[1], label});
    }
    return out;
}

std::vector<LabeledPair> read_labeled_pairs(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileError(path);
    return parse_labeled_pairs(in, path);
}

}  // namespace bugenrich
