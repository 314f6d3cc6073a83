#include "bugenrich/termgraph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "bugenrich/error.hpp"
#include "bugenrich/text.hpp"

namespace bugenrich {

namespace detail {
extern const std::string_view kBundledPosLexicon;
}

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// POS

std::string_view to_string(Pos p) noexcept {
    switch (p) {
        case Pos::noun: return "noun";
        case Pos::verb: return "verb";
        case Pos::adjective: return "adjective";
        case Pos::other: return "other";
    }
    return "other";
}

std::optional<Pos> parse_pos(std::string_view s) noexcept {
    if (s == "noun") return Pos::noun;
    if (s == "verb") return Pos::verb;
    if (s == "adjective") return Pos::adjective;
    if (s == "other") return Pos::other;
    if (s.starts_with("NN")) return Pos::noun;
    if (s.starts_with("VB")) return Pos::verb;
    if (s.starts_with("JJ")) return Pos::adjective;
    if (!s.empty() && s.find_first_not_of("ABCDEFGHIJKLMNOPQRSTUVWXYZ$") == std::string_view::npos) return Pos::other;
    return std::nullopt;
}

std::optional<Pos> pos_by_suffix(std::string_view w) noexcept {
    struct Rule {
        std::string_view suffix;
        Pos pos;
    };
    static constexpr Rule kRules[] = {
        {"tion", Pos::noun}, {"ment", Pos::noun},      {"ness", Pos::noun},      {"ity", Pos::noun},
        {"ize", Pos::verb},  {"ify", Pos::verb},       {"ous", Pos::adjective},  {"ful", Pos::adjective},
        {"able", Pos::adjective},
    };
    for (const auto& r : kRules) {
        if (w.size() > r.suffix.size() && w.ends_with(r.suffix)) return r.pos;
    }
    return std::nullopt;
}

const PosLexicon& PosLexicon::bundled() {
    static const PosLexicon lex = [] {
        std::unordered_map<std::string, Pos> words;
        std::istringstream in{std::string(detail::kBundledPosLexicon)};
        std::string line;
        while (std::getline(in, line)) {
            const auto tab = line.find('\t');
            if (tab == std::string::npos) continue;
            if (auto pos = parse_pos(line.substr(tab + 1))) words.emplace(line.substr(0, tab), *pos);
        }
        return PosLexicon(std::move(words));
    }();
    return lex;
}

std::optional<Pos> PosLexicon::lookup(std::string_view word) const {
    const auto it = words_.find(std::string(word));
    if (it == words_.end()) return std::nullopt;
    return it->second;
}

Pos PosLexicon::tag(std::string_view word) const {
    if (auto p = lookup(word)) return *p;
    if (auto p = pos_by_suffix(word)) return *p;
    return Pos::other;
}

PosSidecar PosSidecar::parse(std::istream& in, const std::string& source) {
    PosSidecar sidecar;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (text::trim(line).empty()) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(source, lineno, std::string("malformed JSON: ") + e.what());
        }
        if (!rec.is_object() || !rec.contains("report_id") || !rec["report_id"].is_string() ||
            !rec.contains("sentences") || !rec["sentences"].is_array()) {
            throw ParseError(source, lineno, "expected {\"report_id\": string, \"sentences\": [...]}");
        }
        std::vector<PosTaggedSentence> sentences;
        for (const auto& s : rec["sentences"]) {
            if (!s.is_array()) throw ParseError(source, lineno, "sentence must be an array of [token, pos] pairs");
            PosTaggedSentence tagged;
            for (const auto& pair : s) {
                if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() || !pair[1].is_string()) {
                    throw ParseError(source, lineno, "token entry must be [token, pos]");
                }
                const auto pos = parse_pos(pair[1].get<std::string>());
                if (!pos) throw ParseError(source, lineno, "unknown POS tag '" + pair[1].get<std::string>() + "'");
                tagged.push_back({text::to_lower(pair[0].get<std::string>()), *pos});
            }
            sentences.push_back(std::move(tagged));
        }
        sidecar.tags_[rec["report_id"].get<std::string>()] = std::move(sentences);
    }
    return sidecar;
}

PosSidecar PosSidecar::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileError(path);
    return parse(in, path);
}

const std::vector<PosTaggedSentence>* PosSidecar::find(std::string_view report_id) const {
    const auto it = tags_.find(std::string(report_id));
    return it == tags_.end() ? nullptr : &it->second;
}

std::vector<PosTaggedSentence> pos_tag(const TokenStream& tokens, const PosLexicon& lexicon) {
    std::vector<PosTaggedSentence> out;
    out.reserve(tokens.sentences.size());
    for (const auto& sentence : tokens.sentences) {
        PosTaggedSentence tagged;
        tagged.reserve(sentence.size());
        for (const auto& tok : sentence) tagged.push_back({tok, lexicon.tag(tok)});
        out.push_back(std::move(tagged));
    }
    return out;
}

std::vector<PosTaggedSentence> pos_tag(const TokenStream& tokens, const PosSidecar& sidecar,
                                       const PosLexicon& lexicon) {
    const auto* tagged = sidecar.find(tokens.report_id);
    if (!tagged) return pos_tag(tokens, lexicon);
    auto mismatch = [&](const std::string& what) {
        return ValidationError("POS sidecar for report " + tokens.report_id + ": " + what, {tokens.report_id});
    };
    if (tagged->size() != tokens.sentences.size()) {
        throw mismatch("has " + std::to_string(tagged->size()) + " sentences, expected " +
                       std::to_string(tokens.sentences.size()));
    }
    for (std::size_t i = 0; i < tagged->size(); ++i) {
        const auto& want = tokens.sentences[i];
        const auto& got = (*tagged)[i];
        if (got.size() != want.size()) {
            throw mismatch("sentence " + std::to_string(i + 1) + " has " + std::to_string(got.size()) +
                           " tokens, expected " + std::to_string(want.size()));
        }
        for (std::size_t j = 0; j < got.size(); ++j) {
            if (got[j].token != want[j]) {
                throw mismatch("token '" + got[j].token + "' does not match '" + want[j] + "'");
            }
        }
    }
    return *tagged;
}

// ---------------------------------------------------------------------------
// Graphs

void TextGraph::add_vertex(const std::string& term) { adjacency_.try_emplace(term); }

void TextGraph::add_edge(const std::string& u, const std::string& v, std::int64_t weight) {
    if (weight < 1) throw ArgumentError("edge weight must be a positive integer");
    add_vertex(u);
    add_vertex(v);
    if (u == v) return;
    adjacency_.find(u)->second[v] += weight;
    adjacency_.find(v)->second[u] += weight;
}

std::size_t TextGraph::edge_count() const noexcept {
    std::size_t n = 0;
    for (const auto& [_, nbrs] : adjacency_) n += nbrs.size();
    return n / 2;
}

bool TextGraph::contains(std::string_view term) const { return adjacency_.find(term) != adjacency_.end(); }

std::vector<std::string> TextGraph::vertices() const {
    std::vector<std::string> out;
    out.reserve(adjacency_.size());
    for (const auto& [v, _] : adjacency_) out.push_back(v);
    return out;
}

std::vector<TextGraph::Edge> TextGraph::edges() const {
    std::vector<Edge> out;
    for (const auto& [u, nbrs] : adjacency_) {
        for (const auto& [v, w] : nbrs) {
            if (u < v) out.push_back({u, v, w});
        }
    }
    return out;
}

std::int64_t TextGraph::weight(std::string_view u, std::string_view v) const {
    const auto it = adjacency_.find(u);
    if (it == adjacency_.end()) return 0;
    const auto jt = it->second.find(v);
    return jt == it->second.end() ? 0 : jt->second;
}

const std::map<std::string, std::int64_t, std::less<>>& TextGraph::neighbours(std::string_view term) const {
    const auto it = adjacency_.find(term);
    if (it == adjacency_.end()) throw ArgumentError("unknown vertex '" + std::string(term) + "'");
    return it->second;
}

std::int64_t TextGraph::incident_weight(std::string_view term) const {
    std::int64_t total = 0;
    for (const auto& [_, w] : neighbours(term)) total += w;
    return total;
}

namespace {

void check_window(int window) {
    if (window < 2) throw ArgumentError("co-occurrence window must be >= 2, got " + std::to_string(window));
}

bool content_pos(Pos p) noexcept { return p == Pos::noun || p == Pos::verb || p == Pos::adjective; }

}  // namespace

TextGraph build_cooccurrence_graph(const TokenStream& tokens, int window) {
    check_window(window);
    TextGraph g;
    for (const auto& sentence : tokens.sentences) {
        for (std::size_t i = 0; i < sentence.size(); ++i) {
            g.add_vertex(sentence[i]);
            const std::size_t end = std::min(sentence.size(), i + static_cast<std::size_t>(window));
            for (std::size_t j = i + 1; j < end; ++j) {
                if (sentence[i] != sentence[j]) g.add_edge(sentence[i], sentence[j]);
            }
        }
    }
    return g;
}

TextGraph build_pos_graph(std::span<const PosTaggedSentence> sentences, int window) {
    check_window(window);
    TextGraph g;
    for (const auto& sentence : sentences) {
        for (std::size_t i = 0; i < sentence.size(); ++i) {
            g.add_vertex(sentence[i].token);
            const std::size_t end = std::min(sentence.size(), i + static_cast<std::size_t>(window));
            for (std::size_t j = i + 1; j < end; ++j) {
                if (sentence[i].token == sentence[j].token) continue;
                if (content_pos(sentence[i].pos) || content_pos(sentence[j].pos)) {
                    g.add_edge(sentence[i].token, sentence[j].token);
                }
            }
        }
    }
    return g;
}

std::vector<std::string> GraphScores::ordered_terms() const {
    std::vector<std::pair<std::string, double>> items(scores.begin(), scores.end());
    std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    std::vector<std::string> out;
    out.reserve(items.size());
    for (auto& [term, _] : items) out.push_back(std::move(term));
    return out;
}

GraphScores rank_graph(const TextGraph& graph, const PageRankOptions& options) {
    if (graph.empty()) throw ArgumentError("cannot rank an empty graph");
    if (!(options.damping > 0.0 && options.damping < 1.0)) throw ArgumentError("damping must lie in (0, 1)");
    if (!(options.tol > 0.0)) throw ArgumentError("tolerance must be > 0");
    if (options.max_iter < 1) throw ArgumentError("max_iter must be >= 1");

    const auto vertices = graph.vertices();
    const std::size_t n = vertices.size();
    std::unordered_map<std::string_view, std::size_t> id;
    for (std::size_t i = 0; i < n; ++i) id.emplace(vertices[i], i);

    // Row-normalised transition weights w(u,v) / W(u).
    struct Link {
        std::size_t to;
        double share;
    };
    std::vector<std::vector<Link>> out_links(n);
    std::vector<bool> dangling(n, false);
    for (std::size_t u = 0; u < n; ++u) {
        const auto& nbrs = graph.neighbours(vertices[u]);
        std::int64_t total = 0;
        for (const auto& [_, w] : nbrs) total += w;
        if (total == 0) {
            dangling[u] = true;
            continue;
        }
        for (const auto& [v, w] : nbrs) {
            out_links[u].push_back({id.at(v), static_cast<double>(w) / static_cast<double>(total)});
        }
    }

    const double dn = static_cast<double>(n);
    const double d = options.damping;
    std::vector<double> score(n, 1.0 / dn), next(n);
    GraphScores result;
    for (int iter = 1; iter <= options.max_iter; ++iter) {
        double dangling_mass = 0.0;
        for (std::size_t u = 0; u < n; ++u) {
            if (dangling[u]) dangling_mass += score[u];
        }
        const double base = (1.0 - d) / dn + d * dangling_mass / dn;
        std::fill(next.begin(), next.end(), base);
        for (std::size_t u = 0; u < n; ++u) {
            for (const auto& link : out_links[u]) next[link.to] += d * link.share * score[u];
        }
        double delta = 0.0;
        for (std::size_t i = 0; i < n; ++i) delta = std::max(delta, std::abs(next[i] - score[i]));
        score.swap(next);
        result.iterations = iter;
        if (delta < options.tol) {
            result.converged = true;
            break;
        }
    }
    for (std::size_t i = 0; i < n; ++i) result.scores.emplace(vertices[i], score[i]);
    return result;
}

// ---------------------------------------------------------------------------
// DOI fusion

namespace {
__extension__ using wide = __int128;  // products of two int64 denominators
}  // namespace

Rational::Rational(std::int64_t num, std::int64_t den) {
    if (den <= 0 || num < 0) throw ArgumentError("Rational requires num >= 0 and den > 0");
    const std::int64_t g = std::gcd(num, den);
    num_ = num / g;
    den_ = den / g;
}

Rational Rational::operator+(const Rational& o) const {
    const wide num = static_cast<wide>(num_) * o.den_ + static_cast<wide>(o.num_) * den_;
    const wide den = static_cast<wide>(den_) * o.den_;
    wide a = num, b = den;
    while (b != 0) {
        const wide t = a % b;
        a = b;
        b = t;
    }
    const wide g = a == 0 ? 1 : a;
    return Rational(static_cast<std::int64_t>(num / g), static_cast<std::int64_t>(den / g));
}

std::strong_ordering Rational::operator<=>(const Rational& o) const {
    const wide lhs = static_cast<wide>(num_) * o.den_;
    const wide rhs = static_cast<wide>(o.num_) * den_;
    if (lhs < rhs) return std::strong_ordering::less;
    if (lhs > rhs) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
}

Rational doi(std::int64_t position, std::int64_t count) {
    if (count < 1) throw ArgumentError("DOI requires N >= 1");
    if (position < 1 || position > count) {
        throw ArgumentError("DOI position " + std::to_string(position) + " outside 1.." + std::to_string(count));
    }
    return Rational(position, count);
}

std::vector<std::string> TermRanking::terms() const {
    std::vector<std::string> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back(e.term);
    return out;
}

TermRanking fuse_rankings(std::span<const std::vector<std::string>> lists) {
    TermRanking ranking;
    ranking.sources.assign(lists.begin(), lists.end());

    std::vector<std::unordered_map<std::string, std::size_t>> positions(lists.size());
    std::set<std::string> all_terms;
    for (std::size_t l = 0; l < lists.size(); ++l) {
        for (std::size_t i = 0; i < lists[l].size(); ++i) {
            if (!positions[l].emplace(lists[l][i], i + 1).second) {
                throw ArgumentError("ranked list " + std::to_string(l + 1) + " repeats term '" + lists[l][i] + "'");
            }
            all_terms.insert(lists[l][i]);
        }
    }

    const Rational worst(1, 1);
    for (const auto& term : all_terms) {
        TermEntry e;
        e.term = term;
        for (std::size_t l = 0; l < lists.size(); ++l) {
            const auto it = positions[l].find(term);
            const Rational value = it == positions[l].end()
                                       ? worst
                                       : doi(static_cast<std::int64_t>(it->second),
                                             static_cast<std::int64_t>(lists[l].size()));
            e.source_doi.push_back(value);
            e.fused_doi = e.fused_doi + value;
        }
        ranking.entries.push_back(std::move(e));
    }
    // all_terms is already sorted, so a stable sort on the sum breaks ties by term.
    std::stable_sort(ranking.entries.begin(), ranking.entries.end(),
                     [](const TermEntry& a, const TermEntry& b) { return a.fused_doi < b.fused_doi; });
    for (std::size_t i = 0; i < ranking.entries.size(); ++i) ranking.entries[i].position = i + 1;
    return ranking;
}

TermRanking merge_ner_terms(const TermRanking& fused, const std::vector<std::string>& ner_terms) {
    if (ner_terms.empty()) return fused;
    std::vector<std::vector<std::string>> lists;
    // Graph lists are the first two sources; any earlier NER list is replaced.
    for (std::size_t i = 0; i < std::min<std::size_t>(fused.sources.size(), 2); ++i) lists.push_back(fused.sources[i]);
    if (lists.empty()) lists.push_back(fused.terms());
    lists.push_back(ner_terms);
    return fuse_rankings(lists);
}

std::vector<std::string> top_k_terms(const TermRanking& ranking, int k) {
    if (k < 1) throw ArgumentError("k must be >= 1");
    std::vector<std::string> out;
    const std::size_t n = std::min(ranking.entries.size(), static_cast<std::size_t>(k));
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(ranking.entries[i].term);
    return out;
}

NerSidecar NerSidecar::parse(std::istream& in, const std::string& source) {
    NerSidecar sidecar;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (text::trim(line).empty()) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(source, lineno, std::string("malformed JSON: ") + e.what());
        }
        if (!rec.is_object() || !rec.contains("report_id") || !rec["report_id"].is_string() ||
            !rec.contains("terms") || !rec["terms"].is_array()) {
            throw ParseError(source, lineno, "expected {\"report_id\": string, \"terms\": [string, ...]}");
        }
        std::vector<std::string> terms;
        std::unordered_set<std::string> seen;
        for (const auto& t : rec["terms"]) {
            if (!t.is_string()) throw ParseError(source, lineno, "terms must be strings");
            // Normalised like graph terms so the same word fuses across lists.
            auto norm = text::to_lower(text::squeeze_spaces(t.get<std::string>()));
            if (!norm.empty() && seen.insert(norm).second) terms.push_back(std::move(norm));
        }
        sidecar.terms_[rec["report_id"].get<std::string>()] = std::move(terms);
    }
    return sidecar;
}

NerSidecar NerSidecar::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileError(path);
    return parse(in, path);
}

const std::vector<std::string>* NerSidecar::find(std::string_view report_id) const {
    const auto it = terms_.find(std::string(report_id));
    return it == terms_.end() ? nullptr : &it->second;
}

Extraction extract_terms(const TokenStream& tokens, const ExtractionOptions& options, const PosSidecar* pos_sidecar,
                         const NerSidecar* ner) {
    Extraction out;
    out.report_id = tokens.report_id;
    if (options.k_terms < 1) throw ArgumentError("k_terms must be >= 1");
    if (tokens.token_count() == 0) return out;

    const auto cooc = build_cooccurrence_graph(tokens, options.window);
    const auto tagged = pos_sidecar ? pos_tag(tokens, *pos_sidecar) : pos_tag(tokens);
    const auto pos_graph = build_pos_graph(tagged, options.window);

    const std::vector<std::vector<std::string>> lists{rank_graph(cooc, options.pagerank).ordered_terms(),
                                                      rank_graph(pos_graph, options.pagerank).ordered_terms()};
    out.ranking = fuse_rankings(lists);
    if (ner) {
        if (const auto* terms = ner->find(tokens.report_id)) out.ranking = merge_ner_terms(out.ranking, *terms);
    }
    out.top_terms = top_k_terms(out.ranking, options.k_terms);
    return out;
}

}  // namespace bugenrich
