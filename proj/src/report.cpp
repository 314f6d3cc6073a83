#include "bugenrich/report.hpp"

#include <cmath>

#include <fmt/format.h>
#include <json.hpp>

#include "bugenrich/error.hpp"

namespace bugenrich {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json block_json(const MetricBlock& b) {
    ordered_json j;
    j["queries"] = b.queries;
    ordered_json rr = ordered_json::object();
    for (const auto& [k, v] : b.recall_rate) rr[std::to_string(k)] = v;
    j["recall_rate"] = std::move(rr);
    if (b.classification) {
        const auto& c = *b.classification;
        j["classification"] = {{"precision", c.precision},
                               {"recall", c.recall},
                               {"f1", c.f1},
                               {"auc", c.auc},
                               {"threshold", c.threshold},
                               {"counts", {{"tp", c.counts.tp}, {"fp", c.counts.fp}, {"fn", c.counts.fn}, {"tn", c.counts.tn}}}};
    }
    return j;
}

ordered_json metrics_json(const MetricsReport& r) {
    ordered_json j;
    j["meta"] = {{"backend", r.meta.backend},
                 {"corpus_variant", r.meta.corpus_variant},
                 {"hit_policy", r.meta.hit_policy},
                 {"seed", r.meta.seed ? ordered_json(*r.meta.seed) : ordered_json(nullptr)}};
    j["overall"] = block_json(r.overall);
    if (r.similar) j["similar"] = block_json(*r.similar);
    if (r.dissimilar) j["dissimilar"] = block_json(*r.dissimilar);
    j["unlabeled_queries"] = r.unlabeled_queries;
    if (!r.sweep.empty()) j["k_sweep"] = {{"k", r.sweep.ks}, {"recall_rate", r.sweep.recall_rate}};
    if (!r.subsamples.empty()) j["subsamples"] = r.subsamples;
    return j;
}

MetricBlock block_from_json(const ordered_json& j) {
    MetricBlock b;
    b.queries = j.at("queries").get<std::size_t>();
    for (const auto& [k, v] : j.at("recall_rate").items()) b.recall_rate[std::stoi(k)] = v.get<double>();
    if (j.contains("classification")) {
        const auto& c = j.at("classification");
        ClassificationBlock cb;
        cb.precision = c.at("precision").get<double>();
        cb.recall = c.at("recall").get<double>();
        cb.f1 = c.at("f1").get<double>();
        cb.auc = c.at("auc").get<double>();
        cb.threshold = c.at("threshold").is_null() ? HUGE_VAL : c.at("threshold").get<double>();
        const auto& n = c.at("counts");
        cb.counts = {n.at("tp").get<std::size_t>(), n.at("fp").get<std::size_t>(), n.at("fn").get<std::size_t>(),
                     n.at("tn").get<std::size_t>()};
        b.classification = cb;
    }
    return b;
}

std::string num(double v) { return std::isfinite(v) ? fmt::format("{:.4f}", v) : std::string("-"); }

std::string p_value(double p) { return p != 0.0 && p < 1e-3 ? fmt::format("{:.2e}", p) : num(p); }

struct TableRow {
    std::vector<std::string> cells;
};

std::string render_rows(const std::vector<std::string>& header, const std::vector<TableRow>& rows) {
    std::vector<std::size_t> width(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
    for (const auto& r : rows) {
        for (std::size_t c = 0; c < r.cells.size(); ++c) width[c] = std::max(width[c], r.cells[c].size());
    }
    std::string out;
    const auto line = [&](const std::vector<std::string>& cells) {
        std::string s;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (c) s += "  ";
            s += fmt::format("{:<{}}", cells[c], width[c]);
        }
        while (!s.empty() && s.back() == ' ') s.pop_back();
        out += s + '\n';
    };
    line(header);
    std::size_t total = 0;
    for (auto w : width) total += w;
    out += std::string(total + 2 * (width.size() - 1), '-') + '\n';
    for (const auto& r : rows) line(r.cells);
    return out;
}

std::vector<int> all_ks(const MetricsReport& r) {
    std::vector<int> ks;
    for (const auto& [k, v] : r.overall.recall_rate) ks.push_back(k);
    return ks;
}

std::vector<std::pair<std::string, const MetricBlock*>> strata_of(const MetricsReport& r) {
    std::vector<std::pair<std::string, const MetricBlock*>> out{{"overall", &r.overall}};
    if (r.similar) out.emplace_back("similar", &*r.similar);
    if (r.dissimilar) out.emplace_back("dissimilar", &*r.dissimilar);
    return out;
}

std::vector<std::string> metric_header(const std::vector<int>& ks) {
    std::vector<std::string> h;
    for (int k : ks) h.push_back(fmt::format("R@{}", k));
    for (const char* name : {"P", "R", "F1", "AUC"}) h.emplace_back(name);
    return h;
}

std::vector<std::string> metric_cells(const MetricBlock& b, const std::vector<int>& ks) {
    std::vector<std::string> cells;
    for (int k : ks) {
        const auto it = b.recall_rate.find(k);
        cells.push_back(it == b.recall_rate.end() ? "-" : num(it->second));
    }
    if (b.classification) {
        const auto& c = *b.classification;
        for (double v : {c.precision, c.recall, c.f1, c.auc}) cells.push_back(num(v));
    } else {
        cells.insert(cells.end(), 4, "-");
    }
    return cells;
}

ordered_json significance_json(const stats::SignificanceReport& s) {
    ordered_json j;
    j["distribution"] = s.normal ? "normal" : "non_normal";
    j["test"] = s.test_name;
    j["statistic"] = s.statistic;
    j["p_value"] = s.p_value;
    j["effect_size"] = {{"measure", s.effect_name},
                        {"value", s.effect.value},
                        {"magnitude", std::string(stats::to_string(s.effect.magnitude))}};
    j["normality_p"] = s.normality_p;
    j["alpha"] = s.alpha;
    return j;
}

std::vector<std::string> shared_strata(const CompareReport& r) {
    std::vector<std::string> names{"overall"};
    if (r.original.similar && r.enriched.similar) names.emplace_back("similar");
    if (r.original.dissimilar && r.enriched.dissimilar) names.emplace_back("dissimilar");
    return names;
}

const MetricBlock& stratum(const MetricsReport& r, const std::string& name) {
    if (name == "similar") return *r.similar;
    if (name == "dissimilar") return *r.dissimilar;
    return r.overall;
}

}  // namespace

ReportFormat parse_report_format(std::string_view s) {
    if (s == "json") return ReportFormat::json;
    if (s == "table") return ReportFormat::table;
    if (s == "csv") return ReportFormat::csv;
    throw ArgumentError("unknown report format '" + std::string(s) + "' (expected json, table or csv)");
}

std::string metrics_to_json(const MetricsReport& report) { return metrics_json(report).dump(2) + "\n"; }

MetricsReport metrics_from_json(std::string_view text) {
    try {
        const auto j = ordered_json::parse(text);
        MetricsReport r;
        const auto& m = j.at("meta");
        r.meta.backend = m.at("backend").get<std::string>();
        r.meta.corpus_variant = m.at("corpus_variant").get<std::string>();
        r.meta.hit_policy = m.at("hit_policy").get<std::string>();
        if (!m.at("seed").is_null()) r.meta.seed = m.at("seed").get<std::uint64_t>();
        r.overall = block_from_json(j.at("overall"));
        if (j.contains("similar")) r.similar = block_from_json(j.at("similar"));
        if (j.contains("dissimilar")) r.dissimilar = block_from_json(j.at("dissimilar"));
        r.unlabeled_queries = j.at("unlabeled_queries").get<std::size_t>();
        if (j.contains("k_sweep")) {
            r.sweep.ks = j.at("k_sweep").at("k").get<std::vector<int>>();
            r.sweep.recall_rate = j.at("k_sweep").at("recall_rate").get<std::vector<double>>();
        }
        if (j.contains("subsamples")) r.subsamples = j.at("subsamples").get<std::vector<double>>();
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("<metrics report>", 0, e.what());
    }
}

std::string metrics_to_table(const MetricsReport& report) {
    const auto ks = all_ks(report);
    std::vector<std::string> header{"stratum", "queries"};
    for (auto& h : metric_header(ks)) header.push_back(std::move(h));
    std::vector<TableRow> rows;
    for (const auto& [name, block] : strata_of(report)) {
        TableRow row{{name, std::to_string(block->queries)}};
        for (auto& c : metric_cells(*block, ks)) row.cells.push_back(std::move(c));
        rows.push_back(std::move(row));
    }
    std::string out = fmt::format("backend: {}  corpus: {}  hit policy: {}  seed: {}\n", report.meta.backend,
                                  report.meta.corpus_variant, report.meta.hit_policy,
                                  report.meta.seed ? std::to_string(*report.meta.seed) : std::string("none"));
    return out + render_rows(header, rows);
}

std::string metrics_to_csv(const MetricsReport& report) {
    const bool strata = report.similar || report.dissimilar;
    std::string out = "k,recall_rate";
    if (strata) out += ",recall_rate_similar,recall_rate_dissimilar";
    out += ",precision,recall,f1,auc\n";
    const auto cell = [](const std::optional<MetricBlock>& b, int k) {
        if (!b) return std::string();
        const auto it = b->recall_rate.find(k);
        return it == b->recall_rate.end() ? std::string() : fmt::format("{}", it->second);
    };
    for (const auto& [k, v] : report.overall.recall_rate) {
        out += fmt::format("{},{}", k, v);
        if (strata) out += "," + cell(report.similar, k) + "," + cell(report.dissimilar, k);
        if (const auto& c = report.overall.classification) {
            out += fmt::format(",{},{},{},{}\n", c->precision, c->recall, c->f1, c->auc);
        } else {
            out += ",,,,\n";
        }
    }
    return out;
}

std::string emit_report(const MetricsReport& report, ReportFormat format) {
    switch (format) {
        case ReportFormat::json: return metrics_to_json(report);
        case ReportFormat::table: return metrics_to_table(report);
        case ReportFormat::csv: return metrics_to_csv(report);
    }
    throw ArgumentError("unknown report format");
}

std::string k_sweep_to_csv(const KSweep& sweep) {
    std::string out = "k,recall_rate\n";
    for (std::size_t i = 0; i < sweep.ks.size(); ++i) out += fmt::format("{},{}\n", sweep.ks[i], sweep.recall_rate[i]);
    return out;
}

std::string significance_to_json(const stats::SignificanceReport& report) {
    return significance_json(report).dump(2) + "\n";
}

std::string compare_to_json(const CompareReport& report) {
    ordered_json j;
    j["primary_k"] = report.primary_k;
    j["original"] = metrics_json(report.original);
    j["enriched"] = metrics_json(report.enriched);
    ordered_json delta = ordered_json::object();
    for (const auto& name : shared_strata(report)) {
        const auto& a = stratum(report.original, name);
        const auto& b = stratum(report.enriched, name);
        ordered_json d = ordered_json::object();
        for (const auto& [k, v] : b.recall_rate) {
            if (const auto it = a.recall_rate.find(k); it != a.recall_rate.end()) d[std::to_string(k)] = v - it->second;
        }
        delta[name] = {{"recall_rate", std::move(d)}};
    }
    j["delta"] = std::move(delta);
    ordered_json sig = ordered_json::object();
    for (const auto& [name, outcome] : report.significance) {
        sig[name] = outcome.report ? significance_json(*outcome.report) : ordered_json{{"error", outcome.error}};
    }
    j["significance"] = std::move(sig);
    return j.dump(2) + "\n";
}

std::string compare_to_table(const CompareReport& report) {
    const auto ks = all_ks(report.original);
    std::vector<std::string> header{"stratum", "dataset", "queries"};
    for (auto& h : metric_header(ks)) header.push_back(std::move(h));
    std::vector<TableRow> rows;
    for (const auto& name : shared_strata(report)) {
        for (const auto* variant : {&report.original, &report.enriched}) {
            const auto& b = stratum(*variant, name);
            TableRow row{{name, variant == &report.original ? "BR" : "BR_E", std::to_string(b.queries)}};
            for (auto& c : metric_cells(b, ks)) row.cells.push_back(std::move(c));
            rows.push_back(std::move(row));
        }
    }
    std::string out = fmt::format("backend: {}  hit policy: {}  seed: {}\n", report.original.meta.backend,
                                  report.original.meta.hit_policy,
                                  report.original.meta.seed ? std::to_string(*report.original.meta.seed)
                                                            : std::string("none"));
    out += render_rows(header, rows);

    std::vector<TableRow> sig_rows;
    for (const auto& [name, outcome] : report.significance) {
        if (!outcome.report) {
            sig_rows.push_back({{name, "-", "-", "-", "error: " + outcome.error}});
            continue;
        }
        const auto& s = *outcome.report;
        sig_rows.push_back({{name, s.normal ? "normal" : "non_normal", s.test_name, p_value(s.p_value),
                             fmt::format("{} {} ({})", s.effect_name, num(s.effect.value),
                                         stats::to_string(s.effect.magnitude))}});
    }
    if (!sig_rows.empty()) {
        out += fmt::format("\nsignificance of Recall-rate@{} over subsamples (BR_E vs BR)\n", report.primary_k);
        out += render_rows({"stratum", "distribution", "test", "p-value", "effect size"}, sig_rows);
    }
    return out;
}

std::string compare_to_csv(const CompareReport& report) {
    std::string out = "dataset,stratum,k,recall_rate\n";
    for (const auto* variant : {&report.original, &report.enriched}) {
        for (const auto& name : shared_strata(report)) {
            for (const auto& [k, v] : stratum(*variant, name).recall_rate) {
                out += fmt::format("{},{},{},{}\n", variant == &report.original ? "BR" : "BR_E", name, k, v);
            }
        }
    }
    return out;
}

std::string emit_compare(const CompareReport& report, ReportFormat format) {
    switch (format) {
        case ReportFormat::json: return compare_to_json(report);
        case ReportFormat::table: return compare_to_table(report);
        case ReportFormat::csv: return compare_to_csv(report);
    }
    throw ArgumentError("unknown report format");
}

}  // namespace bugenrich
