#include "bugenrich/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "bugenrich/error.hpp"

namespace bugenrich {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string_view to_string(ThresholdPolicy p) noexcept {
    return p == ThresholdPolicy::fixed ? "fixed" : "validation_f1";
}

ordered_json to_tree(const RunConfig& c) {
    ordered_json j;
    const auto& p = c.paths;
    j["paths"] = {{"corpus", p.corpus},
                  {"enriched", p.enriched},
                  {"vocabulary", p.vocabulary},
                  {"stopwords", p.stopwords},
                  {"pos_tags", p.pos_tags},
                  {"ner_terms", p.ner_terms},
                  {"pairs", p.pairs},
                  {"external_scores", p.external_scores},
                  {"external_scores_enriched", p.external_scores_enriched}};
    const auto& x = c.extraction;
    j["extraction"] = {{"window", x.window},
                       {"damping", x.damping},
                       {"tol", x.tol},
                       {"max_iter", x.max_iter},
                       {"k_terms", x.k_terms}};
    const auto& e = c.enrichment;
    j["enrichment"] = {{"providers", e.providers},
                       {"endpoint", e.endpoint},
                       {"timeout_s", e.timeout_s},
                       {"retries", e.retries}};
    const auto& r = c.retrieval;
    j["retrieval"] = {{"backend", std::string(to_string(r.backend))},
                      {"k1", r.k1},
                      {"b", r.b},
                      {"hit_policy", std::string(to_string(r.hit_policy))}};
    const auto& v = c.evaluation;
    j["evaluation"] = {{"k_list", v.k_list},
                       {"primary_k", v.primary_k},
                       {"sweep", {{"k_from", v.sweep.k_from}, {"k_to", v.sweep.k_to}, {"step", v.sweep.step}}},
                       {"alpha", v.alpha},
                       {"normality", std::string(stats::to_string(v.normality))},
                       {"n_subsamples", v.n_subsamples},
                       {"subsample_fraction", v.subsample_fraction},
                       {"threshold_policy", std::string(to_string(v.threshold_policy))},
                       {"threshold", v.threshold},
                       {"validation_fraction", v.validation_fraction},
                       {"negatives_per_positive", v.negatives_per_positive}};
    j["seed"] = c.seed ? ordered_json(*c.seed) : ordered_json(nullptr);
    return j;
}

bool is_integer(const ordered_json& v) { return v.is_number_integer() || v.is_number_unsigned(); }

// Whether `value` may replace `current` at `key`.
bool compatible(const std::string& key, const ordered_json& current, const ordered_json& value) {
    if (key == "seed") return value.is_null() || is_integer(value);
    if (current.is_string()) return value.is_string();
    if (is_integer(current)) return is_integer(value);
    if (current.is_number_float()) return value.is_number();
    if (current.is_boolean()) return value.is_boolean();
    if (current.is_array()) {
        if (!value.is_array()) return false;
        const bool want_int = key == "evaluation.k_list";
        return std::all_of(value.begin(), value.end(),
                           [&](const ordered_json& v) { return want_int ? is_integer(v) : v.is_string(); });
    }
    return false;
}

std::string type_hint(const std::string& key, const ordered_json& current) {
    if (key == "seed") return "an integer or null";
    if (current.is_string()) return "a string";
    if (is_integer(current)) return "an integer";
    if (current.is_number()) return "a number";
    if (key == "evaluation.k_list") return "an array of integers";
    return "an array of strings";
}

void assign(ordered_json& slot, const std::string& key, const ordered_json& value) {
    if (!compatible(key, slot, value)) {
        throw ConfigError("config field '" + key + "' must be " + type_hint(key, slot) + ", got " + value.dump());
    }
    slot = value;
}

void merge(ordered_json& base, const ordered_json& patch, const std::string& prefix) {
    if (!patch.is_object()) {
        throw ConfigError(prefix.empty() ? "config must be a JSON object" : "config field '" + prefix + "' must be an object");
    }
    for (const auto& [k, v] : patch.items()) {
        const std::string key = prefix.empty() ? k : prefix + "." + k;
        if (!base.contains(k)) throw ConfigError("unknown config key '" + key + "'");
        auto& slot = base[k];
        if (slot.is_object()) {
            merge(slot, v, key);
        } else {
            assign(slot, key, v);
        }
    }
}

void apply_override(ordered_json& base, const std::string& key, const std::string& raw) {
    ordered_json* node = &base;
    std::size_t start = 0;
    while (true) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (!node->is_object() || !node->contains(part)) throw ConfigError("unknown config key '" + key + "'");
        node = &(*node)[part];
        if (dot == std::string::npos) break;
        start = dot + 1;
    }
    if (node->is_object()) throw ConfigError("config key '" + key + "' names a section, not a field");
    ordered_json value = ordered_json::parse(raw, nullptr, false);
    if (value.is_discarded() || (node->is_string() && !value.is_string())) value = raw;
    // Comma lists are accepted for array fields: --set evaluation.k_list=1,5,10
    if (node->is_array() && value.is_string()) {
        ordered_json arr = ordered_json::array();
        std::stringstream ss(raw);
        for (std::string item; std::getline(ss, item, ',');) {
            const auto parsed = ordered_json::parse(item, nullptr, false);
            arr.push_back(parsed.is_discarded() ? ordered_json(item) : parsed);
        }
        value = std::move(arr);
    }
    assign(*node, key, value);
}

[[noreturn]] void out_of_range(const std::string& key, const std::string& rule) {
    throw ConfigError("config field '" + key + "' " + rule);
}

RunConfig from_tree(const ordered_json& j) {
    RunConfig c;
    const auto& p = j.at("paths");
    c.paths = {p.at("corpus").get<std::string>(),     p.at("enriched").get<std::string>(),
               p.at("vocabulary").get<std::string>(), p.at("stopwords").get<std::string>(),
               p.at("pos_tags").get<std::string>(),   p.at("ner_terms").get<std::string>(),
               p.at("pairs").get<std::string>(),      p.at("external_scores").get<std::string>(),
               p.at("external_scores_enriched").get<std::string>()};

    const auto& x = j.at("extraction");
    c.extraction.window = x.at("window").get<int>();
    c.extraction.damping = x.at("damping").get<double>();
    c.extraction.tol = x.at("tol").get<double>();
    c.extraction.max_iter = x.at("max_iter").get<int>();
    c.extraction.k_terms = x.at("k_terms").get<int>();
    if (c.extraction.window < 2) out_of_range("extraction.window", "must be >= 2");
    if (!(c.extraction.damping > 0.0 && c.extraction.damping < 1.0)) out_of_range("extraction.damping", "must lie in (0, 1)");
    if (!(c.extraction.tol > 0.0)) out_of_range("extraction.tol", "must be > 0");
    if (c.extraction.max_iter < 1) out_of_range("extraction.max_iter", "must be >= 1");
    if (c.extraction.k_terms < 1) out_of_range("extraction.k_terms", "must be >= 1");

    const auto& e = j.at("enrichment");
    c.enrichment.providers = e.at("providers").get<std::vector<std::string>>();
    c.enrichment.endpoint = e.at("endpoint").get<std::string>();
    c.enrichment.timeout_s = e.at("timeout_s").get<double>();
    c.enrichment.retries = e.at("retries").get<int>();
    if (c.enrichment.providers.empty()) out_of_range("enrichment.providers", "must name at least one provider");
    for (std::size_t i = 0; i < c.enrichment.providers.size(); ++i) {
        const auto& name = c.enrichment.providers[i];
        if (name != "vocabulary" && name != "remote") {
            out_of_range("enrichment.providers", "has unknown provider '" + name + "' (expected vocabulary or remote)");
        }
        if (std::find(c.enrichment.providers.begin(), c.enrichment.providers.begin() + static_cast<long>(i), name) !=
            c.enrichment.providers.begin() + static_cast<long>(i)) {
            out_of_range("enrichment.providers", "lists '" + name + "' twice");
        }
    }
    if (!(c.enrichment.timeout_s > 0.0)) out_of_range("enrichment.timeout_s", "must be > 0");
    if (c.enrichment.retries < 0) out_of_range("enrichment.retries", "must be >= 0");

    const auto& r = j.at("retrieval");
    const auto backend = parse_backend(r.at("backend").get<std::string>());
    if (!backend) out_of_range("retrieval.backend", "must be bm25, tfidf_cosine or external_scores");
    c.retrieval.backend = *backend;
    c.retrieval.k1 = r.at("k1").get<double>();
    c.retrieval.b = r.at("b").get<double>();
    if (!(c.retrieval.k1 >= 0.0)) out_of_range("retrieval.k1", "must be >= 0");
    if (!(c.retrieval.b >= 0.0 && c.retrieval.b <= 1.0)) out_of_range("retrieval.b", "must lie in [0, 1]");
    const auto policy = parse_hit_policy(r.at("hit_policy").get<std::string>());
    if (!policy) out_of_range("retrieval.hit_policy", "must be master_only or any_in_group");
    c.retrieval.hit_policy = *policy;

    const auto& v = j.at("evaluation");
    auto& ev = c.evaluation;
    ev.k_list = v.at("k_list").get<std::vector<int>>();
    if (ev.k_list.empty()) out_of_range("evaluation.k_list", "must not be empty");
    if (std::any_of(ev.k_list.begin(), ev.k_list.end(), [](int k) { return k < 1; })) {
        out_of_range("evaluation.k_list", "entries must be >= 1");
    }
    std::sort(ev.k_list.begin(), ev.k_list.end());
    ev.k_list.erase(std::unique(ev.k_list.begin(), ev.k_list.end()), ev.k_list.end());
    ev.primary_k = v.at("primary_k").get<int>();
    if (ev.primary_k < 1) out_of_range("evaluation.primary_k", "must be >= 1");
    const auto& s = v.at("sweep");
    ev.sweep = {s.at("k_from").get<int>(), s.at("k_to").get<int>(), s.at("step").get<int>()};
    if (ev.sweep.k_from < 1) out_of_range("evaluation.sweep.k_from", "must be >= 1");
    if (ev.sweep.k_to < ev.sweep.k_from) out_of_range("evaluation.sweep.k_to", "must be >= evaluation.sweep.k_from");
    if (ev.sweep.step < 1) out_of_range("evaluation.sweep.step", "must be >= 1");
    ev.alpha = v.at("alpha").get<double>();
    if (!(ev.alpha > 0.0 && ev.alpha < 1.0)) out_of_range("evaluation.alpha", "must lie in (0, 1)");
    const auto normality = stats::parse_normality_target(v.at("normality").get<std::string>());
    if (!normality) out_of_range("evaluation.normality", "must be both_samples or differences");
    ev.normality = *normality;
    ev.n_subsamples = v.at("n_subsamples").get<int>();
    if (ev.n_subsamples < 0) out_of_range("evaluation.n_subsamples", "must be >= 0");
    ev.subsample_fraction = v.at("subsample_fraction").get<double>();
    if (!(ev.subsample_fraction > 0.0 && ev.subsample_fraction <= 1.0)) {
        out_of_range("evaluation.subsample_fraction", "must lie in (0, 1]");
    }
    const auto tp = v.at("threshold_policy").get<std::string>();
    if (tp == "validation_f1") {
        ev.threshold_policy = ThresholdPolicy::validation_f1;
    } else if (tp == "fixed") {
        ev.threshold_policy = ThresholdPolicy::fixed;
    } else {
        out_of_range("evaluation.threshold_policy", "must be validation_f1 or fixed");
    }
    ev.threshold = v.at("threshold").get<double>();
    ev.validation_fraction = v.at("validation_fraction").get<double>();
    if (!(ev.validation_fraction > 0.0 && ev.validation_fraction < 1.0)) {
        out_of_range("evaluation.validation_fraction", "must lie in (0, 1)");
    }
    ev.negatives_per_positive = v.at("negatives_per_positive").get<int>();
    if (ev.negatives_per_positive < 1) out_of_range("evaluation.negatives_per_positive", "must be >= 1");

    const auto& seed = j.at("seed");
    if (!seed.is_null()) {
        if (seed.is_number_integer() && seed.get<std::int64_t>() < 0) out_of_range("seed", "must be >= 0");
        c.seed = seed.get<std::uint64_t>();
    }
    return c;
}

RunConfig build(const ordered_json* file, const std::vector<std::pair<std::string, std::string>>& overrides,
                const char* endpoint_env) {
    ordered_json tree = to_tree(RunConfig{});
    if (file) merge(tree, *file, "");
    if (endpoint_env && *endpoint_env) tree["enrichment"]["endpoint"] = endpoint_env;
    for (const auto& [key, value] : overrides) apply_override(tree, key, value);
    return from_tree(tree);
}

}  // namespace

RunConfig parse_config(std::string_view json_text, const std::vector<std::pair<std::string, std::string>>& overrides,
                       const char* endpoint_env) {
    const auto file = ordered_json::parse(json_text, nullptr, false);
    if (file.is_discarded()) throw ConfigError("config is not valid JSON");
    return build(&file, overrides, endpoint_env);
}

RunConfig load_config(const std::string& path, const std::vector<std::pair<std::string, std::string>>& overrides,
                      const char* endpoint_env) {
    if (path.empty()) return build(nullptr, overrides, endpoint_env);
    std::ifstream in(path);
    if (!in) throw FileError(path, "cannot open config file");
    std::stringstream buf;
    buf << in.rdbuf();
    const auto file = ordered_json::parse(buf.str(), nullptr, false);
    if (file.is_discarded()) throw ConfigError("config file is not valid JSON: " + path);
    return build(&file, overrides, endpoint_env);
}

std::pair<std::string, std::string> parse_override(std::string_view spec) {
    const auto eq = spec.find('=');
    if (eq == std::string_view::npos || eq == 0) {
        throw ConfigError("override '" + std::string(spec) + "' must look like section.field=value");
    }
    return {std::string(spec.substr(0, eq)), std::string(spec.substr(eq + 1))};
}

std::string config_to_json(const RunConfig& config, bool pretty) {
    return pretty ? to_tree(config).dump(2) : to_tree(config).dump();
}

}  // namespace bugenrich
