#include "bugenrich/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "bugenrich/config.hpp"
#include "bugenrich/error.hpp"
#include "bugenrich/pipeline.hpp"
#include "bugenrich/report.hpp"
#include "bugenrich/vocabulary.hpp"

namespace bugenrich {

namespace {

namespace fs = std::filesystem;

struct Options {
    std::string config_path;
    std::vector<std::string> sets;
    unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
    std::string output;
    std::string format = "json";

    // Shorthand flags; each becomes an override applied after --set.
    std::string corpus, enriched, vocabulary, stopwords, pos_tags, ner_terms, pairs, backend, external_scores;
    std::optional<std::uint64_t> seed;
    std::optional<int> k_terms;

    // Command-specific inputs.
    std::string terms, ranked, sweep_csv, variant = "original";
    std::string input, output_dir, predictions, references;
    std::vector<double> ratios{0.8, 0.1, 0.1};
};

struct Context {
    const Options& opt;
    RunConfig config;
    std::ostream& out;
    std::ostream& err;
};

std::vector<std::pair<std::string, std::string>> collect_overrides(const Options& o) {
    std::vector<std::pair<std::string, std::string>> ov;
    for (const auto& s : o.sets) ov.push_back(parse_override(s));
    const auto path = [&](const char* key, const std::string& v) {
        if (!v.empty()) ov.emplace_back(key, nlohmann::json(v).dump());
    };
    path("paths.corpus", o.corpus);
    path("paths.enriched", o.enriched);
    path("paths.vocabulary", o.vocabulary);
    path("paths.stopwords", o.stopwords);
    path("paths.pos_tags", o.pos_tags);
    path("paths.ner_terms", o.ner_terms);
    path("paths.pairs", o.pairs);
    path("paths.external_scores", o.external_scores);
    path("retrieval.backend", o.backend);
    if (o.seed) ov.emplace_back("seed", std::to_string(*o.seed));
    if (o.k_terms) ov.emplace_back("extraction.k_terms", std::to_string(*o.k_terms));
    return ov;
}

const std::string& require_path(const std::string& value, const char* field) {
    if (value.empty()) throw ConfigError(std::string("config field '") + field + "' is required for this command");
    return value;
}

// Refuses to write over a file the command reads.
void guard_output(const std::string& output, std::initializer_list<std::string> inputs) {
    if (output.empty() || output == "-") return;
    std::error_code ec;
    for (const auto& in : inputs) {
        if (in.empty()) continue;
        if (fs::exists(output, ec) && fs::exists(in, ec) && fs::equivalent(output, in, ec)) {
            throw ConfigError("output path would overwrite input file: " + output);
        }
    }
}

void write_output(const std::string& path, const std::string& content, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << content;
        out.flush();
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw FileError(path, "cannot write file");
    f << content;
    if (!f) throw FileError(path, "write failed");
}

StopwordSet stopwords_for(const RunConfig& c) {
    return c.paths.stopwords.empty() ? StopwordSet::bundled() : StopwordSet::load(c.paths.stopwords);
}

void require_seed_for_subsampling(const RunConfig& c) {
    if (c.evaluation.n_subsamples > 0 && !c.seed) {
        throw ConfigError("config field 'seed' is required when evaluation.n_subsamples > 0 (pass --seed)");
    }
}

std::vector<LabeledPair> pairs_for(const RunConfig& c, const Corpus& corpus) {
    if (!c.paths.pairs.empty()) return read_labeled_pairs(c.paths.pairs);
    return generate_pairs(corpus, c.evaluation.negatives_per_positive, c.seed.value_or(0));
}

// Extraction on `tokens`, using sidecars when configured.
std::vector<Extraction> run_extraction(const RunConfig& c, std::span<const TokenStream> tokens, unsigned jobs) {
    std::optional<PosSidecar> pos;
    std::optional<NerSidecar> ner;
    if (!c.paths.pos_tags.empty()) pos = PosSidecar::load(c.paths.pos_tags);
    if (!c.paths.ner_terms.empty()) ner = NerSidecar::load(c.paths.ner_terms);
    return extract_corpus(tokens, c.extraction.options(), pos ? &*pos : nullptr, ner ? &*ner : nullptr, jobs);
}

EnrichmentRun run_enrichment(const Context& ctx, const Corpus& corpus, std::span<const TokenStream> tokens) {
    const auto providers = make_providers(ctx.config);
    std::vector<std::vector<std::string>> terms(corpus.size());
    if (!ctx.opt.terms.empty()) {
        const auto by_id = read_extractions(ctx.opt.terms);
        for (std::size_t i = 0; i < corpus.size(); ++i) {
            if (const auto it = by_id.find(corpus[i].id); it != by_id.end()) terms[i] = it->second;
        }
    } else {
        const auto extractions = run_extraction(ctx.config, tokens, ctx.opt.jobs);
        for (std::size_t i = 0; i < corpus.size(); ++i) terms[i] = extractions[i].top_terms;
    }
    auto run = enrich_corpus(corpus, terms, providers, ctx.opt.jobs);
    ctx.err << fmt::format("[enrich] reports={} explained_terms={} unexplained_terms={} glossary_reports={}\n",
                           corpus.size(), run.explained, run.unexplained, run.glossary_reports);
    return run;
}

// Commands ------------------------------------------------------------------

int cmd_validate(Context& ctx) {
    const auto& path = require_path(ctx.config.paths.corpus, "paths.corpus");
    const auto reports = read_reports(path);
    const auto v = validate_corpus(reports);
    ctx.out << fmt::format("reports: {}\n", reports.size());
    for (const auto& issue : v.issues) {
        ctx.out << fmt::format("{}\t{}\t{}\n", to_string(issue.kind), issue.report_id, issue.detail);
    }
    if (v.ok()) {
        ctx.out << "ok\n";
        return 0;
    }
    ctx.out << fmt::format("issues: {}\n", v.issues.size());
    return static_cast<int>(ExitCode::data);
}

int cmd_extract(Context& ctx) {
    const auto& path = require_path(ctx.config.paths.corpus, "paths.corpus");
    guard_output(ctx.opt.output, {path});
    const auto corpus = load_corpus(path);
    const auto tokens = preprocess_corpus(corpus, stopwords_for(ctx.config), ctx.opt.jobs);
    const auto extractions = run_extraction(ctx.config, tokens, ctx.opt.jobs);
    std::ostringstream buf;
    write_extractions(buf, extractions);
    write_output(ctx.opt.output, buf.str(), ctx.out);
    return 0;
}

int cmd_enrich(Context& ctx) {
    const auto& path = require_path(ctx.config.paths.corpus, "paths.corpus");
    const std::string output = !ctx.opt.output.empty() ? ctx.opt.output : ctx.config.paths.enriched;
    guard_output(output, {path, ctx.config.paths.vocabulary, ctx.opt.terms});
    const auto corpus = load_corpus(path);
    const auto tokens = preprocess_corpus(corpus, stopwords_for(ctx.config), ctx.opt.jobs);
    const auto run = run_enrichment(ctx, corpus, tokens);
    std::ostringstream buf;
    write_corpus(buf, run.reports);
    write_output(output, buf.str(), ctx.out);
    return 0;
}

int cmd_rank(Context& ctx) {
    const auto& path = require_path(ctx.config.paths.corpus, "paths.corpus");
    guard_output(ctx.opt.output, {path});
    auto prepared = prepare_corpus(load_corpus(path), stopwords_for(ctx.config), ctx.config.paths.external_scores,
                                   ctx.opt.jobs);
    const auto ranker = prepared->ranker(ctx.config.retrieval);
    const auto lists = rank_queries(ranker, duplicate_queries(prepared->corpus), ctx.opt.jobs);
    std::ostringstream buf;
    write_ranked_lists(buf, lists);
    write_output(ctx.opt.output, buf.str(), ctx.out);
    return 0;
}

int cmd_evaluate(Context& ctx) {
    require_seed_for_subsampling(ctx.config);
    const auto format = parse_report_format(ctx.opt.format);
    const auto& path = require_path(ctx.config.paths.corpus, "paths.corpus");
    guard_output(ctx.opt.output, {path, ctx.opt.ranked, ctx.config.paths.pairs});
    auto prepared = prepare_corpus(load_corpus(path), stopwords_for(ctx.config), ctx.config.paths.external_scores,
                                   ctx.opt.jobs);
    const auto ranker = prepared->ranker(ctx.config.retrieval);
    const auto lists = ctx.opt.ranked.empty()
                           ? rank_queries(ranker, duplicate_queries(prepared->corpus), ctx.opt.jobs)
                           : read_ranked_lists(ctx.opt.ranked);
    const auto pairs = pairs_for(ctx.config, prepared->corpus);
    const auto report = evaluate_run(prepared->corpus, lists, ranker, pairs, ctx.config, ctx.opt.variant, ctx.opt.jobs);
    write_output(ctx.opt.output, emit_report(report, format), ctx.out);
    if (!ctx.opt.sweep_csv.empty()) write_output(ctx.opt.sweep_csv, k_sweep_to_csv(report.sweep), ctx.out);
    return 0;
}

int cmd_compare(Context& ctx) {
    require_seed_for_subsampling(ctx.config);
    const auto format = parse_report_format(ctx.opt.format);
    const auto& c = ctx.config;
    const auto& path = require_path(c.paths.corpus, "paths.corpus");
    guard_output(ctx.opt.output, {path, c.paths.enriched, c.paths.vocabulary, c.paths.pairs});
    const auto stop = stopwords_for(c);

    auto original = prepare_corpus(load_corpus(path), stop, c.paths.external_scores, ctx.opt.jobs);
    Corpus enriched_corpus;
    if (!c.paths.enriched.empty()) {
        enriched_corpus = load_corpus(c.paths.enriched);
    } else {
        enriched_corpus = Corpus(run_enrichment(ctx, original->corpus, original->tokens).reports);
    }
    auto enriched = prepare_corpus(std::move(enriched_corpus), stop, c.paths.external_scores_enriched, ctx.opt.jobs);
    const auto pairs = pairs_for(c, original->corpus);
    const auto report = compare_runs(*original, *enriched, c, pairs, ctx.opt.jobs);
    write_output(ctx.opt.output, emit_compare(report, format), ctx.out);
    return 0;
}

int cmd_vocab_clean(Context& ctx) {
    const auto& input = require_path(ctx.opt.input.empty() ? ctx.config.paths.vocabulary : ctx.opt.input,
                                     "paths.vocabulary");
    guard_output(ctx.opt.output, {input});
    const auto raw = load_vocabulary(input);
    const auto cleaned = clean_vocabulary(raw);
    const auto unique = dedupe(cleaned.entries);
    ctx.err << fmt::format("[vocab-clean] read={} dropped_empty={} merged_duplicates={} written={}\n", raw.size(),
                           cleaned.dropped, cleaned.entries.size() - unique.size(), unique.size());
    std::ostringstream buf;
    write_vocabulary(buf, unique);
    write_output(ctx.opt.output, buf.str(), ctx.out);
    return 0;
}

int cmd_vocab_split(Context& ctx) {
    if (!ctx.config.seed) throw ConfigError("config field 'seed' is required for vocab-split (pass --seed)");
    const auto& input = require_path(ctx.opt.input.empty() ? ctx.config.paths.vocabulary : ctx.opt.input,
                                     "paths.vocabulary");
    if (ctx.opt.ratios.size() != 3) throw ConfigError("--ratios takes exactly three values");
    const auto entries = load_vocabulary(input);
    const auto split = split_dataset(entries, {ctx.opt.ratios[0], ctx.opt.ratios[1], ctx.opt.ratios[2]}, *ctx.config.seed);
    const fs::path dir = ctx.opt.output_dir.empty() ? fs::path(".") : fs::path(ctx.opt.output_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    const std::pair<const char*, const std::vector<VocabularyEntry>*> parts[] = {
        {"train.tsv", &split.train}, {"validation.tsv", &split.validation}, {"test.tsv", &split.test}};
    for (const auto& [name, part] : parts) {
        const auto target = (dir / name).string();
        guard_output(target, {input});
        write_vocabulary(target, *part);
    }
    nlohmann::ordered_json manifest;
    manifest["input"] = input;
    manifest["seed"] = *ctx.config.seed;
    manifest["ratios"] = ctx.opt.ratios;
    manifest["counts"] = {{"train", split.train.size()},
                          {"validation", split.validation.size()},
                          {"test", split.test.size()}};
    write_output((dir / "manifest.json").string(), manifest.dump(2) + "\n", ctx.out);
    ctx.out << fmt::format("train={} validation={} test={}\n", split.train.size(), split.validation.size(),
                           split.test.size());
    return 0;
}

// Predictions: TSV rows term<TAB>generated explanation. References: a
// vocabulary file; the reference for a term is its entry's explanation.
int cmd_bleu_eval(Context& ctx) {
    const auto& pred_path = require_path(ctx.opt.predictions, "--predictions");
    const auto& ref_path = require_path(ctx.opt.references.empty() ? ctx.config.paths.vocabulary : ctx.opt.references,
                                        "--references");
    guard_output(ctx.opt.output, {pred_path, ref_path});
    const auto references = dedupe(load_vocabulary(ref_path));
    std::map<std::string, std::string> ref_by_term;
    for (const auto& e : references) ref_by_term.emplace(e.term, e.explanation);

    std::ifstream in(pred_path);
    if (!in) throw FileError(pred_path);
    std::size_t line_no = 0, scored = 0, missing = 0;
    double total = 0.0;
    for (std::string line; std::getline(in, line);) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos) throw ParseError(pred_path, line_no, "expected term<TAB>explanation");
        const auto it = ref_by_term.find(line.substr(0, tab));
        if (it == ref_by_term.end()) {
            ++missing;
            continue;
        }
        total += bleu(line.substr(tab + 1), it->second);
        ++scored;
    }
    if (scored == 0) throw ValidationError("no prediction matched a reference term");
    nlohmann::ordered_json j;
    j["pairs"] = scored;
    j["unmatched"] = missing;
    j["bleu"] = total / static_cast<double>(scored);
    j["bleu_percent"] = 100.0 * total / static_cast<double>(scored);
    write_output(ctx.opt.output, j.dump(2) + "\n", ctx.out);
    return 0;
}

void add_common(CLI::App* sub, Options& o) {
    sub->add_option("--config", o.config_path, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--set", o.sets, "Override a config field, e.g. --set retrieval.k1=0.9 (repeatable)");
    sub->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::Range(1u, 1024u));
    sub->add_option("--seed", o.seed, "Random seed");
    sub->add_option("--stopwords", o.stopwords, "Stopword list (default: bundled)");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Enrich bug reports with explanations of their domain terms and measure the effect on "
                 "duplicate detection."};
    app.name("bugenrich");
    app.require_subcommand(1);

    using Handler = int (*)(Context&);
    std::vector<std::pair<CLI::App*, Handler>> commands;
    const auto add = [&](const char* name, const char* help, Handler h) {
        auto* sub = app.add_subcommand(name, help);
        add_common(sub, o);
        commands.emplace_back(sub, h);
        return sub;
    };
    const std::vector<std::string> formats{"json", "table", "csv"};

    auto* validate = add("validate", "Check corpus invariants", cmd_validate);
    validate->add_option("--corpus", o.corpus, "Corpus (JSON lines)");

    auto* extract = add("extract", "Extract top-k domain terms per report", cmd_extract);
    extract->add_option("--corpus", o.corpus, "Corpus (JSON lines)");
    extract->add_option("--pos-tags", o.pos_tags, "Pre-tagged sentences (JSON lines)");
    extract->add_option("--ner-terms", o.ner_terms, "NER terms per report (JSON lines)");
    extract->add_option("--k-terms", o.k_terms, "Terms kept per report");
    extract->add_option("-o,--output", o.output, "Term file (default stdout)");

    auto* enrich = add("enrich", "Inject term explanations into reports", cmd_enrich);
    enrich->add_option("--corpus", o.corpus, "Corpus (JSON lines)");
    enrich->add_option("--vocabulary", o.vocabulary, "Vocabulary TSV");
    enrich->add_option("--terms", o.terms, "Term file from extract (default: extract now)");
    enrich->add_option("--pos-tags", o.pos_tags, "Pre-tagged sentences (JSON lines)");
    enrich->add_option("--ner-terms", o.ner_terms, "NER terms per report (JSON lines)");
    enrich->add_option("--k-terms", o.k_terms, "Terms kept per report");
    enrich->add_option("-o,--output", o.output, "Enriched corpus (default paths.enriched, else stdout)");

    auto* rank = add("rank", "Rank earlier reports for every duplicate query", cmd_rank);
    rank->add_option("--corpus", o.corpus, "Corpus (JSON lines)");
    rank->add_option("--backend", o.backend, "bm25, tfidf_cosine or external_scores");
    rank->add_option("--external-scores", o.external_scores, "Score CSV for the external_scores backend");
    rank->add_option("-o,--output", o.output, "Ranked lists (default stdout)");

    auto* evaluate = add("evaluate", "Recall-rate@k, P/R/F1/AUC and strata for one corpus", cmd_evaluate);
    evaluate->add_option("--corpus", o.corpus, "Corpus (JSON lines)");
    evaluate->add_option("--ranked", o.ranked, "Ranked lists from rank (default: rank now)");
    evaluate->add_option("--pairs", o.pairs, "Labeled pairs CSV (default: generated)");
    evaluate->add_option("--backend", o.backend, "bm25, tfidf_cosine or external_scores");
    evaluate->add_option("--external-scores", o.external_scores, "Score CSV for the external_scores backend");
    evaluate->add_option("--variant", o.variant, "Corpus label in the report");
    evaluate->add_option("--format", o.format, "json, table or csv")->check(CLI::IsMember(formats));
    evaluate->add_option("--sweep-csv", o.sweep_csv, "Also write the k sweep as CSV");
    evaluate->add_option("-o,--output", o.output, "Report (default stdout)");

    auto* compare = add("compare", "Evaluate original vs enriched corpus with significance tests", cmd_compare);
    compare->add_option("--corpus", o.corpus, "Original corpus (JSON lines)");
    compare->add_option("--enriched", o.enriched, "Enriched corpus (default: enrich now)");
    compare->add_option("--vocabulary", o.vocabulary, "Vocabulary TSV");
    compare->add_option("--pairs", o.pairs, "Labeled pairs CSV (default: generated)");
    compare->add_option("--backend", o.backend, "bm25, tfidf_cosine or external_scores");
    compare->add_option("--pos-tags", o.pos_tags, "Pre-tagged sentences (JSON lines)");
    compare->add_option("--ner-terms", o.ner_terms, "NER terms per report (JSON lines)");
    compare->add_option("--k-terms", o.k_terms, "Terms kept per report");
    compare->add_option("--format", o.format, "json, table or csv")->check(CLI::IsMember(formats));
    compare->add_option("-o,--output", o.output, "Report (default stdout)");

    auto* vclean = add("vocab-clean", "Clean and deduplicate a vocabulary", cmd_vocab_clean);
    vclean->add_option("-i,--input", o.input, "Raw vocabulary TSV");
    vclean->add_option("-o,--output", o.output, "Cleaned vocabulary (default stdout)");

    auto* vsplit = add("vocab-split", "Seeded train/validation/test split of a vocabulary", cmd_vocab_split);
    vsplit->add_option("-i,--input", o.input, "Vocabulary TSV");
    vsplit->add_option("--output-dir", o.output_dir, "Directory for train/validation/test.tsv");
    vsplit->add_option("--ratios", o.ratios, "Three ratios summing to 1")->expected(3);

    auto* bleu_eval = add("bleu-eval", "Mean sentence BLEU of generated explanations", cmd_bleu_eval);
    bleu_eval->add_option("--predictions", o.predictions, "TSV of term<TAB>generated explanation");
    bleu_eval->add_option("--references", o.references, "Reference vocabulary TSV");
    bleu_eval->add_option("-o,--output", o.output, "Result JSON (default stdout)");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : static_cast<int>(ExitCode::usage);
    }

    try {
        const char* env = std::getenv(kEndpointEnv);
        Context ctx{o, load_config(o.config_path, collect_overrides(o), env), out, err};
        err << "[config] " << config_to_json(ctx.config) << '\n';
        for (const auto& [sub, handler] : commands) {
            if (sub->parsed()) return handler(ctx);
        }
        return static_cast<int>(ExitCode::usage);
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        const auto& offenders = e.offenders();
        for (std::size_t i = 0; i < offenders.size() && i < 20; ++i) err << "  offender: " << offenders[i] << '\n';
        if (offenders.size() > 20) err << "  ... and " << offenders.size() - 20 << " more\n";
        return static_cast<int>(e.exit_code());
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return static_cast<int>(e.exit_code());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return static_cast<int>(ExitCode::runtime);
    }
}

}  // namespace bugenrich
