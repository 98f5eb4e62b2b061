#include "synthctl/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "synthctl/config.hpp"
#include "synthctl/error.hpp"
#include "synthctl/evaluation.hpp"
#include "synthctl/pipeline.hpp"

namespace synthctl {

namespace {

struct Overrides {
    std::string config;
    std::string mode;
    std::string corpus, index, cache, embedding_cache, dataset, study, out, manifest;
    std::optional<std::size_t> n, min_keep, max_keep, parallelism;
    std::optional<double> cos_threshold, lambda;
    std::optional<int> steps, beam_width;
    std::optional<std::uint64_t> seed;
};

void add_shared_options(CLI::App& app, Overrides& o) {
    app.add_option("--config", o.config, "JSON config file; flags override its values");
    app.add_option("--mode", o.mode, "Provider mode: mock or live (default mock)")
        ->check(CLI::IsMember({"mock", "live"}));
    app.add_option("--corpus", o.corpus, "JSONL corpus of {\"id\", \"text\"} records");
    app.add_option("--index", o.index, "BM25 index file");
    app.add_option("--cache", o.cache, "Preprocessed-document cache (JSONL)");
    app.add_option("--embedding-cache", o.embedding_cache, "Embedding cache file");
    app.add_option("--dataset", o.dataset, "COPES-schema JSONL dataset");
    app.add_option("--study", o.study, "Study-unit JSON {story_id, events, treatment_idx}");
    app.add_option("--out", o.out, "Output path");
    app.add_option("--n", o.n, "Retrieval size (default 100)");
    app.add_option("--cos-threshold", o.cos_threshold,
                   "Cosine threshold for pretreatment similarity and treatment dissimilarity "
                   "(default 0.8)");
    app.add_option("--lambda", o.lambda, "Ridge penalty (default 1.0)");
    app.add_option("--steps", o.steps, "Inversion correction steps (default 10)");
    app.add_option("--beam-width", o.beam_width, "Inversion beam width (default 4)");
    app.add_option("--min-keep", o.min_keep, "Minimum donors for a verdict (default 2)");
    app.add_option("--max-keep", o.max_keep, "Maximum donors kept (default 5)");
    app.add_option("--parallelism", o.parallelism, "Concurrent evaluations (default 1)");
    app.add_option("--seed", o.seed, "Mock embedding seed (default 0)");
}

RunConfig resolve(const Overrides& o) {
    RunConfig cfg = o.config.empty() ? RunConfig{} : RunConfig::load(o.config);
    if (!o.mode.empty())
        cfg.mode = parse_mode(o.mode);
    auto path = [](const std::string& flag, std::optional<std::filesystem::path>& into) {
        if (!flag.empty())
            into = flag;
    };
    path(o.corpus, cfg.corpus);
    path(o.index, cfg.index);
    path(o.cache, cfg.cache);
    path(o.embedding_cache, cfg.embedding_cache);
    path(o.dataset, cfg.dataset);
    path(o.out, cfg.output);
    if (o.n) cfg.pipeline.n = *o.n;
    if (o.min_keep) cfg.pipeline.min_keep = *o.min_keep;
    if (o.max_keep) cfg.pipeline.max_keep = *o.max_keep;
    if (o.cos_threshold) cfg.pipeline.cos_threshold = *o.cos_threshold;
    if (o.lambda) cfg.pipeline.lambda = *o.lambda;
    if (o.steps) cfg.pipeline.steps = *o.steps;
    if (o.beam_width) cfg.pipeline.beam_width = *o.beam_width;
    if (o.parallelism) cfg.parallelism = *o.parallelism;
    if (o.seed) cfg.seed = *o.seed;
    cfg.apply_environment();
    cfg.validate();
    return cfg;
}

const std::filesystem::path& require(const std::optional<std::filesystem::path>& p,
                                     const char* flag) {
    if (!p)
        throw Error(Stage::Config, std::string("missing required path ") + flag);
    return *p;
}

/// Corpus, preprocessed store and index, loading whatever is on disk and
/// computing the rest.
struct Workspace {
    Corpus corpus;
    PreprocessedStore store;
    Index index;
};

void load_workspace(const RunConfig& cfg, const Providers& providers, Workspace& ws,
                    std::ostream& err) {
    ws.corpus = ingest_corpus(require(cfg.corpus, "--corpus"));
    if (cfg.cache && std::filesystem::exists(*cfg.cache))
        ws.store.load(*cfg.cache);
    if (cfg.index && std::filesystem::exists(*cfg.index)) {
        ws.index = Index::load(*cfg.index);
        return;
    }
    const auto computed = preprocess_corpus(ws.corpus, *providers.transform, ws.store, cfg.parallelism);
    if (computed && cfg.cache)
        ws.store.save(*cfg.cache);
    ws.index = build_index(ws.corpus, IndexField::Anonymized, &ws.store);
    err << "indexed " << ws.index.document_count() << " documents\n";
}

int cmd_ingest(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto corpus = ingest_corpus(require(cfg.corpus, "--corpus"));
    const auto& target = require(cfg.output, "--out");
    const auto providers = make_providers(cfg);
    PreprocessedStore store;
    if (std::filesystem::exists(target))
        store.load(target);
    const auto computed = preprocess_corpus(corpus, *providers.transform, store, cfg.parallelism);
    store.save(target);
    err << "ingested " << corpus.size() << " documents (" << computed << " preprocessed, "
        << corpus.size() - computed << " cached)\n";
    out << nlohmann::json{{"documents", corpus.size()}, {"preprocessed", computed}}.dump() << '\n';
    return 0;
}

int cmd_index(const RunConfig& cfg, const std::string& field, std::ostream& out,
              std::ostream& err) {
    const auto corpus = ingest_corpus(require(cfg.corpus, "--corpus"));
    const auto& target = require(cfg.output, "--out");
    Index index;
    if (field == "raw") {
        index = build_index(corpus, IndexField::Raw);
    } else {
        const auto providers = make_providers(cfg);
        PreprocessedStore store;
        if (cfg.cache && std::filesystem::exists(*cfg.cache))
            store.load(*cfg.cache);
        if (preprocess_corpus(corpus, *providers.transform, store, cfg.parallelism) && cfg.cache)
            store.save(*cfg.cache);
        index = build_index(corpus, IndexField::Anonymized, &store);
    }
    index.save(target);
    err << "indexed " << index.document_count() << " documents, " << index.term_count()
        << " terms\n";
    out << nlohmann::json{{"documents", index.document_count()},
                          {"terms", index.term_count()},
                          {"avg_doc_length", index.avg_doc_length()}}
               .dump()
        << '\n';
    return 0;
}

int cmd_run(const RunConfig& cfg, const std::string& study_path, std::ostream& out,
            std::ostream& err) {
    if (study_path.empty())
        throw Error(Stage::Config, "missing required path --study");
    std::ifstream in(study_path);
    if (!in)
        throw Error(Stage::Config, "cannot read study '" + study_path + "'");
    nlohmann::json sj;
    try {
        sj = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(Stage::Config, study_path + ": " + e.what());
    }
    EventSequence events{sj.at("events").get<std::vector<std::string>>(),
                         sj.value("story_id", std::string{})};
    const auto treatment_idx = sj.at("treatment_idx").get<std::size_t>();

    const auto providers = make_providers(cfg);
    Workspace ws;
    load_workspace(cfg, providers, ws, err);
    const auto study = segment_study_unit(events, treatment_idx, *providers.transform);
    const auto verdict =
        decide_causality(study, {ws.corpus, ws.index, ws.store}, cfg.pipeline, providers);
    if (cfg.cache)
        ws.store.save(*cfg.cache);
    if (cfg.output)
        append_jsonl(*cfg.output, manifest_record(study, verdict));
    out << verdict_json(study, verdict).dump(2) << '\n';
    return 0;
}

int cmd_eval(const RunConfig& cfg, const std::string& method_name_, const std::string& manifest,
             std::ostream& out, std::ostream& err) {
    const auto method = parse_method(method_name_);
    const auto dataset = load_copes(require(cfg.dataset, "--dataset"));
    const auto providers = make_providers(cfg);

    BenchmarkOptions options;
    options.parallelism = cfg.parallelism;
    options.policy = cfg.policy;
    if (!manifest.empty())
        options.manifest_path = manifest;
    else if (cfg.output)
        options.manifest_path = cfg.output->string() + ".manifest.jsonl";

    Workspace ws;
    std::optional<RetrievalContext> ctx;
    if (method == Method::SyntheticControl && !dataset.empty()) {
        load_workspace(cfg, providers, ws, err);
        ctx.emplace(RetrievalContext{ws.corpus, ws.index, ws.store});
    }
    const auto result = run_benchmark(dataset, method, ctx ? &*ctx : nullptr, cfg.pipeline,
                                      providers, options);
    if (cfg.cache && ctx)
        ws.store.save(*cfg.cache);

    auto report = report_json(result, method, cfg.pipeline, mode_name(cfg.mode), cfg.policy);
    if (cfg.output) {
        std::ofstream file(*cfg.output, std::ios::trunc);
        if (!file)
            throw Error(Stage::Evaluate, "cannot write report '" + cfg.output->string() + "'");
        file << report.dump(2) << '\n';
    }
    err << dataset.size() << " samples, " << result.records.size() << " pairs ("
        << result.resumed << " resumed), " << result.metrics.indeterminate_count
        << " indeterminate\n";
    out << format_table_row(method, result.metrics);
    return 0;
}

int cmd_invert_debug(const RunConfig& cfg, const std::string& vector_path,
                     const std::string& text, std::ostream& out, std::ostream&) {
    const auto providers = make_providers(cfg);
    std::optional<EmbeddingVector> target;
    if (!vector_path.empty()) {
        std::ifstream in(vector_path);
        if (!in)
            throw Error(Stage::Config, "cannot read vector '" + vector_path + "'");
        target.emplace(nlohmann::json::parse(in).get<std::vector<double>>(),
                       providers.embedder->model_id());
    } else if (!text.empty()) {
        target = embed_one(*providers.embedder, providers.cache.get(), text);
    } else {
        throw Error(Stage::Config, "invert-debug needs --vector or --text");
    }

    // The mock inverts into the preprocessed events of the corpus.
    std::vector<RegistryEntry> registry;
    if (cfg.mode == Mode::Mock) {
        const auto corpus = ingest_corpus(require(cfg.corpus, "--corpus"));
        PreprocessedStore store;
        if (cfg.cache && std::filesystem::exists(*cfg.cache))
            store.load(*cfg.cache);
        std::vector<std::string> texts;
        for (const auto& doc : corpus.documents())
            for (auto& e : store.get_or_compute(doc, *providers.transform).events)
                texts.push_back(std::move(e));
        const auto vectors = embed(*providers.embedder, providers.cache.get(), texts);
        for (std::size_t i = 0; i < texts.size(); ++i)
            registry.push_back({texts[i], vectors[i]});
    }
    const auto inverted = invert(*providers.inverter, *target,
                                 {cfg.pipeline.steps, cfg.pipeline.beam_width}, registry);
    out << nlohmann::json{{"text", inverted}}.dump() << '\n';
    return 0;
}

} // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Event causality identification with synthetic control", "synthctl"};
    app.require_subcommand(1);
    app.fallthrough();
    Overrides o;
    add_shared_options(app, o);

    auto* ingest = app.add_subcommand("ingest", "Preprocess a corpus into the document cache");
    auto* index = app.add_subcommand("index", "Build and save a BM25 index");
    std::string field = "anonymized";
    index->add_option("--field", field, "Indexed text: raw or anonymized (default anonymized)")
        ->check(CLI::IsMember({"raw", "anonymized"}));
    auto* run = app.add_subcommand("run", "Decide causality for one study unit");
    auto* eval = app.add_subcommand("eval", "Evaluate a method over a COPES-schema dataset");
    std::string method = "synthetic_control";
    std::string manifest;
    eval->add_option("--method", method,
                     "synthetic_control or counterfactual_prompting (default synthetic_control)")
        ->check(CLI::IsMember({"synthetic_control", "counterfactual_prompting"}));
    eval->add_option("--manifest", manifest,
                     "Per-pair JSONL manifest used for resuming (default <out>.manifest.jsonl)");
    auto* invert_debug = app.add_subcommand("invert-debug", "Invert a vector to text");
    std::string vector_path, text;
    invert_debug->add_option("--vector", vector_path, "JSON array file holding the vector");
    invert_debug->add_option("--text", text, "Embed this text and invert it");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        const auto cfg = resolve(o);
        if (*ingest)
            return cmd_ingest(cfg, out, err);
        if (*index)
            return cmd_index(cfg, field, out, err);
        if (*run)
            return cmd_run(cfg, o.study, out, err);
        if (*eval)
            return cmd_eval(cfg, method, manifest, out, err);
        if (*invert_debug)
            return cmd_invert_debug(cfg, vector_path, text, out, err);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}

int run_command(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run_command(args, std::cout, std::cerr);
}

} // namespace synthctl
