#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "xgprec/api.hpp"
#include "xgprec/engine.hpp"
#include "xgprec/evalkit.hpp"
#include "xgprec/service.hpp"
#include "xgprec/synthetic.hpp"

namespace fs = std::filesystem;
using namespace xgprec;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

void info(const std::string& message) { std::cerr << message << '\n'; }

struct BuildArgs {
    std::string corpus;
    std::string taxonomy;
    std::string out;
    std::optional<double> df_filter;
    bool force = false;
    bool stem = false;
};

int run_build(const BuildArgs& args)
{
    if (fs::exists(args.out) && !fs::is_empty(args.out) && !args.force) {
        std::cerr << "error: " << args.out << " exists and is not empty (use --force to overwrite)\n";
        return 1;
    }
    const auto start = Clock::now();
    auto taxonomy = load_taxonomy(args.taxonomy);
    auto corpus = load_corpus(args.corpus, std::move(taxonomy));
    IndexConfig config;
    config.tokenizer.stem = args.stem;
    if (args.df_filter) {
        config.generic_filter.df_ratio = *args.df_filter;
        config.generic_filter.min_corpus_size = 0;
    }
    std::size_t statements = 0;
    for (const auto& d : corpus.documents()) {
        statements += d.statements.size();
    }
    auto engine = Engine::build(std::move(corpus), config);
    engine.save(args.out);
    const auto& idx = engine.indexes();
    std::cout << "documents      " << engine.corpus().size() << '\n'
              << "concepts       " << idx.stats.concept_count() << '\n'
              << "statements     " << statements << '\n'
              << "edges          " << idx.edge_count() << '\n'
              << "bm25 terms     " << idx.bm25.terms().size() << '\n'
              << "generic        " << idx.generic_filter.blocked().size() << '\n'
              << "build time     " << seconds_since(start) << " s\n";
    return 0;
}

struct RecommendArgs {
    std::string index;
    DocId doc = 0;
    std::size_t top = 100;
    std::string first_stage = "concept";
    std::string cutoff = "flexible";
    std::size_t k = 1000;
    double w_graph = 0.6;
    double w_text = 0.4;
    bool explain = false;
    std::size_t l = api::default_explanation_length;
    std::optional<std::string> trec;
    std::optional<std::string> filter;
    bool json = false;
    std::size_t warm = 0;
};

void print_explanation(const Explanation& x)
{
    if (x.entries.empty()) {
        std::cout << "      (no graph overlap)\n";
    }
    for (const auto& e : x.entries) {
        const char* marker = e.status == EdgeStatus::shared ? "==" : "--";
        std::printf("      %-20s %s %s[%s]%s %s  %.6f\n",
                    std::string(to_string(e.status)).c_str(),
                    e.subject.str().c_str(),
                    marker,
                    e.predicate.c_str(),
                    marker,
                    e.object.str().c_str(),
                    e.score);
    }
}

int run_recommend(const RecommendArgs& args)
{
    auto engine = Engine::open(args.index);
    RecommendationConfig config;
    config.top_n = args.top;
    config.w_graph = args.w_graph;
    config.w_text = args.w_text;
    config.first_stage.strategy = parse_strategy(args.first_stage);
    config.first_stage.cutoff = parse_cutoff(args.cutoff);
    config.first_stage.k = args.k;
    config.validate();
    if (args.l < 1) {
        throw InvalidL("--l must be at least 1");
    }
    std::optional<DocumentFilter> filter;
    if (args.filter) {
        filter.emplace(engine.indexes(), load_filter(*args.filter));
    }
    const DocumentFilter* f = filter ? &*filter : nullptr;

    // One cold run, then the reported latency is the mean over warm runs.
    auto start = Clock::now();
    auto rec = engine.recommend(args.doc, config, f);
    double latency = seconds_since(start);
    if (args.warm > 0) {
        double total = 0.0;
        for (std::size_t i = 0; i < args.warm; ++i) {
            start = Clock::now();
            rec = engine.recommend(args.doc, config, f);
            total += seconds_since(start);
        }
        latency = total / static_cast<double>(args.warm);
    }
    if (rec.candidates.empty() || (rec.input_core_empty && config.first_stage.strategy == Strategy::fs_core)) {
        std::cerr << "warning: no candidates for document " << args.doc
                  << (rec.input_core_empty ? " (its graph core is empty)" : "") << '\n';
    }

    if (args.trec) {
        std::vector<RunEntry> entries;
        for (const auto& c : rec.candidates) {
            entries.push_back({c.doc_id, c.fused});
        }
        write_trec_run(std::cout, std::to_string(args.doc), entries, *args.trec);
    } else if (args.json) {
        std::cout << api::recommendation_json(engine, rec, args.explain ? std::optional(args.l) : std::nullopt).dump(2)
                  << '\n';
    } else {
        const auto input_core = args.explain ? engine.core(engine.corpus().at(args.doc)) : GraphCore{};
        std::printf("%-5s %-12s %-9s %-9s %-9s %s\n", "rank", "doc", "score", "graph", "bm25", "title");
        for (std::size_t i = 0; i < rec.candidates.size(); ++i) {
            const auto& c = rec.candidates[i];
            std::printf("%-5zu %-12llu %-9.6f %-9.6f %-9.6f %s\n", i + 1, static_cast<unsigned long long>(c.doc_id),
                        c.fused, c.core_overlap_norm, c.bm25_norm, engine.corpus().at(c.doc_id).title.c_str());
            if (args.explain) {
                print_explanation(engine.explain(input_core, c.doc_id, args.l));
            }
        }
    }
    std::fprintf(stderr, "latency %.6f s per document (%zu candidates from %zu first-stage results)\n", latency,
                 rec.candidates.size(), rec.first_stage_count);
    return 0;
}

struct EvaluateArgs {
    std::string index;
    std::string qrels;
    std::optional<std::string> config;
    std::optional<std::string> report;
    std::optional<std::string> run;
    bool no_ablation = false;
};

int run_evaluate(const EvaluateArgs& args)
{
    auto engine = Engine::open(args.index);
    auto qrels = load_qrels(args.qrels);
    api::Settings settings;
    // Evaluation ranks the complete candidate list unless the config says otherwise.
    settings.recommendation.top_n = 0;
    if (args.config) {
        auto in = open_input(*args.config);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(in);
        } catch (const nlohmann::json::exception& e) {
            throw FormatError(*args.config + ": " + e.what());
        }
        settings = api::settings_from_json(j, settings);
    }
    std::optional<DocumentFilter> filter;
    if (settings.filter_path) {
        filter.emplace(engine.indexes(), load_filter(*settings.filter_path));
    }
    const DocumentFilter* f = filter ? &*filter : nullptr;

    std::vector<MetricReport> reports;
    if (args.no_ablation) {
        reports.push_back(benchmark_driver(engine.corpus(), engine.indexes(), qrels, settings.recommendation, f));
        reports.back().label = "XGPRec";
    } else {
        reports = ablation_sweep(engine.corpus(), engine.indexes(), qrels, settings.recommendation, f);
    }
    write_report_table(std::cout, reports);
    if (args.report) {
        std::ofstream out(*args.report);
        if (!out) {
            throw IoError("cannot write " + *args.report);
        }
        out << to_json(reports).dump(2) << '\n';
    }
    if (args.run) {
        std::ofstream out(*args.run);
        if (!out) {
            throw IoError("cannot write " + *args.run);
        }
        // Topic column is "<topic>/<input doc>"; one ranking per input document.
        for (const auto& [topic, by_input] : reports.front().runs) {
            for (const auto& [input, entries] : by_input) {
                write_trec_run(out, topic + "/" + std::to_string(input), entries, "xgprec");
            }
        }
    }
    return 0;
}

struct ServeArgs {
    std::string index;
    int port = 8080;
    std::string host = "0.0.0.0";
    std::optional<std::string> ui_dir;
    std::optional<std::string> filter;
};

int run_serve(const ServeArgs& args)
{
    ServiceConfig config;
    config.host = args.host;
    config.port = args.port;
    config.index_dir = args.index;
    if (args.ui_dir) {
        config.ui_dir = fs::path(*args.ui_dir);
    }
    config.defaults.filter_path = args.filter;
    info("listening on " + args.host + ":" + std::to_string(args.port));
    return serve(config, info);
}

struct GenerateArgs {
    std::string out;
    synthetic::Config config;
};

int run_generate(const GenerateArgs& args)
{
    fs::create_directories(args.out);
    auto bench = synthetic::generate(args.config);
    std::ofstream corpus(fs::path(args.out) / "corpus.jsonl");
    write_documents(corpus, bench.corpus.documents());
    std::ofstream taxonomy(fs::path(args.out) / "taxonomy.tsv");
    write_taxonomy(taxonomy, bench.corpus.taxonomy());
    std::ofstream qrels(fs::path(args.out) / "qrels.txt");
    write_qrels(qrels, bench.qrels);
    if (!corpus || !taxonomy || !qrels) {
        throw IoError("failed writing into " + args.out);
    }
    std::cout << "documents " << bench.corpus.size() << ", topics " << bench.qrels.topics().size() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Explainable graph-based paper recommendation"};
    app.require_subcommand(1);

    BuildArgs build;
    auto* build_cmd = app.add_subcommand("build", "Build and persist indexes for a corpus");
    build_cmd->add_option("--corpus", build.corpus, "Corpus records, one JSON object per line")->required();
    build_cmd->add_option("--taxonomy", build.taxonomy, "Predicate taxonomy, '<predicate>\\t<level>' per line")
        ->required();
    build_cmd->add_option("--out", build.out, "Index directory")->required();
    build_cmd->add_option("--df-filter", build.df_filter, "Block concepts whose df ratio exceeds R");
    build_cmd->add_flag("--force", build.force, "Overwrite an existing index directory");
    build_cmd->add_flag("--stem", build.stem, "Porter-stem BM25 tokens");

    RecommendArgs rec;
    auto* rec_cmd = app.add_subcommand("recommend", "Recommend documents for a seed document");
    rec_cmd->add_option("--index", rec.index, "Index directory")->required();
    rec_cmd->add_option("--doc", rec.doc, "Seed document id")->required();
    rec_cmd->add_option("--top", rec.top, "Output length (0 keeps all)");
    rec_cmd->add_option("--first-stage", rec.first_stage, "concept, node or core")
        ->check(CLI::IsMember({"concept", "node", "core"}));
    rec_cmd->add_option("--cutoff", rec.cutoff, "hard or flexible")->check(CLI::IsMember({"hard", "flexible"}));
    rec_cmd->add_option("--k", rec.k, "First-stage cutoff")->check(CLI::PositiveNumber);
    rec_cmd->add_option("--w-graph", rec.w_graph, "Weight of the core overlap");
    rec_cmd->add_option("--w-text", rec.w_text, "Weight of BM25");
    rec_cmd->add_flag("--explain", rec.explain, "Print an explanation per candidate");
    rec_cmd->add_option("--l", rec.l, "Explanation length")->check(CLI::PositiveNumber);
    rec_cmd->add_option("--trec", rec.trec, "Emit a TREC run with this tag");
    rec_cmd->add_option("--filter", rec.filter, "Restrict retrieval to the ids in this file");
    rec_cmd->add_flag("--json", rec.json, "Emit the API JSON payload");
    rec_cmd->add_option("--warm", rec.warm, "Warm runs to average the latency over");

    EvaluateArgs eval;
    auto* eval_cmd = app.add_subcommand("evaluate", "Evaluate against TREC qrels");
    eval_cmd->add_option("--index", eval.index, "Index directory")->required();
    eval_cmd->add_option("--qrels", eval.qrels, "TREC qrels")->required();
    eval_cmd->add_option("--config", eval.config, "JSON recommendation settings");
    eval_cmd->add_option("--report", eval.report, "Write the JSON report here");
    eval_cmd->add_option("--run", eval.run, "Write the full configuration's rankings as a TREC run");
    eval_cmd->add_flag("--no-ablation", eval.no_ablation, "Only evaluate the configured weights");

    ServeArgs serve_args;
    auto* serve_cmd = app.add_subcommand("serve", "Serve the JSON API");
    serve_cmd->add_option("--index", serve_args.index, "Index directory")->required();
    serve_cmd->add_option("--port", serve_args.port, "TCP port")->required();
    serve_cmd->add_option("--host", serve_args.host, "Bind address");
    serve_cmd->add_option("--ui-dir", serve_args.ui_dir, "Static UI assets");
    serve_cmd->add_option("--filter", serve_args.filter, "Restrict retrieval to the ids in this file");

    GenerateArgs gen;
    auto* gen_cmd = app.add_subcommand("generate", "Write a synthetic benchmark (corpus, taxonomy, qrels)");
    gen_cmd->add_option("--out", gen.out, "Output directory")->required();
    gen_cmd->add_option("--docs", gen.config.documents, "Number of documents");
    gen_cmd->add_option("--topics", gen.config.topics, "Number of planted topics");
    gen_cmd->add_option("--members", gen.config.members_per_topic, "Documents per topic");
    gen_cmd->add_option("--seed", gen.config.seed, "Random seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*build_cmd) {
            return run_build(build);
        }
        if (*rec_cmd) {
            return run_recommend(rec);
        }
        if (*eval_cmd) {
            return run_evaluate(eval);
        }
        if (*serve_cmd) {
            return run_serve(serve_args);
        }
        if (*gen_cmd) {
            return run_generate(gen);
        }
    } catch (const UnknownDocument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
