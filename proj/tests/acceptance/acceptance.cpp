// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <sys/wait.h>

#include "invariants.hpp"
#include "oracle/brute_force.hpp"
#include "support.hpp"
#include "xgprec/engine.hpp"
#include "xgprec/evalkit.hpp"
#include "xgprec/synthetic.hpp"

using namespace xgprec;
using Clock = std::chrono::steady_clock;

namespace {

// Tolerances and budgets.
constexpr double kRelTol = 1e-9;
constexpr double kOracleBudgetS = 10.0;
constexpr double kInvariantBudgetS = 60.0;
constexpr double kFirstStageBudgetS = 0.100;
constexpr double kRecommendBudgetS = 1.0;
constexpr double kTableResolution = 1e-4;  // evaluate prints four decimals
constexpr std::size_t kPerfDocuments = 100'000;
constexpr std::size_t kPerfQueries = 20;
constexpr int kWarmRuns = 3;

struct Failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& what)
{
    if (!ok) {
        throw Failure(what);
    }
}

void require_close(double got, double expected, const std::string& what)
{
    require(testing_support::close(got, expected, kRelTol),
            what + ": " + std::to_string(got) + " vs " + std::to_string(expected));
}

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

int run_cli(const std::string& args, const std::filesystem::path& out)
{
    const std::string cmd = std::string(XGPREC_CLI) + " " + args + " >" + out.string() + " 2>" + out.string() + ".err";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// Oracle equivalence -------------------------------------------------------

std::string oracle_equivalence()
{
    const auto start = Clock::now();
    auto corpus = testing_support::fixture25();
    auto engine = Engine::build(corpus);
    oracle::BruteForce brute(corpus);
    const std::pair<Strategy, const char*> strategies[] = {
        {Strategy::fs_core, "core"}, {Strategy::fs_node, "node"}, {Strategy::fs_concept, "concept"}};
    std::size_t comparisons = 0;

    for (const auto& d : corpus.documents()) {
        for (auto [strategy, name] : strategies) {
            for (Cutoff cutoff : {Cutoff::hard, Cutoff::flexible}) {
                for (std::size_t k : {1u, 2u, 3u, 5u, 8u, 1000u}) {
                    const std::string where = std::to_string(d.id) + "/" + name + "/"
                        + std::string(to_string(cutoff)) + "/k=" + std::to_string(k);
                    FirstStageConfig fs{strategy, cutoff, k};
                    auto got = run_first_stage(d, engine.indexes(), corpus.taxonomy(), fs).entries;
                    auto expected =
                        oracle::BruteForce::cutoff(brute.first_stage(d, name, nullptr), k, cutoff == Cutoff::flexible);
                    require(got.size() == expected.size(), "first stage size " + where);
                    for (std::size_t i = 0; i < got.size(); ++i) {
                        require(got[i].doc_id == expected[i].doc, "first stage rank " + where);
                        require_close(got[i].score, expected[i].score, "first stage score " + where);
                    }

                    for (auto [wg, wt] : {std::pair{0.6, 0.4}, std::pair{1.0, 0.0}, std::pair{0.0, 1.0}}) {
                        RecommendationConfig rc;
                        rc.first_stage = fs;
                        rc.w_graph = wg;
                        rc.w_text = wt;
                        rc.top_n = 0;
                        auto rec = engine.recommend(d.id, rc).candidates;
                        auto exp = brute.recommend(d.id, name, k, cutoff == Cutoff::flexible, wg, wt, 0);
                        require(rec.size() == exp.size(), "recommend size " + where);
                        for (std::size_t i = 0; i < rec.size(); ++i) {
                            require(rec[i].doc_id == exp[i].doc, "recommend rank " + where);
                            require_close(rec[i].core_overlap_raw, exp[i].overlap, "overlap " + where);
                            require_close(rec[i].bm25_raw, exp[i].bm25, "bm25 " + where);
                            require_close(rec[i].fused, exp[i].fused, "fused " + where);
                        }
                        ++comparisons;
                    }
                }
            }
        }
    }
    for (const auto& a : corpus.documents()) {
        for (const auto& b : corpus.documents()) {
            for (std::size_t l : {1u, 2u, 3u, 6u, 20u}) {
                auto got = engine.explain(a.id, b.id, l).entries;
                auto expected = brute.explain(a.id, b.id, l);
                const std::string where = std::to_string(a.id) + "->" + std::to_string(b.id) + " l=" + std::to_string(l);
                require(got.size() == expected.size(), "explanation size " + where);
                for (std::size_t i = 0; i < got.size(); ++i) {
                    require(got[i].subject.str() == expected[i].s && got[i].predicate == expected[i].p
                                && got[i].object.str() == expected[i].o,
                            "explanation edge " + where);
                    require(std::string(to_string(got[i].status)) == expected[i].status, "explanation status " + where);
                    require_close(got[i].score, expected[i].score, "explanation score " + where);
                }
                ++comparisons;
            }
        }
    }
    const double elapsed = seconds_since(start);
    require(elapsed < kOracleBudgetS, "took " + std::to_string(elapsed) + " s");
    std::ostringstream s;
    s << comparisons << " configurations agree, " << elapsed << " s";
    return s.str();
}

// Formula oracles -----------------------------------------------------------

std::string formula_oracles()
{
    using testing_support::DocBuilder;
    const auto taxonomy = default_taxonomy();

    // Edge score: ten documents, c1 in two, c2 in five, text length 100.
    Document d = DocBuilder(1, 100)
                     .ann("c1", "Drug", 0)
                     .ann("c2", "Disease", 20)
                     .ann("c1", "Drug", 50)
                     .ann("c2", "Disease", 80)
                     .st("c1", "Drug", "treats", "c2", "Disease", 0.8);
    CorpusStats stats(10, {"c1", "c2"}, {2, 5});
    const double derived =
        0.8 * std::min(0.5, 0.6) * (0.5 * std::log(10.0 / 2.0) + 0.5 * std::log(10.0 / 5.0)) * 1.0;
    require(std::abs(derived - 0.460517) < 5e-7, "derived edge score is not 0.460517");
    const double got = edge_score({ConceptId("c1"), "treats", ConceptId("c2")}, d, stats, taxonomy);
    require(std::abs(got - derived) < 1e-12, "edge score " + std::to_string(got));

    // BM25 on [apple banana apple], [banana cherry cherry cherry], [date apple date].
    auto bm = Bm25Index::build(Corpus({DocBuilder(1).words("apple banana", "apple"),
                                       DocBuilder(2).words("banana cherry", "cherry cherry"),
                                       DocBuilder(3).words("date", "apple date")},
                                      taxonomy));
    const auto term = [&](double tf, double df, double dl) {
        const double idf = std::log(1.0 + (3.0 - df + 0.5) / (df + 0.5));
        return idf * tf * 2.2 / (tf + 1.2 * (0.25 + 0.75 * dl / (10.0 / 3.0)));
    };
    const std::vector<std::string> q{"apple", "cherry"};
    require(std::abs(bm.score(q, 0) - term(2, 2, 3)) < 1e-12, "bm25 doc 1");
    require(std::abs(bm.score(q, 1) - term(3, 1, 4)) < 1e-12, "bm25 doc 2");
    require(std::abs(bm.score(q, 2) - term(1, 2, 3)) < 1e-12, "bm25 doc 3");

    // Crafted run, grades [2, 0, 1, unjudged, 2, 0].
    const Judgments j{{1, 2}, {2, 0}, {3, 1}, {5, 2}, {6, 0}};
    const std::vector<DocId> run{1, 2, 3, 4, 5, 6};
    const double dcg = 2.0 + 1.0 / std::log2(4.0) + 2.0 / std::log2(6.0);
    const double idcg = 2.0 + 2.0 / std::log2(3.0) + 1.0 / std::log2(4.0);
    require(std::abs(ndcg_at(run, j, 10) - dcg / idcg) < 1e-12, "nDCG@10");
    require(precision_at(run, j, 10) == 0.3 && precision_at(run, j, 20) == 0.15, "P@k");
    require(std::abs(bpref(run, j) - 2.0 / 3.0) < 1e-12, "bpref");

    // Explanation trace: input {a-b}; candidate {a-b, a-c, c-d}.
    const auto edge = [](const char* s, const char* st, const char* o, const char* ot, double score) {
        ScoredEdge e;
        e.subject = ConceptId(s);
        e.subject_type = st;
        e.predicate = "treats";
        e.object = ConceptId(o);
        e.object_type = ot;
        e.score = score;
        return e;
    };
    GraphCore::Map in_map, cand_map;
    auto ab = edge("a", "Drug", "b", "Disease", 0.7);
    in_map.emplace(ab.pair(), ab);
    for (auto e : {edge("a", "Drug", "b", "Disease", 0.2), edge("a", "Drug", "c", "Gene", 0.9),
                   edge("c", "Gene", "d", "Disease", 0.95)}) {
        cand_map.emplace(e.pair(), e);
    }
    auto x = explain(GraphCore(in_map), GraphCore(cand_map), 6);
    require(x.entries.size() == 2, "trace length");
    require(x.entries[0].status == EdgeStatus::shared && x.entries[0].score == 0.7, "trace shared entry");
    require(x.entries[1].status == EdgeStatus::object_not_shared && x.entries[1].object.str() == "c"
                && x.entries[1].score == 0.9,
            "trace candidate entry");
    return "edge score, BM25, nDCG/P/bpref and explanation trace match";
}

// Invariants ----------------------------------------------------------------

std::string invariant_suite()
{
    const auto start = Clock::now();
    synthetic::Config sc;
    auto bench = synthetic::generate(sc);
    auto fixture = testing_support::fixture25();
    const std::pair<const char*, std::function<std::string()>> checks[] = {
        {"tf sums to 1", [] { return invariants::tf_sums_to_one(11, 1000); }},
        {"scores finite", [] { return invariants::scores_in_range(12, 200); }},
        {"core per pair", [] { return invariants::core_uniqueness(13, 500); }},
        {"cutoff bounds", [] { return invariants::cutoff_bounds(14, 1000); }},
        {"explanation bounds", [] { return invariants::explanation_bounds(15, 500); }},
        {"FSNode in FSConcept (fixture)",
         [&] { return invariants::node_within_concept(fixture, build_indexes(fixture), 25); }},
        {"FSNode in FSConcept (synthetic)",
         [&] { return invariants::node_within_concept(bench.corpus, build_indexes(bench.corpus), 200); }},
        {"bpref unjudged", [] { return invariants::bpref_unjudged_invariance(16, 200); }},
    };
    for (const auto& [name, check] : checks) {
        auto violation = check();
        require(violation.empty(), std::string(name) + ": " + violation);
    }
    const double elapsed = seconds_since(start);
    require(elapsed < kInvariantBudgetS, "took " + std::to_string(elapsed) + " s");
    std::ostringstream s;
    s << std::size(checks) << " suites, " << elapsed << " s";
    return s.str();
}

// Ablation structure ------------------------------------------------------------

std::string ablation_structure()
{
    testing_support::TempDir dir;
    const auto data = dir / "bench";
    const auto index = dir / "index";
    const auto log = dir / "log";
    require(run_cli("generate --out " + data.string() + " --docs 2000", log) == 0, "generate failed");
    require(run_cli("build --corpus " + (data / "corpus.jsonl").string() + " --taxonomy "
                        + (data / "taxonomy.tsv").string() + " --out " + index.string(),
                    log)
                == 0,
            "build failed");
    const auto report = dir / "report.json";
    require(run_cli("evaluate --index " + index.string() + " --qrels " + (data / "qrels.txt").string() + " --report "
                        + report.string(),
                    log)
                == 0,
            "evaluate failed: " + slurp(log.string() + ".err"));
    const auto table = slurp(log);
    auto rows = nlohmann::json::parse(slurp(report))["rows"];
    require(rows.size() == 3, "expected three rows");
    for (const auto* label : {"XGPRec", "- BM25", "- CoreOverlap"}) {
        require(table.find(label) != std::string::npos, std::string("table lacks row ") + label);
    }
    const double recall = rows[0]["mean"]["recall"].get<double>();
    for (std::size_t i = 0; i < 3; ++i) {
        require(rows[i]["mean"]["recall"].get<double>() == recall, "recall differs between rows");
        for (std::size_t k = i + 1; k < 3; ++k) {
            bool differs = false;
            for (const auto* col : {"ndcg@10", "ndcg@20", "p@10", "p@20"}) {
                differs = differs
                    || std::abs(rows[i]["mean"][col].get<double>() - rows[k]["mean"][col].get<double>())
                        >= kTableResolution;
            }
            require(differs, "rows " + std::to_string(i) + " and " + std::to_string(k) + " agree on nDCG and P");
        }
    }
    std::ostringstream s;
    s << "recall " << recall << " in all rows; nDCG@10 " << rows[0]["mean"]["ndcg@10"].get<double>() << " / "
      << rows[1]["mean"]["ndcg@10"].get<double>() << " / " << rows[2]["mean"]["ndcg@10"].get<double>();
    return s.str();
}

// Performance ----------------------------------------------------------------------

std::string performance()
{
    synthetic::Config sc;
    sc.documents = kPerfDocuments;
    sc.topics = 50;
    sc.members_per_topic = 100;
    auto bench = synthetic::generate(sc);
    auto engine = Engine::build(std::move(bench.corpus));
    const auto& corpus = engine.corpus();

    FirstStageConfig fs{Strategy::fs_concept, Cutoff::flexible, 1000};
    RecommendationConfig rc;
    rc.first_stage = fs;
    double fs_total = 0.0;
    double rec_total = 0.0;
    double fs_worst = 0.0;
    double rec_worst = 0.0;
    std::size_t candidates = 0;
    const std::size_t step = corpus.size() / kPerfQueries;
    for (std::size_t q = 0; q < kPerfQueries; ++q) {
        const auto& d = corpus.by_ordinal(static_cast<std::uint32_t>(q * step));
        std::size_t sink = run_first_stage(d, engine.indexes(), corpus.taxonomy(), fs).entries.size();
        candidates += sink;
        double fs_warm = 0.0;
        for (int r = 0; r < kWarmRuns; ++r) {
            const auto t = Clock::now();
            sink += run_first_stage(d, engine.indexes(), corpus.taxonomy(), fs).entries.size();
            fs_warm += seconds_since(t);
        }
        sink += engine.recommend(d.id, rc).candidates.size();
        double rec_warm = 0.0;
        for (int r = 0; r < kWarmRuns; ++r) {
            const auto t = Clock::now();
            sink += engine.recommend(d.id, rc).candidates.size();
            rec_warm += seconds_since(t);
        }
        require(sink > 0, "no candidates for document " + std::to_string(d.id));
        fs_warm /= kWarmRuns;
        rec_warm /= kWarmRuns;
        fs_total += fs_warm;
        rec_total += rec_warm;
        fs_worst = std::max(fs_worst, fs_warm);
        rec_worst = std::max(rec_worst, rec_warm);
    }
    const double fs_mean = fs_total / kPerfQueries;
    const double rec_mean = rec_total / kPerfQueries;
    std::ostringstream s;
    s << std::fixed << std::setprecision(4) << "FSConcept k=1000 mean " << fs_mean << " s (worst " << fs_worst
      << "), recommend mean " << rec_mean << " s (worst " << rec_worst << ") over " << kPerfQueries << " queries, " << candidates / kPerfQueries << " first-stage candidates each";
    require(fs_mean < kFirstStageBudgetS && rec_mean < kRecommendBudgetS, s.str());
    return s.str();
}

// Round trip --------------------------------------------------------------------------

std::string trec_text(const Engine& engine, const RecommendationConfig& rc)
{
    std::ostringstream out;
    for (const auto& d : engine.corpus().documents()) {
        std::vector<RunEntry> entries;
        for (const auto& c : engine.recommend(d.id, rc).candidates) {
            entries.push_back({c.doc_id, c.fused});
        }
        write_trec_run(out, std::to_string(d.id), entries, "xg");
    }
    return out.str();
}

std::string round_trip()
{
    testing_support::TempDir dir;
    synthetic::Config sc;
    sc.documents = 500;
    sc.topics = 5;
    sc.members_per_topic = 30;
    std::size_t checked = 0;
    for (auto corpus : {testing_support::fixture25(), synthetic::generate(sc).corpus}) {
        auto built = Engine::build(corpus);
        const auto path = dir / ("ix" + std::to_string(checked));
        std::filesystem::create_directories(path);
        built.save(path);
        auto loaded = Engine::open(path, {});
        for (Strategy s : {Strategy::fs_core, Strategy::fs_node, Strategy::fs_concept}) {
            RecommendationConfig rc;
            rc.first_stage.strategy = s;
            rc.top_n = 0;
            require(trec_text(built, rc) == trec_text(loaded, rc), "loaded index ranks differently");
            for (const auto& d : built.corpus().documents()) {
                auto a = built.recommend(d.id, rc).candidates;
                auto b = loaded.recommend(d.id, rc).candidates;
                require(a.size() == b.size(), "candidate count differs after reload");
                for (std::size_t i = 0; i < a.size(); ++i) {
                    require(a[i].doc_id == b[i].doc_id && a[i].fused == b[i].fused
                                && a[i].core_overlap_raw == b[i].core_overlap_raw && a[i].bm25_raw == b[i].bm25_raw,
                            "candidate differs after reload");
                }
                if (!a.empty()) {
                    auto xa = built.explain(d.id, a.front().doc_id, 6).entries;
                    auto xb = loaded.explain(d.id, a.front().doc_id, 6).entries;
                    require(xa.size() == xb.size(), "explanation differs after reload");
                    for (std::size_t i = 0; i < xa.size(); ++i) {
                        require(xa[i].subject == xb[i].subject && xa[i].object == xb[i].object
                                    && xa[i].status == xb[i].status && xa[i].score == xb[i].score,
                                "explanation differs after reload");
                    }
                }
            }
        }
        ++checked;
    }

    // Repeated CLI invocations write identical run files.
    const auto index = dir / "cli";
    const auto log = dir / "log";
    const auto data = testing_support::data_dir();
    require(run_cli("build --corpus " + (data / "fixture25.jsonl").string() + " --taxonomy "
                        + (data / "taxonomy.tsv").string() + " --out " + index.string(),
                    log)
                == 0,
            "build failed");
    std::size_t files = 0;
    for (const auto* doc : {"101", "106", "119", "124"}) {
        const std::string args = "recommend --index " + index.string() + " --doc " + doc + " --top 0 --trec xg";
        require(run_cli(args, dir / "a") == 0 && run_cli(args, dir / "b") == 0, "recommend failed");
        const auto a = slurp(dir / "a");
        require(!a.empty() && a == slurp(dir / "b"), std::string("run file for ") + doc + " differs");
        ++files;
    }
    return std::to_string(checked) + " indexes reload identically; " + std::to_string(files)
        + " CLI run files byte-identical";
}

}  // namespace

int main()
{
    const std::pair<const char*, std::string (*)()> criteria[] = {
        {"oracle-equivalence", oracle_equivalence}, {"formula-oracles", formula_oracles},
        {"invariant-suite", invariant_suite},       {"ablation-structure", ablation_structure},
        {"performance", performance},               {"round-trip-determinism", round_trip},
    };
    int failures = 0;
    for (const auto& [name, check] : criteria) {
        std::string detail;
        bool ok = false;
        try {
            detail = check();
            ok = true;
        } catch (const std::exception& e) {
            detail = e.what();
        }
        failures += ok ? 0 : 1;
        std::printf("%s  %-24s %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
