#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "engine.hpp"
#include "explainer.hpp"
#include "first_stage.hpp"
#include "recommender.hpp"

namespace xgprec::api {

using nlohmann::json;

inline constexpr std::size_t default_explanation_length = 6;
inline constexpr std::size_t default_max_statements = 10;

/// Settings shared by the CLI, the evaluator and the service.
struct Settings {
    RecommendationConfig recommendation;
    std::size_t l = default_explanation_length;
    std::optional<std::string> filter_path;
};

/// Reads {"strategy","cutoff","k","w_graph","w_text","top_n","l","filter"}; absent keys keep `base`.
[[nodiscard]] inline Settings settings_from_json(const json& j, Settings base = {})
{
    try {
        if (j.contains("strategy")) {
            base.recommendation.first_stage.strategy = parse_strategy(j.at("strategy").get<std::string>());
        }
        if (j.contains("cutoff")) {
            base.recommendation.first_stage.cutoff = parse_cutoff(j.at("cutoff").get<std::string>());
        }
        if (j.contains("k")) {
            base.recommendation.first_stage.k = j.at("k").get<std::size_t>();
        }
        if (j.contains("w_graph")) {
            base.recommendation.w_graph = j.at("w_graph").get<double>();
        }
        if (j.contains("w_text")) {
            base.recommendation.w_text = j.at("w_text").get<double>();
        }
        if (j.contains("top_n")) {
            base.recommendation.top_n = j.at("top_n").get<std::size_t>();
        }
        if (j.contains("l")) {
            base.l = j.at("l").get<std::size_t>();
        }
        if (j.contains("filter")) {
            base.filter_path = j.at("filter").get<std::string>();
        }
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("bad configuration: ") + e.what());
    }
    base.recommendation.validate();
    if (base.l < 1) {
        throw InvalidL("explanation length l must be at least 1");
    }
    return base;
}

[[nodiscard]] inline json to_json(const ExplanationEdge& e)
{
    return {{"subject", e.subject.str()},
            {"subject_type", e.subject_type},
            {"predicate", e.predicate},
            {"object", e.object.str()},
            {"object_type", e.object_type},
            {"status", std::string(to_string(e.status))},
            {"score", e.score}};
}

[[nodiscard]] inline json to_json(const Explanation& x)
{
    json entries = json::array();
    for (const auto& e : x.entries) {
        entries.push_back(to_json(e));
    }
    return entries;
}

[[nodiscard]] inline json to_json(const ScoredEdge& e)
{
    return {{"subject", e.subject.str()},
            {"subject_type", e.subject_type},
            {"predicate", e.predicate},
            {"object", e.object.str()},
            {"object_type", e.object_type},
            {"score", e.score},
            {"confidence", e.confidence},
            {"coverage", e.coverage},
            {"tfidf", e.tfidf}};
}

/// Concept type -> colour for every type mentioned in `types`.
[[nodiscard]] inline json colors(const std::set<std::string>& types)
{
    json c = json::object();
    for (const auto& t : types) {
        c[t] = std::string(concept_color(t));
    }
    return c;
}

[[nodiscard]] inline json recommendation_json(const Engine& engine,
                                              const Recommendation& rec,
                                              std::optional<std::size_t> explain_l)
{
    std::optional<GraphCore> input_core;
    if (explain_l) {
        input_core = engine.core(engine.corpus().at(rec.input));
    }
    std::set<std::string> types;
    json candidates = json::array();
    for (std::size_t i = 0; i < rec.candidates.size(); ++i) {
        const auto& c = rec.candidates[i];
        json item = {{"rank", i + 1},
                     {"doc_id", c.doc_id},
                     {"title", engine.corpus().at(c.doc_id).title},
                     {"score", c.fused},
                     {"first_stage_score", c.first_stage_score},
                     {"core_overlap", c.core_overlap_raw},
                     {"core_overlap_norm", c.core_overlap_norm},
                     {"bm25", c.bm25_raw},
                     {"bm25_norm", c.bm25_norm}};
        if (explain_l) {
            auto x = engine.explain(*input_core, c.doc_id, *explain_l);
            for (const auto& e : x.entries) {
                types.insert(e.subject_type);
                types.insert(e.object_type);
            }
            item["explanation"] = to_json(x);
        }
        candidates.push_back(std::move(item));
    }
    return {{"input", rec.input},
            {"input_core_empty", rec.input_core_empty},
            {"first_stage_count", rec.first_stage_count},
            {"candidates", std::move(candidates)},
            {"colors", colors(types)}};
}

[[nodiscard]] inline json document_json(const Document& d)
{
    json concepts = json::array();
    std::set<std::string> types;
    for (const auto& a : d.concepts) {
        types.insert(a.concept_type);
        concepts.push_back({{"id", a.concept_id.str()},
                            {"type", a.concept_type},
                            {"start", a.start},
                            {"end", a.end},
                            {"mention", a.mention}});
    }
    return {{"doc_id", d.id},
            {"title", d.title},
            {"abstract", d.abstract},
            {"text", text(d)},
            {"concepts", std::move(concepts)},
            {"colors", colors(types)}};
}

/// Highest-scored core edges whose endpoint types are both enabled (all types when `types` is empty).
[[nodiscard]] inline json document_graph_json(const Engine& engine,
                                              const Document& d,
                                              std::size_t max_statements,
                                              const std::set<std::string>& types)
{
    auto core = engine.core(d);
    std::vector<const ScoredEdge*> edges;
    for (const auto& [_, e] : core.edges()) {
        if (types.empty() || (types.contains(e.subject_type) && types.contains(e.object_type))) {
            edges.push_back(&e);
        }
    }
    std::sort(edges.begin(), edges.end(), [](const ScoredEdge* a, const ScoredEdge* b) {
        if (a->score != b->score) {
            return a->score > b->score;
        }
        return std::tie(a->subject, a->object) < std::tie(b->subject, b->object);
    });
    if (edges.size() > max_statements) {
        edges.resize(max_statements);
    }
    json out = json::array();
    std::set<std::string> seen_types;
    for (const auto* e : edges) {
        seen_types.insert(e->subject_type);
        seen_types.insert(e->object_type);
        out.push_back(to_json(*e));
    }
    return {{"doc_id", d.id}, {"edges", std::move(out)}, {"colors", colors(seen_types)}};
}

inline constexpr const char* about_text =
    "Recommendations are computed in two stages. The first stage retrieves candidate documents that share "
    "annotated concepts (or graph nodes, or concept pairs) with the seed document, weighting each shared "
    "concept by how often it occurs, how rare it is in the collection and how much of the text it spans. "
    "The second stage compares the seed's graph core, its best-scored interaction per concept pair, with the "
    "core of every candidate and sums the scores of the pairs both share. This graph overlap is combined with "
    "a BM25 text similarity over title and abstract, each normalized over the candidate list, using weights "
    "0.6 (graph) and 0.4 (text) by default. The explanation graph of a candidate shows the shared "
    "interactions in colour, and dashed interactions with uncoloured concepts that the candidate adds.";

[[nodiscard]] inline json about_json(const Settings& defaults)
{
    return {{"description", about_text},
            {"defaults",
             {{"strategy", std::string(to_string(defaults.recommendation.first_stage.strategy))},
              {"cutoff", std::string(to_string(defaults.recommendation.first_stage.cutoff))},
              {"k", defaults.recommendation.first_stage.k},
              {"w_graph", defaults.recommendation.w_graph},
              {"w_text", defaults.recommendation.w_text},
              {"top_n", defaults.recommendation.top_n},
              {"l", defaults.l}}}};
}

}  // namespace xgprec::api
