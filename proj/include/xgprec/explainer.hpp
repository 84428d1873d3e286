#pragma once

#include <algorithm>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "corpus.hpp"
#include "error.hpp"
#include "scoring.hpp"

namespace xgprec {

/// `SubjectNotShared` / `ObjectNotShared` name the endpoint that is new to the input core.
/// `EdgeOnlyNotShared` marks a candidate edge whose endpoints are both input-core nodes
/// while the pair itself is not shared; it is emitted once.
enum class EdgeStatus { shared, subject_not_shared, object_not_shared, edge_only_not_shared };

[[nodiscard]] inline std::string_view to_string(EdgeStatus s)
{
    switch (s) {
    case EdgeStatus::shared:
        return "shared";
    case EdgeStatus::subject_not_shared:
        return "subject_not_shared";
    case EdgeStatus::object_not_shared:
        return "object_not_shared";
    case EdgeStatus::edge_only_not_shared:
        return "edge_only_not_shared";
    }
    return "shared";
}

struct ExplanationEdge {
    ConceptId subject;
    std::string subject_type;
    std::string predicate;
    ConceptId object;
    std::string object_type;
    EdgeStatus status = EdgeStatus::shared;
    double score = 0.0;
};

struct Explanation {
    std::vector<ExplanationEdge> entries;
    std::size_t l = 6;

    [[nodiscard]] std::size_t shared_count() const
    {
        return static_cast<std::size_t>(std::count_if(
            entries.begin(), entries.end(), [](const auto& e) { return e.status == EdgeStatus::shared; }));
    }
};

namespace detail {

inline std::vector<const ScoredEdge*> by_score(std::vector<const ScoredEdge*> edges)
{
    std::sort(edges.begin(), edges.end(), [](const ScoredEdge* a, const ScoredEdge* b) {
        if (a->score != b->score) {
            return a->score > b->score;
        }
        return std::tie(a->subject, a->object) < std::tie(b->subject, b->object);
    });
    return edges;
}

inline ExplanationEdge entry(const ScoredEdge& e, EdgeStatus status)
{
    return {e.subject, e.subject_type, e.predicate, e.object, e.object_type, status, e.score};
}

}  // namespace detail

/// Up to `l` shared edges (scored in the input document), then candidate-only edges
/// touching an input-core node (scored in the candidate) until 2l entries.
[[nodiscard]] inline Explanation explain(const GraphCore& input_core, const GraphCore& candidate_core, std::size_t l)
{
    if (l < 1) {
        throw InvalidL("explanation length l must be at least 1");
    }
    Explanation out;
    out.l = l;

    std::vector<const ScoredEdge*> shared;
    std::vector<const ScoredEdge*> novel;
    for (const auto& [pair, edge] : candidate_core.edges()) {
        if (const ScoredEdge* mine = input_core.find(pair)) {
            shared.push_back(mine);
        } else {
            novel.push_back(&edge);
        }
    }

    for (const ScoredEdge* e : detail::by_score(std::move(shared))) {
        out.entries.push_back(detail::entry(*e, EdgeStatus::shared));
        if (out.entries.size() >= l) {
            break;
        }
    }

    for (const ScoredEdge* e : detail::by_score(std::move(novel))) {
        if (out.entries.size() >= 2 * l) {
            break;
        }
        const bool subject_known = input_core.has_node(e->subject);
        const bool object_known = input_core.has_node(e->object);
        if (subject_known && object_known) {
            out.entries.push_back(detail::entry(*e, EdgeStatus::edge_only_not_shared));
        } else if (subject_known) {
            out.entries.push_back(detail::entry(*e, EdgeStatus::object_not_shared));
        } else if (object_known) {
            out.entries.push_back(detail::entry(*e, EdgeStatus::subject_not_shared));
        }
    }
    return out;
}

[[nodiscard]] inline Explanation explain(const Document& input,
                                         const Document& candidate,
                                         std::size_t l,
                                         const CorpusStats& stats,
                                         const PredicateTaxonomy& taxonomy)
{
    if (l < 1) {
        throw InvalidL("explanation length l must be at least 1");
    }
    return explain(build_graph_core(input, stats, taxonomy), build_graph_core(candidate, stats, taxonomy), l);
}

/// Display colour of a concept type; unknown types fall back to grey.
[[nodiscard]] inline std::string_view concept_color(std::string_view type)
{
    static constexpr std::pair<std::string_view, std::string_view> palette[] = {
        {"Drug", "#e41a1c"},          {"Disease", "#4daf4a"},   {"Gene", "#377eb8"},
        {"Chemical", "#ff7f00"},      {"Species", "#984ea3"},   {"Target", "#a65628"},
        {"Excipient", "#f781bf"},     {"DosageForm", "#ffff33"}, {"Method", "#66c2a5"},
        {"LabMethod", "#8da0cb"},     {"Tissue", "#e78ac3"},    {"CellLine", "#a6d854"},
        {"PlantFamily", "#b3b3b3"},   {"Organism", "#fc8d62"},  {"Mutation", "#1b9e77"},
    };
    for (const auto& [t, c] : palette) {
        if (t == type) {
            return c;
        }
    }
    return "#9e9e9e";
}

}  // namespace xgprec
