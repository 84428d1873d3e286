#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "corpus.hpp"
#include "error.hpp"
#include "index.hpp"
#include "scoring.hpp"

namespace xgprec {

enum class Strategy { fs_core, fs_node, fs_concept };
enum class Cutoff { hard, flexible };

[[nodiscard]] inline std::string_view to_string(Strategy s)
{
    switch (s) {
    case Strategy::fs_core:
        return "core";
    case Strategy::fs_node:
        return "node";
    case Strategy::fs_concept:
        return "concept";
    }
    return "concept";
}

[[nodiscard]] inline std::string_view to_string(Cutoff c) { return c == Cutoff::hard ? "hard" : "flexible"; }

[[nodiscard]] inline Strategy parse_strategy(std::string_view s)
{
    if (s == "core") {
        return Strategy::fs_core;
    }
    if (s == "node") {
        return Strategy::fs_node;
    }
    if (s == "concept") {
        return Strategy::fs_concept;
    }
    throw InvalidArgument("unknown first stage '" + std::string(s) + "' (expected concept, node or core)");
}

[[nodiscard]] inline Cutoff parse_cutoff(std::string_view s)
{
    if (s == "hard") {
        return Cutoff::hard;
    }
    if (s == "flexible") {
        return Cutoff::flexible;
    }
    throw InvalidArgument("unknown cutoff '" + std::string(s) + "' (expected hard or flexible)");
}

struct ScoredDoc {
    DocId doc_id = 0;
    double score = 0.0;

    friend bool operator==(const ScoredDoc&, const ScoredDoc&) = default;
};

/// Ranking order of the first stage: score descending, then newer (larger) ids first.
[[nodiscard]] inline bool ranks_before(const ScoredDoc& a, const ScoredDoc& b)
{
    if (a.score != b.score) {
        return a.score > b.score;
    }
    return a.doc_id > b.doc_id;
}

/// Restricts retrieval to a document universe, e.g. a benchmark's judged collection.
class DocumentFilter {
  public:
    DocumentFilter(const IndexSet& idx, const std::unordered_set<DocId>& allowed) : allowed_(idx.doc_ids.size(), false)
    {
        for (auto id : allowed) {
            if (auto o = idx.ordinal(id)) {
                allowed_[*o] = true;
            }
        }
    }

    [[nodiscard]] bool allows(std::uint32_t ordinal) const { return ordinal < allowed_.size() && allowed_[ordinal]; }

  private:
    std::vector<bool> allowed_;
};

struct FirstStageConfig {
    Strategy strategy = Strategy::fs_concept;
    Cutoff cutoff = Cutoff::flexible;
    std::size_t k = 1000;
};

struct FirstStageResult {
    std::vector<ScoredDoc> entries;
    Strategy strategy = Strategy::fs_concept;
    Cutoff cutoff = Cutoff::flexible;
};

namespace detail {

class Accumulator {
  public:
    explicit Accumulator(std::size_t n) : scores_(n, 0.0), seen_(n, 0) {}

    void add(const PostingList& list, double score, const DocumentFilter* filter)
    {
        for (auto o : list) {
            if (filter != nullptr && !filter->allows(o)) {
                continue;
            }
            if (seen_[o] == 0) {
                seen_[o] = 1;
                touched_.push_back(o);
            }
            scores_[o] += score;
        }
    }

    [[nodiscard]] std::vector<ScoredDoc> collect(const IndexSet& idx, std::optional<std::uint32_t> exclude)
    {
        std::sort(touched_.begin(), touched_.end());
        std::vector<ScoredDoc> out;
        out.reserve(touched_.size());
        for (auto o : touched_) {
            if (exclude && *exclude == o) {
                continue;
            }
            out.push_back({idx.doc_ids[o], scores_[o]});
        }
        return out;
    }

  private:
    std::vector<double> scores_;
    std::vector<char> seen_;
    std::vector<std::uint32_t> touched_;
};

inline bool is_blocked(const IndexSet& idx, const ConceptId& c)
{
    auto k = idx.stats.key(c);
    return k && idx.generic_filter.blocked(*k);
}

template <typename ListFor>
std::vector<ScoredDoc> concept_driven(const Document& d,
                                      const IndexSet& idx,
                                      const DocumentFilter* filter,
                                      ListFor&& list_for)
{
    Accumulator acc(idx.doc_ids.size());
    DocumentProfile profile(d, idx.stats);
    for (const auto& c : profile.concepts()) {
        if (is_blocked(idx, c)) {
            continue;
        }
        if (const PostingList* list = list_for(c)) {
            acc.add(*list, profile.node(c).score, filter);
        }
    }
    return acc.collect(idx, idx.ordinal(d.id));
}

}  // namespace detail

/// Documents sharing a concept pair with a core edge of `d`, each credited with that edge's score.
/// Edges touching a generic concept are skipped. Result is in ascending id order.
[[nodiscard]] inline std::vector<ScoredDoc> fs_core(const Document& d,
                                                    const IndexSet& idx,
                                                    const PredicateTaxonomy& taxonomy,
                                                    const DocumentFilter* filter = nullptr)
{
    detail::Accumulator acc(idx.doc_ids.size());
    auto core = build_graph_core(d, idx.stats, taxonomy);
    for (const auto& [pair, edge] : core.edges()) {
        if (detail::is_blocked(idx, pair.first) || detail::is_blocked(idx, pair.second)) {
            continue;
        }
        if (const PostingList* list = idx.edge_list(pair.first, pair.second)) {
            acc.add(*list, edge.score, filter);
        }
    }
    return acc.collect(idx, idx.ordinal(d.id));
}

/// Documents holding an annotated concept of `d` as a graph node, credited with the concept's node score.
[[nodiscard]] inline std::vector<ScoredDoc> fs_node(const Document& d,
                                                    const IndexSet& idx,
                                                    const DocumentFilter* filter = nullptr)
{
    return detail::concept_driven(d, idx, filter, [&](const ConceptId& c) { return idx.node_list(c); });
}

/// Like fs_node, but any annotation of the concept suffices.
[[nodiscard]] inline std::vector<ScoredDoc> fs_concept(const Document& d,
                                                       const IndexSet& idx,
                                                       const DocumentFilter* filter = nullptr)
{
    return detail::concept_driven(d, idx, filter, [&](const ConceptId& c) { return idx.concept_list(c); });
}

/// Sorts by rank order and truncates. The flexible cutoff continues past rank k
/// while the score equals the score at rank k, never beyond 2k entries.
[[nodiscard]] inline std::vector<ScoredDoc> apply_cutoff(std::vector<ScoredDoc> entries, std::size_t k, Cutoff mode)
{
    if (k < 1) {
        throw InvalidK("cutoff k must be at least 1");
    }
    const std::size_t cap = mode == Cutoff::hard ? k : 2 * k;
    const std::size_t sorted = std::min(cap, entries.size());
    std::partial_sort(entries.begin(), entries.begin() + static_cast<std::ptrdiff_t>(sorted), entries.end(),
                      ranks_before);
    if (entries.size() <= k) {
        return entries;
    }
    std::size_t keep = k;
    if (mode == Cutoff::flexible) {
        const double plateau = entries[k - 1].score;
        while (keep < sorted && entries[keep].score == plateau) {
            ++keep;
        }
    }
    entries.resize(keep);
    return entries;
}

[[nodiscard]] inline FirstStageResult run_first_stage(const Document& d,
                                                      const IndexSet& idx,
                                                      const PredicateTaxonomy& taxonomy,
                                                      const FirstStageConfig& config,
                                                      const DocumentFilter* filter = nullptr)
{
    std::vector<ScoredDoc> scored;
    switch (config.strategy) {
    case Strategy::fs_core:
        scored = fs_core(d, idx, taxonomy, filter);
        break;
    case Strategy::fs_node:
        scored = fs_node(d, idx, filter);
        break;
    case Strategy::fs_concept:
        scored = fs_concept(d, idx, filter);
        break;
    }
    return {apply_cutoff(std::move(scored), config.k, config.cutoff), config.strategy, config.cutoff};
}

}  // namespace xgprec
