#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "corpus.hpp"
#include "error.hpp"
#include "first_stage.hpp"
#include "index.hpp"
#include "scoring.hpp"

namespace xgprec {

struct RecommendationConfig {
    double w_graph = 0.6;
    double w_text = 0.4;
    FirstStageConfig first_stage;
    /// 0 keeps every candidate.
    std::size_t top_n = 100;

    void validate() const
    {
        if (!(w_graph >= 0.0) || !(w_text >= 0.0) || !(w_graph + w_text > 0.0)) {
            throw InvalidArgument("weights must be non-negative with a positive sum");
        }
        if (first_stage.k < 1) {
            throw InvalidK("cutoff k must be at least 1");
        }
    }
};

struct ScoredCandidate {
    DocId doc_id = 0;
    double first_stage_score = 0.0;
    double core_overlap_raw = 0.0;
    double bm25_raw = 0.0;
    double core_overlap_norm = 0.0;
    double bm25_norm = 0.0;
    double fused = 0.0;
};

struct Recommendation {
    DocId input = 0;
    std::vector<ScoredCandidate> candidates;
    std::size_t first_stage_count = 0;
    bool input_core_empty = false;
};

/// Sum of the input core's edge scores over node pairs present in both cores.
[[nodiscard]] inline double core_overlap(const GraphCore& input, const GraphCore& candidate)
{
    double total = 0.0;
    const auto& small = input.size() <= candidate.size() ? input : candidate;
    const auto& large = input.size() <= candidate.size() ? candidate : input;
    for (const auto& [pair, _] : small.edges()) {
        if (large.find(pair) != nullptr) {
            total += input.find(pair)->score;
        }
    }
    return total;
}

[[nodiscard]] inline double core_overlap(const Document& input,
                                         const Document& candidate,
                                         const CorpusStats& stats,
                                         const PredicateTaxonomy& taxonomy)
{
    return core_overlap(build_graph_core(input, stats, taxonomy), build_graph_core(candidate, stats, taxonomy));
}

namespace detail {

/// Divides by the list maximum; an all-zero column stays zero.
inline void max_normalize(std::vector<ScoredCandidate>& list,
                          double ScoredCandidate::*raw,
                          double ScoredCandidate::*norm)
{
    double max = 0.0;
    for (const auto& c : list) {
        max = std::max(max, c.*raw);
    }
    for (auto& c : list) {
        c.*norm = max > 0.0 ? c.*raw / max : 0.0;
    }
}

}  // namespace detail

/// Second stage over an existing candidate list (first-stage order).
[[nodiscard]] inline Recommendation rerank(const Document& input,
                                           const std::vector<ScoredDoc>& first_stage,
                                           const Corpus& corpus,
                                           const IndexSet& idx,
                                           const RecommendationConfig& config)
{
    config.validate();
    Recommendation out;
    out.input = input.id;
    out.first_stage_count = first_stage.size();

    const auto input_core = build_graph_core(input, idx.stats, corpus.taxonomy());
    out.input_core_empty = input_core.empty();
    const auto query = idx.bm25.prepare(idx.bm25.tokens(text(input)));

    out.candidates.reserve(first_stage.size());
    for (const auto& fs : first_stage) {
        ScoredCandidate c;
        c.doc_id = fs.doc_id;
        c.first_stage_score = fs.score;
        auto ordinal = idx.ordinal(fs.doc_id);
        if (!ordinal) {
            throw UnknownDocument("candidate " + std::to_string(fs.doc_id) + " is not indexed");
        }
        c.bm25_raw = idx.bm25.score(query, *ordinal);
        if (!input_core.empty()) {
            const auto& doc = corpus.at(fs.doc_id);
            c.core_overlap_raw = core_overlap(input_core, build_graph_core(doc, idx.stats, corpus.taxonomy()));
        }
        out.candidates.push_back(c);
    }

    detail::max_normalize(out.candidates, &ScoredCandidate::core_overlap_raw, &ScoredCandidate::core_overlap_norm);
    detail::max_normalize(out.candidates, &ScoredCandidate::bm25_raw, &ScoredCandidate::bm25_norm);
    for (auto& c : out.candidates) {
        c.fused = config.w_graph * c.core_overlap_norm + config.w_text * c.bm25_norm;
    }

    // Without an input core the first-stage order is kept.
    if (!input_core.empty()) {
        std::stable_sort(out.candidates.begin(), out.candidates.end(), [](const auto& a, const auto& b) {
            if (a.fused != b.fused) {
                return a.fused > b.fused;
            }
            return a.doc_id > b.doc_id;
        });
    }
    if (config.top_n > 0 && out.candidates.size() > config.top_n) {
        out.candidates.resize(config.top_n);
    }
    return out;
}

[[nodiscard]] inline Recommendation recommend(DocId doc_id,
                                              const Corpus& corpus,
                                              const IndexSet& idx,
                                              const RecommendationConfig& config = {},
                                              const DocumentFilter* filter = nullptr)
{
    config.validate();
    const auto& input = corpus.at(doc_id);
    auto fs = run_first_stage(input, idx, corpus.taxonomy(), config.first_stage, filter);
    return rerank(input, fs.entries, corpus, idx, config);
}

}  // namespace xgprec
