#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "corpus.hpp"
#include "error.hpp"
#include "stats.hpp"

namespace xgprec {

/// A directed (subject, predicate, object) edge of a document graph.
struct Edge {
    ConceptId subject;
    std::string predicate;
    ConceptId object;

    friend bool operator==(const Edge&, const Edge&) = default;
    friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Unordered concept pair; `first <= second` always holds.
struct NodePair {
    ConceptId first;
    ConceptId second;

    NodePair(ConceptId a, ConceptId b)
    {
        if (b < a) {
            std::swap(a, b);
        }
        first = std::move(a);
        second = std::move(b);
    }

    [[nodiscard]] bool contains(const ConceptId& c) const { return first == c || second == c; }

    friend bool operator==(const NodePair&, const NodePair&) = default;
    friend auto operator<=>(const NodePair&, const NodePair&) = default;
};

struct DocumentGraph {
    /// concept -> concept type
    std::map<ConceptId, std::string> nodes;
    std::vector<Edge> edges;
    /// statement indices backing each edge, parallel to `edges`
    std::vector<std::vector<std::size_t>> support;
};

/// Distinct statement triples of `d`, in first-occurrence order.
[[nodiscard]] inline DocumentGraph document_graph(const Document& d)
{
    DocumentGraph g;
    std::map<Edge, std::size_t> index;
    for (std::size_t i = 0; i < d.statements.size(); ++i) {
        const auto& s = d.statements[i];
        g.nodes.emplace(s.subject, s.subject_type);
        g.nodes.emplace(s.object, s.object_type);
        Edge e{s.subject, s.predicate, s.object};
        auto [it, inserted] = index.emplace(e, g.edges.size());
        if (inserted) {
            g.edges.push_back(std::move(e));
            g.support.emplace_back();
        }
        g.support[it->second].push_back(i);
    }
    return g;
}

/// #(c, d) / #annotations(d); 0 when `d` has no annotations.
[[nodiscard]] inline double concept_tf(const ConceptId& c, const Document& d)
{
    if (d.concepts.empty()) {
        return 0.0;
    }
    auto n = std::count_if(d.concepts.begin(), d.concepts.end(), [&](const auto& a) { return a.concept_id == c; });
    return static_cast<double>(n) / static_cast<double>(d.concepts.size());
}

/// Natural-log idf; unseen concepts use document frequency 1.
[[nodiscard]] inline double concept_idf(std::uint32_t df, std::size_t corpus_size)
{
    const double n = static_cast<double>(std::max<std::size_t>(corpus_size, 1));
    const double f = static_cast<double>(std::max<std::uint32_t>(df, 1));
    return std::log(n / f);
}

[[nodiscard]] inline double concept_idf(const ConceptId& c, const CorpusStats& stats)
{
    return concept_idf(stats.df(c), stats.corpus_size());
}

[[nodiscard]] inline double coverage_ratio(std::size_t first, std::size_t last, std::size_t length)
{
    if (length == 0) {
        return 0.0;
    }
    return static_cast<double>(last - first) / static_cast<double>(length);
}

/// Span between the first and last annotation start of `c`, relative to the text length.
[[nodiscard]] inline double node_coverage(const ConceptId& c, const Document& d)
{
    bool found = false;
    std::size_t first = 0;
    std::size_t last = 0;
    for (const auto& a : d.concepts) {
        if (a.concept_id != c) {
            continue;
        }
        first = found ? std::min(first, a.start) : a.start;
        last = found ? std::max(last, a.start) : a.start;
        found = true;
    }
    if (!found) {
        throw ConceptAbsent("concept " + c.str() + " is not annotated in document " + std::to_string(d.id));
    }
    return coverage_ratio(first, last, text_length(d));
}

[[nodiscard]] inline double edge_coverage(const Edge& e, const Document& d)
{
    return std::min(node_coverage(e.subject, d), node_coverage(e.object, d));
}

/// Highest confidence among the statements of `d` that support `e`.
[[nodiscard]] inline double edge_confidence(const Edge& e, const Document& d)
{
    bool found = false;
    double best = 0.0;
    for (const auto& s : d.statements) {
        if (s.subject == e.subject && s.predicate == e.predicate && s.object == e.object) {
            best = found ? std::max(best, s.confidence) : s.confidence;
            found = true;
        }
    }
    if (!found) {
        throw NoSupport("no statement of document " + std::to_string(d.id) + " supports (" + e.subject.str() + ", "
                        + e.predicate + ", " + e.object.str() + ")");
    }
    return best;
}

/// 1.0, 0.5, 0.25 for taxonomy levels 1, 2, 3.
[[nodiscard]] inline double specificity_of_level(int level)
{
    switch (level) {
    case 1:
        return 1.0;
    case 2:
        return 0.5;
    default:
        return 0.25;
    }
}

[[nodiscard]] inline double predicate_specificity(std::string_view predicate, const PredicateTaxonomy& taxonomy)
{
    return specificity_of_level(taxonomy.level(predicate));
}

[[nodiscard]] inline double node_tfidf(const ConceptId& c, const Document& d, const CorpusStats& stats)
{
    return concept_tf(c, d) * concept_idf(c, stats);
}

[[nodiscard]] inline double node_score(const ConceptId& c, const Document& d, const CorpusStats& stats)
{
    return node_coverage(c, d) * node_tfidf(c, d, stats);
}

[[nodiscard]] inline double edge_tfidf(const Edge& e,
                                       const Document& d,
                                       const CorpusStats& stats,
                                       const PredicateTaxonomy& taxonomy)
{
    return (node_tfidf(e.subject, d, stats) + node_tfidf(e.object, d, stats))
        * predicate_specificity(e.predicate, taxonomy);
}

[[nodiscard]] inline double edge_score(const Edge& e,
                                       const Document& d,
                                       const CorpusStats& stats,
                                       const PredicateTaxonomy& taxonomy)
{
    return edge_confidence(e, d) * edge_coverage(e, d) * edge_tfidf(e, d, stats, taxonomy);
}

struct ScoredNode {
    ConceptId concept_id;
    std::string concept_type;
    double tf = 0.0;
    double idf = 0.0;
    double coverage = 0.0;
    double score = 0.0;
};

struct ScoredEdge {
    ConceptId subject;
    std::string subject_type;
    std::string predicate;
    ConceptId object;
    std::string object_type;
    double tfidf = 0.0;
    double coverage = 0.0;
    double confidence = 0.0;
    double score = 0.0;

    [[nodiscard]] Edge edge() const { return {subject, predicate, object}; }
    [[nodiscard]] NodePair pair() const { return {subject, object}; }
};

/// Single pass over a document's annotations; backs all batch scoring.
class DocumentProfile {
  public:
    DocumentProfile(const Document& d, const CorpusStats& stats) : length_(text_length(d)), total_(d.concepts.size())
    {
        for (const auto& a : d.concepts) {
            auto [it, inserted] = nodes_.try_emplace(a.concept_id);
            auto& n = it->second;
            if (inserted) {
                n.type = a.concept_type;
                n.first = n.last = a.start;
                order_.push_back(a.concept_id);
            }
            ++n.count;
            n.first = std::min(n.first, a.start);
            n.last = std::max(n.last, a.start);
        }
        for (auto& [c, n] : nodes_) {
            const double tf = static_cast<double>(n.count) / static_cast<double>(total_);
            n.scored = ScoredNode{c, n.type, tf, concept_idf(c, stats), coverage_ratio(n.first, n.last, length_), 0.0};
            n.scored.score = n.scored.coverage * n.scored.tf * n.scored.idf;
        }
    }

    /// Distinct annotated concepts in order of first annotation.
    [[nodiscard]] const std::vector<ConceptId>& concepts() const noexcept { return order_; }

    [[nodiscard]] const ScoredNode& node(const ConceptId& c) const
    {
        auto it = nodes_.find(c);
        if (it == nodes_.end()) {
            throw ConceptAbsent("concept " + c.str() + " is not annotated");
        }
        return it->second.scored;
    }

    [[nodiscard]] bool contains(const ConceptId& c) const { return nodes_.contains(c); }

  private:
    struct NodeData {
        std::string type;
        std::size_t count = 0;
        std::size_t first = 0;
        std::size_t last = 0;
        ScoredNode scored;
    };

    std::size_t length_;
    std::size_t total_;
    std::unordered_map<ConceptId, NodeData> nodes_;
    std::vector<ConceptId> order_;
};

/// Best-scored edge per unordered concept pair, restricted to pairs of differing concept types.
class GraphCore {
  public:
    using Map = std::map<NodePair, ScoredEdge>;

    GraphCore() = default;
    explicit GraphCore(Map edges) : edges_(std::move(edges))
    {
        for (const auto& [pair, _] : edges_) {
            nodes_.insert(pair.first);
            nodes_.insert(pair.second);
        }
    }

    [[nodiscard]] bool empty() const noexcept { return edges_.empty(); }
    [[nodiscard]] std::size_t size() const noexcept { return edges_.size(); }
    [[nodiscard]] const Map& edges() const noexcept { return edges_; }
    [[nodiscard]] const std::set<ConceptId>& nodes() const noexcept { return nodes_; }

    [[nodiscard]] const ScoredEdge* find(const NodePair& p) const
    {
        auto it = edges_.find(p);
        return it == edges_.end() ? nullptr : &it->second;
    }

    [[nodiscard]] bool has_node(const ConceptId& c) const { return nodes_.contains(c); }

  private:
    Map edges_;
    std::set<ConceptId> nodes_;
};

/// True when `a` should replace `b` as the core edge of their pair.
[[nodiscard]] inline bool better_core_edge(const ScoredEdge& a, const ScoredEdge& b)
{
    if (a.score != b.score) {
        return a.score > b.score;
    }
    return std::tie(a.predicate, a.subject, a.object) < std::tie(b.predicate, b.subject, b.object);
}

/// Every edge of graph(d) with its score components, in first-occurrence order.
[[nodiscard]] inline std::vector<ScoredEdge> score_edges(const Document& d,
                                                         const DocumentProfile& profile,
                                                         const PredicateTaxonomy& taxonomy)
{
    std::vector<ScoredEdge> out;
    std::map<Edge, std::size_t> index;
    for (const auto& s : d.statements) {
        Edge e{s.subject, s.predicate, s.object};
        auto [it, inserted] = index.emplace(e, out.size());
        if (!inserted) {
            auto& se = out[it->second];
            se.confidence = std::max(se.confidence, s.confidence);
            continue;
        }
        const auto& sn = profile.node(s.subject);
        const auto& on = profile.node(s.object);
        ScoredEdge se;
        se.subject = s.subject;
        se.subject_type = s.subject_type;
        se.predicate = s.predicate;
        se.object = s.object;
        se.object_type = s.object_type;
        se.tfidf = (sn.tf * sn.idf + on.tf * on.idf) * predicate_specificity(s.predicate, taxonomy);
        se.coverage = std::min(sn.coverage, on.coverage);
        se.confidence = s.confidence;
        out.push_back(std::move(se));
    }
    for (auto& se : out) {
        se.score = se.confidence * se.coverage * se.tfidf;
    }
    return out;
}

[[nodiscard]] inline GraphCore build_graph_core(const Document& d,
                                                const DocumentProfile& profile,
                                                const PredicateTaxonomy& taxonomy)
{
    GraphCore::Map best;
    for (auto& se : score_edges(d, profile, taxonomy)) {
        if (se.subject_type == se.object_type) {
            continue;
        }
        auto pair = se.pair();
        auto it = best.find(pair);
        if (it == best.end()) {
            best.emplace(std::move(pair), std::move(se));
        } else if (better_core_edge(se, it->second)) {
            it->second = std::move(se);
        }
    }
    return GraphCore(std::move(best));
}

[[nodiscard]] inline GraphCore build_graph_core(const Document& d,
                                                const CorpusStats& stats,
                                                const PredicateTaxonomy& taxonomy)
{
    return build_graph_core(d, DocumentProfile(d, stats), taxonomy);
}

}  // namespace xgprec
