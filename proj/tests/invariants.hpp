#pragma once

// Randomised invariant checks shared by the unit tests and the acceptance
// runner. Each check returns an empty string on success, otherwise a
// description of the first violation.

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <string>

#include "oracle/brute_force.hpp"
#include "support.hpp"
#include "xgprec/engine.hpp"
#include "xgprec/evalkit.hpp"

namespace invariants {

using namespace xgprec;
using Rng = std::mt19937_64;

inline std::size_t uniform(Rng& rng, std::size_t lo, std::size_t hi)
{
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline double unit(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

/// Small random document over a pool of `pool` concepts of three types.
inline Document random_document(Rng& rng, DocId id, std::size_t pool = 8)
{
    static const char* types[] = {"Drug", "Disease", "Gene"};
    static const char* predicates[] = {"treats", "inhibits", "interacts", "associated", "regulates", "frobnicates"};
    const std::size_t length = uniform(rng, 20, 300);
    testing_support::DocBuilder b(id, length);
    std::vector<std::string> annotated;
    const std::size_t n_ann = uniform(rng, 1, 10);
    for (std::size_t i = 0; i < n_ann; ++i) {
        const std::size_t c = uniform(rng, 0, pool - 1);
        const std::string name = "c" + std::to_string(c);
        b.ann(name, types[c % 3], uniform(rng, 0, length - 2));
        annotated.push_back(name);
    }
    std::sort(annotated.begin(), annotated.end());
    annotated.erase(std::unique(annotated.begin(), annotated.end()), annotated.end());
    if (annotated.size() >= 2) {
        const std::size_t n_st = uniform(rng, 0, 8);
        for (std::size_t i = 0; i < n_st; ++i) {
            const auto s = annotated[uniform(rng, 0, annotated.size() - 1)];
            auto o = annotated[uniform(rng, 0, annotated.size() - 1)];
            if (s == o) {
                continue;
            }
            const auto type_of = [](const std::string& n) { return types[std::stoul(n.substr(1)) % 3]; };
            // A coarse grid of confidences makes exact score ties likely.
            const double conf = static_cast<double>(uniform(rng, 0, 4)) / 4.0;
            b.st(s, type_of(s), predicates[uniform(rng, 0, 5)], o, type_of(o), conf);
        }
    }
    return b.build();
}

inline Corpus random_corpus(Rng& rng, std::size_t docs, std::size_t pool = 8)
{
    std::vector<Document> v;
    for (std::size_t i = 0; i < docs; ++i) {
        v.push_back(random_document(rng, 1 + i, pool));
    }
    return Corpus(std::move(v), default_taxonomy());
}

inline std::string tf_sums_to_one(std::uint64_t seed, std::size_t documents)
{
    Rng rng(seed);
    for (std::size_t i = 0; i < documents; ++i) {
        auto d = random_document(rng, i + 1);
        std::set<ConceptId> distinct;
        for (const auto& a : d.concepts) {
            distinct.insert(a.concept_id);
        }
        double sum = 0.0;
        for (const auto& c : distinct) {
            sum += concept_tf(c, d);
        }
        if (std::abs(sum - 1.0) > 1e-12) {
            return "tf sums to " + std::to_string(sum) + " in random document " + std::to_string(i);
        }
    }
    return {};
}

inline std::string scores_in_range(std::uint64_t seed, std::size_t corpora)
{
    Rng rng(seed);
    for (std::size_t i = 0; i < corpora; ++i) {
        auto corpus = random_corpus(rng, 6);
        auto stats = CorpusStats::from_corpus(corpus);
        for (const auto& d : corpus.documents()) {
            DocumentProfile profile(d, stats);
            for (const auto& c : profile.concepts()) {
                const auto& n = profile.node(c);
                if (!std::isfinite(n.score) || n.score < 0 || n.coverage < 0 || n.coverage >= 1) {
                    return "node score or coverage out of range for " + c.str();
                }
            }
            for (const auto& e : score_edges(d, profile, corpus.taxonomy())) {
                if (!std::isfinite(e.score) || e.score < 0 || e.confidence < 0 || e.confidence > 1
                    || e.coverage < 0 || e.coverage >= 1) {
                    return "edge score components out of range";
                }
            }
        }
    }
    return {};
}

/// Core vs. brute force: at most one edge per pair, differing types, no
/// strictly better discarded edge, and the oracle's exact choice.
inline std::string core_uniqueness(std::uint64_t seed, std::size_t graphs)
{
    Rng rng(seed);
    std::size_t checked = 0;
    while (checked < graphs) {
        auto corpus = random_corpus(rng, 5);
        auto stats = CorpusStats::from_corpus(corpus);
        oracle::BruteForce brute(corpus);
        for (const auto& d : corpus.documents()) {
            ++checked;
            auto core = build_graph_core(d, stats, corpus.taxonomy());
            std::set<std::pair<std::string, std::string>> pairs;
            for (const auto& [pair, e] : core.edges()) {
                if (!pairs.emplace(pair.first.str(), pair.second.str()).second) {
                    return "duplicate pair in core";
                }
                if (e.subject_type == e.object_type) {
                    return "same-type edge kept";
                }
                for (const auto& s : d.statements) {
                    if (NodePair(s.subject, s.object) != pair) {
                        continue;
                    }
                    const double other = brute.edge_score(s.subject.str(), s.predicate, s.object.str(), d);
                    if (other > e.score) {
                        return "discarded edge " + s.predicate + " beats kept " + e.predicate;
                    }
                }
            }
            auto expected = brute.core(d);
            if (expected.size() != core.size()) {
                return "core size " + std::to_string(core.size()) + " vs brute force " + std::to_string(expected.size());
            }
            for (const auto& x : expected) {
                const auto* got = core.find({ConceptId(x.s), ConceptId(x.o)});
                if (got == nullptr || got->predicate != x.p || got->subject.str() != x.s
                    || !testing_support::close(got->score, x.score)) {
                    return "core edge for {" + x.s + "," + x.o + "} differs from brute force";
                }
            }
        }
    }
    return {};
}

inline std::string cutoff_bounds(std::uint64_t seed, std::size_t lists)
{
    Rng rng(seed);
    for (std::size_t i = 0; i < lists; ++i) {
        const std::size_t n = uniform(rng, 0, 60);
        const std::size_t k = uniform(rng, 1, 20);
        const std::size_t levels = uniform(rng, 1, 6);
        std::vector<ScoredDoc> v;
        for (std::size_t j = 0; j < n; ++j) {
            v.push_back({uniform(rng, 1, 1'000'000), static_cast<double>(uniform(rng, 0, levels))});
        }
        std::sort(v.begin(), v.end(), [](auto& a, auto& b) { return a.doc_id < b.doc_id; });
        v.erase(std::unique(v.begin(), v.end(), [](auto& a, auto& b) { return a.doc_id == b.doc_id; }), v.end());
        std::shuffle(v.begin(), v.end(), rng);
        const std::size_t m = v.size();

        auto hard = apply_cutoff(v, k, Cutoff::hard);
        auto flex = apply_cutoff(v, k, Cutoff::flexible);
        std::ostringstream where;
        where << "list " << i << " (n=" << m << ", k=" << k << ")";
        if (hard.size() != std::min(k, m)) {
            return "hard size wrong for " + where.str();
        }
        if (flex.size() < std::min(k, m) || flex.size() > std::min(2 * k, m)) {
            return "flexible size out of bounds for " + where.str();
        }
        for (std::size_t j = 0; j < hard.size(); ++j) {
            if (hard[j].doc_id != flex[j].doc_id) {
                return "hard is not a prefix of flexible for " + where.str();
            }
        }
        for (std::size_t j = 1; j < flex.size(); ++j) {
            if (!ranks_before(flex[j - 1], flex[j])) {
                return "flexible result not in rank order for " + where.str();
            }
        }
        for (std::size_t j = k; j < flex.size(); ++j) {
            if (flex[j].score != flex[k - 1].score) {
                return "flexible extension left the plateau for " + where.str();
            }
        }
        if (m > k && flex.size() < std::min(2 * k, m)) {
            // Stopped early: the next entry must score strictly lower.
            std::sort(v.begin(), v.end(), ranks_before);
            if (v[flex.size()].score == flex[k - 1].score) {
                return "flexible stopped inside the plateau for " + where.str();
            }
        }
    }
    return {};
}

inline GraphCore random_core(Rng& rng, std::size_t pool)
{
    static const char* types[] = {"Drug", "Disease", "Gene"};
    GraphCore::Map m;
    const std::size_t n = uniform(rng, 0, 10);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t a = uniform(rng, 0, pool - 1);
        const std::size_t b = uniform(rng, 0, pool - 1);
        if (a % 3 == b % 3) {
            continue;
        }
        ScoredEdge e;
        e.subject = ConceptId("n" + std::to_string(a));
        e.subject_type = types[a % 3];
        e.predicate = "treats";
        e.object = ConceptId("n" + std::to_string(b));
        e.object_type = types[b % 3];
        e.score = static_cast<double>(uniform(rng, 0, 5)) / 5.0;
        m.emplace(e.pair(), e);
    }
    return GraphCore(std::move(m));
}

inline std::string explanation_bounds(std::uint64_t seed, std::size_t pairs)
{
    Rng rng(seed);
    for (std::size_t i = 0; i < pairs; ++i) {
        auto in = random_core(rng, 9);
        auto cand = random_core(rng, 9);
        const std::size_t l = uniform(rng, 1, 6);
        auto x = explain(in, cand, l);
        auto next = explain(in, cand, l + 1);
        const std::string where = " (pair " + std::to_string(i) + ", l=" + std::to_string(l) + ")";
        if (x.shared_count() > l || x.entries.size() > 2 * l) {
            return "explanation exceeds its budget" + where;
        }
        std::set<NodePair> seen;
        for (const auto& e : x.entries) {
            const NodePair p(e.subject, e.object);
            if (!seen.insert(p).second) {
                return "pair listed twice" + where;
            }
            if (cand.find(p) == nullptr) {
                return "entry not in the candidate core" + where;
            }
            const bool in_input = in.find(p) != nullptr;
            const bool s_known = in.has_node(e.subject);
            const bool o_known = in.has_node(e.object);
            switch (e.status) {
            case EdgeStatus::shared:
                if (!in_input) {
                    return "shared entry missing from the input core" + where;
                }
                break;
            case EdgeStatus::subject_not_shared:
                if (in_input || s_known || !o_known) {
                    return "subject_not_shared with wrong endpoint membership" + where;
                }
                break;
            case EdgeStatus::object_not_shared:
                if (in_input || !s_known || o_known) {
                    return "object_not_shared with wrong endpoint membership" + where;
                }
                break;
            case EdgeStatus::edge_only_not_shared:
                if (in_input || !s_known || !o_known) {
                    return "edge_only_not_shared with wrong endpoint membership" + where;
                }
                break;
            }
        }
        // Growing l only extends the shared prefix.
        for (std::size_t j = 0; j < x.shared_count(); ++j) {
            if (next.entries[j].subject != x.entries[j].subject || next.entries[j].object != x.entries[j].object) {
                return "shared prefix changed when l grew" + where;
            }
        }
        if (next.shared_count() < x.shared_count() || next.entries.size() < x.entries.size()) {
            return "explanation shrank when l grew" + where;
        }
    }
    return {};
}

inline std::string node_within_concept(const Corpus& corpus, const IndexSet& idx, std::size_t max_inputs)
{
    const std::size_t step = std::max<std::size_t>(1, corpus.size() / std::max<std::size_t>(1, max_inputs));
    for (std::size_t i = 0; i < corpus.size(); i += step) {
        const auto& d = corpus.by_ordinal(static_cast<std::uint32_t>(i));
        std::set<DocId> by_concept;
        for (const auto& s : fs_concept(d, idx)) {
            by_concept.insert(s.doc_id);
        }
        for (const auto& s : fs_node(d, idx)) {
            if (!by_concept.contains(s.doc_id)) {
                return "FSNode retrieved " + std::to_string(s.doc_id) + " for " + std::to_string(d.id)
                    + " but FSConcept did not";
            }
        }
    }
    return {};
}

inline std::string bpref_unjudged_invariance(std::uint64_t seed, std::size_t runs)
{
    Rng rng(seed);
    for (std::size_t i = 0; i < runs; ++i) {
        Judgments j;
        const std::size_t judged = uniform(rng, 1, 30);
        for (std::size_t d = 1; d <= judged; ++d) {
            j[d] = static_cast<int>(uniform(rng, 0, 2));
        }
        std::vector<DocId> ranking;
        for (std::size_t d = 1; d <= judged; ++d) {
            if (unit(rng) < 0.7) {
                ranking.push_back(d);
            }
        }
        std::shuffle(ranking.begin(), ranking.end(), rng);
        const double base = bpref(ranking, j);

        auto noisy = ranking;
        const std::size_t extra = uniform(rng, 1, 15);
        for (std::size_t e = 0; e < extra; ++e) {
            const auto pos = static_cast<std::ptrdiff_t>(uniform(rng, 0, noisy.size()));
            noisy.insert(noisy.begin() + pos, 1000 + e);
        }
        if (bpref(noisy, j) != base) {
            return "bpref changed after inserting unjudged documents (run " + std::to_string(i) + ")";
        }
        std::vector<DocId> judged_only;
        for (auto d : noisy) {
            if (j.contains(d)) {
                judged_only.push_back(d);
            }
        }
        if (bpref(judged_only, j) != base) {
            return "bpref changed after removing unjudged documents (run " + std::to_string(i) + ")";
        }
    }
    return {};
}

}  // namespace invariants
