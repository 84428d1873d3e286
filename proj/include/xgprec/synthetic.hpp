#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "corpus.hpp"
#include "evalkit.hpp"

namespace xgprec::synthetic {

/// Generated corpus with planted topic clusters.
///
/// Members of a topic cluster share a handful of topic concepts and a topic
/// vocabulary; background documents draw concepts and words from Zipf-like pools.
struct Config {
    std::size_t documents = 2000;
    std::size_t topics = 10;
    std::size_t members_per_topic = 40;
    std::size_t concepts_per_topic = 6;
    std::size_t background_concepts = 0;  // 0 picks max(200, documents / 5)
    std::size_t background_words = 3000;
    std::size_t words_per_topic = 40;
    /// Judgments per topic: grade-2 and grade-1 members, grade-0 outsiders. Other members stay unjudged.
    std::size_t relevant_per_topic = 6;
    std::size_t partial_per_topic = 14;
    std::size_t nonrelevant_per_topic = 30;
    std::uint64_t seed = 42;
    DocId first_id = 1000;
};

struct Benchmark {
    Corpus corpus;
    Qrels qrels;
};

namespace detail {

inline const std::vector<std::string>& concept_types()
{
    static const std::vector<std::string> types{"Drug", "Disease", "Gene", "Chemical", "Species"};
    return types;
}

inline const std::vector<std::string>& predicates()
{
    static const std::vector<std::string> preds{"treats",    "inhibits", "induces", "causes",     "associated",
                                                "interacts", "regulates", "associated", "upregulates", "administered"};
    return preds;
}

/// Pronounceable, stopword-free pseudo word for index `i`.
inline std::string pseudo_word(std::size_t i, std::string_view tail)
{
    static constexpr std::string_view onsets[] = {"b", "c", "d", "f", "g", "k", "l", "m", "n", "p",
                                                  "r", "s", "t", "v", "z", "br", "tr", "pl", "st", "gr"};
    static constexpr std::string_view vowels[] = {"a", "e", "i", "o", "u", "ai", "eo", "ia"};
    std::string w;
    std::size_t x = i;
    do {
        w += onsets[x % 20];
        x /= 20;
        w += vowels[x % 8];
        x /= 8;
    } while (x > 0);
    w += tail;
    return w;
}

class Zipf {
  public:
    Zipf(std::size_t n, double s)
    {
        cumulative_.reserve(n);
        double total = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            total += 1.0 / std::pow(static_cast<double>(r + 1), s);
            cumulative_.push_back(total);
        }
    }

    template <typename Rng>
    std::size_t operator()(Rng& rng) const
    {
        std::uniform_real_distribution<double> u(0.0, cumulative_.back());
        auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u(rng));
        return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()), cumulative_.size() - 1);
    }

  private:
    std::vector<double> cumulative_;
};

struct ConceptInfo {
    std::string id;
    std::string type;
    std::string name;
};

class DocumentWriter {
  public:
    explicit DocumentWriter(DocId id) { doc_.id = id; }

    void word(const std::string& w) { append(w); }

    void mention(const ConceptInfo& c)
    {
        const std::size_t start = offset();
        append(c.name);
        doc_.concepts.push_back({ConceptId(c.id), c.type, start, start + c.name.size(), c.name});
    }

    void end_title() { in_title_ = false; }

    void end_sentence() { target() += '.'; }

    void statement(const ConceptInfo& s, const std::string& predicate, const ConceptInfo& o, double confidence)
    {
        doc_.statements.push_back({ConceptId(s.id), s.type, predicate, ConceptId(o.id), o.type, "", confidence});
    }

    Document finish() { return std::move(doc_); }

  private:
    std::string& target() { return in_title_ ? doc_.title : doc_.abstract; }

    std::size_t offset() const
    {
        const auto& t = in_title_ ? doc_.title : doc_.abstract;
        const std::size_t sep = t.empty() ? 0 : 1;
        return (in_title_ ? 0 : doc_.title.size() + 1) + t.size() + sep;
    }

    void append(const std::string& w)
    {
        auto& t = target();
        if (!t.empty()) {
            t += ' ';
        }
        t += w;
    }

    Document doc_;
    bool in_title_ = true;
};

}  // namespace detail

[[nodiscard]] inline Benchmark generate(const Config& config)
{
    using detail::ConceptInfo;
    std::mt19937_64 rng(config.seed);
    const auto& types = detail::concept_types();
    const auto& preds = detail::predicates();

    const std::size_t n_background = config.background_concepts > 0 ? config.background_concepts
                                                                      : std::max<std::size_t>(200, config.documents / 5);
    std::vector<ConceptInfo> background;
    for (std::size_t i = 0; i < n_background; ++i) {
        const auto& type = types[i % types.size()];
        background.push_back({"B" + std::to_string(i), type, detail::pseudo_word(i + 7, "ine")});
    }
    std::vector<std::vector<ConceptInfo>> topic_concepts(config.topics);
    std::vector<std::vector<std::string>> topic_words(config.topics);
    for (std::size_t t = 0; t < config.topics; ++t) {
        for (std::size_t i = 0; i < config.concepts_per_topic; ++i) {
            const auto& type = types[i % 3];
            topic_concepts[t].push_back({"T" + std::to_string(t) + "_" + std::to_string(i), type,
                                         detail::pseudo_word(t * 97 + i + 11, "ase")});
        }
        for (std::size_t i = 0; i < config.words_per_topic; ++i) {
            topic_words[t].push_back(detail::pseudo_word(t * 1009 + i + 3, "ic"));
        }
    }
    std::vector<std::string> words;
    for (std::size_t i = 0; i < config.background_words; ++i) {
        words.push_back(detail::pseudo_word(i + 5, "al"));
    }

    const detail::Zipf concept_zipf(background.size(), 0.9);
    const detail::Zipf word_zipf(words.size(), 1.0);

    // Cluster membership: the first topics * members_per_topic ordinals, shuffled.
    std::vector<std::size_t> slots(config.documents);
    for (std::size_t i = 0; i < slots.size(); ++i) {
        slots[i] = i;
    }
    std::shuffle(slots.begin(), slots.end(), rng);
    std::vector<int> topic_of(config.documents, -1);
    std::vector<std::vector<std::size_t>> members(config.topics);
    for (std::size_t t = 0; t < config.topics; ++t) {
        for (std::size_t m = 0; m < config.members_per_topic; ++m) {
            const std::size_t pos = t * config.members_per_topic + m;
            if (pos < slots.size()) {
                topic_of[slots[pos]] = static_cast<int>(t);
                members[t].push_back(slots[pos]);
            }
        }
    }

    auto uniform = [&](std::size_t lo, std::size_t hi) {
        return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
    };
    auto chance = [&](double p) { return std::bernoulli_distribution(p)(rng); };

    std::vector<Document> docs;
    docs.reserve(config.documents);
    for (std::size_t i = 0; i < config.documents; ++i) {
        const int topic = topic_of[i];
        std::vector<ConceptInfo> chosen;
        std::set<std::string> ids;
        auto pick = [&](const ConceptInfo& c) {
            if (ids.insert(c.id).second) {
                chosen.push_back(c);
            }
        };
        if (topic >= 0) {
            auto pool = topic_concepts[static_cast<std::size_t>(topic)];
            std::shuffle(pool.begin(), pool.end(), rng);
            const std::size_t n = uniform(3, std::min<std::size_t>(5, pool.size()));
            for (std::size_t j = 0; j < n; ++j) {
                pick(pool[j]);
            }
        }
        const std::size_t n_bg = topic >= 0 ? uniform(2, 4) : uniform(4, 7);
        while (chosen.size() < n_bg + (topic >= 0 ? 3 : 0) && ids.size() < background.size()) {
            pick(background[concept_zipf(rng)]);
            if (topic >= 0 && chosen.size() >= 8) {
                break;
            }
        }

        auto random_word = [&] {
            if (topic >= 0 && chance(0.45)) {
                const auto& tw = topic_words[static_cast<std::size_t>(topic)];
                return tw[uniform(0, tw.size() - 1)];
            }
            return words[word_zipf(rng)];
        };

        detail::DocumentWriter w(config.first_id + i);
        for (std::size_t j = 0, n = uniform(3, 6); j < n; ++j) {
            w.word(random_word());
        }
        w.mention(chosen[0]);
        w.end_title();

        const std::size_t sentences = uniform(6, 9);
        for (std::size_t s = 0; s < sentences; ++s) {
            // Every concept is mentioned in the first and in a late sentence, so coverage is positive.
            const ConceptInfo* a = &chosen[s % chosen.size()];
            const ConceptInfo* b = &chosen[uniform(0, chosen.size() - 1)];
            if (s + chosen.size() >= sentences) {
                a = &chosen[(s + chosen.size() - sentences) % chosen.size()];
            }
            for (std::size_t j = 0, n = uniform(3, 7); j < n; ++j) {
                w.word(random_word());
            }
            w.mention(*a);
            for (std::size_t j = 0, n = uniform(2, 5); j < n; ++j) {
                w.word(random_word());
            }
            if (b->id != a->id) {
                w.mention(*b);
                const double confidence = std::uniform_real_distribution<double>(0.4, 1.0)(rng);
                w.statement(*a, preds[uniform(0, preds.size() - 1)], *b, confidence);
            }
            w.end_sentence();
        }
        docs.push_back(w.finish());
    }

    Qrels qrels;
    for (std::size_t t = 0; t < config.topics; ++t) {
        const std::string topic = std::to_string(t + 1);
        const auto& m = members[t];
        std::size_t j = 0;
        for (; j < std::min(config.relevant_per_topic, m.size()); ++j) {
            qrels.add(topic, config.first_id + m[j], 2);
        }
        for (std::size_t e = j + config.partial_per_topic; j < std::min(e, m.size()); ++j) {
            qrels.add(topic, config.first_id + m[j], 1);
        }
        std::size_t judged = 0;
        for (std::size_t tries = 0; judged < config.nonrelevant_per_topic && tries < 50 * config.documents; ++tries) {
            const std::size_t o = uniform(0, config.documents - 1);
            if (topic_of[o] == static_cast<int>(t)) {
                continue;
            }
            const auto& judgments = qrels.topics().at(topic);
            if (!judgments.contains(config.first_id + o)) {
                qrels.add(topic, config.first_id + o, 0);
                ++judged;
            }
        }
    }
    return {Corpus(std::move(docs), default_taxonomy()), std::move(qrels)};
}

}  // namespace xgprec::synthetic
