#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "corpus.hpp"

namespace xgprec {

/// Dense key of an interned concept. Posting lists are keyed by it.
using ConceptKey = std::uint32_t;

/// Corpus size and the concept document-frequency dictionary.
///
/// Concepts are interned in lexicographic order so that keys, and everything
/// persisted in terms of them, are independent of hash iteration order.
class CorpusStats {
  public:
    CorpusStats() = default;

    /// `names` must be sorted and unique; `df[i]` belongs to `names[i]`.
    CorpusStats(std::size_t corpus_size, std::vector<std::string> names, std::vector<std::uint32_t> df)
        : corpus_size_(corpus_size), names_(std::move(names)), df_(std::move(df))
    {
        if (names_.size() != df_.size()) {
            throw InvalidArgument("concept name and df tables differ in size");
        }
        keys_.reserve(names_.size());
        for (std::size_t i = 0; i < names_.size(); ++i) {
            if (df_[i] < 1 || df_[i] > corpus_size_) {
                throw InvalidArgument("document frequency of " + names_[i] + " out of range");
            }
            if (i > 0 && !(names_[i - 1] < names_[i])) {
                throw InvalidArgument("concept names must be sorted and unique");
            }
            keys_.emplace(names_[i], static_cast<ConceptKey>(i));
        }
    }

    [[nodiscard]] static CorpusStats from_corpus(const Corpus& corpus)
    {
        std::unordered_map<std::string, std::uint32_t> counts;
        for (const auto& d : corpus.documents()) {
            std::unordered_set<std::string> seen;
            for (const auto& a : d.concepts) {
                if (seen.insert(a.concept_id.str()).second) {
                    ++counts[a.concept_id.str()];
                }
            }
        }
        std::vector<std::string> names;
        names.reserve(counts.size());
        for (const auto& [name, _] : counts) {
            names.push_back(name);
        }
        std::sort(names.begin(), names.end());
        std::vector<std::uint32_t> df;
        df.reserve(names.size());
        for (const auto& n : names) {
            df.push_back(counts.at(n));
        }
        return CorpusStats(corpus.size(), std::move(names), std::move(df));
    }

    [[nodiscard]] std::size_t corpus_size() const noexcept { return corpus_size_; }
    [[nodiscard]] std::size_t concept_count() const noexcept { return names_.size(); }

    [[nodiscard]] std::optional<ConceptKey> key(const std::string& name) const
    {
        auto it = keys_.find(name);
        if (it == keys_.end()) {
            return std::nullopt;
        }
        return it->second;
    }
    [[nodiscard]] std::optional<ConceptKey> key(const ConceptId& c) const { return key(c.str()); }

    [[nodiscard]] const std::string& name(ConceptKey k) const { return names_.at(k); }

    /// 0 for concepts never seen in the corpus.
    [[nodiscard]] std::uint32_t df(const ConceptId& c) const
    {
        auto k = key(c);
        return k ? df_[*k] : 0;
    }
    [[nodiscard]] std::uint32_t df(ConceptKey k) const { return df_.at(k); }

    [[nodiscard]] const std::vector<std::string>& names() const noexcept { return names_; }
    [[nodiscard]] const std::vector<std::uint32_t>& dfs() const noexcept { return df_; }

    friend bool operator==(const CorpusStats& a, const CorpusStats& b)
    {
        return a.corpus_size_ == b.corpus_size_ && a.names_ == b.names_ && a.df_ == b.df_;
    }

  private:
    std::size_t corpus_size_ = 0;
    std::vector<std::string> names_;
    std::vector<std::uint32_t> df_;
    std::unordered_map<std::string, ConceptKey> keys_;
};

}  // namespace xgprec
