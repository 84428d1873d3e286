#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "corpus.hpp"
#include "error.hpp"
#include "tokenize.hpp"

namespace xgprec {

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

struct Bm25Posting {
    std::uint32_t ordinal;
    std::uint32_t tf;

    friend bool operator==(const Bm25Posting&, const Bm25Posting&) = default;
};

/// A query resolved against the term dictionary.
struct Bm25Query {
    struct Term {
        std::uint32_t id;
        std::uint32_t qtf;
        double idf;
    };
    std::vector<Term> terms;
};

/// Okapi BM25 over title + abstract, documents addressed by corpus ordinal.
class Bm25Index {
  public:
    Bm25Index() = default;

    Bm25Index(Bm25Params params,
              TokenizerConfig tokenizer,
              std::vector<std::string> terms,
              std::vector<std::vector<Bm25Posting>> postings,
              std::vector<std::uint32_t> doc_lengths)
        : params_(params),
          tokenizer_(tokenizer),
          terms_(std::move(terms)),
          postings_(std::move(postings)),
          lengths_(std::move(doc_lengths))
    {
        if (!(params_.k1 > 0.0) || !(params_.b >= 0.0 && params_.b <= 1.0)) {
            throw InvalidArgument("BM25 requires k1 > 0 and 0 <= b <= 1");
        }
        if (terms_.size() != postings_.size()) {
            throw InvalidArgument("BM25 term and posting tables differ in size");
        }
        double total = 0.0;
        for (auto len : lengths_) {
            total += len;
        }
        avg_length_ = lengths_.empty() ? 0.0 : total / static_cast<double>(lengths_.size());
        ids_.reserve(terms_.size());
        for (std::size_t i = 0; i < terms_.size(); ++i) {
            ids_.emplace(terms_[i], static_cast<std::uint32_t>(i));
        }
    }

    [[nodiscard]] static Bm25Index build(const Corpus& corpus, Bm25Params params = {}, TokenizerConfig tokenizer = {})
    {
        std::unordered_map<std::string, std::vector<Bm25Posting>> by_term;
        std::vector<std::uint32_t> lengths;
        lengths.reserve(corpus.size());
        std::uint32_t ordinal = 0;
        for (const auto& d : corpus.documents()) {
            auto tokens = tokenize(text(d), tokenizer);
            lengths.push_back(static_cast<std::uint32_t>(tokens.size()));
            std::sort(tokens.begin(), tokens.end());
            for (std::size_t i = 0; i < tokens.size();) {
                std::size_t j = i;
                while (j < tokens.size() && tokens[j] == tokens[i]) {
                    ++j;
                }
                by_term[tokens[i]].push_back({ordinal, static_cast<std::uint32_t>(j - i)});
                i = j;
            }
            ++ordinal;
        }
        std::vector<std::string> terms;
        terms.reserve(by_term.size());
        for (const auto& [term, _] : by_term) {
            terms.push_back(term);
        }
        std::sort(terms.begin(), terms.end());
        std::vector<std::vector<Bm25Posting>> postings;
        postings.reserve(terms.size());
        for (const auto& term : terms) {
            postings.push_back(std::move(by_term[term]));
        }
        return Bm25Index(params, tokenizer, std::move(terms), std::move(postings), std::move(lengths));
    }

    [[nodiscard]] const Bm25Params& params() const noexcept { return params_; }
    [[nodiscard]] const TokenizerConfig& tokenizer() const noexcept { return tokenizer_; }
    [[nodiscard]] std::size_t document_count() const noexcept { return lengths_.size(); }
    [[nodiscard]] double average_length() const noexcept { return avg_length_; }
    [[nodiscard]] std::span<const std::uint32_t> lengths() const noexcept { return lengths_; }
    [[nodiscard]] const std::vector<std::string>& terms() const noexcept { return terms_; }
    [[nodiscard]] const std::vector<std::vector<Bm25Posting>>& postings() const noexcept { return postings_; }

    [[nodiscard]] std::vector<std::string> tokens(std::string_view text) const { return tokenize(text, tokenizer_); }

    /// ln(1 + (N - df + 0.5) / (df + 0.5))
    [[nodiscard]] double idf(std::uint32_t df) const
    {
        const double n = static_cast<double>(lengths_.size());
        const double f = static_cast<double>(df);
        return std::log(1.0 + (n - f + 0.5) / (f + 0.5));
    }

    /// Query tokens are not re-tokenized; unknown tokens are dropped.
    [[nodiscard]] Bm25Query prepare(std::span<const std::string> query_tokens) const
    {
        std::map<std::uint32_t, std::uint32_t> counts;
        for (const auto& t : query_tokens) {
            if (auto it = ids_.find(t); it != ids_.end()) {
                ++counts[it->second];
            }
        }
        Bm25Query q;
        q.terms.reserve(counts.size());
        for (auto [id, qtf] : counts) {
            q.terms.push_back({id, qtf, idf(static_cast<std::uint32_t>(postings_[id].size()))});
        }
        return q;
    }

    /// Each query token occurrence contributes once, so a repeated term is weighted by its query frequency.
    [[nodiscard]] double score(const Bm25Query& query, std::uint32_t ordinal) const
    {
        if (ordinal >= lengths_.size()) {
            throw UnknownDocument("ordinal " + std::to_string(ordinal) + " is not indexed");
        }
        const double norm = avg_length_ > 0.0 ? static_cast<double>(lengths_[ordinal]) / avg_length_ : 1.0;
        const double denom_extra = params_.k1 * (1.0 - params_.b + params_.b * norm);
        double total = 0.0;
        for (const auto& term : query.terms) {
            const auto& list = postings_[term.id];
            auto it = std::lower_bound(list.begin(), list.end(), ordinal,
                                       [](const Bm25Posting& p, std::uint32_t o) { return p.ordinal < o; });
            if (it == list.end() || it->ordinal != ordinal) {
                continue;
            }
            const double tf = it->tf;
            total += term.qtf * term.idf * tf * (params_.k1 + 1.0) / (tf + denom_extra);
        }
        return total;
    }

    [[nodiscard]] double score(std::span<const std::string> query_tokens, std::uint32_t ordinal) const
    {
        return score(prepare(query_tokens), ordinal);
    }

    friend bool operator==(const Bm25Index& a, const Bm25Index& b)
    {
        return a.params_.k1 == b.params_.k1 && a.params_.b == b.params_.b && a.tokenizer_.stem == b.tokenizer_.stem
            && a.terms_ == b.terms_ && a.postings_ == b.postings_ && a.lengths_ == b.lengths_;
    }

  private:
    Bm25Params params_;
    TokenizerConfig tokenizer_;
    std::vector<std::string> terms_;
    std::vector<std::vector<Bm25Posting>> postings_;
    std::vector<std::uint32_t> lengths_;
    double avg_length_ = 0.0;
    std::unordered_map<std::string, std::uint32_t> ids_;
};

}  // namespace xgprec
