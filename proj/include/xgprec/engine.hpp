#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <string>

#include "corpus.hpp"
#include "error.hpp"
#include "explainer.hpp"
#include "index.hpp"
#include "recommender.hpp"

namespace xgprec {

/// A corpus and its indexes. An index directory additionally holds the corpus
/// records (corpus.jsonl) and the predicate taxonomy (taxonomy.tsv).
class Engine {
  public:
    Engine(Corpus corpus, IndexSet indexes) : corpus_(std::move(corpus)), indexes_(std::move(indexes))
    {
        if (indexes_.doc_ids.size() != corpus_.size()) {
            throw FormatError("index and corpus disagree on the document count");
        }
        for (std::size_t i = 0; i < corpus_.size(); ++i) {
            if (indexes_.doc_ids[i] != corpus_.documents()[i].id) {
                throw FormatError("index and corpus disagree on document ids");
            }
        }
    }

    [[nodiscard]] static Engine build(Corpus corpus, const IndexConfig& config = {})
    {
        auto indexes = build_indexes(corpus, config);
        return Engine(std::move(corpus), std::move(indexes));
    }

    [[nodiscard]] static Engine open(const std::filesystem::path& dir, const WarningSink& warn = warn_stderr)
    {
        auto indexes = load_indexes(dir);
        auto taxonomy = load_taxonomy((dir / "taxonomy.tsv").string());
        auto corpus = load_corpus((dir / "corpus.jsonl").string(), std::move(taxonomy), warn);
        return Engine(std::move(corpus), std::move(indexes));
    }

    void save(const std::filesystem::path& dir) const
    {
        save_indexes(indexes_, dir);
        std::ofstream corpus_out(dir / "corpus.jsonl");
        write_documents(corpus_out, corpus_.documents());
        std::ofstream taxonomy_out(dir / "taxonomy.tsv");
        write_taxonomy(taxonomy_out, corpus_.taxonomy());
        if (!corpus_out || !taxonomy_out) {
            throw IoError("failed writing corpus into " + dir.string());
        }
    }

    [[nodiscard]] const Corpus& corpus() const noexcept { return corpus_; }
    [[nodiscard]] const IndexSet& indexes() const noexcept { return indexes_; }

    [[nodiscard]] Recommendation recommend(DocId doc,
                                           const RecommendationConfig& config = {},
                                           const DocumentFilter* filter = nullptr) const
    {
        return xgprec::recommend(doc, corpus_, indexes_, config, filter);
    }

    [[nodiscard]] GraphCore core(const Document& d) const
    {
        return build_graph_core(d, indexes_.stats, corpus_.taxonomy());
    }

    [[nodiscard]] Explanation explain(DocId input, DocId candidate, std::size_t l) const
    {
        return xgprec::explain(corpus_.at(input), corpus_.at(candidate), l, indexes_.stats, corpus_.taxonomy());
    }

    [[nodiscard]] Explanation explain(const GraphCore& input_core, DocId candidate, std::size_t l) const
    {
        return xgprec::explain(input_core, core(corpus_.at(candidate)), l);
    }

  private:
    Corpus corpus_;
    IndexSet indexes_;
};

}  // namespace xgprec
