#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "bm25.hpp"
#include "corpus.hpp"
#include "error.hpp"
#include "scoring.hpp"
#include "stats.hpp"

namespace xgprec {

using PostingList = std::vector<std::uint32_t>;

/// Key of an unordered concept pair: smaller key in the high half.
[[nodiscard]] constexpr std::uint64_t pair_key(ConceptKey a, ConceptKey b) noexcept
{
    if (b < a) {
        std::swap(a, b);
    }
    return (static_cast<std::uint64_t>(a) << 32U) | b;
}

struct GenericFilterConfig {
    /// Concepts whose df / |D| exceeds this ratio are blocked.
    double df_ratio = 0.027;
    /// The filter stays empty for smaller corpora.
    std::size_t min_corpus_size = 1000;
};

struct IndexConfig {
    Bm25Params bm25;
    TokenizerConfig tokenizer;
    GenericFilterConfig generic_filter;
};

/// Very frequent concepts ignored by the first stages.
class GenericConceptFilter {
  public:
    GenericConceptFilter() = default;

    GenericConceptFilter(const CorpusStats& stats, const GenericFilterConfig& config)
    {
        blocked_flags_.assign(stats.concept_count(), false);
        if (stats.corpus_size() < config.min_corpus_size || stats.corpus_size() == 0) {
            return;
        }
        const double n = static_cast<double>(stats.corpus_size());
        for (ConceptKey k = 0; k < stats.concept_count(); ++k) {
            if (static_cast<double>(stats.df(k)) / n > config.df_ratio) {
                blocked_flags_[k] = true;
                blocked_.insert(ConceptId(stats.name(k)));
            }
        }
    }

    [[nodiscard]] bool blocked(ConceptKey k) const { return k < blocked_flags_.size() && blocked_flags_[k]; }
    [[nodiscard]] const std::set<ConceptId>& blocked() const noexcept { return blocked_; }

  private:
    std::vector<bool> blocked_flags_;
    std::set<ConceptId> blocked_;
};

/// The concept, graph-node and edge inverted indexes, the df dictionary and the BM25 index.
///
/// Postings hold corpus ordinals (position in id order), so ascending ordinals are ascending doc ids.
struct IndexSet {
    IndexConfig config;
    CorpusStats stats;
    std::vector<DocId> doc_ids;
    std::vector<PostingList> concept_postings;  // ConceptKey -> documents annotating the concept
    std::vector<PostingList> node_postings;     // ConceptKey -> documents with the concept in graph(d)
    std::map<std::uint64_t, PostingList> edge_postings;
    Bm25Index bm25;
    GenericConceptFilter generic_filter;

    [[nodiscard]] std::optional<std::uint32_t> ordinal(DocId id) const
    {
        auto it = std::lower_bound(doc_ids.begin(), doc_ids.end(), id);
        if (it == doc_ids.end() || *it != id) {
            return std::nullopt;
        }
        return static_cast<std::uint32_t>(it - doc_ids.begin());
    }

    [[nodiscard]] const PostingList* concept_list(const ConceptId& c) const
    {
        auto k = stats.key(c);
        return k ? &concept_postings[*k] : nullptr;
    }

    [[nodiscard]] const PostingList* node_list(const ConceptId& c) const
    {
        auto k = stats.key(c);
        return k ? &node_postings[*k] : nullptr;
    }

    [[nodiscard]] const PostingList* edge_list(const ConceptId& a, const ConceptId& b) const
    {
        auto ka = stats.key(a);
        auto kb = stats.key(b);
        if (!ka || !kb) {
            return nullptr;
        }
        auto it = edge_postings.find(pair_key(*ka, *kb));
        return it == edge_postings.end() ? nullptr : &it->second;
    }

    [[nodiscard]] double bm25_score(std::span<const std::string> query_tokens, DocId id) const
    {
        auto o = ordinal(id);
        if (!o) {
            throw UnknownDocument("document " + std::to_string(id) + " is not indexed");
        }
        return bm25.score(query_tokens, *o);
    }

    [[nodiscard]] std::size_t edge_count() const noexcept { return edge_postings.size(); }
};

[[nodiscard]] inline IndexSet build_indexes(const Corpus& corpus, const IndexConfig& config = {})
{
    IndexSet set;
    set.config = config;
    set.stats = CorpusStats::from_corpus(corpus);
    set.doc_ids.reserve(corpus.size());
    set.concept_postings.assign(set.stats.concept_count(), {});
    set.node_postings.assign(set.stats.concept_count(), {});

    std::uint32_t ordinal = 0;
    std::vector<ConceptKey> keys;
    for (const auto& d : corpus.documents()) {
        set.doc_ids.push_back(d.id);

        keys.clear();
        for (const auto& a : d.concepts) {
            keys.push_back(*set.stats.key(a.concept_id));
        }
        std::sort(keys.begin(), keys.end());
        keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
        for (auto k : keys) {
            set.concept_postings[k].push_back(ordinal);
        }

        keys.clear();
        std::vector<std::uint64_t> pairs;
        for (const auto& s : d.statements) {
            auto ks = set.stats.key(s.subject);
            auto ko = set.stats.key(s.object);
            if (!ks || !ko) {
                continue;
            }
            keys.push_back(*ks);
            keys.push_back(*ko);
            pairs.push_back(pair_key(*ks, *ko));
        }
        std::sort(keys.begin(), keys.end());
        keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
        for (auto k : keys) {
            set.node_postings[k].push_back(ordinal);
        }
        std::sort(pairs.begin(), pairs.end());
        pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
        for (auto p : pairs) {
            set.edge_postings[p].push_back(ordinal);
        }
        ++ordinal;
    }

    set.bm25 = Bm25Index::build(corpus, config.bm25, config.tokenizer);
    set.generic_filter = GenericConceptFilter(set.stats, config.generic_filter);
    return set;
}

/// Observational equality: every query answered by `a` is answered identically by `b`.
[[nodiscard]] inline bool equivalent(const IndexSet& a, const IndexSet& b)
{
    return a.stats == b.stats && a.doc_ids == b.doc_ids && a.concept_postings == b.concept_postings
        && a.node_postings == b.node_postings && a.edge_postings == b.edge_postings && a.bm25 == b.bm25
        && a.generic_filter.blocked() == b.generic_filter.blocked();
}

// On-disk layout: manifest.txt plus five little-endian binary files, each
// starting with the 4-byte magic "XGPR", a u32 format version and a u32 kind tag.
inline constexpr std::uint32_t index_format_version = 1;

namespace detail {

enum class IndexFile : std::uint32_t { concepts = 1, nodes = 2, edges = 3, df = 4, bm25 = 5 };

class BinaryWriter {
  public:
    BinaryWriter(const std::filesystem::path& path, IndexFile kind) : path_(path), out_(path, std::ios::binary)
    {
        if (!out_) {
            throw IoError("cannot write " + path.string());
        }
        out_.write("XGPR", 4);
        u32(index_format_version);
        u32(static_cast<std::uint32_t>(kind));
    }

    void u8(std::uint8_t v) { out_.put(static_cast<char>(v)); }
    void u32(std::uint32_t v) { le(v); }
    void u64(std::uint64_t v) { le(v); }
    void f64(double v) { le(std::bit_cast<std::uint64_t>(v)); }

    void str(const std::string& s)
    {
        u32(static_cast<std::uint32_t>(s.size()));
        out_.write(s.data(), static_cast<std::streamsize>(s.size()));
    }

    void list(const PostingList& l)
    {
        u32(static_cast<std::uint32_t>(l.size()));
        for (auto v : l) {
            u32(v);
        }
    }

    void finish()
    {
        out_.flush();
        if (!out_) {
            throw IoError("failed writing " + path_.string());
        }
    }

  private:
    template <typename T>
    void le(T v)
    {
        std::array<char, sizeof(T)> bytes{};
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFFU);
        }
        out_.write(bytes.data(), bytes.size());
    }

    std::filesystem::path path_;
    std::ofstream out_;
};

class BinaryReader {
  public:
    BinaryReader(const std::filesystem::path& path, IndexFile kind) : path_(path), in_(path, std::ios::binary)
    {
        if (!in_) {
            throw IoError("cannot read " + path.string());
        }
        std::array<char, 4> magic{};
        in_.read(magic.data(), 4);
        if (!in_ || std::memcmp(magic.data(), "XGPR", 4) != 0) {
            throw FormatError(path.string() + " is not an index file");
        }
        auto version = u32();
        if (version != index_format_version) {
            throw VersionMismatch(path.string() + " has format version " + std::to_string(version) + ", expected "
                                  + std::to_string(index_format_version));
        }
        if (u32() != static_cast<std::uint32_t>(kind)) {
            throw FormatError(path.string() + " holds a different index kind");
        }
    }

    std::uint8_t u8()
    {
        char c = 0;
        in_.get(c);
        check();
        return static_cast<std::uint8_t>(c);
    }
    std::uint32_t u32() { return le<std::uint32_t>(); }
    std::uint64_t u64() { return le<std::uint64_t>(); }
    double f64() { return std::bit_cast<double>(le<std::uint64_t>()); }

    std::string str()
    {
        auto n = u32();
        std::string s(n, '\0');
        in_.read(s.data(), n);
        check();
        return s;
    }

    PostingList list()
    {
        auto n = u32();
        PostingList l(n);
        for (auto& v : l) {
            v = u32();
        }
        return l;
    }

    void expect_end()
    {
        if (in_.peek() != std::char_traits<char>::eof()) {
            throw FormatError(path_.string() + " has trailing bytes");
        }
    }

  private:
    template <typename T>
    T le()
    {
        std::array<unsigned char, sizeof(T)> bytes{};
        in_.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
        check();
        T v = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            v |= static_cast<T>(bytes[i]) << (8 * i);
        }
        return v;
    }

    void check()
    {
        if (!in_) {
            throw FormatError(path_.string() + " is truncated");
        }
    }

    std::filesystem::path path_;
    std::ifstream in_;
};

inline void write_keyed_lists(const std::filesystem::path& path, IndexFile kind, const std::vector<PostingList>& lists)
{
    BinaryWriter w(path, kind);
    w.u32(static_cast<std::uint32_t>(lists.size()));
    for (const auto& l : lists) {
        w.list(l);
    }
    w.finish();
}

inline std::vector<PostingList> read_keyed_lists(const std::filesystem::path& path, IndexFile kind)
{
    BinaryReader r(path, kind);
    std::vector<PostingList> lists(r.u32());
    for (auto& l : lists) {
        l = r.list();
    }
    r.expect_end();
    return lists;
}

inline std::map<std::string, std::string> read_manifest(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot read " + path.string());
    }
    std::map<std::string, std::string> fields;
    std::string line;
    while (std::getline(in, line)) {
        auto sp = line.find(' ');
        if (sp != std::string::npos) {
            fields[line.substr(0, sp)] = line.substr(sp + 1);
        }
    }
    return fields;
}

inline const std::string& manifest_field(const std::map<std::string, std::string>& m, const std::string& key)
{
    auto it = m.find(key);
    if (it == m.end()) {
        throw FormatError("manifest lacks field '" + key + "'");
    }
    return it->second;
}

inline std::string format_double(double v)
{
    std::ostringstream ss;
    ss.precision(17);
    ss << v;
    return ss.str();
}

}  // namespace detail

inline void save_indexes(const IndexSet& set, const std::filesystem::path& dir)
{
    namespace fs = std::filesystem;
    using detail::IndexFile;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create " + dir.string() + ": " + ec.message());
    }

    detail::write_keyed_lists(dir / "concept.idx", IndexFile::concepts, set.concept_postings);
    detail::write_keyed_lists(dir / "node.idx", IndexFile::nodes, set.node_postings);

    {
        detail::BinaryWriter w(dir / "edge.idx", IndexFile::edges);
        w.u64(set.edge_postings.size());
        for (const auto& [key, list] : set.edge_postings) {
            w.u64(key);
            w.list(list);
        }
        w.finish();
    }
    {
        detail::BinaryWriter w(dir / "df.idx", IndexFile::df);
        w.u64(set.stats.corpus_size());
        w.u32(static_cast<std::uint32_t>(set.stats.concept_count()));
        for (std::size_t i = 0; i < set.stats.concept_count(); ++i) {
            w.str(set.stats.names()[i]);
            w.u32(set.stats.dfs()[i]);
        }
        w.u64(set.doc_ids.size());
        for (auto id : set.doc_ids) {
            w.u64(id);
        }
        w.finish();
    }
    {
        detail::BinaryWriter w(dir / "bm25.idx", IndexFile::bm25);
        w.f64(set.bm25.params().k1);
        w.f64(set.bm25.params().b);
        w.u8(set.bm25.tokenizer().stem ? 1 : 0);
        w.u32(static_cast<std::uint32_t>(set.bm25.lengths().size()));
        for (auto len : set.bm25.lengths()) {
            w.u32(len);
        }
        w.u32(static_cast<std::uint32_t>(set.bm25.terms().size()));
        for (std::size_t t = 0; t < set.bm25.terms().size(); ++t) {
            w.str(set.bm25.terms()[t]);
            const auto& list = set.bm25.postings()[t];
            w.u32(static_cast<std::uint32_t>(list.size()));
            for (const auto& p : list) {
                w.u32(p.ordinal);
                w.u32(p.tf);
            }
        }
        w.finish();
    }

    std::ofstream manifest(dir / "manifest.txt");
    if (!manifest) {
        throw IoError("cannot write " + (dir / "manifest.txt").string());
    }
    manifest << "version " << index_format_version << '\n'
             << "corpus_size " << set.stats.corpus_size() << '\n'
             << "concepts " << set.stats.concept_count() << '\n'
             << "edges " << set.edge_postings.size() << '\n'
             << "bm25_terms " << set.bm25.terms().size() << '\n'
             << "bm25_k1 " << detail::format_double(set.config.bm25.k1) << '\n'
             << "bm25_b " << detail::format_double(set.config.bm25.b) << '\n'
             << "stem " << (set.config.tokenizer.stem ? 1 : 0) << '\n'
             << "generic_df_ratio " << detail::format_double(set.config.generic_filter.df_ratio) << '\n'
             << "generic_min_corpus_size " << set.config.generic_filter.min_corpus_size << '\n'
             << "blocked_concepts " << set.generic_filter.blocked().size() << '\n';
    if (!manifest) {
        throw IoError("failed writing manifest");
    }
}

[[nodiscard]] inline IndexSet load_indexes(const std::filesystem::path& dir)
{
    using detail::IndexFile;
    const auto manifest = detail::read_manifest(dir / "manifest.txt");
    const auto& version = detail::manifest_field(manifest, "version");
    if (version != std::to_string(index_format_version)) {
        throw VersionMismatch("index format version " + version + " is not supported (expected "
                              + std::to_string(index_format_version) + ")");
    }

    IndexSet set;
    try {
        set.config.bm25.k1 = std::stod(detail::manifest_field(manifest, "bm25_k1"));
        set.config.bm25.b = std::stod(detail::manifest_field(manifest, "bm25_b"));
        set.config.tokenizer.stem = detail::manifest_field(manifest, "stem") == "1";
        set.config.generic_filter.df_ratio = std::stod(detail::manifest_field(manifest, "generic_df_ratio"));
        set.config.generic_filter.min_corpus_size =
            std::stoull(detail::manifest_field(manifest, "generic_min_corpus_size"));
    } catch (const std::logic_error&) {
        throw FormatError("manifest holds a malformed number");
    }

    {
        detail::BinaryReader r(dir / "df.idx", IndexFile::df);
        auto corpus_size = r.u64();
        std::vector<std::string> names(r.u32());
        std::vector<std::uint32_t> df(names.size());
        for (std::size_t i = 0; i < names.size(); ++i) {
            names[i] = r.str();
            df[i] = r.u32();
        }
        set.doc_ids.resize(r.u64());
        for (auto& id : set.doc_ids) {
            id = r.u64();
        }
        r.expect_end();
        try {
            set.stats = CorpusStats(corpus_size, std::move(names), std::move(df));
        } catch (const InvalidArgument& e) {
            throw FormatError(std::string("df.idx: ") + e.what());
        }
    }
    set.concept_postings = detail::read_keyed_lists(dir / "concept.idx", IndexFile::concepts);
    set.node_postings = detail::read_keyed_lists(dir / "node.idx", IndexFile::nodes);
    if (set.concept_postings.size() != set.stats.concept_count()
        || set.node_postings.size() != set.stats.concept_count()) {
        throw FormatError("posting tables disagree with the concept dictionary");
    }
    {
        detail::BinaryReader r(dir / "edge.idx", IndexFile::edges);
        auto n = r.u64();
        for (std::uint64_t i = 0; i < n; ++i) {
            auto key = r.u64();
            set.edge_postings.emplace(key, r.list());
        }
        r.expect_end();
    }
    {
        detail::BinaryReader r(dir / "bm25.idx", IndexFile::bm25);
        Bm25Params params;
        params.k1 = r.f64();
        params.b = r.f64();
        TokenizerConfig tokenizer;
        tokenizer.stem = r.u8() != 0;
        std::vector<std::uint32_t> lengths(r.u32());
        for (auto& len : lengths) {
            len = r.u32();
        }
        std::vector<std::string> terms(r.u32());
        std::vector<std::vector<Bm25Posting>> postings(terms.size());
        for (std::size_t t = 0; t < terms.size(); ++t) {
            terms[t] = r.str();
            postings[t].resize(r.u32());
            for (auto& p : postings[t]) {
                p.ordinal = r.u32();
                p.tf = r.u32();
            }
        }
        r.expect_end();
        set.bm25 = Bm25Index(params, tokenizer, std::move(terms), std::move(postings), std::move(lengths));
    }
    set.generic_filter = GenericConceptFilter(set.stats, set.config.generic_filter);
    return set;
}

}  // namespace xgprec
