#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "error.hpp"

namespace xgprec {

using DocId = std::uint64_t;

/// Vocabulary identifier of a concept. Never empty; compared byte-wise.
class ConceptId {
  public:
    ConceptId() = default;
    explicit ConceptId(std::string value) : value_(std::move(value))
    {
        if (value_.empty()) {
            throw InvalidArgument("concept id must not be empty");
        }
    }

    [[nodiscard]] const std::string& str() const noexcept { return value_; }

    friend bool operator==(const ConceptId&, const ConceptId&) = default;
    friend auto operator<=>(const ConceptId&, const ConceptId&) = default;
    friend std::ostream& operator<<(std::ostream& os, const ConceptId& c) { return os << c.value_; }

  private:
    std::string value_;
};

struct ConceptAnnotation {
    ConceptId concept_id;
    std::string concept_type;
    std::size_t start = 0;
    std::size_t end = 0;
    std::string mention;

    friend bool operator==(const ConceptAnnotation&, const ConceptAnnotation&) = default;
};

struct Statement {
    ConceptId subject;
    std::string subject_type;
    std::string predicate;
    ConceptId object;
    std::string object_type;
    std::string sentence;
    double confidence = 1.0;

    friend bool operator==(const Statement&, const Statement&) = default;
};

struct Document {
    DocId id = 0;
    std::string title;
    std::string abstract;
    std::vector<ConceptAnnotation> concepts;
    std::vector<Statement> statements;

    friend bool operator==(const Document&, const Document&) = default;
};

namespace utf8 {

/// Number of code points in a UTF-8 string. Continuation bytes are not counted.
inline std::size_t length(std::string_view s) noexcept
{
    return static_cast<std::size_t>(std::count_if(
        s.begin(), s.end(), [](char ch) { return (static_cast<unsigned char>(ch) & 0xC0U) != 0x80U; }));
}

/// Byte offset of code point `cp` in `s`; `s.size()` when `cp` is the length.
inline std::optional<std::size_t> byte_offset(std::string_view s, std::size_t cp) noexcept
{
    std::size_t seen = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if ((static_cast<unsigned char>(s[i]) & 0xC0U) != 0x80U) {
            if (seen == cp) {
                return i;
            }
            ++seen;
        }
    }
    if (seen == cp) {
        return s.size();
    }
    return std::nullopt;
}

/// Code point range [start, end) of `s` as a byte view.
inline std::optional<std::string_view> substr(std::string_view s, std::size_t start, std::size_t end) noexcept
{
    auto b = byte_offset(s, start);
    auto e = byte_offset(s, end);
    if (!b || !e || *e < *b) {
        return std::nullopt;
    }
    return s.substr(*b, *e - *b);
}

}  // namespace utf8

/// Title and abstract joined by one space. All annotation offsets refer to this string.
[[nodiscard]] inline std::string text(const Document& d) { return d.title + " " + d.abstract; }

/// Length of `text(d)` in characters (code points).
[[nodiscard]] inline std::size_t text_length(const Document& d)
{
    return utf8::length(d.title) + 1 + utf8::length(d.abstract);
}

/// Three-level predicate hierarchy: 1 is most specific, 3 most generic.
class PredicateTaxonomy {
  public:
    static constexpr int most_generic = 3;

    PredicateTaxonomy() = default;
    explicit PredicateTaxonomy(std::map<std::string, int> levels) : levels_(std::move(levels))
    {
        for (const auto& [p, level] : levels_) {
            if (level < 1 || level > 3) {
                throw InvalidArgument("taxonomy level of '" + p + "' must be 1, 2 or 3");
            }
        }
    }

    /// Unknown predicates are treated as most generic.
    [[nodiscard]] int level(std::string_view predicate) const
    {
        auto it = levels_.find(std::string(predicate));
        return it == levels_.end() ? most_generic : it->second;
    }

    [[nodiscard]] bool contains(std::string_view predicate) const
    {
        return levels_.contains(std::string(predicate));
    }

    [[nodiscard]] const std::map<std::string, int>& levels() const noexcept { return levels_; }

    friend bool operator==(const PredicateTaxonomy&, const PredicateTaxonomy&) = default;

  private:
    std::map<std::string, int> levels_;
};

/// A small built-in taxonomy used when no taxonomy file is supplied.
[[nodiscard]] inline PredicateTaxonomy default_taxonomy()
{
    return PredicateTaxonomy({
        {"treats", 1},
        {"inhibits", 1},
        {"induces", 1},
        {"causes", 1},
        {"metabolises", 1},
        {"upregulates", 1},
        {"downregulates", 1},
        {"expresses", 1},
        {"interacts", 2},
        {"regulates", 2},
        {"administered", 2},
        {"compares", 2},
        {"associated", 3},
    });
}

/// Immutable, id-sorted collection of documents plus the predicate taxonomy.
class Corpus {
  public:
    Corpus() = default;
    Corpus(std::vector<Document> documents, PredicateTaxonomy taxonomy)
        : documents_(std::move(documents)), taxonomy_(std::move(taxonomy))
    {
        std::sort(documents_.begin(), documents_.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
        ordinals_.reserve(documents_.size());
        for (std::size_t i = 0; i < documents_.size(); ++i) {
            if (!ordinals_.emplace(documents_[i].id, static_cast<std::uint32_t>(i)).second) {
                throw DuplicateIdError("duplicate document id " + std::to_string(documents_[i].id));
            }
        }
    }

    [[nodiscard]] std::size_t size() const noexcept { return documents_.size(); }
    [[nodiscard]] std::span<const Document> documents() const noexcept { return documents_; }
    [[nodiscard]] const PredicateTaxonomy& taxonomy() const noexcept { return taxonomy_; }

    /// Position of the document in id order; postings are expressed in ordinals.
    [[nodiscard]] std::optional<std::uint32_t> ordinal(DocId id) const
    {
        auto it = ordinals_.find(id);
        if (it == ordinals_.end()) {
            return std::nullopt;
        }
        return it->second;
    }

    [[nodiscard]] bool contains(DocId id) const { return ordinals_.contains(id); }

    [[nodiscard]] const Document& at(DocId id) const
    {
        auto it = ordinals_.find(id);
        if (it == ordinals_.end()) {
            throw UnknownDocument("unknown document " + std::to_string(id));
        }
        return documents_[it->second];
    }

    [[nodiscard]] const Document& by_ordinal(std::uint32_t ordinal) const { return documents_[ordinal]; }

    friend bool operator==(const Corpus& a, const Corpus& b)
    {
        return a.documents_ == b.documents_ && a.taxonomy_ == b.taxonomy_;
    }

  private:
    std::vector<Document> documents_;
    std::unordered_map<DocId, std::uint32_t> ordinals_;
    PredicateTaxonomy taxonomy_;
};

/// Receives non-fatal ingestion diagnostics (dropped statements, defaulted fields).
using WarningSink = std::function<void(const std::string&)>;

inline void warn_stderr(const std::string& message) { std::cerr << "warning: " << message << '\n'; }

namespace detail {

using nlohmann::json;

inline const json& require(const json& obj, const char* key, std::string_view where, std::size_t line)
{
    auto it = obj.find(key);
    if (it == obj.end()) {
        throw FormatError("missing field " + std::string(where) + key, line);
    }
    return *it;
}

inline std::string require_string(const json& obj, const char* key, std::string_view where, std::size_t line)
{
    const auto& v = require(obj, key, where, line);
    if (!v.is_string()) {
        throw FormatError("field " + std::string(where) + key + " must be a string", line);
    }
    return v.get<std::string>();
}

inline std::size_t require_offset(const json& obj, const char* key, std::string_view where, std::size_t line)
{
    const auto& v = require(obj, key, where, line);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
        throw FormatError("field " + std::string(where) + key + " must be a non-negative integer", line);
    }
    return v.get<std::size_t>();
}

inline ConceptId require_concept(const json& obj, const char* key, std::string_view where, std::size_t line)
{
    auto s = require_string(obj, key, where, line);
    if (s.empty()) {
        throw FormatError("field " + std::string(where) + key + " must not be empty", line);
    }
    return ConceptId(std::move(s));
}

inline std::string optional_string(const json& obj, const char* key)
{
    auto it = obj.find(key);
    return it != obj.end() && it->is_string() ? it->get<std::string>() : std::string{};
}

}  // namespace detail

/// Parses and validates one interchange record. Dropped statements are reported to `warn`.
[[nodiscard]] inline Document parse_document(std::string_view line_text, std::size_t line, const WarningSink& warn)
{
    using detail::json;
    json rec;
    try {
        rec = json::parse(line_text);
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("malformed record: ") + e.what(), line);
    }
    if (!rec.is_object()) {
        throw FormatError("record must be an object", line);
    }

    Document d;
    const auto& id = detail::require(rec, "id", "", line);
    if (!id.is_number_unsigned() && !(id.is_number_integer() && id.get<std::int64_t>() >= 0)) {
        throw FormatError("field id must be a non-negative integer", line);
    }
    d.id = id.get<DocId>();
    d.title = detail::require_string(rec, "title", "", line);
    d.abstract = detail::require_string(rec, "abstract", "", line);

    const std::string full = text(d);
    const std::size_t length = text_length(d);

    if (auto it = rec.find("concepts"); it != rec.end()) {
        if (!it->is_array()) {
            throw FormatError("field concepts must be an array", line);
        }
        for (std::size_t i = 0; i < it->size(); ++i) {
            const auto& c = (*it)[i];
            const std::string where = "concepts[" + std::to_string(i) + "].";
            if (!c.is_object()) {
                throw FormatError(where.substr(0, where.size() - 1) + " must be an object", line);
            }
            ConceptAnnotation a;
            a.concept_id = detail::require_concept(c, "id", where, line);
            a.concept_type = detail::require_string(c, "type", where, line);
            a.start = detail::require_offset(c, "start", where, line);
            a.end = detail::require_offset(c, "end", where, line);
            a.mention = detail::require_string(c, "mention", where, line);
            if (a.end <= a.start) {
                throw FormatError(where + "end must be greater than " + where + "start", line);
            }
            if (a.end > length) {
                throw FormatError(where + "end (" + std::to_string(a.end) + ") exceeds text length "
                                      + std::to_string(length),
                                  line);
            }
            if (utf8::substr(full, a.start, a.end) != std::string_view(a.mention)) {
                throw FormatError(where + "mention does not match the text span", line);
            }
            d.concepts.push_back(std::move(a));
        }
    }

    std::unordered_set<std::string> annotated;
    for (const auto& a : d.concepts) {
        annotated.insert(a.concept_id.str());
    }

    if (auto it = rec.find("statements"); it != rec.end()) {
        if (!it->is_array()) {
            throw FormatError("field statements must be an array", line);
        }
        for (std::size_t i = 0; i < it->size(); ++i) {
            const auto& s = (*it)[i];
            const std::string where = "statements[" + std::to_string(i) + "].";
            if (!s.is_object()) {
                throw FormatError(where.substr(0, where.size() - 1) + " must be an object", line);
            }
            Statement st;
            st.subject = detail::require_concept(s, "subject", where, line);
            st.subject_type = detail::require_string(s, "subject_type", where, line);
            st.predicate = detail::require_string(s, "predicate", where, line);
            st.object = detail::require_concept(s, "object", where, line);
            st.object_type = detail::require_string(s, "object_type", where, line);
            st.sentence = detail::optional_string(s, "sentence");
            if (auto cf = s.find("confidence"); cf != s.end() && !cf->is_null()) {
                if (!cf->is_number()) {
                    throw FormatError("field " + where + "confidence must be a number", line);
                }
                st.confidence = cf->get<double>();
                if (!(st.confidence >= 0.0 && st.confidence <= 1.0)) {
                    throw FormatError("field " + where + "confidence must lie in [0, 1]", line);
                }
            } else if (warn) {
                warn("line " + std::to_string(line) + ": " + where + "confidence missing, using 1.0");
            }
            if (st.subject == st.object) {
                if (warn) {
                    warn("line " + std::to_string(line) + ": dropping self-loop " + where.substr(0, where.size() - 1));
                }
                continue;
            }
            if (!annotated.contains(st.subject.str()) || !annotated.contains(st.object.str())) {
                if (warn) {
                    warn("line " + std::to_string(line) + ": dropping " + where.substr(0, where.size() - 1)
                         + " with an unannotated endpoint");
                }
                continue;
            }
            d.statements.push_back(std::move(st));
        }
    }
    return d;
}

/// Reads newline-delimited records. Blank lines are skipped.
[[nodiscard]] inline std::vector<Document> parse_documents(std::istream& in, const WarningSink& warn = warn_stderr)
{
    std::vector<Document> docs;
    std::unordered_set<DocId> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        auto d = parse_document(line, line_no, warn);
        if (!seen.insert(d.id).second) {
            throw DuplicateIdError("line " + std::to_string(line_no) + ": duplicate document id "
                                   + std::to_string(d.id));
        }
        docs.push_back(std::move(d));
    }
    if (docs.empty()) {
        throw FormatError("no documents");
    }
    return docs;
}

[[nodiscard]] inline PredicateTaxonomy parse_taxonomy(std::istream& in)
{
    std::map<std::string, int> levels;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty() || line.front() == '#') {
            continue;
        }
        auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0) {
            throw FormatError("expected '<predicate>\\t<level>'", line_no);
        }
        auto level_text = line.substr(tab + 1);
        if (level_text != "1" && level_text != "2" && level_text != "3") {
            throw FormatError("taxonomy level must be 1, 2 or 3", line_no);
        }
        levels[line.substr(0, tab)] = level_text[0] - '0';
    }
    return PredicateTaxonomy(std::move(levels));
}

inline std::ifstream open_input(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot read " + path);
    }
    return in;
}

[[nodiscard]] inline PredicateTaxonomy load_taxonomy(const std::string& path)
{
    auto in = open_input(path);
    return parse_taxonomy(in);
}

[[nodiscard]] inline Corpus load_corpus(const std::string& path,
                                        PredicateTaxonomy taxonomy = default_taxonomy(),
                                        const WarningSink& warn = warn_stderr)
{
    auto in = open_input(path);
    return Corpus(parse_documents(in, warn), std::move(taxonomy));
}

/// Doc ids restricting retrieval to a benchmark's document universe.
[[nodiscard]] inline std::unordered_set<DocId> load_filter(const std::string& path)
{
    auto in = open_input(path);
    std::unordered_set<DocId> ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ss(line);
        DocId id = 0;
        if (!(ss >> id)) {
            if (line.find_first_not_of(" \t\r") == std::string::npos) {
                continue;
            }
            throw FormatError("expected a document id", line_no);
        }
        ids.insert(id);
    }
    return ids;
}

[[nodiscard]] inline nlohmann::json to_json(const Document& d)
{
    nlohmann::json concepts = nlohmann::json::array();
    for (const auto& a : d.concepts) {
        concepts.push_back({{"id", a.concept_id.str()},
                            {"type", a.concept_type},
                            {"start", a.start},
                            {"end", a.end},
                            {"mention", a.mention}});
    }
    nlohmann::json statements = nlohmann::json::array();
    for (const auto& s : d.statements) {
        statements.push_back({{"subject", s.subject.str()},
                              {"subject_type", s.subject_type},
                              {"predicate", s.predicate},
                              {"object", s.object.str()},
                              {"object_type", s.object_type},
                              {"sentence", s.sentence},
                              {"confidence", s.confidence}});
    }
    return {{"id", d.id},
            {"title", d.title},
            {"abstract", d.abstract},
            {"concepts", std::move(concepts)},
            {"statements", std::move(statements)}};
}

inline void write_documents(std::ostream& out, std::span<const Document> docs)
{
    for (const auto& d : docs) {
        out << to_json(d).dump() << '\n';
    }
}

inline void write_taxonomy(std::ostream& out, const PredicateTaxonomy& taxonomy)
{
    for (const auto& [p, level] : taxonomy.levels()) {
        out << p << '\t' << level << '\n';
    }
}

}  // namespace xgprec

template <>
struct std::hash<xgprec::ConceptId> {
    std::size_t operator()(const xgprec::ConceptId& c) const noexcept { return std::hash<std::string>{}(c.str()); }
};
