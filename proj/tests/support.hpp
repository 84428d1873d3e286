#pragma once

#include <atomic>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "xgprec/corpus.hpp"

namespace testing_support {

using namespace xgprec;

inline std::filesystem::path data_dir() { return XGPREC_TEST_DATA; }

inline Corpus fixture25()
{
    return load_corpus((data_dir() / "fixture25.jsonl").string(),
                       load_taxonomy((data_dir() / "taxonomy.tsv").string()),
                       [](const std::string&) {});
}

/// Fresh empty directory removed on destruction.
class TempDir {
  public:
    TempDir()
    {
        static std::atomic<int> counter{0};
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path()
            / ("xgprec-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    [[nodiscard]] const std::filesystem::path& path() const { return path_; }
    [[nodiscard]] std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

  private:
    std::filesystem::path path_;
};

/// Builds documents directly, skipping record validation. The text is a title
/// "t" plus filler so that text_length equals `length`.
class DocBuilder {
  public:
    explicit DocBuilder(DocId id, std::size_t length = 100)
    {
        d_.id = id;
        d_.title = "t";
        d_.abstract = std::string(length >= 2 ? length - 2 : 0, 'x');
    }

    DocBuilder& words(std::string title, std::string abstract)
    {
        d_.title = std::move(title);
        d_.abstract = std::move(abstract);
        return *this;
    }

    DocBuilder& ann(const std::string& concept_id, const std::string& type, std::size_t start)
    {
        d_.concepts.push_back({ConceptId(concept_id), type, start, start + 1, "x"});
        return *this;
    }

    DocBuilder& st(const std::string& s,
                   const std::string& s_type,
                   const std::string& p,
                   const std::string& o,
                   const std::string& o_type,
                   double confidence = 1.0)
    {
        d_.statements.push_back({ConceptId(s), s_type, p, ConceptId(o), o_type, "", confidence});
        return *this;
    }

    [[nodiscard]] Document build() const { return d_; }
    operator Document() const { return d_; }

  private:
    Document d_;
};

/// Relative comparison with an absolute floor for values near zero.
inline bool close(double a, double b, double rel = 1e-9)
{
    const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) <= rel * scale || std::abs(a - b) <= 1e-15;
}

}  // namespace testing_support
