#pragma once

#include <array>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace xgprec {

namespace detail {

// Porter (1980) suffix stripping. Operates on lowercase ASCII words.
class PorterStemmer {
  public:
    std::string operator()(std::string word)
    {
        if (word.size() <= 2) {
            return word;
        }
        b_ = std::move(word);
        k_ = static_cast<int>(b_.size()) - 1;
        step1ab();
        if (k_ > 0) {
            step1c();
            step2();
            step3();
            step4();
            step5();
        }
        b_.resize(static_cast<std::size_t>(k_ + 1));
        return std::move(b_);
    }

  private:
    std::string b_;
    int k_ = 0;
    int j_ = 0;

    [[nodiscard]] bool cons(int i) const
    {
        switch (b_[static_cast<std::size_t>(i)]) {
        case 'a':
        case 'e':
        case 'i':
        case 'o':
        case 'u':
            return false;
        case 'y':
            return i == 0 ? true : !cons(i - 1);
        default:
            return true;
        }
    }

    // number of VC sequences in b[0..j]
    [[nodiscard]] int m() const
    {
        int n = 0;
        int i = 0;
        while (true) {
            if (i > j_) {
                return n;
            }
            if (!cons(i)) {
                break;
            }
            ++i;
        }
        ++i;
        while (true) {
            while (true) {
                if (i > j_) {
                    return n;
                }
                if (cons(i)) {
                    break;
                }
                ++i;
            }
            ++i;
            ++n;
            while (true) {
                if (i > j_) {
                    return n;
                }
                if (!cons(i)) {
                    break;
                }
                ++i;
            }
            ++i;
        }
    }

    [[nodiscard]] bool vowel_in_stem() const
    {
        for (int i = 0; i <= j_; ++i) {
            if (!cons(i)) {
                return true;
            }
        }
        return false;
    }

    [[nodiscard]] bool doublec(int j) const
    {
        if (j < 1 || b_[static_cast<std::size_t>(j)] != b_[static_cast<std::size_t>(j - 1)]) {
            return false;
        }
        return cons(j);
    }

    [[nodiscard]] bool cvc(int i) const
    {
        if (i < 2 || !cons(i) || cons(i - 1) || !cons(i - 2)) {
            return false;
        }
        char ch = b_[static_cast<std::size_t>(i)];
        return ch != 'w' && ch != 'x' && ch != 'y';
    }

    bool ends(std::string_view s)
    {
        const int len = static_cast<int>(s.size());
        if (len > k_ + 1) {
            return false;
        }
        if (std::string_view(b_).substr(static_cast<std::size_t>(k_ + 1 - len), s.size()) != s) {
            return false;
        }
        j_ = k_ - len;
        return true;
    }

    void setto(std::string_view s)
    {
        b_.replace(static_cast<std::size_t>(j_ + 1), static_cast<std::size_t>(k_ - j_), s);
        k_ = j_ + static_cast<int>(s.size());
        b_.resize(static_cast<std::size_t>(k_ + 1));
    }

    void r(std::string_view s)
    {
        if (m() > 0) {
            setto(s);
        }
    }

    void step1ab()
    {
        if (b_[static_cast<std::size_t>(k_)] == 's') {
            if (ends("sses")) {
                k_ -= 2;
            } else if (ends("ies")) {
                setto("i");
            } else if (b_[static_cast<std::size_t>(k_ - 1)] != 's') {
                --k_;
            }
            b_.resize(static_cast<std::size_t>(k_ + 1));
        }
        if (ends("eed")) {
            if (m() > 0) {
                --k_;
                b_.resize(static_cast<std::size_t>(k_ + 1));
            }
        } else if ((ends("ed") || ends("ing")) && vowel_in_stem()) {
            k_ = j_;
            b_.resize(static_cast<std::size_t>(k_ + 1));
            if (ends("at")) {
                setto("ate");
            } else if (ends("bl")) {
                setto("ble");
            } else if (ends("iz")) {
                setto("ize");
            } else if (doublec(k_)) {
                char ch = b_[static_cast<std::size_t>(k_)];
                if (ch != 'l' && ch != 's' && ch != 'z') {
                    --k_;
                    b_.resize(static_cast<std::size_t>(k_ + 1));
                }
            } else {
                j_ = k_;
                if (m() == 1 && cvc(k_)) {
                    setto("e");
                }
            }
        }
    }

    void step1c()
    {
        if (ends("y") && vowel_in_stem()) {
            b_[static_cast<std::size_t>(k_)] = 'i';
        }
    }

    void step2()
    {
        if (k_ < 1) {
            return;
        }
        static constexpr std::array<std::pair<std::string_view, std::string_view>, 20> rules{{
            {"ational", "ate"}, {"tional", "tion"}, {"enci", "ence"},  {"anci", "ance"},  {"izer", "ize"},
            {"bli", "ble"},     {"alli", "al"},     {"entli", "ent"},  {"eli", "e"},      {"ousli", "ous"},
            {"ization", "ize"}, {"ation", "ate"},   {"ator", "ate"},   {"alism", "al"},   {"iveness", "ive"},
            {"fulness", "ful"}, {"ousness", "ous"}, {"aliti", "al"},   {"iviti", "ive"},  {"biliti", "ble"},
        }};
        for (const auto& [suffix, repl] : rules) {
            if (ends(suffix)) {
                r(repl);
                return;
            }
        }
        if (ends("logi")) {
            r("log");
        }
    }

    void step3()
    {
        static constexpr std::array<std::pair<std::string_view, std::string_view>, 7> rules{{
            {"icate", "ic"}, {"ative", ""}, {"alize", "al"}, {"iciti", "ic"}, {"ical", "ic"}, {"ful", ""}, {"ness", ""},
        }};
        for (const auto& [suffix, repl] : rules) {
            if (ends(suffix)) {
                r(repl);
                return;
            }
        }
    }

    void step4()
    {
        if (k_ < 1) {
            return;
        }
        static constexpr std::array<std::string_view, 19> suffixes{
            "al",  "ance", "ence", "er",  "ic",  "able", "ible", "ant", "ement", "ment",
            "ent", "ion",  "ou",   "ism", "ate", "iti",  "ous",  "ive", "ize",
        };
        for (auto suffix : suffixes) {
            if (!ends(suffix)) {
                continue;
            }
            if (suffix == "ion") {
                if (j_ < 0) {
                    return;
                }
                char ch = b_[static_cast<std::size_t>(j_)];
                if (ch != 's' && ch != 't') {
                    return;
                }
            }
            // "ement" and "ment" must be tried before "ent"
            if (m() > 1) {
                k_ = j_;
                b_.resize(static_cast<std::size_t>(k_ + 1));
            }
            return;
        }
    }

    void step5()
    {
        j_ = k_;
        if (b_[static_cast<std::size_t>(k_)] == 'e') {
            int a = m();
            if (a > 1 || (a == 1 && !cvc(k_ - 1))) {
                --k_;
                b_.resize(static_cast<std::size_t>(k_ + 1));
            }
        }
        if (b_[static_cast<std::size_t>(k_)] == 'l' && doublec(k_) && m() > 1) {
            --k_;
            b_.resize(static_cast<std::size_t>(k_ + 1));
        }
    }
};

inline const std::unordered_set<std::string_view>& stopwords()
{
    static const std::unordered_set<std::string_view> words{
        "a",       "about",   "above",  "after",   "again",    "against", "all",     "also",   "am",
        "an",      "and",     "any",    "are",     "as",       "at",      "be",      "because", "been",
        "before",  "being",   "below",  "between", "both",     "but",     "by",      "can",    "could",
        "did",     "do",      "does",   "doing",   "down",     "during",  "each",    "few",    "for",
        "from",    "further", "had",    "has",     "have",     "having",  "he",      "her",    "here",
        "hers",    "herself", "him",    "himself", "his",      "how",     "however", "i",      "if",
        "in",      "into",    "is",     "it",      "its",      "itself",  "may",     "me",     "might",
        "more",    "most",    "must",   "my",      "myself",   "no",      "nor",     "not",    "of",
        "off",     "on",      "once",   "only",    "or",       "other",   "our",     "ours",   "ourselves",
        "out",     "over",    "own",    "same",    "shall",    "she",     "should",  "so",     "some",
        "such",    "than",    "that",   "the",     "their",    "theirs",  "them",    "themselves",
        "then",    "there",   "these",  "they",    "this",     "those",   "through", "thus",   "to",
        "too",     "under",   "until",  "up",      "upon",     "very",    "was",     "we",     "were",
        "what",    "when",    "where",  "whether", "which",    "while",   "who",     "whom",   "why",
        "will",    "with",    "within", "without", "would",    "you",     "your",    "yours",  "yourself",
        "yourselves",
    };
    return words;
}

}  // namespace detail

struct TokenizerConfig {
    bool stem = false;
};

/// Lowercases, splits on ASCII non-alphanumerics, drops tokens shorter than two
/// bytes and stopwords. Bytes >= 0x80 are kept inside tokens.
[[nodiscard]] inline std::vector<std::string> tokenize(std::string_view text, const TokenizerConfig& config = {})
{
    std::vector<std::string> tokens;
    detail::PorterStemmer stemmer;
    std::string current;
    auto flush = [&] {
        if (current.size() >= 2 && !detail::stopwords().contains(current)) {
            tokens.push_back(config.stem ? stemmer(std::move(current)) : std::move(current));
        }
        current.clear();
    };
    for (char ch : text) {
        auto u = static_cast<unsigned char>(ch);
        if (u >= 0x80U || (u >= '0' && u <= '9') || (u >= 'a' && u <= 'z')) {
            current.push_back(ch);
        } else if (u >= 'A' && u <= 'Z') {
            current.push_back(static_cast<char>(u - 'A' + 'a'));
        } else {
            flush();
        }
    }
    flush();
    return tokens;
}

[[nodiscard]] inline std::string porter_stem(std::string word) { return detail::PorterStemmer{}(std::move(word)); }

}  // namespace xgprec
