#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "corpus.hpp"
#include "error.hpp"
#include "first_stage.hpp"
#include "index.hpp"
#include "recommender.hpp"

namespace xgprec {

using TopicId = std::string;
using Judgments = std::map<DocId, int>;

/// Graded relevance judgments: 2 relevant, 1 partially relevant, 0 not relevant.
class Qrels {
  public:
    void add(const TopicId& topic, DocId doc, int grade)
    {
        if (grade < 0 || grade > 2) {
            throw InvalidArgument("relevance grade must be 0, 1 or 2");
        }
        topics_[topic][doc] = grade;
    }

    [[nodiscard]] const std::map<TopicId, Judgments>& topics() const noexcept { return topics_; }

    [[nodiscard]] const Judgments& judgments(const TopicId& topic) const
    {
        auto it = topics_.find(topic);
        if (it == topics_.end()) {
            throw UnknownTopic("unknown topic '" + topic + "'");
        }
        return it->second;
    }

    [[nodiscard]] std::unordered_set<DocId> universe() const
    {
        std::unordered_set<DocId> ids;
        for (const auto& [_, j] : topics_) {
            for (const auto& [doc, _g] : j) {
                ids.insert(doc);
            }
        }
        return ids;
    }

  private:
    std::map<TopicId, Judgments> topics_;
};

/// TREC qrels: "topic iteration doc_id grade" per line.
[[nodiscard]] inline Qrels parse_qrels(std::istream& in)
{
    Qrels q;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ss(line);
        std::string topic;
        std::string iteration;
        DocId doc = 0;
        int grade = 0;
        if (!(ss >> topic)) {
            continue;
        }
        if (!(ss >> iteration >> doc >> grade)) {
            throw FormatError("expected 'topic 0 doc_id grade'", line_no);
        }
        if (grade < 0 || grade > 2) {
            throw FormatError("relevance grade must be 0, 1 or 2", line_no);
        }
        q.add(topic, doc, grade);
    }
    return q;
}

[[nodiscard]] inline Qrels load_qrels(const std::string& path)
{
    auto in = open_input(path);
    return parse_qrels(in);
}

inline void write_qrels(std::ostream& out, const Qrels& q)
{
    for (const auto& [topic, judgments] : q.topics()) {
        for (const auto& [doc, grade] : judgments) {
            out << topic << " 0 " << doc << ' ' << grade << '\n';
        }
    }
}

struct RunEntry {
    DocId doc_id = 0;
    double score = 0.0;
};

/// topic -> ranked documents
using RunList = std::map<TopicId, std::vector<RunEntry>>;

/// One line per entry: "<topic> Q0 <doc_id> <rank> <score> <tag>", ranks from 1.
inline void write_trec_run(std::ostream& out, const TopicId& topic, std::span<const RunEntry> entries, const std::string& tag)
{
    char score[64];
    for (std::size_t i = 0; i < entries.size(); ++i) {
        std::snprintf(score, sizeof(score), "%.10f", entries[i].score);
        out << topic << " Q0 " << entries[i].doc_id << ' ' << (i + 1) << ' ' << score << ' ' << tag << '\n';
    }
}

inline void write_trec_run(std::ostream& out, const RunList& run, const std::string& tag)
{
    for (const auto& [topic, entries] : run) {
        write_trec_run(out, topic, entries, tag);
    }
}

/// Entries keep file order; duplicate documents within a topic are rejected.
[[nodiscard]] inline RunList parse_trec_run(std::istream& in)
{
    RunList run;
    std::map<TopicId, std::unordered_set<DocId>> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ss(line);
        std::string topic;
        std::string q0;
        std::string tag;
        DocId doc = 0;
        std::size_t rank = 0;
        double score = 0.0;
        if (!(ss >> topic)) {
            continue;
        }
        if (!(ss >> q0 >> doc >> rank >> score >> tag)) {
            throw FormatError("expected '<topic> Q0 <doc_id> <rank> <score> <tag>'", line_no);
        }
        if (!seen[topic].insert(doc).second) {
            throw FormatError("document " + std::to_string(doc) + " repeated in topic " + topic, line_no);
        }
        run[topic].push_back({doc, score});
    }
    return run;
}

struct MetricRow {
    double set_recall = 0.0;
    double ndcg10 = 0.0;
    double ndcg20 = 0.0;
    double p10 = 0.0;
    double p20 = 0.0;
    double bpref = 0.0;
    double unjudged20 = 0.0;
};

inline constexpr int relevant_grade = 1;

/// nDCG with the grade as gain and log2(rank + 1) discount.
[[nodiscard]] inline double ndcg_at(std::span<const DocId> ranking, const Judgments& judgments, std::size_t k)
{
    auto grade_of = [&](DocId d) {
        auto it = judgments.find(d);
        return it == judgments.end() ? 0 : it->second;
    };
    double dcg = 0.0;
    for (std::size_t i = 0; i < std::min(k, ranking.size()); ++i) {
        dcg += grade_of(ranking[i]) / std::log2(static_cast<double>(i) + 2.0);
    }
    std::vector<int> ideal;
    for (const auto& [_, g] : judgments) {
        if (g > 0) {
            ideal.push_back(g);
        }
    }
    std::sort(ideal.rbegin(), ideal.rend());
    double idcg = 0.0;
    for (std::size_t i = 0; i < std::min(k, ideal.size()); ++i) {
        idcg += ideal[i] / std::log2(static_cast<double>(i) + 2.0);
    }
    return idcg > 0.0 ? dcg / idcg : 0.0;
}

[[nodiscard]] inline double precision_at(std::span<const DocId> ranking, const Judgments& judgments, std::size_t k)
{
    std::size_t hits = 0;
    for (std::size_t i = 0; i < std::min(k, ranking.size()); ++i) {
        auto it = judgments.find(ranking[i]);
        if (it != judgments.end() && it->second >= relevant_grade) {
            ++hits;
        }
    }
    return static_cast<double>(hits) / static_cast<double>(k);
}

/// trec_eval bpref: unjudged documents are ignored entirely.
[[nodiscard]] inline double bpref(std::span<const DocId> ranking, const Judgments& judgments)
{
    std::size_t r = 0;
    std::size_t n = 0;
    for (const auto& [_, g] : judgments) {
        (g >= relevant_grade ? r : n) += 1;
    }
    if (r == 0) {
        return 0.0;
    }
    double sum = 0.0;
    std::size_t nonrel_above = 0;
    for (auto doc : ranking) {
        auto it = judgments.find(doc);
        if (it == judgments.end()) {
            continue;
        }
        if (it->second >= relevant_grade) {
            if (nonrel_above == 0) {
                sum += 1.0;
            } else {
                sum += 1.0 - static_cast<double>(std::min(nonrel_above, r)) / static_cast<double>(std::min(r, n));
            }
        } else {
            ++nonrel_above;
        }
    }
    return sum / static_cast<double>(r);
}

[[nodiscard]] inline MetricRow evaluate_ranking(std::span<const DocId> ranking, const Judgments& judgments)
{
    MetricRow row;
    std::size_t relevant = 0;
    std::size_t found = 0;
    std::unordered_set<DocId> retrieved(ranking.begin(), ranking.end());
    for (const auto& [doc, g] : judgments) {
        if (g >= relevant_grade) {
            ++relevant;
            found += retrieved.contains(doc) ? 1 : 0;
        }
    }
    row.set_recall = relevant > 0 ? static_cast<double>(found) / static_cast<double>(relevant) : 0.0;
    row.ndcg10 = ndcg_at(ranking, judgments, 10);
    row.ndcg20 = ndcg_at(ranking, judgments, 20);
    row.p10 = precision_at(ranking, judgments, 10);
    row.p20 = precision_at(ranking, judgments, 20);
    row.bpref = bpref(ranking, judgments);
    for (std::size_t i = 0; i < std::min<std::size_t>(20, ranking.size()); ++i) {
        row.unjudged20 += judgments.contains(ranking[i]) ? 0.0 : 1.0;
    }
    return row;
}

[[nodiscard]] inline MetricRow evaluate_topic(const RunList& run, const Qrels& qrels, const TopicId& topic)
{
    const auto& judgments = qrels.judgments(topic);
    std::vector<DocId> ranking;
    if (auto it = run.find(topic); it != run.end()) {
        for (const auto& e : it->second) {
            ranking.push_back(e.doc_id);
        }
    }
    return evaluate_ranking(ranking, judgments);
}

/// Arithmetic mean of every metric column.
[[nodiscard]] inline MetricRow mean_row(std::span<const MetricRow> rows)
{
    MetricRow m;
    if (rows.empty()) {
        return m;
    }
    for (const auto& r : rows) {
        m.set_recall += r.set_recall;
        m.ndcg10 += r.ndcg10;
        m.ndcg20 += r.ndcg20;
        m.p10 += r.p10;
        m.p20 += r.p20;
        m.bpref += r.bpref;
        m.unjudged20 += r.unjudged20;
    }
    const double n = static_cast<double>(rows.size());
    m.set_recall /= n;
    m.ndcg10 /= n;
    m.ndcg20 /= n;
    m.p10 /= n;
    m.p20 /= n;
    m.bpref /= n;
    m.unjudged20 /= n;
    return m;
}

/// Mean over the topics of `a` of |top_k(a) ∩ top_k(b)| / |top_k(a) ∪ top_k(b)|.
/// Two empty lists count as identical.
[[nodiscard]] inline double pairwise_jaccard(const RunList& a, const RunList& b, std::size_t k)
{
    std::set<TopicId> topics;
    for (const auto& [t, _] : a) {
        topics.insert(t);
    }
    for (const auto& [t, _] : b) {
        topics.insert(t);
    }
    if (topics.empty()) {
        return 1.0;
    }
    auto top = [k](const RunList& run, const TopicId& t) {
        std::set<DocId> ids;
        if (auto it = run.find(t); it != run.end()) {
            for (std::size_t i = 0; i < std::min(k, it->second.size()); ++i) {
                ids.insert(it->second[i].doc_id);
            }
        }
        return ids;
    };
    double total = 0.0;
    for (const auto& t : topics) {
        auto ta = top(a, t);
        auto tb = top(b, t);
        std::size_t inter = 0;
        for (auto id : ta) {
            inter += tb.contains(id) ? 1 : 0;
        }
        const std::size_t uni = ta.size() + tb.size() - inter;
        total += uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
    }
    return total / static_cast<double>(topics.size());
}

struct MetricReport {
    std::string label;
    std::map<TopicId, MetricRow> per_topic;
    MetricRow mean;
    std::size_t inputs = 0;
    double t_doc_mean = 0.0;
    double t_doc_sd = 0.0;
    /// Rankings by topic and input document, for run-file output.
    std::map<TopicId, std::map<DocId, std::vector<RunEntry>>> runs;
};

/// For every topic, recommends from each grade-2 document and evaluates against the
/// topic's other judgments; rows are averaged within topics, then across topics.
[[nodiscard]] inline MetricReport benchmark_driver(const Corpus& corpus,
                                                   const IndexSet& idx,
                                                   const Qrels& qrels,
                                                   const RecommendationConfig& config,
                                                   const DocumentFilter* filter = nullptr,
                                                   const WarningSink& warn = warn_stderr)
{
    MetricReport report;
    std::vector<MetricRow> topic_rows;
    std::vector<double> latencies;
    for (const auto& [topic, judgments] : qrels.topics()) {
        std::vector<MetricRow> rows;
        for (const auto& [doc, grade] : judgments) {
            if (grade != 2) {
                continue;
            }
            if (!corpus.contains(doc)) {
                if (warn) {
                    warn("topic " + topic + ": input document " + std::to_string(doc) + " not in corpus");
                }
                continue;
            }
            const auto start = std::chrono::steady_clock::now();
            auto rec = recommend(doc, corpus, idx, config, filter);
            const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
            latencies.push_back(elapsed.count());

            std::vector<DocId> ranking;
            std::vector<RunEntry> entries;
            for (const auto& c : rec.candidates) {
                ranking.push_back(c.doc_id);
                entries.push_back({c.doc_id, c.fused});
            }
            Judgments others = judgments;
            others.erase(doc);
            rows.push_back(evaluate_ranking(ranking, others));
            report.runs[topic][doc] = std::move(entries);
        }
        if (rows.empty()) {
            continue;
        }
        report.inputs += rows.size();
        report.per_topic[topic] = mean_row(rows);
        topic_rows.push_back(report.per_topic[topic]);
    }
    report.mean = mean_row(topic_rows);
    if (!latencies.empty()) {
        double sum = 0.0;
        for (auto t : latencies) {
            sum += t;
        }
        report.t_doc_mean = sum / static_cast<double>(latencies.size());
        double var = 0.0;
        for (auto t : latencies) {
            var += (t - report.t_doc_mean) * (t - report.t_doc_mean);
        }
        report.t_doc_sd = std::sqrt(var / static_cast<double>(latencies.size()));
    }
    return report;
}

/// Full fusion, fusion without BM25, fusion without core overlap.
[[nodiscard]] inline std::vector<MetricReport> ablation_sweep(const Corpus& corpus,
                                                              const IndexSet& idx,
                                                              const Qrels& qrels,
                                                              const RecommendationConfig& config,
                                                              const DocumentFilter* filter = nullptr,
                                                              const WarningSink& warn = warn_stderr)
{
    struct Variant {
        const char* label;
        double w_graph;
        double w_text;
    };
    const Variant variants[] = {
        {"XGPRec", config.w_graph, config.w_text},
        {"- BM25", 1.0, 0.0},
        {"- CoreOverlap", 0.0, 1.0},
    };
    std::vector<MetricReport> reports;
    for (const auto& v : variants) {
        auto c = config;
        c.w_graph = v.w_graph;
        c.w_text = v.w_text;
        auto r = benchmark_driver(corpus, idx, qrels, c, filter, warn);
        r.label = v.label;
        reports.push_back(std::move(r));
    }
    return reports;
}

inline void write_report_table(std::ostream& out, std::span<const MetricReport> reports)
{
    auto flags = out.flags();
    out << std::left << std::setw(16) << "Strategy" << std::right << std::setw(18) << "T_doc" << std::setw(9)
        << "Recall" << std::setw(9) << "nDCG@10" << std::setw(9) << "nDCG@20" << std::setw(9) << "P@10"
        << std::setw(9) << "P@20" << std::setw(9) << "bpref" << std::setw(12) << "unjudged@20" << '\n';
    out << std::fixed;
    for (const auto& r : reports) {
        std::ostringstream t;
        t << std::fixed << std::setprecision(4) << r.t_doc_mean << " +- " << r.t_doc_sd << "s";
        out << std::left << std::setw(16) << r.label << std::right << std::setw(18) << t.str() << std::setprecision(4)
            << std::setw(9) << r.mean.set_recall << std::setw(9) << r.mean.ndcg10 << std::setw(9) << r.mean.ndcg20
            << std::setw(9) << r.mean.p10 << std::setw(9) << r.mean.p20 << std::setw(9) << r.mean.bpref
            << std::setw(12) << std::setprecision(2) << r.mean.unjudged20 << '\n';
    }
    out.flags(flags);
}

[[nodiscard]] inline nlohmann::json to_json(const MetricRow& r)
{
    return {{"recall", r.set_recall}, {"ndcg@10", r.ndcg10}, {"ndcg@20", r.ndcg20}, {"p@10", r.p10},
            {"p@20", r.p20},          {"bpref", r.bpref},     {"unjudged@20", r.unjudged20}};
}

[[nodiscard]] inline nlohmann::json to_json(std::span<const MetricReport> reports)
{
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : reports) {
        nlohmann::json topics = nlohmann::json::object();
        for (const auto& [t, row] : r.per_topic) {
            topics[t] = to_json(row);
        }
        rows.push_back({{"strategy", r.label},
                        {"t_doc_mean", r.t_doc_mean},
                        {"t_doc_sd", r.t_doc_sd},
                        {"inputs", r.inputs},
                        {"mean", to_json(r.mean)},
                        {"topics", std::move(topics)}});
    }
    return {{"rows", std::move(rows)}};
}

}  // namespace xgprec
