#include "sparselab/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace sparselab {

void Qrels::add(const std::string& qid, const std::string& docid, int grade) {
    if (grade < 0) throw std::invalid_argument("relevance grade must be >= 0");
    grades_[qid][docid] = grade;
}

int Qrels::grade(const std::string& qid, const std::string& docid) const {
    auto q = grades_.find(qid);
    if (q == grades_.end()) return 0;
    auto d = q->second.find(docid);
    return d == q->second.end() ? 0 : d->second;
}

bool Qrels::has_query(const std::string& qid) const { return grades_.count(qid) > 0; }

bool Qrels::has_relevant(const std::string& qid) const {
    auto q = grades_.find(qid);
    if (q == grades_.end()) return false;
    for (const auto& [doc, grade] : q->second) {
        if (grade >= 1) return true;
    }
    return false;
}

const std::map<std::string, int>* Qrels::judgments(const std::string& qid) const {
    auto q = grades_.find(qid);
    return q == grades_.end() ? nullptr : &q->second;
}

Qrels Qrels::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open qrels file: " + path);
    Qrels qrels;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string qid, iter, docid;
        int grade;
        if (!(ls >> qid >> iter >> docid >> grade)) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": malformed qrels line");
        }
        qrels.add(qid, docid, grade);
    }
    return qrels;
}

double mrr_at_k(const RunList& run, const Qrels& qrels, int k) {
    for (const ScoredDoc& hit : run.hits) {
        if (hit.rank > static_cast<std::uint32_t>(k)) break;
        if (qrels.grade(run.query_id, hit.doc) >= 1) {
            return 1.0 / static_cast<double>(hit.rank);
        }
    }
    return 0.0;
}

double ndcg_at_k(const RunList& run, const Qrels& qrels, int k, bool exponential_gain) {
    auto gain = [exponential_gain](int g) {
        return exponential_gain ? std::pow(2.0, g) - 1.0 : static_cast<double>(g);
    };
    double dcg = 0.0;
    for (const ScoredDoc& hit : run.hits) {
        if (hit.rank > static_cast<std::uint32_t>(k)) break;
        int g = qrels.grade(run.query_id, hit.doc);
        if (g > 0) dcg += gain(g) / std::log2(static_cast<double>(hit.rank) + 1.0);
    }

    const auto* judged = qrels.judgments(run.query_id);
    if (judged == nullptr) return 0.0;
    std::vector<int> grades;
    for (const auto& [doc, g] : *judged) {
        if (g > 0) grades.push_back(g);
    }
    if (grades.empty()) return 0.0;
    std::sort(grades.rbegin(), grades.rend());
    double idcg = 0.0;
    for (std::size_t i = 0; i < grades.size() && i < static_cast<std::size_t>(k); ++i) {
        idcg += gain(grades[i]) / std::log2(static_cast<double>(i) + 2.0);
    }
    return idcg > 0.0 ? dcg / idcg : 0.0;
}

EvalReport evaluate_runs(const std::vector<RunList>& runs, const Qrels& qrels, int k,
                         bool exponential_gain) {
    EvalReport report;
    double mrr_sum = 0.0, ndcg_sum = 0.0;
    for (const RunList& run : runs) {
        std::set<std::string> seen;
        for (const ScoredDoc& hit : run.hits) {
            if (!seen.insert(hit.doc).second) {
                throw std::runtime_error("duplicate document " + hit.doc + " in run for query " +
                                         run.query_id);
            }
        }
        if (!qrels.has_relevant(run.query_id)) {
            ++report.excluded;
            continue;
        }
        double mrr = mrr_at_k(run, qrels, k);
        double ndcg = ndcg_at_k(run, qrels, k, exponential_gain);
        report.rows.push_back({run.query_id, mrr, ndcg});
        mrr_sum += mrr;
        ndcg_sum += ndcg;
    }
    if (!report.rows.empty()) {
        report.defined = true;
        report.mean_mrr = mrr_sum / static_cast<double>(report.rows.size());
        report.mean_ndcg = ndcg_sum / static_cast<double>(report.rows.size());
    }
    return report;
}

EvalReport evaluate_run_file(const std::string& run_path, const std::string& qrels_path, int k,
                             bool exponential_gain) {
    return evaluate_runs(read_run_file(run_path), Qrels::from_file(qrels_path), k,
                         exponential_gain);
}

void write_eval_csv(const EvalReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write evaluation report: " + path);
    out.precision(9);
    out << std::fixed;
    out << "query,mrr,ndcg\n";
    for (const auto& row : report.rows) {
        out << row.query_id << ',' << row.mrr << ',' << row.ndcg << '\n';
    }
    if (report.defined) {
        out << "mean," << report.mean_mrr << ',' << report.mean_ndcg << '\n';
    } else {
        out << "mean,n/a,n/a\n";
    }
    out << "excluded_queries," << report.excluded << ",\n";
}

}  // namespace sparselab
