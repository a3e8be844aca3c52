#pragma once

#include <map>
#include <string>
#include <vector>

#include "sparselab/retrieval.hpp"

namespace sparselab {

// Graded relevance judgments: (query id, doc id) -> grade >= 0.
class Qrels {
public:
    void add(const std::string& qid, const std::string& docid, int grade);
    int grade(const std::string& qid, const std::string& docid) const;  // 0 if unjudged
    bool has_query(const std::string& qid) const;
    bool has_relevant(const std::string& qid) const;  // any grade >= 1
    const std::map<std::string, int>* judgments(const std::string& qid) const;

    // TREC qrels format: whitespace-separated `qid 0 docid grade`.
    static Qrels from_file(const std::string& path);

private:
    std::map<std::string, std::map<std::string, int>> grades_;
};

// 1/rank of the first doc with grade >= 1 within the top k, else 0.
double mrr_at_k(const RunList& run, const Qrels& qrels, int k = 10);

// Linear gain by default (trec_eval convention); exponential gain 2^g - 1
// behind the flag.
double ndcg_at_k(const RunList& run, const Qrels& qrels, int k = 10,
                 bool exponential_gain = false);

struct EvalReport {
    struct Row {
        std::string query_id;
        double mrr;
        double ndcg;
    };
    std::vector<Row> rows;       // queries with >= 1 relevant judgment
    std::size_t excluded = 0;    // queries skipped (absent from qrels or all-zero grades)
    double mean_mrr = 0.0;
    double mean_ndcg = 0.0;
    bool defined = false;        // false when no evaluable query exists
};

EvalReport evaluate_runs(const std::vector<RunList>& runs, const Qrels& qrels, int k,
                         bool exponential_gain = false);
EvalReport evaluate_run_file(const std::string& run_path, const std::string& qrels_path, int k,
                             bool exponential_gain = false);
void write_eval_csv(const EvalReport& report, const std::string& path);

}  // namespace sparselab
