#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "sparselab/inverted_index.hpp"
#include "sparselab/sparse_vector.hpp"

namespace sparselab {

struct ScoredDoc {
    std::string doc;  // external id
    double score = 0.0;
    std::uint32_t rank = 0;  // 1-based
};

struct RunList {
    std::string query_id;
    std::uint32_t k = 0;
    std::vector<ScoredDoc> hits;  // non-increasing score, ties by internal doc id
};

struct BM25Params {
    double k1 = 0.9;
    double b = 0.4;
};

class StopWordList {
public:
    StopWordList() = default;
    explicit StopWordList(std::vector<std::string> words);
    static StopWordList lucene_english();  // the fixed in-repo default list
    static StopWordList from_file(const std::string& path);

    bool contains(const std::string& token) const;  // case-insensitive
    std::size_t size() const { return words_.size(); }

private:
    std::set<std::string> words_;  // lowercase
};

// Exhaustive document-at-a-time top-k: the exact k highest dot-product
// documents, ties broken by ascending internal doc id.
RunList retrieve_exhaustive(const InvertedIndex& index, const SparseVector& query,
                            std::uint32_t k, const std::string& query_id = "q");

// MaxScore-pruned DAAT; returns docs, scores and order identical to
// retrieve_exhaustive on the same inputs.
RunList retrieve_maxscore(const InvertedIndex& index, const SparseVector& query,
                          std::uint32_t k, const std::string& query_id = "q");

// BM25 over a term-frequency index. Duplicate query terms contribute once per
// occurrence. idf(t) = ln(1 + (N - df + 0.5)/(df + 0.5)).
RunList score_bm25(const InvertedIndex& index, const std::vector<TermId>& query_terms,
                   const BM25Params& params, std::uint32_t k,
                   const std::string& query_id = "q");

// Order-preserving, case-insensitive stop-word filter.
std::vector<std::string> remove_stop_words(const std::vector<std::string>& tokens,
                                           const StopWordList& list);

// SPLADE-doc query: deduplicated in-vocabulary tokens, uniform weight 1.0.
// Out-of-vocabulary tokens are dropped; stop words removed first when
// `stopped` is set.
SparseVector splade_doc_query(const std::vector<std::string>& tokens, const Vocabulary& vocab,
                              std::uint32_t vocab_size, bool stopped,
                              const StopWordList& stop_words);

// TREC run format: `qid Q0 docid rank score tag`, score with 6 decimals.
void write_run_file(const std::vector<RunList>& runs, const std::string& path,
                    const std::string& tag);
std::vector<RunList> read_run_file(const std::string& path);

}  // namespace sparselab
