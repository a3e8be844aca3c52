#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sparselab/sparse_vector.hpp"

namespace sparselab {

using DocId = std::uint32_t;

struct Posting {
    DocId doc;
    float impact;
};

struct PostingList {
    TermId term = 0;
    std::vector<Posting> postings;  // ascending doc id
    float max_impact = 0.0f;
};

struct IndexStats {
    std::uint64_t doc_count = 0;
    std::uint64_t term_count = 0;
    std::uint64_t total_postings = 0;
    double mean_doc_nnz = 0.0;
};

// Impact-ordered inverted index, immutable after build. Safe for unlimited
// concurrent readers.
class InvertedIndex {
public:
    // External ids must be unique; all vectors share one vocabulary.
    // Empty vectors are retained (they count towards N) but emit no postings.
    static InvertedIndex build(const std::vector<std::pair<std::string, SparseVector>>& docs,
                               bool term_frequency = false,
                               const Vocabulary* vocab = nullptr);

    // TSV collection (docId<TAB>text), tokenized; weights are term frequencies.
    static InvertedIndex build_from_tsv(const std::string& path);

    void save(const std::string& path) const;
    static InvertedIndex load(const std::string& path);

    IndexStats stats() const;

    std::uint32_t doc_count() const { return static_cast<std::uint32_t>(doc_ids_.size()); }
    std::uint32_t vocab_size() const { return vocab_size_; }
    bool term_frequency() const { return term_frequency_; }
    double avg_doc_length() const { return avg_doc_length_; }
    double doc_length(DocId d) const { return doc_lengths_[d]; }

    const PostingList* list(TermId term) const;  // nullptr if term absent
    const std::vector<PostingList>& lists() const { return lists_; }

    const std::string& external_id(DocId d) const { return doc_ids_[d]; }
    const Vocabulary& vocabulary() const { return vocab_; }
    bool has_vocabulary() const { return vocab_.size() > 0; }

private:
    std::uint32_t vocab_size_ = 0;
    bool term_frequency_ = false;
    std::vector<PostingList> lists_;  // ascending term id
    std::unordered_map<TermId, std::size_t> term_pos_;
    std::vector<std::string> doc_ids_;
    std::vector<double> doc_lengths_;
    double avg_doc_length_ = 0.0;
    Vocabulary vocab_;  // populated for tokenized (tf) indexes
};

// Lowercase alphanumeric tokenizer shared by TSV ingestion and query paths.
std::vector<std::string> tokenize(const std::string& text);

}  // namespace sparselab
