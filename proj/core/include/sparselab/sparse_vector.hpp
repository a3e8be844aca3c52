#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace sparselab {

using TermId = std::uint32_t;

// Sparse vector over an integer term vocabulary. Entries are kept sorted by
// term id, weights are strictly positive (zeros are dropped at construction,
// negatives rejected).
class SparseVector {
public:
    struct Entry {
        TermId term;
        float weight;
    };

    SparseVector() = default;
    explicit SparseVector(std::uint32_t vocab_size) : vocab_size_(vocab_size) {}

    // Entries may arrive in any order; duplicates are an error.
    static SparseVector from_entries(std::uint32_t vocab_size, std::vector<Entry> entries);
    static SparseVector from_dense(const std::vector<float>& dense);

    const std::vector<Entry>& entries() const { return entries_; }
    std::uint32_t vocab_size() const { return vocab_size_; }
    std::size_t nnz() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }

    std::vector<float> densify() const;

private:
    std::uint32_t vocab_size_ = 0;
    std::vector<Entry> entries_;
};

// Merge-based dot product; accumulates in double so that index scoring and
// dense oracles can be compared bit-exactly.
double dot(const SparseVector& a, const SparseVector& b);

// Bijection between surface tokens and term ids.
class Vocabulary {
public:
    Vocabulary() = default;

    TermId add(const std::string& token);  // returns existing id if present
    std::optional<TermId> lookup(const std::string& token) const;
    const std::string& token(TermId id) const;
    std::uint32_t size() const { return static_cast<std::uint32_t>(tokens_.size()); }

private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, TermId> ids_;
};

// JSON-lines vector files: {"id": "<string>", "vector": {"<termId>": <weight>, ...}}
// vocab_size 0 means infer as (max term id + 1) over the whole file.
std::vector<std::pair<std::string, SparseVector>> read_vectors_jsonl(const std::string& path,
                                                                     std::uint32_t vocab_size = 0);
void write_vectors_jsonl(const std::vector<std::pair<std::string, SparseVector>>& vectors,
                         const std::string& path);

}  // namespace sparselab
