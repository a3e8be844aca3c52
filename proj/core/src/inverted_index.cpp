#include "sparselab/inverted_index.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <fstream>
#include <map>
#include <stdexcept>
#include <unordered_set>

namespace sparselab {

namespace {

constexpr char kMagic[8] = {'S', 'L', 'I', 'D', 'X', '0', '0', '1'};

template <typename T>
void write_pod(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
    T v;
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw std::runtime_error("index file truncated");
    return v;
}

void write_string(std::ostream& out, const std::string& s) {
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& in) {
    auto len = read_pod<std::uint32_t>(in);
    std::string s(len, '\0');
    in.read(s.data(), len);
    if (!in) throw std::runtime_error("index file truncated");
    return s;
}

}  // namespace

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string cur;
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        } else if (!cur.empty()) {
            tokens.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

InvertedIndex InvertedIndex::build(const std::vector<std::pair<std::string, SparseVector>>& docs,
                                   bool term_frequency, const Vocabulary* vocab) {
    if (docs.empty()) throw std::invalid_argument("cannot build index from empty collection");

    InvertedIndex idx;
    idx.term_frequency_ = term_frequency;
    idx.vocab_size_ = docs.front().second.vocab_size();
    if (vocab) idx.vocab_ = *vocab;

    std::unordered_set<std::string> seen;
    std::map<TermId, std::vector<Posting>> lists;
    double total_length = 0.0;
    for (DocId d = 0; d < docs.size(); ++d) {
        const auto& [ext_id, vec] = docs[d];
        if (!seen.insert(ext_id).second) {
            throw std::invalid_argument("duplicate external document id: " + ext_id);
        }
        if (vec.vocab_size() != idx.vocab_size_) {
            throw std::invalid_argument("vocabulary size mismatch for document " + ext_id);
        }
        idx.doc_ids_.push_back(ext_id);
        double length = 0.0;
        for (const auto& e : vec.entries()) {
            lists[e.term].push_back({d, e.weight});
            length += term_frequency ? static_cast<double>(e.weight) : 1.0;
        }
        idx.doc_lengths_.push_back(length);
        total_length += length;
    }
    idx.avg_doc_length_ = total_length / static_cast<double>(docs.size());

    idx.lists_.reserve(lists.size());
    for (auto& [term, postings] : lists) {
        PostingList pl;
        pl.term = term;
        pl.max_impact = 0.0f;
        for (const Posting& p : postings) pl.max_impact = std::max(pl.max_impact, p.impact);
        pl.postings = std::move(postings);  // already ascending: docs visited in order
        idx.term_pos_.emplace(term, idx.lists_.size());
        idx.lists_.push_back(std::move(pl));
    }
    return idx;
}

InvertedIndex InvertedIndex::build_from_tsv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open collection file: " + path);

    Vocabulary vocab;
    std::vector<std::pair<std::string, std::vector<std::string>>> raw_docs;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": missing tab separator");
        }
        raw_docs.emplace_back(line.substr(0, tab), tokenize(line.substr(tab + 1)));
        for (const auto& tok : raw_docs.back().second) vocab.add(tok);
    }
    if (raw_docs.empty()) throw std::runtime_error("empty collection: " + path);

    std::vector<std::pair<std::string, SparseVector>> docs;
    docs.reserve(raw_docs.size());
    for (auto& [id, tokens] : raw_docs) {
        std::map<TermId, float> tf;
        for (const auto& tok : tokens) tf[*vocab.lookup(tok)] += 1.0f;
        std::vector<SparseVector::Entry> entries;
        entries.reserve(tf.size());
        for (auto [term, count] : tf) entries.push_back({term, count});
        docs.emplace_back(std::move(id),
                          SparseVector::from_entries(vocab.size(), std::move(entries)));
    }
    return build(docs, /*term_frequency=*/true, &vocab);
}

void InvertedIndex::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write index file: " + path);
    out.write(kMagic, sizeof(kMagic));
    write_pod<std::uint8_t>(out, term_frequency_ ? 1 : 0);
    write_pod<std::uint32_t>(out, vocab_size_);
    write_pod<std::uint64_t>(out, doc_ids_.size());
    write_pod<double>(out, avg_doc_length_);
    for (const auto& id : doc_ids_) write_string(out, id);
    for (double len : doc_lengths_) write_pod<double>(out, len);
    write_pod<std::uint32_t>(out, vocab_.size());
    for (TermId t = 0; t < vocab_.size(); ++t) write_string(out, vocab_.token(t));
    write_pod<std::uint64_t>(out, lists_.size());
    for (const auto& pl : lists_) {
        write_pod<std::uint32_t>(out, pl.term);
        write_pod<float>(out, pl.max_impact);
        write_pod<std::uint64_t>(out, pl.postings.size());
        for (const Posting& p : pl.postings) {
            write_pod<std::uint32_t>(out, p.doc);
            write_pod<float>(out, p.impact);
        }
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

InvertedIndex InvertedIndex::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open index file: " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw std::runtime_error("bad index file " + path + ": expected format SLIDX001");
    }
    InvertedIndex idx;
    idx.term_frequency_ = read_pod<std::uint8_t>(in) != 0;
    idx.vocab_size_ = read_pod<std::uint32_t>(in);
    auto n = read_pod<std::uint64_t>(in);
    idx.avg_doc_length_ = read_pod<double>(in);
    idx.doc_ids_.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) idx.doc_ids_.push_back(read_string(in));
    idx.doc_lengths_.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) idx.doc_lengths_.push_back(read_pod<double>(in));
    auto vocab_count = read_pod<std::uint32_t>(in);
    for (std::uint32_t i = 0; i < vocab_count; ++i) idx.vocab_.add(read_string(in));
    auto term_count = read_pod<std::uint64_t>(in);
    idx.lists_.reserve(term_count);
    for (std::uint64_t i = 0; i < term_count; ++i) {
        PostingList pl;
        pl.term = read_pod<std::uint32_t>(in);
        pl.max_impact = read_pod<float>(in);
        auto count = read_pod<std::uint64_t>(in);
        pl.postings.reserve(count);
        for (std::uint64_t p = 0; p < count; ++p) {
            Posting post;
            post.doc = read_pod<std::uint32_t>(in);
            post.impact = read_pod<float>(in);
            pl.postings.push_back(post);
        }
        idx.term_pos_.emplace(pl.term, idx.lists_.size());
        idx.lists_.push_back(std::move(pl));
    }
    return idx;
}

IndexStats InvertedIndex::stats() const {
    IndexStats s;
    s.doc_count = doc_ids_.size();
    s.term_count = lists_.size();
    for (const auto& pl : lists_) s.total_postings += pl.postings.size();
    s.mean_doc_nnz = s.doc_count == 0
                         ? 0.0
                         : static_cast<double>(s.total_postings) / static_cast<double>(s.doc_count);
    return s;
}

const PostingList* InvertedIndex::list(TermId term) const {
    auto it = term_pos_.find(term);
    return it == term_pos_.end() ? nullptr : &lists_[it->second];
}

}  // namespace sparselab
