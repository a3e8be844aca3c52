#include "sparselab/retrieval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace sparselab {

namespace {

constexpr double kInfinity = std::numeric_limits<double>::infinity();
constexpr DocId kNoDoc = std::numeric_limits<DocId>::max();

struct Hit {
    DocId doc;
    double score;
};

// true when a beats b: higher score first, ties by ascending internal doc id
bool better(const Hit& a, const Hit& b) {
    return a.score > b.score || (a.score == b.score && a.doc < b.doc);
}

// Bounded top-k collector; top() of the underlying heap is the current worst.
class TopK {
public:
    explicit TopK(std::uint32_t k) : k_(k) {}

    bool full() const { return heap_.size() >= k_; }
    double threshold() const { return full() ? heap_.front().score : -kInfinity; }

    void insert(Hit h) {
        if (!full()) {
            heap_.push_back(h);
            std::push_heap(heap_.begin(), heap_.end(), better);
        } else if (better(h, heap_.front())) {
            std::pop_heap(heap_.begin(), heap_.end(), better);
            heap_.back() = h;
            std::push_heap(heap_.begin(), heap_.end(), better);
        }
    }

    std::vector<Hit> sorted_desc() {
        std::vector<Hit> out = std::move(heap_);
        std::sort(out.begin(), out.end(), better);
        return out;
    }

private:
    std::uint32_t k_;
    std::vector<Hit> heap_;
};

// Conservative pruning comparison: an upper bound accumulated in a different
// floating-point order than the exact rescore must not drop a true tie.
bool safely_below(double bound, double threshold) {
    if (threshold == -kInfinity) return false;
    return bound < threshold - (std::abs(threshold) * 1e-10 + 1e-300);
}

struct Cursor {
    const std::vector<Posting>* postings;
    std::size_t pos = 0;
    double weight = 0.0;       // query-side weight
    double max_contrib = 0.0;  // weight * max impact

    DocId doc() const { return pos < postings->size() ? (*postings)[pos].doc : kNoDoc; }
    float impact() const { return (*postings)[pos].impact; }
    void advance() { ++pos; }
    void seek(DocId target) {
        auto it = std::lower_bound(postings->begin() + static_cast<std::ptrdiff_t>(pos),
                                   postings->end(), target,
                                   [](const Posting& p, DocId d) { return p.doc < d; });
        pos = static_cast<std::size_t>(it - postings->begin());
    }
};

// Cursors in ascending term-id order; skips query terms with no posting list.
std::vector<Cursor> make_cursors(const InvertedIndex& index, const SparseVector& query) {
    if (query.vocab_size() != index.vocab_size()) {
        throw std::invalid_argument("query vocabulary size does not match index");
    }
    std::vector<Cursor> cursors;
    for (const auto& e : query.entries()) {
        const PostingList* pl = index.list(e.term);
        if (pl == nullptr || pl->postings.empty()) continue;
        Cursor c;
        c.postings = &pl->postings;
        c.weight = static_cast<double>(e.weight);
        c.max_contrib = c.weight * static_cast<double>(pl->max_impact);
        cursors.push_back(c);
    }
    return cursors;
}

// Exact score of one document, always accumulated in ascending term-id order
// so that exhaustive and pruned retrieval produce bit-identical scores.
double rescore(const std::vector<Cursor>& term_order, DocId doc) {
    double score = 0.0;
    for (const Cursor& c : term_order) {
        auto it = std::lower_bound(c.postings->begin(), c.postings->end(), doc,
                                   [](const Posting& p, DocId d) { return p.doc < d; });
        if (it != c.postings->end() && it->doc == doc) {
            score += c.weight * static_cast<double>(it->impact);
        }
    }
    return score;
}

RunList finalize(const InvertedIndex& index, TopK& topk, std::uint32_t k,
                 const std::string& query_id) {
    RunList run;
    run.query_id = query_id;
    run.k = k;
    std::uint32_t rank = 1;
    for (const Hit& h : topk.sorted_desc()) {
        run.hits.push_back({index.external_id(h.doc), h.score, rank++});
    }
    return run;
}

}  // namespace

RunList retrieve_exhaustive(const InvertedIndex& index, const SparseVector& query,
                            std::uint32_t k, const std::string& query_id) {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    std::vector<Cursor> cursors = make_cursors(index, query);
    TopK topk(k);
    while (true) {
        DocId cur = kNoDoc;
        for (const Cursor& c : cursors) cur = std::min(cur, c.doc());
        if (cur == kNoDoc) break;
        double score = 0.0;
        for (Cursor& c : cursors) {
            if (c.doc() == cur) {
                score += c.weight * static_cast<double>(c.impact());
                c.advance();
            }
        }
        topk.insert({cur, score});
    }
    return finalize(index, topk, k, query_id);
}

RunList retrieve_maxscore(const InvertedIndex& index, const SparseVector& query,
                          std::uint32_t k, const std::string& query_id) {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    std::vector<Cursor> term_order = make_cursors(index, query);
    TopK topk(k);
    if (term_order.empty()) return finalize(index, topk, k, query_id);

    // Work cursors sorted by ascending max contribution; prefix sums bound the
    // best score attainable using only lists [0, i].
    std::vector<Cursor> cursors = term_order;
    std::sort(cursors.begin(), cursors.end(),
              [](const Cursor& a, const Cursor& b) { return a.max_contrib < b.max_contrib; });
    const std::size_t m = cursors.size();
    std::vector<double> upper(m);
    upper[0] = cursors[0].max_contrib;
    for (std::size_t i = 1; i < m; ++i) upper[i] = upper[i - 1] + cursors[i].max_contrib;

    std::size_t first_essential = 0;
    while (first_essential < m) {
        DocId cur = kNoDoc;
        for (std::size_t i = first_essential; i < m; ++i) cur = std::min(cur, cursors[i].doc());
        if (cur == kNoDoc) break;

        double partial = 0.0;
        for (std::size_t i = first_essential; i < m; ++i) {
            if (cursors[i].doc() == cur) {
                partial += cursors[i].weight * static_cast<double>(cursors[i].impact());
                cursors[i].advance();
            }
        }

        bool pruned = false;
        for (std::size_t i = first_essential; i-- > 0;) {
            if (safely_below(partial + upper[i], topk.threshold())) {
                pruned = true;
                break;
            }
            cursors[i].seek(cur);
            if (cursors[i].doc() == cur) {
                partial += cursors[i].weight * static_cast<double>(cursors[i].impact());
            }
        }
        if (!pruned) {
            topk.insert({cur, rescore(term_order, cur)});
            while (first_essential < m &&
                   safely_below(upper[first_essential], topk.threshold())) {
                ++first_essential;
            }
        }
    }
    return finalize(index, topk, k, query_id);
}

RunList score_bm25(const InvertedIndex& index, const std::vector<TermId>& query_terms,
                   const BM25Params& params, std::uint32_t k, const std::string& query_id) {
    if (!index.term_frequency()) {
        throw std::invalid_argument("BM25 requires a term-frequency index");
    }
    if (k < 1) throw std::invalid_argument("k must be >= 1");

    // Duplicate query terms contribute once per occurrence.
    std::map<TermId, double> occurrences;
    for (TermId t : query_terms) occurrences[t] += 1.0;

    const double n = static_cast<double>(index.doc_count());
    struct Bm25Cursor {
        Cursor base;
        double idf_weight;  // qtf * idf
    };
    std::vector<Bm25Cursor> cursors;
    for (auto [term, qtf] : occurrences) {
        const PostingList* pl = index.list(term);
        if (pl == nullptr || pl->postings.empty()) continue;
        double df = static_cast<double>(pl->postings.size());
        double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
        Bm25Cursor c;
        c.base.postings = &pl->postings;
        c.idf_weight = qtf * idf;
        cursors.push_back(c);
    }

    TopK topk(k);
    while (true) {
        DocId cur = kNoDoc;
        for (const auto& c : cursors) cur = std::min(cur, c.base.doc());
        if (cur == kNoDoc) break;
        double len_norm = params.k1 * (1.0 - params.b +
                                       params.b * index.doc_length(cur) / index.avg_doc_length());
        double score = 0.0;
        for (auto& c : cursors) {
            if (c.base.doc() == cur) {
                double tf = static_cast<double>(c.base.impact());
                score += c.idf_weight * tf / (tf + len_norm);
                c.base.advance();
            }
        }
        topk.insert({cur, score});
    }
    return finalize(index, topk, k, query_id);
}

StopWordList::StopWordList(std::vector<std::string> words) {
    for (auto& w : words) {
        for (auto& c : w) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        words_.insert(std::move(w));
    }
}

StopWordList StopWordList::lucene_english() {
    return StopWordList({"a",    "an",   "and",  "are",   "as",   "at",   "be",   "but", "by",
                         "for",  "if",   "in",   "into",  "is",   "it",   "no",   "not", "of",
                         "on",   "or",   "such", "that",  "the",  "their", "then", "there",
                         "these", "they", "this", "to",   "was",  "will", "with"});
}

StopWordList StopWordList::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open stop-word file: " + path);
    std::vector<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (!line.empty()) words.push_back(line);
    }
    return StopWordList(std::move(words));
}

bool StopWordList::contains(const std::string& token) const {
    std::string lower = token;
    for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return words_.count(lower) > 0;
}

std::vector<std::string> remove_stop_words(const std::vector<std::string>& tokens,
                                           const StopWordList& list) {
    std::vector<std::string> kept;
    kept.reserve(tokens.size());
    for (const auto& tok : tokens) {
        if (!list.contains(tok)) kept.push_back(tok);
    }
    return kept;
}

SparseVector splade_doc_query(const std::vector<std::string>& tokens, const Vocabulary& vocab,
                              std::uint32_t vocab_size, bool stopped,
                              const StopWordList& stop_words) {
    std::vector<std::string> effective = stopped ? remove_stop_words(tokens, stop_words) : tokens;
    if (vocab_size == 0) vocab_size = std::max<std::uint32_t>(vocab.size(), 1);
    std::set<TermId> terms;
    for (const auto& tok : effective) {
        if (auto id = vocab.lookup(tok); id && *id < vocab_size) terms.insert(*id);
    }
    std::vector<SparseVector::Entry> entries;
    entries.reserve(terms.size());
    for (TermId t : terms) entries.push_back({t, 1.0f});
    return SparseVector::from_entries(vocab_size, std::move(entries));
}

void write_run_file(const std::vector<RunList>& runs, const std::string& path,
                    const std::string& tag) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write run file: " + path);
    out << std::fixed << std::setprecision(6);
    for (const RunList& run : runs) {
        for (const ScoredDoc& hit : run.hits) {
            out << run.query_id << " Q0 " << hit.doc << ' ' << hit.rank << ' ' << hit.score
                << ' ' << tag << '\n';
        }
    }
}

std::vector<RunList> read_run_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open run file: " + path);
    std::vector<RunList> runs;
    std::map<std::string, std::size_t> run_pos;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string qid, q0, docid, tag;
        std::uint32_t rank;
        double score;
        if (!(ls >> qid >> q0 >> docid >> rank >> score >> tag)) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": malformed run line");
        }
        auto [it, inserted] = run_pos.emplace(qid, runs.size());
        if (inserted) {
            runs.push_back(RunList{qid, 0, {}});
        }
        runs[it->second].hits.push_back({docid, score, rank});
    }
    for (RunList& run : runs) {
        std::sort(run.hits.begin(), run.hits.end(),
                  [](const ScoredDoc& a, const ScoredDoc& b) { return a.rank < b.rank; });
        run.k = static_cast<std::uint32_t>(run.hits.size());
    }
    return runs;
}

}  // namespace sparselab
