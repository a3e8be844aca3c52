// Microbenchmarks for the hot paths: sparse dot products, exhaustive vs
// MaxScore retrieval, and query encoding. Built only when google-benchmark
// is available.

#include <benchmark/benchmark.h>

#include <random>
#include <set>
#include <vector>

#include "sparselab/encoder.hpp"
#include "sparselab/inverted_index.hpp"
#include "sparselab/retrieval.hpp"
#include "sparselab/sparse_vector.hpp"

using namespace sparselab;

namespace {

SparseVector random_vector(std::mt19937_64& rng, std::uint32_t vocab, int min_nnz, int max_nnz) {
    std::uniform_int_distribution<int> nnz_dist(min_nnz, max_nnz);
    std::uniform_int_distribution<TermId> term(0, vocab - 1);
    std::uniform_real_distribution<double> weight(0.1, 4.0);
    std::set<TermId> terms;
    int nnz = nnz_dist(rng);
    while (static_cast<int>(terms.size()) < nnz) terms.insert(term(rng));
    std::vector<SparseVector::Entry> entries;
    for (TermId t : terms) entries.push_back({t, weight(rng)});
    return SparseVector::from_entries(vocab, std::move(entries));
}

InvertedIndex make_index(std::size_t docs, std::uint32_t vocab) {
    std::mt19937_64 rng(42);
    std::vector<std::pair<std::string, SparseVector>> rows;
    rows.reserve(docs);
    for (std::size_t d = 0; d < docs; ++d) {
        rows.emplace_back("d" + std::to_string(d), random_vector(rng, vocab, 8, 16));
    }
    return InvertedIndex::build(rows);
}

void bm_dot(benchmark::State& state) {
    std::mt19937_64 rng(7);
    const std::uint32_t vocab = 4096;
    int nnz = static_cast<int>(state.range(0));
    SparseVector a = random_vector(rng, vocab, nnz, nnz);
    SparseVector b = random_vector(rng, vocab, nnz, nnz);
    for (auto _ : state) benchmark::DoNotOptimize(dot(a, b));
}
BENCHMARK(bm_dot)->Arg(8)->Arg(64)->Arg(512);

void bm_retrieve_exhaustive(benchmark::State& state) {
    static InvertedIndex index = make_index(50000, 2048);
    std::mt19937_64 rng(9);
    SparseVector query = random_vector(rng, 2048, static_cast<int>(state.range(0)),
                                       static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(retrieve_exhaustive(index, query, 10));
}
BENCHMARK(bm_retrieve_exhaustive)->Arg(2)->Arg(8)->Arg(32);

void bm_retrieve_maxscore(benchmark::State& state) {
    static InvertedIndex index = make_index(50000, 2048);
    std::mt19937_64 rng(9);
    SparseVector query = random_vector(rng, 2048, static_cast<int>(state.range(0)),
                                       static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(retrieve_maxscore(index, query, 10));
}
BENCHMARK(bm_retrieve_maxscore)->Arg(2)->Arg(8)->Arg(32);

void bm_encode(benchmark::State& state) {
    std::mt19937_64 rng(11);
    EncoderParams params = EncoderParams::random(4096, static_cast<std::uint32_t>(state.range(0)),
                                                 true, rng);
    std::uniform_int_distribution<TermId> term(0, 4095);
    std::vector<TermId> tokens;
    for (int i = 0; i < 16; ++i) tokens.push_back(term(rng));
    for (auto _ : state) benchmark::DoNotOptimize(encode(params, tokens));
}
BENCHMARK(bm_encode)->Arg(4)->Arg(32)->Arg(128);

}  // namespace

BENCHMARK_MAIN();
