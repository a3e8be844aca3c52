#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sparselab/encoder.hpp"
#include "sparselab/inverted_index.hpp"
#include "sparselab/retrieval.hpp"
#include "sparselab/sparse_vector.hpp"

namespace sparselab {

struct LatencySample {
    std::string query_id;
    std::int64_t encode_micros = 0;
    std::int64_t retrieve_micros = 0;
    std::int64_t total_micros = 0;  // always encode + retrieve exactly
};

struct LatencyReport {
    std::vector<LatencySample> samples;
    double mean_ms = 0.0;
    double p50_ms = 0.0;
    double p99_ms = 0.0;  // ceil(0.99 * n) order statistic
    double mean_encode_ms = 0.0;
    double mean_retrieve_ms = 0.0;
    int workers = 1;
    double qps = 0.0;  // total queries / wall clock, reported when measured
    std::string environment;
};

// Query as presented to the bench: token ids for the encoder, or a
// precomputed vector (table lookup, encode time ~ 0).
struct BenchQuery {
    std::string id;
    std::vector<TermId> tokens;
    std::optional<SparseVector> precomputed;
};

enum class RetrieverChoice { Exhaustive, MaxScore };

struct BenchOptions {
    RetrieverChoice retriever = RetrieverChoice::MaxScore;
    const EncoderParams* encoder = nullptr;  // nullptr: use precomputed vectors
    std::uint32_t k = 10;
    int warmup_passes = 10;
    int measure_passes = 3;
};

// Aggregation is a pure function of the samples (plus wall clock for QPS).
LatencyReport aggregate_samples(std::vector<LatencySample> samples, int workers,
                                double wall_clock_seconds = 0.0);

// Mono-cpu latency: every query timed individually after the warmup passes,
// latency = encode time + retrieve time.
LatencyReport bench_latency(const InvertedIndex& index, const std::vector<BenchQuery>& queries,
                            const BenchOptions& options);

// Throughput: `workers` threads drain a shared query queue over the immutable
// index. Hit lists are identical to single-worker retrieval; pass results_out
// to capture them (one RunList per job, in job order).
LatencyReport bench_qps(const InvertedIndex& index, const std::vector<BenchQuery>& queries,
                        const BenchOptions& options, int workers,
                        std::vector<RunList>* results_out = nullptr);

// Retrieval exactly as timed by the bench, for result-identity checks.
std::vector<RunList> bench_results(const InvertedIndex& index,
                                   const std::vector<BenchQuery>& queries,
                                   const BenchOptions& options);

void write_latency_csv(const LatencyReport& report, const std::string& path);
std::string summary_line(const LatencyReport& report);  // mean_ms,p50_ms,p99_ms,qps,workers

}  // namespace sparselab
