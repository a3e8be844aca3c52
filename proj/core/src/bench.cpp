#include "sparselab/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace sparselab {

namespace {

using Clock = std::chrono::steady_clock;

std::int64_t micros_since(Clock::time_point start) {
    return std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() - start).count();
}

SparseVector encode_query(const BenchQuery& query, const BenchOptions& options,
                          std::uint32_t vocab_size) {
    if (options.encoder != nullptr) return encode(*options.encoder, query.tokens);
    if (!query.precomputed) {
        throw std::invalid_argument("query " + query.id + " has no precomputed vector");
    }
    return *query.precomputed;
}

RunList run_retriever(const InvertedIndex& index, const SparseVector& vec,
                      const BenchOptions& options, const std::string& qid) {
    return options.retriever == RetrieverChoice::Exhaustive
               ? retrieve_exhaustive(index, vec, options.k, qid)
               : retrieve_maxscore(index, vec, options.k, qid);
}

LatencySample time_query(const InvertedIndex& index, const BenchQuery& query,
                         const BenchOptions& options, RunList* run_out = nullptr) {
    LatencySample sample;
    sample.query_id = query.id;
    auto t0 = Clock::now();
    SparseVector vec = encode_query(query, options, index.vocab_size());
    sample.encode_micros = micros_since(t0);
    auto t1 = Clock::now();
    RunList run = run_retriever(index, vec, options, query.id);
    sample.retrieve_micros = micros_since(t1);
    if (run_out != nullptr) *run_out = std::move(run);
    sample.total_micros = sample.encode_micros + sample.retrieve_micros;
    return sample;
}

double order_statistic_ms(std::vector<std::int64_t>& totals, double quantile) {
    std::sort(totals.begin(), totals.end());
    auto n = static_cast<double>(totals.size());
    std::size_t idx = static_cast<std::size_t>(std::ceil(quantile * n));
    idx = std::max<std::size_t>(idx, 1);
    return static_cast<double>(totals[idx - 1]) / 1000.0;
}

}  // namespace

LatencyReport aggregate_samples(std::vector<LatencySample> samples, int workers,
                                double wall_clock_seconds) {
    if (samples.empty()) throw std::invalid_argument("no latency samples");
    LatencyReport report;
    report.workers = workers;
    double total = 0.0, encode_total = 0.0, retrieve_total = 0.0;
    std::vector<std::int64_t> totals;
    totals.reserve(samples.size());
    for (const LatencySample& s : samples) {
        total += static_cast<double>(s.total_micros);
        encode_total += static_cast<double>(s.encode_micros);
        retrieve_total += static_cast<double>(s.retrieve_micros);
        totals.push_back(s.total_micros);
    }
    auto n = static_cast<double>(samples.size());
    report.mean_ms = total / n / 1000.0;
    report.mean_encode_ms = encode_total / n / 1000.0;
    report.mean_retrieve_ms = retrieve_total / n / 1000.0;
    report.p50_ms = order_statistic_ms(totals, 0.50);
    report.p99_ms = order_statistic_ms(totals, 0.99);
    if (wall_clock_seconds > 0.0) report.qps = n / wall_clock_seconds;
    report.samples = std::move(samples);
    return report;
}

LatencyReport bench_latency(const InvertedIndex& index, const std::vector<BenchQuery>& queries,
                            const BenchOptions& options) {
    if (queries.empty()) throw std::invalid_argument("empty query set");
    if (options.warmup_passes < 0) throw std::invalid_argument("warmup must be >= 0");

    for (int pass = 0; pass < options.warmup_passes; ++pass) {
        for (const BenchQuery& q : queries) time_query(index, q, options);
    }

    std::vector<LatencySample> samples;
    samples.reserve(queries.size() * static_cast<std::size_t>(options.measure_passes));
    auto wall_start = Clock::now();
    for (int pass = 0; pass < options.measure_passes; ++pass) {
        for (const BenchQuery& q : queries) samples.push_back(time_query(index, q, options));
    }
    double wall = static_cast<double>(micros_since(wall_start)) / 1e6;
    return aggregate_samples(std::move(samples), 1, wall);
}

LatencyReport bench_qps(const InvertedIndex& index, const std::vector<BenchQuery>& queries,
                        const BenchOptions& options, int workers,
                        std::vector<RunList>* results_out) {
    if (workers < 1) throw std::invalid_argument("workers must be >= 1");
    if (queries.empty()) throw std::invalid_argument("empty query set");
    int host_cap = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    workers = std::min(workers, std::min(host_cap, 128));

    for (int pass = 0; pass < options.warmup_passes; ++pass) {
        for (const BenchQuery& q : queries) time_query(index, q, options);
    }

    const std::size_t total_jobs = queries.size() * static_cast<std::size_t>(options.measure_passes);
    std::atomic<std::size_t> next{0};
    std::mutex sink_mutex;
    std::vector<LatencySample> samples;
    samples.reserve(total_jobs);
    if (results_out != nullptr) results_out->assign(total_jobs, RunList{});

    auto wall_start = Clock::now();
    auto worker = [&]() {
        std::vector<LatencySample> local;
        for (;;) {
            std::size_t job = next.fetch_add(1, std::memory_order_relaxed);
            if (job >= total_jobs) break;
            RunList* out = results_out != nullptr ? &(*results_out)[job] : nullptr;
            local.push_back(time_query(index, queries[job % queries.size()], options, out));
        }
        std::lock_guard<std::mutex> lock(sink_mutex);
        samples.insert(samples.end(), local.begin(), local.end());
    };
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    double wall = static_cast<double>(micros_since(wall_start)) / 1e6;

    return aggregate_samples(std::move(samples), workers, wall);
}

std::vector<RunList> bench_results(const InvertedIndex& index,
                                   const std::vector<BenchQuery>& queries,
                                   const BenchOptions& options) {
    std::vector<RunList> runs;
    runs.reserve(queries.size());
    for (const BenchQuery& q : queries) {
        runs.push_back(run_retriever(index, encode_query(q, options, index.vocab_size()),
                                     options, q.id));
    }
    return runs;
}

void write_latency_csv(const LatencyReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write latency report: " + path);
    out << "query,encode_us,retrieve_us,total_us\n";
    for (const LatencySample& s : report.samples) {
        out << s.query_id << ',' << s.encode_micros << ',' << s.retrieve_micros << ','
            << s.total_micros << '\n';
    }
    out << "# " << summary_line(report) << '\n';
    if (!report.environment.empty()) out << "# env: " << report.environment << '\n';
}

std::string summary_line(const LatencyReport& report) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%.3f,%.3f,%.3f,%.1f,%d", report.mean_ms, report.p50_ms,
                  report.p99_ms, report.qps, report.workers);
    return buf;
}

}  // namespace sparselab
