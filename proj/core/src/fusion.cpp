#include "sparselab/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace sparselab {

namespace {

struct NormalizedRun {
    std::map<std::string, double> scores;  // doc -> normalized score
    double floor = 0.0;                    // normalized value for missing docs (min -> 0)
};

NormalizedRun normalize(const RunList& run, std::uint32_t depth) {
    NormalizedRun out;
    std::size_t n = std::min<std::size_t>(run.hits.size(), depth);
    if (n == 0) return out;
    double lo = run.hits[0].score, hi = run.hits[0].score;
    for (std::size_t i = 0; i < n; ++i) {
        lo = std::min(lo, run.hits[i].score);
        hi = std::max(hi, run.hits[i].score);
    }
    double range = hi - lo;
    for (std::size_t i = 0; i < n; ++i) {
        // degenerate range: an uninformative run contributes nothing
        double norm = range > 0.0 ? (run.hits[i].score - lo) / range : 0.0;
        out.scores.emplace(run.hits[i].doc, norm);
    }
    return out;
}

}  // namespace

RunList fuse(const RunList& run_a, const RunList& run_b, const FusionConfig& config) {
    if (run_a.query_id != run_b.query_id) {
        throw std::invalid_argument("fuse: mismatched query ids (" + run_a.query_id + " vs " +
                                    run_b.query_id + ")");
    }
    if (config.depth < 1) throw std::invalid_argument("fusion depth must be >= 1");
    if (std::abs(config.weight_a + config.weight_b - 1.0) > 1e-9 || config.weight_a < 0.0 ||
        config.weight_b < 0.0) {
        throw std::invalid_argument("fusion weights must be non-negative and sum to 1");
    }

    NormalizedRun a = normalize(run_a, config.depth);
    NormalizedRun b = normalize(run_b, config.depth);

    // Missing docs carry the run's minimum score, which normalizes to 0.
    std::map<std::string, double> fused;
    for (const auto& [doc, norm] : a.scores) {
        fused[doc] = config.weight_a * norm;
    }
    for (const auto& [doc, norm] : b.scores) {
        auto [it, inserted] = fused.emplace(doc, 0.0);
        it->second += config.weight_b * norm;
    }

    std::vector<ScoredDoc> hits;
    hits.reserve(fused.size());
    for (const auto& [doc, score] : fused) hits.push_back({doc, score, 0});
    std::stable_sort(hits.begin(), hits.end(), [](const ScoredDoc& x, const ScoredDoc& y) {
        return x.score > y.score || (x.score == y.score && x.doc < y.doc);
    });
    if (hits.size() > config.k) hits.resize(config.k);

    RunList out;
    out.query_id = run_a.query_id;
    out.k = config.k;
    std::uint32_t rank = 1;
    for (ScoredDoc& h : hits) h.rank = rank++;
    out.hits = std::move(hits);
    return out;
}

std::vector<RunList> fuse_all(const std::vector<RunList>& runs_a,
                              const std::vector<RunList>& runs_b, const FusionConfig& config) {
    std::map<std::string, const RunList*> by_id_b;
    for (const RunList& run : runs_b) by_id_b.emplace(run.query_id, &run);

    std::vector<RunList> out;
    std::map<std::string, bool> seen;
    for (const RunList& run : runs_a) {
        RunList empty{run.query_id, 0, {}};
        auto it = by_id_b.find(run.query_id);
        out.push_back(fuse(run, it == by_id_b.end() ? empty : *it->second, config));
        seen[run.query_id] = true;
    }
    for (const RunList& run : runs_b) {
        if (seen.count(run.query_id)) continue;
        RunList empty{run.query_id, 0, {}};
        out.push_back(fuse(empty, run, config));
    }
    return out;
}

}  // namespace sparselab
