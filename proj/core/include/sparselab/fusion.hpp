#pragma once

#include <cstdint>

#include "sparselab/retrieval.hpp"

namespace sparselab {

struct FusionConfig {
    std::uint32_t depth = 100;  // each run truncated to this before fusion
    double weight_a = 0.5;
    double weight_b = 0.5;      // weights must sum to 1
    std::uint32_t k = 100;      // output depth
};

// Min-max fusion of two runs for the same query: docs missing from a run get
// that run's minimum score, each run is normalized to [0,1] by its own
// min/max (degenerate range -> all 0), fused score is the weighted sum.
// Ties are broken by ascending doc id.
RunList fuse(const RunList& run_a, const RunList& run_b, const FusionConfig& config);

// Query-by-query fusion of two parsed run files; queries present in only one
// file are fused against an empty run.
std::vector<RunList> fuse_all(const std::vector<RunList>& runs_a,
                              const std::vector<RunList>& runs_b, const FusionConfig& config);

}  // namespace sparselab
