#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sparselab/sparse_vector.hpp"

namespace sparselab {

// Per-token importance logits over the vocabulary, ReLU-clamped (optionally
// log-saturated) and max-pooled into a sparse vector.
struct EncoderParams {
    Eigen::MatrixXd token_embedding;  // |V| x h
    Eigen::MatrixXd projection;       // h x |V|
    Eigen::VectorXd bias;             // |V|
    bool saturate = true;             // act(z) = ln(1 + relu(z)) instead of relu(z)

    std::uint32_t vocab_size() const { return static_cast<std::uint32_t>(bias.size()); }
    int hidden() const { return static_cast<int>(token_embedding.cols()); }

    // Uniform init in [-0.1, 0.1] from the given generator.
    static EncoderParams random(std::uint32_t vocab_size, int hidden, bool saturate,
                                std::mt19937_64& rng);
};

struct EncoderPair {
    EncoderParams query;
    EncoderParams doc;
    bool shared = false;

    const EncoderParams& query_params() const { return shared ? doc : query; }
    const EncoderParams& doc_params() const { return doc; }
};

struct EncoderGrads {
    Eigen::MatrixXd token_embedding;
    Eigen::MatrixXd projection;
    Eigen::VectorXd bias;

    static EncoderGrads zeros_like(const EncoderParams& p);
};

// Dense form of an encoding plus the per-slot argmax needed for the backward
// pass. argmax[j] = -1 when rep[j] == 0 (all logits in the ReLU dead zone).
struct DenseEncoding {
    Eigen::VectorXd rep;          // |V|
    std::vector<int> argmax;      // position index per vocabulary slot
};

DenseEncoding encode_dense(const EncoderParams& params, const std::vector<TermId>& tokens);

SparseVector encode(const EncoderParams& params, const std::vector<TermId>& tokens);

// Accumulates d(upstream . rep)/d(params) into grads. Max-pool routes gradient
// only to the argmax position per slot (ties resolved to the lowest position).
void encode_gradient_accumulate(const EncoderParams& params, const std::vector<TermId>& tokens,
                                const DenseEncoding& enc, const Eigen::VectorXd& upstream,
                                EncoderGrads& grads);

EncoderGrads encode_gradient(const EncoderParams& params, const std::vector<TermId>& tokens,
                             const Eigen::VectorXd& upstream);

// Versioned binary checkpoint: both encoders, hidden sizes, saturate flags and
// the key=value training config that produced them.
void save_checkpoint(const EncoderPair& pair, const std::string& config_text,
                     const std::string& path);
EncoderPair load_checkpoint(const std::string& path, std::string* config_text = nullptr);

}  // namespace sparselab
