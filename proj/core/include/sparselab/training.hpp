#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sparselab/encoder.hpp"
#include "sparselab/inverted_index.hpp"
#include "sparselab/sparse_vector.hpp"

namespace sparselab {

// Quadratic ramp from 0 to target over warmup_steps, constant afterwards.
struct LambdaSchedule {
    double target = 0.0;
    int warmup_steps = 1;

    double at(int step) const;
};

enum class RegularizerKind { Flops, L1 };

struct TrainConfig {
    std::string preset;  // empty, or one of S, M, L, S-flops, M-flops, L-flops
    double lambda_q = 5e-3;
    double lambda_d = 5e-3;
    RegularizerKind q_reg = RegularizerKind::L1;
    RegularizerKind d_reg = RegularizerKind::Flops;
    bool shared_encoders = false;
    bool splade_doc = false;
    int steps = 2000;
    int splade_doc_step_ratio = 5;  // splade-doc runs steps / ratio
    int batch_size = 4;
    double learning_rate = 1e-2;
    std::optional<std::uint64_t> seed;  // mandatory before training
    int scheduler_steps = 500;
    int hidden_q = 4;
    int hidden_d = 32;
    bool saturate = true;
    std::uint32_t vocab_size = 1024;
    int num_docs = 2000;
    int num_queries = 200;
    int num_heldout = 100;
    int candidates = 4;

    void apply_preset(const std::string& name);
    static TrainConfig from_file(const std::string& path);
    void apply_line(const std::string& key, const std::string& value);
    std::string to_text() const;  // key=value serialization
    int effective_steps() const;
};

struct QueryInstance {
    std::string id;
    std::vector<TermId> tokens;
    std::uint32_t target_doc = 0;
    std::vector<std::uint32_t> candidates;  // doc indices; first is the lexical match
    std::vector<double> teacher_scores;     // aligned with candidates
};

// Desk-scale distillation task: Zipf-token documents, queries drawn from a
// target document, BM25 acts as teacher.
struct SyntheticTask {
    std::uint32_t vocab_size = 0;
    std::vector<std::vector<TermId>> docs;
    std::vector<QueryInstance> train_queries;
    std::vector<QueryInstance> heldout_queries;
    InvertedIndex tf_index;  // teacher index over the documents
};

SyntheticTask build_synthetic_task(std::uint64_t seed, std::uint32_t vocab_size, int num_docs,
                                   int num_queries, int num_heldout = 100, int candidates = 4);

// --- losses (activations are N x |V| row-wise batch matrices, entries >= 0) ---

double flops_loss(const Eigen::MatrixXd& activations);          // sum_j (mean_i a_ij)^2
Eigen::MatrixXd flops_loss_grad(const Eigen::MatrixXd& activations);

double l1_loss(const Eigen::MatrixXd& activations);             // (1/N) sum_ij a_ij
Eigen::MatrixXd l1_loss_grad(const Eigen::MatrixXd& activations);

// KL(softmax(teacher) || softmax(student)), natural log; m >= 2.
double kl_distill_loss(const Eigen::VectorXd& teacher, const Eigen::VectorXd& student);
Eigen::VectorXd kl_distill_grad(const Eigen::VectorXd& teacher, const Eigen::VectorXd& student);

struct TrainingBatch {
    std::vector<const QueryInstance*> queries;
};

struct LossParts {
    double total = 0.0;
    double distill = 0.0;
    double q_reg = 0.0;
    double d_reg = 0.0;
    double mean_q_nnz = 0.0;
    double mean_d_nnz = 0.0;
};

struct PairGrads {
    EncoderGrads query;
    EncoderGrads doc;
};

// Eq-1 style joint objective over one batch: KL distillation plus scheduled
// per-side sparsity regularization. Student score is dot(encode(q), encode(d));
// splade_doc replaces encode(q) with the uniform tokenized query and zeroes
// the query regularizer.
LossParts joint_loss(const TrainingBatch& batch, const SyntheticTask& task,
                     const EncoderPair& encoders, int step, const TrainConfig& config,
                     PairGrads* grads = nullptr);

struct LossRow {
    int step;
    double total, distill, q_reg, d_reg, lambda_q, lambda_d, mean_q_nnz, mean_d_nnz;
};

struct TrainRun {
    EncoderPair encoders;
    std::vector<LossRow> history;
    TrainConfig config;
    double final_mean_q_nnz = 0.0;  // over the full train query set
    double final_mean_d_nnz = 0.0;  // over (a sample of) the corpus
};

// Deterministic given (config, task): identical loss history and parameters
// across runs. Aborts with a diagnostic naming the step on non-finite loss.
TrainRun train_loop(const TrainConfig& config, const SyntheticTask& task);

void write_loss_csv(const std::vector<LossRow>& history, const std::string& path);

}  // namespace sparselab
