#include "sparselab/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "sparselab/retrieval.hpp"

namespace sparselab {

double LambdaSchedule::at(int step) const {
    if (step >= warmup_steps) return target;
    double ratio = static_cast<double>(step) / static_cast<double>(warmup_steps);
    return target * ratio * ratio;
}

void TrainConfig::apply_preset(const std::string& name) {
    preset = name;
    if (name == "S") {
        lambda_q = 5e-3;
        lambda_d = 5e-3;
        q_reg = RegularizerKind::L1;
    } else if (name == "M" || name == "L") {
        lambda_q = 5e-4;
        lambda_d = 5e-4;
        q_reg = RegularizerKind::L1;
    } else if (name == "S-flops") {
        lambda_q = 0.1;
        lambda_d = 5e-3;
        q_reg = RegularizerKind::Flops;
    } else if (name == "M-flops") {
        lambda_q = 0.1;
        lambda_d = 5e-4;
        q_reg = RegularizerKind::Flops;
    } else if (name == "L-flops") {
        lambda_q = 0.01;
        lambda_d = 5e-4;
        q_reg = RegularizerKind::Flops;
    } else {
        throw std::invalid_argument("unknown preset: " + name);
    }
}

void TrainConfig::apply_line(const std::string& key, const std::string& value) {
    auto as_bool = [&](const std::string& v) {
        if (v == "true" || v == "1" || v == "yes") return true;
        if (v == "false" || v == "0" || v == "no") return false;
        throw std::invalid_argument("bad boolean value for " + key + ": " + v);
    };
    auto as_reg = [&](const std::string& v) {
        if (v == "flops") return RegularizerKind::Flops;
        if (v == "l1") return RegularizerKind::L1;
        throw std::invalid_argument("bad regularizer kind for " + key + ": " + v);
    };
    if (key == "preset") apply_preset(value);
    else if (key == "lambda_q") lambda_q = std::stod(value);
    else if (key == "lambda_d") lambda_d = std::stod(value);
    else if (key == "q_reg") q_reg = as_reg(value);
    else if (key == "d_reg") d_reg = as_reg(value);
    else if (key == "shared_encoders") shared_encoders = as_bool(value);
    else if (key == "splade_doc") splade_doc = as_bool(value);
    else if (key == "steps") steps = std::stoi(value);
    else if (key == "splade_doc_step_ratio") splade_doc_step_ratio = std::stoi(value);
    else if (key == "batch_size") batch_size = std::stoi(value);
    else if (key == "learning_rate") learning_rate = std::stod(value);
    else if (key == "seed") seed = std::stoull(value);
    else if (key == "scheduler_steps") scheduler_steps = std::stoi(value);
    else if (key == "hidden_q") hidden_q = std::stoi(value);
    else if (key == "hidden_d") hidden_d = std::stoi(value);
    else if (key == "saturate") saturate = as_bool(value);
    else if (key == "vocab_size") vocab_size = static_cast<std::uint32_t>(std::stoul(value));
    else if (key == "num_docs") num_docs = std::stoi(value);
    else if (key == "num_queries") num_queries = std::stoi(value);
    else if (key == "num_heldout") num_heldout = std::stoi(value);
    else if (key == "candidates") candidates = std::stoi(value);
    else throw std::invalid_argument("unknown training config key: " + key);
}

TrainConfig TrainConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open training config: " + path);
    TrainConfig config;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.pop_back();
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected key=value");
        }
        config.apply_line(line.substr(0, eq), line.substr(eq + 1));
    }
    return config;
}

std::string TrainConfig::to_text() const {
    std::ostringstream out;
    if (!preset.empty()) out << "preset=" << preset << '\n';
    out << "lambda_q=" << lambda_q << '\n'
        << "lambda_d=" << lambda_d << '\n'
        << "q_reg=" << (q_reg == RegularizerKind::Flops ? "flops" : "l1") << '\n'
        << "d_reg=" << (d_reg == RegularizerKind::Flops ? "flops" : "l1") << '\n'
        << "shared_encoders=" << (shared_encoders ? "true" : "false") << '\n'
        << "splade_doc=" << (splade_doc ? "true" : "false") << '\n'
        << "steps=" << steps << '\n'
        << "splade_doc_step_ratio=" << splade_doc_step_ratio << '\n'
        << "batch_size=" << batch_size << '\n'
        << "learning_rate=" << learning_rate << '\n';
    if (seed) out << "seed=" << *seed << '\n';
    out << "scheduler_steps=" << scheduler_steps << '\n'
        << "hidden_q=" << hidden_q << '\n'
        << "hidden_d=" << hidden_d << '\n'
        << "saturate=" << (saturate ? "true" : "false") << '\n'
        << "vocab_size=" << vocab_size << '\n'
        << "num_docs=" << num_docs << '\n'
        << "num_queries=" << num_queries << '\n'
        << "num_heldout=" << num_heldout << '\n'
        << "candidates=" << candidates << '\n';
    return out.str();
}

int TrainConfig::effective_steps() const {
    if (!splade_doc) return steps;
    return std::max(1, steps / std::max(1, splade_doc_step_ratio));
}

namespace {

// BM25 score of one document, same formula and accumulation order as
// score_bm25 in retrieval.cpp.
double bm25_doc_score(const InvertedIndex& index, const std::vector<TermId>& terms, DocId doc,
                      const BM25Params& params) {
    std::map<TermId, double> occurrences;
    for (TermId t : terms) occurrences[t] += 1.0;
    const double n = static_cast<double>(index.doc_count());
    double len_norm = params.k1 * (1.0 - params.b +
                                   params.b * index.doc_length(doc) / index.avg_doc_length());
    double score = 0.0;
    for (auto [term, qtf] : occurrences) {
        const PostingList* pl = index.list(term);
        if (pl == nullptr || pl->postings.empty()) continue;
        auto it = std::lower_bound(pl->postings.begin(), pl->postings.end(), doc,
                                   [](const Posting& p, DocId d) { return p.doc < d; });
        if (it == pl->postings.end() || it->doc != doc) continue;
        double df = static_cast<double>(pl->postings.size());
        double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
        double tf = static_cast<double>(it->impact);
        score += qtf * idf * tf / (tf + len_norm);
    }
    return score;
}

std::vector<QueryInstance> make_queries(std::mt19937_64& rng, const std::string& prefix,
                                        int count, int num_candidates,
                                        const std::vector<std::vector<TermId>>& docs,
                                        const InvertedIndex& tf_index) {
    std::uniform_int_distribution<std::uint32_t> doc_pick(0,
                                                          static_cast<std::uint32_t>(docs.size() - 1));
    std::vector<QueryInstance> queries;
    queries.reserve(static_cast<std::size_t>(count));
    for (int qi = 0; qi < count; ++qi) {
        QueryInstance q;
        q.id = prefix + std::to_string(qi);
        q.target_doc = doc_pick(rng);
        std::vector<TermId> distinct(docs[q.target_doc].begin(), docs[q.target_doc].end());
        std::sort(distinct.begin(), distinct.end());
        distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
        std::shuffle(distinct.begin(), distinct.end(), rng);
        std::uniform_int_distribution<std::size_t> len_pick(2, 5);
        std::size_t len = std::min(std::max<std::size_t>(1, distinct.size()), len_pick(rng));
        q.tokens.assign(distinct.begin(), distinct.begin() + static_cast<std::ptrdiff_t>(len));

        q.candidates.push_back(q.target_doc);  // guaranteed positive teacher score
        std::set<std::uint32_t> used = {q.target_doc};
        while (q.candidates.size() < static_cast<std::size_t>(num_candidates)) {
            std::uint32_t d = doc_pick(rng);
            if (used.insert(d).second) q.candidates.push_back(d);
        }
        for (std::uint32_t d : q.candidates) {
            q.teacher_scores.push_back(bm25_doc_score(tf_index, q.tokens, d, BM25Params{}));
        }
        queries.push_back(std::move(q));
    }
    return queries;
}

}  // namespace

SyntheticTask build_synthetic_task(std::uint64_t seed, std::uint32_t vocab_size, int num_docs,
                                   int num_queries, int num_heldout, int candidates) {
    if (vocab_size < 1 || num_docs < 1 || num_queries < 1) {
        throw std::invalid_argument("synthetic task sizes must be >= 1");
    }
    if (candidates < 2) throw std::invalid_argument("need >= 2 candidates per query");
    std::mt19937_64 rng(seed);

    // Zipf-like token frequencies: p(r) proportional to 1/(r+1)
    std::vector<double> cdf(vocab_size);
    double acc = 0.0;
    for (std::uint32_t r = 0; r < vocab_size; ++r) {
        acc += 1.0 / static_cast<double>(r + 1);
        cdf[r] = acc;
    }
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto zipf = [&]() {
        double u = unit(rng) * acc;
        auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
        return static_cast<TermId>(it - cdf.begin());
    };

    SyntheticTask task;
    task.vocab_size = vocab_size;
    std::uniform_int_distribution<int> len_pick(8, 24);
    for (int d = 0; d < num_docs; ++d) {
        int len = len_pick(rng);
        std::vector<TermId> tokens;
        tokens.reserve(static_cast<std::size_t>(len));
        for (int i = 0; i < len; ++i) tokens.push_back(zipf());
        task.docs.push_back(std::move(tokens));
    }

    std::vector<std::pair<std::string, SparseVector>> tf_docs;
    tf_docs.reserve(task.docs.size());
    for (std::size_t d = 0; d < task.docs.size(); ++d) {
        std::map<TermId, float> tf;
        for (TermId t : task.docs[d]) tf[t] += 1.0f;
        std::vector<SparseVector::Entry> entries;
        for (auto [term, count] : tf) entries.push_back({term, count});
        tf_docs.emplace_back("d" + std::to_string(d),
                             SparseVector::from_entries(vocab_size, std::move(entries)));
    }
    task.tf_index = InvertedIndex::build(tf_docs, /*term_frequency=*/true);

    task.train_queries = make_queries(rng, "t", num_queries, candidates, task.docs, task.tf_index);
    task.heldout_queries = make_queries(rng, "h", num_heldout, candidates, task.docs, task.tf_index);
    return task;
}

namespace {

void check_nonnegative(const Eigen::MatrixXd& activations) {
    if (activations.rows() < 1) throw std::invalid_argument("empty activation matrix");
    if ((activations.array() < 0.0).any()) {
        throw std::invalid_argument("negative entry in activation matrix");
    }
}

}  // namespace

double flops_loss(const Eigen::MatrixXd& activations) {
    check_nonnegative(activations);
    return activations.colwise().mean().array().square().sum();
}

Eigen::MatrixXd flops_loss_grad(const Eigen::MatrixXd& activations) {
    check_nonnegative(activations);
    Eigen::RowVectorXd means = activations.colwise().mean();
    double inv_n = 1.0 / static_cast<double>(activations.rows());
    Eigen::MatrixXd grad(activations.rows(), activations.cols());
    grad.rowwise() = (2.0 * inv_n) * means;
    return grad;
}

double l1_loss(const Eigen::MatrixXd& activations) {
    check_nonnegative(activations);
    return activations.sum() / static_cast<double>(activations.rows());
}

Eigen::MatrixXd l1_loss_grad(const Eigen::MatrixXd& activations) {
    check_nonnegative(activations);
    return Eigen::MatrixXd::Constant(activations.rows(), activations.cols(),
                                     1.0 / static_cast<double>(activations.rows()));
}

namespace {

Eigen::VectorXd softmax(const Eigen::VectorXd& scores) {
    Eigen::VectorXd shifted = scores.array() - scores.maxCoeff();
    Eigen::VectorXd exps = shifted.array().exp();
    return exps / exps.sum();
}

}  // namespace

double kl_distill_loss(const Eigen::VectorXd& teacher, const Eigen::VectorXd& student) {
    if (teacher.size() < 2 || teacher.size() != student.size()) {
        throw std::invalid_argument("KL distillation needs >= 2 aligned scores");
    }
    Eigen::VectorXd p = softmax(teacher);
    Eigen::VectorXd q = softmax(student);
    double loss = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        loss += p[i] * (std::log(p[i]) - std::log(q[i]));
    }
    return loss;
}

Eigen::VectorXd kl_distill_grad(const Eigen::VectorXd& teacher, const Eigen::VectorXd& student) {
    if (teacher.size() < 2 || teacher.size() != student.size()) {
        throw std::invalid_argument("KL distillation needs >= 2 aligned scores");
    }
    return softmax(student) - softmax(teacher);
}

namespace {

Eigen::VectorXd uniform_query_rep(const std::vector<TermId>& tokens, std::uint32_t vocab_size) {
    Eigen::VectorXd rep = Eigen::VectorXd::Zero(vocab_size);
    for (TermId t : tokens) rep[static_cast<Eigen::Index>(t)] = 1.0;
    return rep;
}

double dense_nnz(const Eigen::VectorXd& rep) {
    return static_cast<double>((rep.array() > 0.0).count());
}

double regularize(RegularizerKind kind, const Eigen::MatrixXd& a) {
    return kind == RegularizerKind::Flops ? flops_loss(a) : l1_loss(a);
}

Eigen::MatrixXd regularize_grad(RegularizerKind kind, const Eigen::MatrixXd& a) {
    return kind == RegularizerKind::Flops ? flops_loss_grad(a) : l1_loss_grad(a);
}

}  // namespace

LossParts joint_loss(const TrainingBatch& batch, const SyntheticTask& task,
                     const EncoderPair& encoders, int step, const TrainConfig& config,
                     PairGrads* grads) {
    if (batch.queries.empty()) throw std::invalid_argument("empty training batch");
    const auto v = static_cast<Eigen::Index>(task.vocab_size);
    const std::size_t nq = batch.queries.size();

    LambdaSchedule q_schedule{config.lambda_q, config.scheduler_steps};
    LambdaSchedule d_schedule{config.lambda_d, config.scheduler_steps};
    const double lambda_q = q_schedule.at(step);
    const double lambda_d = d_schedule.at(step);

    // Forward pass: cache encodings for the backward pass.
    std::vector<DenseEncoding> q_encs(nq);
    std::vector<Eigen::VectorXd> q_reps(nq);
    std::vector<std::vector<DenseEncoding>> d_encs(nq);
    std::vector<Eigen::VectorXd> students(nq);
    std::size_t n_docs = 0;
    for (std::size_t i = 0; i < nq; ++i) {
        const QueryInstance& q = *batch.queries[i];
        if (config.splade_doc) {
            q_reps[i] = uniform_query_rep(q.tokens, task.vocab_size);
        } else {
            q_encs[i] = encode_dense(encoders.query_params(), q.tokens);
            q_reps[i] = q_encs[i].rep;
        }
        d_encs[i].reserve(q.candidates.size());
        Eigen::VectorXd scores(static_cast<Eigen::Index>(q.candidates.size()));
        for (std::size_t c = 0; c < q.candidates.size(); ++c) {
            d_encs[i].push_back(encode_dense(encoders.doc_params(), task.docs[q.candidates[c]]));
            scores[static_cast<Eigen::Index>(c)] = q_reps[i].dot(d_encs[i][c].rep);
        }
        students[i] = scores;
        n_docs += q.candidates.size();
    }

    Eigen::MatrixXd q_acts(static_cast<Eigen::Index>(nq), v);
    Eigen::MatrixXd d_acts(static_cast<Eigen::Index>(n_docs), v);
    std::size_t row = 0;
    for (std::size_t i = 0; i < nq; ++i) {
        q_acts.row(static_cast<Eigen::Index>(i)) = q_reps[i].transpose();
        for (const auto& enc : d_encs[i]) {
            d_acts.row(static_cast<Eigen::Index>(row++)) = enc.rep.transpose();
        }
    }

    LossParts parts;
    for (std::size_t i = 0; i < nq; ++i) {
        const QueryInstance& q = *batch.queries[i];
        Eigen::Map<const Eigen::VectorXd> teacher(q.teacher_scores.data(),
                                                  static_cast<Eigen::Index>(q.teacher_scores.size()));
        parts.distill += kl_distill_loss(teacher, students[i]);
    }
    parts.distill /= static_cast<double>(nq);
    parts.q_reg = config.splade_doc ? 0.0 : regularize(config.q_reg, q_acts);
    parts.d_reg = regularize(config.d_reg, d_acts);
    parts.total = parts.distill + lambda_q * parts.q_reg + lambda_d * parts.d_reg;
    parts.mean_q_nnz = q_acts.unaryExpr([](double x) { return x > 0.0 ? 1.0 : 0.0; }).sum() /
                       static_cast<double>(nq);
    parts.mean_d_nnz = d_acts.unaryExpr([](double x) { return x > 0.0 ? 1.0 : 0.0; }).sum() /
                       static_cast<double>(n_docs);

    if (grads == nullptr) return parts;

    Eigen::MatrixXd q_reg_grad;
    if (!config.splade_doc && lambda_q != 0.0) q_reg_grad = regularize_grad(config.q_reg, q_acts);
    Eigen::MatrixXd d_reg_grad;
    if (lambda_d != 0.0) d_reg_grad = regularize_grad(config.d_reg, d_acts);

    EncoderGrads& qg = encoders.shared ? grads->doc : grads->query;
    row = 0;
    for (std::size_t i = 0; i < nq; ++i) {
        const QueryInstance& q = *batch.queries[i];
        Eigen::Map<const Eigen::VectorXd> teacher(q.teacher_scores.data(),
                                                  static_cast<Eigen::Index>(q.teacher_scores.size()));
        Eigen::VectorXd dscore =
            kl_distill_grad(teacher, students[i]) / static_cast<double>(nq);

        Eigen::VectorXd q_upstream = Eigen::VectorXd::Zero(v);
        for (std::size_t c = 0; c < q.candidates.size(); ++c) {
            double g = dscore[static_cast<Eigen::Index>(c)];
            Eigen::VectorXd d_upstream = g * q_reps[i];
            if (lambda_d != 0.0) {
                d_upstream += lambda_d * d_reg_grad.row(static_cast<Eigen::Index>(row)).transpose();
            }
            encode_gradient_accumulate(encoders.doc_params(), task.docs[q.candidates[c]],
                                       d_encs[i][c], d_upstream, grads->doc);
            q_upstream += g * d_encs[i][c].rep;
            ++row;
        }
        if (!config.splade_doc) {
            if (lambda_q != 0.0) {
                q_upstream += lambda_q * q_reg_grad.row(static_cast<Eigen::Index>(i)).transpose();
            }
            encode_gradient_accumulate(encoders.query_params(), q.tokens, q_encs[i], q_upstream, qg);
        }
    }
    return parts;
}

namespace {

struct AdamState {
    Eigen::MatrixXd m, v;
    explicit AdamState(const Eigen::MatrixXd& like)
        : m(Eigen::MatrixXd::Zero(like.rows(), like.cols())),
          v(Eigen::MatrixXd::Zero(like.rows(), like.cols())) {}

    void update(Eigen::Ref<Eigen::MatrixXd> param, const Eigen::MatrixXd& grad, double lr, int t) {
        constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
        m = beta1 * m + (1.0 - beta1) * grad;
        v = beta2 * v.array().matrix() + (1.0 - beta2) * grad.array().square().matrix();
        double bc1 = 1.0 - std::pow(beta1, t);
        double bc2 = 1.0 - std::pow(beta2, t);
        param.array() -= lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + eps);
    }
};

struct EncoderOptimizer {
    AdamState emb, proj, bias;
    explicit EncoderOptimizer(const EncoderParams& p)
        : emb(p.token_embedding), proj(p.projection), bias(p.bias) {}

    void step(EncoderParams& p, const EncoderGrads& g, double lr, int t) {
        emb.update(p.token_embedding, g.token_embedding, lr, t);
        proj.update(p.projection, g.projection, lr, t);
        Eigen::MatrixXd bias_grad = g.bias;
        Eigen::MatrixXd bias_mat = p.bias;
        bias.update(bias_mat, bias_grad, lr, t);
        p.bias = bias_mat;
    }
};

}  // namespace

TrainRun train_loop(const TrainConfig& config, const SyntheticTask& task) {
    if (!config.seed) throw std::invalid_argument("training config requires a seed");
    if (config.shared_encoders && config.hidden_q != config.hidden_d && !config.splade_doc) {
        throw std::invalid_argument("shared encoders require matching hidden sizes");
    }
    std::mt19937_64 rng(*config.seed);

    TrainRun run;
    run.config = config;
    run.encoders.shared = config.shared_encoders;
    run.encoders.doc = EncoderParams::random(config.vocab_size, config.hidden_d, config.saturate, rng);
    if (config.shared_encoders || config.splade_doc) {
        run.encoders.query = run.encoders.doc;
    } else {
        run.encoders.query =
            EncoderParams::random(config.vocab_size, config.hidden_q, config.saturate, rng);
    }

    EncoderOptimizer doc_opt(run.encoders.doc);
    EncoderOptimizer query_opt(run.encoders.query);

    const int steps = config.effective_steps();
    std::uniform_int_distribution<std::size_t> query_pick(0, task.train_queries.size() - 1);
    for (int step = 0; step < steps; ++step) {
        TrainingBatch batch;
        for (int b = 0; b < config.batch_size; ++b) {
            batch.queries.push_back(&task.train_queries[query_pick(rng)]);
        }
        PairGrads grads{EncoderGrads::zeros_like(run.encoders.query_params()),
                        EncoderGrads::zeros_like(run.encoders.doc)};
        LossParts parts = joint_loss(batch, task, run.encoders, step, config, &grads);
        if (!std::isfinite(parts.total)) {
            throw std::runtime_error("non-finite loss at training step " + std::to_string(step));
        }
        doc_opt.step(run.encoders.doc, grads.doc, config.learning_rate, step + 1);
        if (!config.shared_encoders && !config.splade_doc) {
            query_opt.step(run.encoders.query, grads.query, config.learning_rate, step + 1);
        }
        if (config.shared_encoders) run.encoders.query = run.encoders.doc;

        LambdaSchedule q_schedule{config.lambda_q, config.scheduler_steps};
        LambdaSchedule d_schedule{config.lambda_d, config.scheduler_steps};
        run.history.push_back({step, parts.total, parts.distill, parts.q_reg, parts.d_reg,
                               q_schedule.at(step), d_schedule.at(step), parts.mean_q_nnz,
                               parts.mean_d_nnz});
    }

    // Final sparsity statistics over the train query set and a corpus sample.
    double q_nnz = 0.0;
    for (const QueryInstance& q : task.train_queries) {
        if (config.splade_doc) {
            std::set<TermId> distinct(q.tokens.begin(), q.tokens.end());
            q_nnz += static_cast<double>(distinct.size());
        } else {
            q_nnz += static_cast<double>(encode(run.encoders.query_params(), q.tokens).nnz());
        }
    }
    run.final_mean_q_nnz = q_nnz / static_cast<double>(task.train_queries.size());

    std::size_t doc_sample = std::min<std::size_t>(task.docs.size(), 500);
    double d_nnz = 0.0;
    for (std::size_t d = 0; d < doc_sample; ++d) {
        d_nnz += static_cast<double>(encode(run.encoders.doc, task.docs[d]).nnz());
    }
    run.final_mean_d_nnz = d_nnz / static_cast<double>(doc_sample);
    return run;
}

void write_loss_csv(const std::vector<LossRow>& history, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write loss history: " + path);
    out << "step,total,distill,q_reg,d_reg,lambda_q,lambda_d,mean_q_nnz,mean_d_nnz\n";
    out.precision(17);
    for (const LossRow& row : history) {
        out << row.step << ',' << row.total << ',' << row.distill << ',' << row.q_reg << ','
            << row.d_reg << ',' << row.lambda_q << ',' << row.lambda_d << ',' << row.mean_q_nnz
            << ',' << row.mean_d_nnz << '\n';
    }
}

}  // namespace sparselab
