#include "sparselab/encoder.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace sparselab {

namespace {

constexpr char kMagic[8] = {'S', 'L', 'C', 'K', 'P', 'T', '0', '1'};

template <typename T>
void write_pod(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
    T v;
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw std::runtime_error("checkpoint file truncated");
    return v;
}

void write_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
    write_pod<std::uint64_t>(out, static_cast<std::uint64_t>(m.rows()));
    write_pod<std::uint64_t>(out, static_cast<std::uint64_t>(m.cols()));
    out.write(reinterpret_cast<const char*>(m.data()),
              static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(m.size())));
}

Eigen::MatrixXd read_matrix(std::istream& in) {
    auto rows = read_pod<std::uint64_t>(in);
    auto cols = read_pod<std::uint64_t>(in);
    Eigen::MatrixXd m(rows, cols);
    in.read(reinterpret_cast<char*>(m.data()),
            static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(m.size())));
    if (!in) throw std::runtime_error("checkpoint file truncated");
    return m;
}

void write_params(std::ostream& out, const EncoderParams& p) {
    write_pod<std::uint8_t>(out, p.saturate ? 1 : 0);
    write_matrix(out, p.token_embedding);
    write_matrix(out, p.projection);
    write_matrix(out, p.bias);
}

EncoderParams read_params(std::istream& in) {
    EncoderParams p;
    p.saturate = read_pod<std::uint8_t>(in) != 0;
    p.token_embedding = read_matrix(in);
    p.projection = read_matrix(in);
    p.bias = read_matrix(in);
    return p;
}

void check_tokens(const EncoderParams& params, const std::vector<TermId>& tokens) {
    if (tokens.empty()) throw std::invalid_argument("encode: empty token sequence");
    for (TermId t : tokens) {
        if (t >= params.vocab_size()) {
            throw std::invalid_argument("encode: token id " + std::to_string(t) +
                                        " out of vocabulary");
        }
    }
}

}  // namespace

EncoderParams EncoderParams::random(std::uint32_t vocab_size, int hidden, bool saturate,
                                    std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-0.1, 0.1);
    EncoderParams p;
    p.saturate = saturate;
    p.token_embedding.resize(vocab_size, hidden);
    p.projection.resize(hidden, vocab_size);
    p.bias.resize(vocab_size);
    for (Eigen::Index i = 0; i < p.token_embedding.size(); ++i) p.token_embedding.data()[i] = dist(rng);
    for (Eigen::Index i = 0; i < p.projection.size(); ++i) p.projection.data()[i] = dist(rng);
    for (Eigen::Index i = 0; i < p.bias.size(); ++i) p.bias.data()[i] = dist(rng);
    return p;
}

EncoderGrads EncoderGrads::zeros_like(const EncoderParams& p) {
    EncoderGrads g;
    g.token_embedding = Eigen::MatrixXd::Zero(p.token_embedding.rows(), p.token_embedding.cols());
    g.projection = Eigen::MatrixXd::Zero(p.projection.rows(), p.projection.cols());
    g.bias = Eigen::VectorXd::Zero(p.bias.size());
    return g;
}

DenseEncoding encode_dense(const EncoderParams& params, const std::vector<TermId>& tokens) {
    check_tokens(params, tokens);
    const auto n = static_cast<Eigen::Index>(tokens.size());
    const auto v = static_cast<Eigen::Index>(params.vocab_size());

    Eigen::MatrixXd inputs(n, params.hidden());
    for (Eigen::Index i = 0; i < n; ++i) {
        inputs.row(i) = params.token_embedding.row(static_cast<Eigen::Index>(tokens[i]));
    }
    // logits(i, j) for token position i, vocabulary slot j
    Eigen::MatrixXd logits = inputs * params.projection;
    logits.rowwise() += params.bias.transpose();

    DenseEncoding enc;
    enc.rep = Eigen::VectorXd::Zero(v);
    enc.argmax.assign(static_cast<std::size_t>(v), -1);
    for (Eigen::Index j = 0; j < v; ++j) {
        double best = 0.0;
        int best_pos = -1;
        for (Eigen::Index i = 0; i < n; ++i) {
            double z = logits(i, j);
            if (z > best) {  // strict: ties keep the lowest position
                best = z;
                best_pos = static_cast<int>(i);
            }
        }
        if (best_pos >= 0) {
            enc.rep[j] = params.saturate ? std::log1p(best) : best;
            enc.argmax[static_cast<std::size_t>(j)] = best_pos;
        }
    }
    return enc;
}

SparseVector encode(const EncoderParams& params, const std::vector<TermId>& tokens) {
    DenseEncoding enc = encode_dense(params, tokens);
    std::vector<SparseVector::Entry> entries;
    for (Eigen::Index j = 0; j < enc.rep.size(); ++j) {
        if (enc.rep[j] > 0.0) {
            entries.push_back({static_cast<TermId>(j), static_cast<float>(enc.rep[j])});
        }
    }
    return SparseVector::from_entries(params.vocab_size(), std::move(entries));
}

void encode_gradient_accumulate(const EncoderParams& params, const std::vector<TermId>& tokens,
                                const DenseEncoding& enc, const Eigen::VectorXd& upstream,
                                EncoderGrads& grads) {
    const auto v = static_cast<Eigen::Index>(params.vocab_size());
    for (Eigen::Index j = 0; j < v; ++j) {
        int pos = enc.argmax[static_cast<std::size_t>(j)];
        if (pos < 0 || upstream[j] == 0.0) continue;
        // act(z) = ln(1+z) on the positive part: act'(z) = 1/(1+z) = exp(-rep)
        double coef = upstream[j];
        if (params.saturate) coef *= std::exp(-enc.rep[j]);
        TermId token = tokens[static_cast<std::size_t>(pos)];
        grads.bias[j] += coef;
        grads.projection.col(j) += coef * params.token_embedding.row(static_cast<Eigen::Index>(token)).transpose();
        grads.token_embedding.row(static_cast<Eigen::Index>(token)) += coef * params.projection.col(j).transpose();
    }
}

EncoderGrads encode_gradient(const EncoderParams& params, const std::vector<TermId>& tokens,
                             const Eigen::VectorXd& upstream) {
    DenseEncoding enc = encode_dense(params, tokens);
    EncoderGrads grads = EncoderGrads::zeros_like(params);
    encode_gradient_accumulate(params, tokens, enc, upstream, grads);
    return grads;
}

void save_checkpoint(const EncoderPair& pair, const std::string& config_text,
                     const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint file: " + path);
    out.write(kMagic, sizeof(kMagic));
    write_pod<std::uint8_t>(out, pair.shared ? 1 : 0);
    write_params(out, pair.query);
    write_params(out, pair.doc);
    write_pod<std::uint64_t>(out, config_text.size());
    out.write(config_text.data(), static_cast<std::streamsize>(config_text.size()));
    if (!out) throw std::runtime_error("write failed: " + path);
}

EncoderPair load_checkpoint(const std::string& path, std::string* config_text) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint file: " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw std::runtime_error("bad checkpoint file " + path + ": expected format SLCKPT01");
    }
    EncoderPair pair;
    pair.shared = read_pod<std::uint8_t>(in) != 0;
    pair.query = read_params(in);
    pair.doc = read_params(in);
    auto len = read_pod<std::uint64_t>(in);
    std::string text(len, '\0');
    in.read(text.data(), static_cast<std::streamsize>(len));
    if (!in) throw std::runtime_error("checkpoint file truncated");
    if (config_text) *config_text = std::move(text);
    return pair;
}

}  // namespace sparselab
