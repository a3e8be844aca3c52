#include "sparselab/sparse_vector.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace sparselab {

SparseVector SparseVector::from_entries(std::uint32_t vocab_size, std::vector<Entry> entries) {
    SparseVector v(vocab_size);
    std::vector<Entry> kept;
    kept.reserve(entries.size());
    for (const Entry& e : entries) {
        if (e.term >= vocab_size) {
            throw std::invalid_argument("term id " + std::to_string(e.term) +
                                        " out of vocabulary (|V|=" + std::to_string(vocab_size) + ")");
        }
        if (!std::isfinite(e.weight) || e.weight < 0.0f) {
            throw std::invalid_argument("negative or non-finite weight for term " +
                                        std::to_string(e.term));
        }
        if (e.weight > 0.0f) kept.push_back(e);
    }
    std::sort(kept.begin(), kept.end(),
              [](const Entry& a, const Entry& b) { return a.term < b.term; });
    for (std::size_t i = 1; i < kept.size(); ++i) {
        if (kept[i].term == kept[i - 1].term) {
            throw std::invalid_argument("duplicate term id " + std::to_string(kept[i].term));
        }
    }
    v.entries_ = std::move(kept);
    return v;
}

SparseVector SparseVector::from_dense(const std::vector<float>& dense) {
    std::vector<Entry> entries;
    for (std::size_t j = 0; j < dense.size(); ++j) {
        if (dense[j] != 0.0f) entries.push_back({static_cast<TermId>(j), dense[j]});
    }
    return from_entries(static_cast<std::uint32_t>(dense.size()), std::move(entries));
}

std::vector<float> SparseVector::densify() const {
    std::vector<float> dense(vocab_size_, 0.0f);
    for (const Entry& e : entries_) dense[e.term] = e.weight;
    return dense;
}

double dot(const SparseVector& a, const SparseVector& b) {
    if (a.vocab_size() != b.vocab_size()) {
        throw std::invalid_argument("dot: vocabulary size mismatch (" +
                                    std::to_string(a.vocab_size()) + " vs " +
                                    std::to_string(b.vocab_size()) + ")");
    }
    double sum = 0.0;
    auto ia = a.entries().begin(), ea = a.entries().end();
    auto ib = b.entries().begin(), eb = b.entries().end();
    while (ia != ea && ib != eb) {
        if (ia->term < ib->term) {
            ++ia;
        } else if (ib->term < ia->term) {
            ++ib;
        } else {
            sum += static_cast<double>(ia->weight) * static_cast<double>(ib->weight);
            ++ia;
            ++ib;
        }
    }
    return sum;
}

TermId Vocabulary::add(const std::string& token) {
    auto it = ids_.find(token);
    if (it != ids_.end()) return it->second;
    TermId id = static_cast<TermId>(tokens_.size());
    tokens_.push_back(token);
    ids_.emplace(token, id);
    return id;
}

std::optional<TermId> Vocabulary::lookup(const std::string& token) const {
    auto it = ids_.find(token);
    if (it == ids_.end()) return std::nullopt;
    return it->second;
}

const std::string& Vocabulary::token(TermId id) const {
    if (id >= tokens_.size()) throw std::out_of_range("term id out of range");
    return tokens_[id];
}

std::vector<std::pair<std::string, SparseVector>> read_vectors_jsonl(const std::string& path,
                                                                     std::uint32_t vocab_size) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open vector file: " + path);

    struct Raw {
        std::string id;
        std::vector<SparseVector::Entry> entries;
    };
    std::vector<Raw> raws;
    TermId max_term = 0;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const std::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        Raw raw;
        raw.id = j.at("id").get<std::string>();
        for (const auto& [key, value] : j.at("vector").items()) {
            TermId term = static_cast<TermId>(std::stoul(key));
            raw.entries.push_back({term, value.get<float>()});
            max_term = std::max(max_term, term);
        }
        raws.push_back(std::move(raw));
    }
    if (vocab_size == 0) vocab_size = raws.empty() ? 1 : max_term + 1;

    std::vector<std::pair<std::string, SparseVector>> out;
    out.reserve(raws.size());
    for (auto& raw : raws) {
        out.emplace_back(std::move(raw.id),
                         SparseVector::from_entries(vocab_size, std::move(raw.entries)));
    }
    return out;
}

void write_vectors_jsonl(const std::vector<std::pair<std::string, SparseVector>>& vectors,
                         const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write vector file: " + path);
    for (const auto& [id, vec] : vectors) {
        std::ostringstream line;
        line << "{\"id\": " << nlohmann::json(id).dump() << ", \"vector\": {";
        bool first = true;
        for (const auto& e : vec.entries()) {
            if (!first) line << ", ";
            first = false;
            line << '"' << e.term << "\": " << nlohmann::json(e.weight).dump();
        }
        line << "}}";
        out << line.str() << '\n';
    }
}

}  // namespace sparselab
