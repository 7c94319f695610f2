#ifndef POLITELENS_EMBED_HPP
#define POLITELENS_EMBED_HPP

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "politelens/common.hpp"
#include "politelens/corpus.hpp"

namespace politelens::embed {

/// Radius of the uniform unit-scaling initializer: rows drawn from
/// uniform(-sqrt(3/d), +sqrt(3/d)) have variance 1/d.
inline double unit_scaling_radius(std::size_t dim) {
    return std::sqrt(3.0 / static_cast<double>(dim));
}

/// Vocab-indexed word vectors. Row 0 (PAD) is all-zero and frozen; every
/// other row, including UNK, is trainable.
class EmbeddingTable {
public:
    EmbeddingTable() = default;
    EmbeddingTable(std::size_t vocab_size, std::size_t dim, std::uint64_t vocab_hash)
        : matrix_(vocab_size, dim), vocab_hash_(vocab_hash) {}

    std::size_t vocab_size() const { return matrix_.rows(); }
    std::size_t dim() const { return matrix_.cols(); }
    std::uint64_t vocab_hash() const { return vocab_hash_; }

    Matrix<float>& matrix() { return matrix_; }
    const Matrix<float>& matrix() const { return matrix_; }

    bool row_trainable(std::size_t row) const { return row != corpus::Vocabulary::kPad; }

    void validate() const {
        if (!matrix_.all_finite()) throw DataError("embedding table contains non-finite values");
        for (std::size_t c = 0; c < dim(); ++c)
            if (matrix_(corpus::Vocabulary::kPad, c) != 0.0f)
                throw DataError("PAD embedding row is not zero");
    }

private:
    Matrix<float> matrix_;
    std::uint64_t vocab_hash_ = 0;
};

struct EmbeddingSnapshot {
    std::string tag;  // "before" | "after" | custom
    Matrix<float> matrix;
    std::uint64_t vocab_hash = 0;
};

inline EmbeddingSnapshot snapshot(const EmbeddingTable& table, const std::string& tag) {
    return EmbeddingSnapshot{tag, table.matrix(), table.vocab_hash()};
}

/// All non-PAD rows drawn uniform(-r, r); used when no pretrained file is
/// supplied and for vocabulary words missing from one.
inline EmbeddingTable init_random(const corpus::Vocabulary& vocab, std::size_t dim,
                                  std::uint64_t seed) {
    EmbeddingTable table(vocab.size(), dim, vocab.hash());
    const double r = unit_scaling_radius(dim);
    Rng rng(splitmix64(seed) ^ 0x656d626564ULL);
    for (std::size_t row = 1; row < table.vocab_size(); ++row)
        for (std::size_t c = 0; c < dim; ++c)
            table.matrix()(row, c) = static_cast<float>(rng.uniform(-r, r));
    return table;
}

namespace detail {

inline bool parse_floats(const std::string& s, std::vector<float>& out) {
    out.clear();
    const char* p = s.c_str();
    char* end = nullptr;
    while (*p) {
        while (is_space_ascii(static_cast<unsigned char>(*p))) ++p;
        if (!*p) break;
        float v = std::strtof(p, &end);
        if (end == p) return false;
        out.push_back(v);
        p = end;
    }
    return true;
}

}  // namespace detail

/// Loads word vectors from a textual file of `word v1 ... v_dim` lines.
/// An optional first line `<count> <dim>` is skipped. Vocabulary words not
/// in the file get the uniform unit-scaling initializer.
inline EmbeddingTable load_pretrained(const std::string& path, const corpus::Vocabulary& vocab,
                                      std::size_t dim, std::uint64_t seed) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open pretrained vector file: " + path);

    std::unordered_map<std::string, std::vector<float>> found;
    std::string line;
    std::size_t lineno = 0;
    std::vector<float> values;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        auto first_space = line.find_first_of(" \t");
        if (first_space == std::string::npos)
            throw DataError(path + ":" + std::to_string(lineno) + ": expected word and vector");
        std::string word = line.substr(0, first_space);
        if (!detail::parse_floats(line.substr(first_space + 1), values))
            throw DataError(path + ":" + std::to_string(lineno) + ": bad vector for word '" +
                            word + "'");
        if (lineno == 1 && values.size() == 1) {
            // header line "<count> <dim>"
            char* end = nullptr;
            std::strtod(word.c_str(), &end);
            if (end && *end == '\0') continue;
        }
        if (values.size() != dim)
            throw DataError(path + ":" + std::to_string(lineno) + ": word '" + word + "' has " +
                            std::to_string(values.size()) + " dims, expected " +
                            std::to_string(dim));
        if (vocab.contains(word)) found.emplace(std::move(word), values);
    }

    EmbeddingTable table(vocab.size(), dim, vocab.hash());
    const double r = unit_scaling_radius(dim);
    Rng rng(splitmix64(seed) ^ 0x656d626564ULL);
    // Rows in id order so the unknown-word draws are reproducible.
    for (std::size_t row = 1; row < table.vocab_size(); ++row) {
        const std::string& tok = vocab.token_of(static_cast<int>(row));
        auto it = found.find(tok);
        if (it != found.end()) {
            for (std::size_t c = 0; c < dim; ++c) table.matrix()(row, c) = it->second[c];
        } else {
            for (std::size_t c = 0; c < dim; ++c)
                table.matrix()(row, c) = static_cast<float>(rng.uniform(-r, r));
        }
    }
    return table;
}

/// Row i of the result is the table row for ids[i].
template <typename T = float>
Matrix<T> lookup(const EmbeddingTable& table, const std::vector<int>& ids) {
    Matrix<T> out(ids.size(), table.dim());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        int id = ids[i];
        if (id < 0 || static_cast<std::size_t>(id) >= table.vocab_size())
            throw DataError("token id out of embedding range: " + std::to_string(id));
        const float* src = table.matrix().row(static_cast<std::size_t>(id));
        for (std::size_t c = 0; c < table.dim(); ++c)
            out(i, c) = static_cast<T>(src[c]);
    }
    return out;
}

}  // namespace politelens::embed

#endif  // POLITELENS_EMBED_HPP
