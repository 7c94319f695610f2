#ifndef POLITELENS_TRAIN_HPP
#define POLITELENS_TRAIN_HPP

#include <cmath>
#include <cstdint>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "politelens/common.hpp"
#include "politelens/corpus.hpp"
#include "politelens/embed.hpp"
#include "politelens/nn.hpp"

namespace politelens::train {

using corpus::Label;
using corpus::LabeledExample;
using corpus::Vocabulary;
using embed::EmbeddingSnapshot;
using embed::EmbeddingTable;

struct TrainConfig {
    std::size_t batch_size = 32;
    double learning_rate = 0.001;
    double dropout = 0.5;
    std::size_t max_epochs = 50;
    std::size_t patience = 10;
    std::uint64_t seed = 7;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    std::size_t threads = 1;  // per-example gradients within a batch; results are
                              // bit-identical to the single-threaded run
    std::size_t max_len = corpus::kMaxSequenceLength;
    nn::ModelDims dims;

    void validate() const {
        if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
        if (!(learning_rate > 0.0 && learning_rate <= 1.0))
            throw std::invalid_argument("learning_rate must be in (0,1]");
        if (!(dropout >= 0.0 && dropout < 1.0))
            throw std::invalid_argument("dropout must be in [0,1)");
        if (patience < 1) throw std::invalid_argument("patience must be >= 1");
        if (threads < 1) throw std::invalid_argument("threads must be >= 1");
    }
};

// ---------------------------------------------------------------------------
// Adam

/// First/second moment accumulators, shape-congruent with the model
/// parameters and the (trainable) embedding rows.
template <typename T>
struct AdamState {
    nn::ModelParams<T> m, v;
    Matrix<T> emb_m, emb_v;
    std::size_t step = 0;

    static AdamState init(const nn::ModelParams<T>& params, std::size_t vocab_size) {
        AdamState s;
        s.m = nn::ModelParams<T>::zeros(params.dims);
        s.v = nn::ModelParams<T>::zeros(params.dims);
        s.emb_m = Matrix<T>(vocab_size, params.dims.embedding_dim);
        s.emb_v = Matrix<T>(vocab_size, params.dims.embedding_dim);
        return s;
    }
};

/// Bias-corrected Adam update of one contiguous tensor:
///   m <- b1*m + (1-b1)*g;  v <- b2*v + (1-b2)*g^2
///   p <- p - lr * (m/(1-b1^t)) / (sqrt(v/(1-b2^t)) + eps)
template <typename T>
void adam_update(T* param, T* m, T* v, const T* grad, std::size_t n, const TrainConfig& cfg,
                 std::size_t step, const std::string& tensor_name) {
    const double corr1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(step));
    const double corr2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(step));
    for (std::size_t i = 0; i < n; ++i) {
        const double g = static_cast<double>(grad[i]);
        if (!std::isfinite(g))
            throw DataError("NaN gradient in tensor " + tensor_name + " at element " +
                            std::to_string(i));
        double mi = cfg.adam_beta1 * static_cast<double>(m[i]) + (1.0 - cfg.adam_beta1) * g;
        double vi = cfg.adam_beta2 * static_cast<double>(v[i]) + (1.0 - cfg.adam_beta2) * g * g;
        m[i] = static_cast<T>(mi);
        v[i] = static_cast<T>(vi);
        const double m_hat = mi / corr1;
        const double v_hat = vi / corr2;
        param[i] = static_cast<T>(static_cast<double>(param[i]) -
                                  cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.adam_epsilon));
    }
}

/// One optimizer step over the model parameters and every trainable
/// embedding row (the PAD row is skipped).
template <typename T>
void adam_step(AdamState<T>& state, nn::ModelParams<T>& params, Matrix<T>& embeddings,
               const nn::ModelParams<T>& param_grads, const Matrix<T>& embedding_grads,
               const TrainConfig& cfg) {
    ++state.step;
    params.for_each_tensor([&](const std::string& name, std::vector<T>& p) {
        std::vector<T>* mv = nullptr;
        std::vector<T>* vv = nullptr;
        const std::vector<T>* gv = nullptr;
        state.m.for_each_tensor([&](const std::string& n2, std::vector<T>& x) {
            if (n2 == name) mv = &x;
        });
        state.v.for_each_tensor([&](const std::string& n2, std::vector<T>& x) {
            if (n2 == name) vv = &x;
        });
        param_grads.for_each_tensor([&](const std::string& n2, const std::vector<T>& x) {
            if (n2 == name) gv = &x;
        });
        if (!mv || !vv || !gv || gv->size() != p.size())
            throw std::invalid_argument("adam_step: state/gradient shape mismatch for " + name);
        adam_update(p.data(), mv->data(), vv->data(), gv->data(), p.size(), cfg, state.step, name);
    });
    const std::size_t d = params.dims.embedding_dim;
    if (embedding_grads.rows() != embeddings.rows() || embedding_grads.cols() != embeddings.cols())
        throw std::invalid_argument("adam_step: embedding gradient shape mismatch");
    for (std::size_t row = 1; row < embeddings.rows(); ++row) {
        adam_update(embeddings.row(row), state.emb_m.row(row), state.emb_v.row(row),
                    embedding_grads.row(row), d, cfg, state.step,
                    "embeddings[row " + std::to_string(row) + "]");
    }
}

// ---------------------------------------------------------------------------
// Checkpoint

struct Checkpoint {
    static constexpr int kVersion = 1;
    int version = kVersion;
    nn::ModelParams<float> params;
    EmbeddingTable embeddings;
    Vocabulary vocab;
    std::uint64_t vocab_hash = 0;
    TrainConfig config;
    double dev_accuracy = 0.0;
    std::size_t epoch = 0;  // epoch of the selected model (0 = untrained)
    std::vector<EmbeddingSnapshot> snapshots;

    const EmbeddingSnapshot* snapshot(const std::string& tag) const {
        for (const auto& s : snapshots)
            if (s.tag == tag) return &s;
        return nullptr;
    }
};

namespace detail {

inline void write_hex_f32(std::ostream& out, const float* data, std::size_t n) {
    static const char* digits = "0123456789abcdef";
    std::string line;
    line.reserve(n * 8);
    for (std::size_t i = 0; i < n; ++i) {
        std::uint32_t bits;
        std::memcpy(&bits, &data[i], 4);
        // little-endian byte order
        for (int b = 0; b < 4; ++b) {
            unsigned byte = (bits >> (8 * b)) & 0xffu;
            line.push_back(digits[byte >> 4]);
            line.push_back(digits[byte & 0xf]);
        }
    }
    out << line << '\n';
}

inline int hex_nibble(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

inline void read_hex_f32(const std::string& line, float* data, std::size_t n) {
    if (line.size() < n * 8) throw DataError("checkpoint: truncated tensor data");
    for (std::size_t i = 0; i < n; ++i) {
        std::uint32_t bits = 0;
        for (int b = 0; b < 4; ++b) {
            int hi = hex_nibble(line[i * 8 + 2 * static_cast<std::size_t>(b)]);
            int lo = hex_nibble(line[i * 8 + 2 * static_cast<std::size_t>(b) + 1]);
            if (hi < 0 || lo < 0) throw DataError("checkpoint: bad hex digit in tensor data");
            bits |= static_cast<std::uint32_t>((hi << 4) | lo) << (8 * b);
        }
        std::memcpy(&data[i], &bits, 4);
    }
}

inline std::string f64_to_hex(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(bits));
    return buf;
}

inline double hex_to_f64(const std::string& s) {
    if (s.size() != 16) throw DataError("checkpoint: bad double field");
    std::uint64_t bits = std::stoull(s, nullptr, 16);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

}  // namespace detail

inline void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write checkpoint: " + path);
    out << "politelens-checkpoint " << ckpt.version << '\n';
    out << "config batch_size " << ckpt.config.batch_size << '\n';
    out << "config learning_rate " << detail::f64_to_hex(ckpt.config.learning_rate) << '\n';
    out << "config dropout " << detail::f64_to_hex(ckpt.config.dropout) << '\n';
    out << "config max_epochs " << ckpt.config.max_epochs << '\n';
    out << "config patience " << ckpt.config.patience << '\n';
    out << "config seed " << ckpt.config.seed << '\n';
    out << "config adam_beta1 " << detail::f64_to_hex(ckpt.config.adam_beta1) << '\n';
    out << "config adam_beta2 " << detail::f64_to_hex(ckpt.config.adam_beta2) << '\n';
    out << "config adam_epsilon " << detail::f64_to_hex(ckpt.config.adam_epsilon) << '\n';
    out << "config max_len " << ckpt.config.max_len << '\n';
    out << "dims embedding_dim " << ckpt.params.dims.embedding_dim << '\n';
    out << "dims feature_maps " << ckpt.params.dims.feature_maps << '\n';
    out << "dims windows";
    for (std::size_t w : ckpt.params.dims.windows) out << ' ' << w;
    out << '\n';
    out << "meta dev_accuracy " << detail::f64_to_hex(ckpt.dev_accuracy) << '\n';
    out << "meta epoch " << ckpt.epoch << '\n';
    {
        char buf[17];
        std::snprintf(buf, sizeof(buf), "%016llx",
                      static_cast<unsigned long long>(ckpt.vocab_hash));
        out << "vocab_hash " << buf << '\n';
    }
    out << "vocab " << ckpt.vocab.size() << '\n';
    for (std::size_t i = 2; i < ckpt.vocab.size(); ++i)
        out << ckpt.vocab.token_of(static_cast<int>(i)) << '\t' << i << '\n';

    ckpt.params.for_each_tensor([&](const std::string& name, const std::vector<float>& v) {
        out << "tensor " << name << ' ' << v.size() << '\n';
        detail::write_hex_f32(out, v.data(), v.size());
    });
    out << "tensor embeddings " << ckpt.embeddings.matrix().rows() << ' '
        << ckpt.embeddings.matrix().cols() << '\n';
    detail::write_hex_f32(out, ckpt.embeddings.matrix().values().data(),
                          ckpt.embeddings.matrix().size());
    for (const auto& snap : ckpt.snapshots) {
        out << "snapshot " << snap.tag << ' ' << snap.matrix.rows() << ' ' << snap.matrix.cols()
            << '\n';
        detail::write_hex_f32(out, snap.matrix.values().data(), snap.matrix.size());
    }
    out << "end\n";
    if (!out) throw DataError("write failure on checkpoint: " + path);
}

inline Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint: " + path);
    std::string line;
    auto next_line = [&](const char* what) -> std::string& {
        if (!std::getline(in, line))
            throw DataError("checkpoint truncated: expected " + std::string(what));
        return line;
    };

    next_line("header");
    std::istringstream header(line);
    std::string magic;
    int version = -1;
    header >> magic >> version;
    if (magic != "politelens-checkpoint")
        throw DataError(path + ": not a politelens checkpoint");
    if (version != Checkpoint::kVersion)
        throw DataError(path + ": unsupported checkpoint version " + std::to_string(version) +
                        " (expected " + std::to_string(Checkpoint::kVersion) + ")");

    Checkpoint ckpt;
    ckpt.version = version;
    nn::ModelDims dims;
    bool saw_end = false;
    std::size_t vocab_count = 0;

    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string kind;
        ls >> kind;
        if (kind == "end") {
            saw_end = true;
            break;
        } else if (kind == "config") {
            std::string key, value;
            ls >> key >> value;
            if (key == "batch_size") ckpt.config.batch_size = std::stoull(value);
            else if (key == "learning_rate") ckpt.config.learning_rate = detail::hex_to_f64(value);
            else if (key == "dropout") ckpt.config.dropout = detail::hex_to_f64(value);
            else if (key == "max_epochs") ckpt.config.max_epochs = std::stoull(value);
            else if (key == "patience") ckpt.config.patience = std::stoull(value);
            else if (key == "seed") ckpt.config.seed = std::stoull(value);
            else if (key == "adam_beta1") ckpt.config.adam_beta1 = detail::hex_to_f64(value);
            else if (key == "adam_beta2") ckpt.config.adam_beta2 = detail::hex_to_f64(value);
            else if (key == "adam_epsilon") ckpt.config.adam_epsilon = detail::hex_to_f64(value);
            else if (key == "max_len") ckpt.config.max_len = std::stoull(value);
        } else if (kind == "dims") {
            std::string key;
            ls >> key;
            if (key == "embedding_dim") ls >> dims.embedding_dim;
            else if (key == "feature_maps") ls >> dims.feature_maps;
            else if (key == "windows") {
                dims.windows.clear();
                std::size_t w;
                while (ls >> w) dims.windows.push_back(w);
            }
        } else if (kind == "meta") {
            std::string key, value;
            ls >> key >> value;
            if (key == "dev_accuracy") ckpt.dev_accuracy = detail::hex_to_f64(value);
            else if (key == "epoch") ckpt.epoch = std::stoull(value);
        } else if (kind == "vocab_hash") {
            std::string value;
            ls >> value;
            ckpt.vocab_hash = std::stoull(value, nullptr, 16);
        } else if (kind == "vocab") {
            ls >> vocab_count;
            for (std::size_t i = 2; i < vocab_count; ++i) {
                next_line("vocab entry");
                auto tab = line.find('\t');
                if (tab == std::string::npos) throw DataError("checkpoint: bad vocab entry");
                ckpt.vocab.add(line.substr(0, tab));
            }
            if (ckpt.vocab.size() != vocab_count)
                throw DataError("checkpoint: vocab count mismatch");
        } else if (kind == "tensor") {
            std::string name;
            ls >> name;
            if (name == "embeddings") {
                std::size_t rows = 0, cols = 0;
                ls >> rows >> cols;
                ckpt.embeddings = EmbeddingTable(rows, cols, ckpt.vocab_hash);
                next_line("embedding data");
                detail::read_hex_f32(line, ckpt.embeddings.matrix().values().data(), rows * cols);
            } else {
                if (ckpt.params.banks.empty()) ckpt.params = nn::ModelParams<float>::zeros(dims);
                std::size_t count = 0;
                ls >> count;
                bool found = false;
                ckpt.params.for_each_tensor([&](const std::string& n2, std::vector<float>& v) {
                    if (n2 != name) return;
                    found = true;
                    if (v.size() != count)
                        throw DataError("checkpoint: tensor " + name + " has " +
                                        std::to_string(count) + " values, expected " +
                                        std::to_string(v.size()));
                    next_line("tensor data");
                    detail::read_hex_f32(line, v.data(), count);
                });
                if (!found) throw DataError("checkpoint: unknown tensor " + name);
            }
        } else if (kind == "snapshot") {
            EmbeddingSnapshot snap;
            std::size_t rows = 0, cols = 0;
            ls >> snap.tag >> rows >> cols;
            snap.matrix = Matrix<float>(rows, cols);
            snap.vocab_hash = ckpt.vocab_hash;
            next_line("snapshot data");
            detail::read_hex_f32(line, snap.matrix.values().data(), rows * cols);
            ckpt.snapshots.push_back(std::move(snap));
        } else if (!trim(line).empty()) {
            throw DataError("checkpoint: unexpected record '" + kind + "'");
        }
    }
    if (!saw_end) throw DataError(path + ": truncated checkpoint (missing end marker)");
    if (ckpt.vocab.hash() != ckpt.vocab_hash)
        throw DataError(path + ": vocabulary hash mismatch inside checkpoint");
    ckpt.config.dims = ckpt.params.dims;
    return ckpt;
}

// ---------------------------------------------------------------------------
// Evaluation

struct Prediction {
    std::string id;
    Label gold = Label::Impolite;
    Label predicted = Label::Impolite;
    double p_polite = 0.0;
};

struct EvalResult {
    double accuracy = 0.0;
    std::vector<Prediction> predictions;
};

namespace detail {

inline std::vector<int> encode_example(const LabeledExample& ex, const Vocabulary& vocab,
                                       const TrainConfig& cfg) {
    return corpus::encode(ex.tokens, vocab, cfg.max_len, cfg.dims.max_window());
}

}  // namespace detail

inline EvalResult evaluate(const nn::ModelParams<float>& params, const EmbeddingTable& table,
                           const Vocabulary& vocab, const std::vector<LabeledExample>& dataset,
                           const TrainConfig& cfg) {
    EvalResult result;
    std::size_t correct = 0;
    for (const auto& ex : dataset) {
        auto ids = detail::encode_example(ex, vocab, cfg);
        auto input = embed::lookup<float>(table, ids);
        auto trace = nn::forward(params, input, 0.0f, nn::Mode::Eval, 0);
        Label predicted = trace.probs[1] > trace.probs[0] ? Label::Polite : Label::Impolite;
        if (predicted == ex.label) ++correct;
        result.predictions.push_back(
            {ex.source_id, ex.label, predicted, static_cast<double>(trace.probs[1])});
    }
    result.accuracy =
        dataset.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(dataset.size());
    return result;
}

inline EvalResult evaluate(const Checkpoint& ckpt, const std::vector<LabeledExample>& dataset) {
    return evaluate(ckpt.params, ckpt.embeddings, ckpt.vocab, dataset, ckpt.config);
}

inline void save_predictions(const std::string& path, const EvalResult& result) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write predictions file: " + path);
    out << "id\tgold\tpredicted\tp_polite\n";
    for (const auto& p : result.predictions)
        out << p.id << '\t' << corpus::label_name(p.gold) << '\t'
            << corpus::label_name(p.predicted) << '\t' << format_fixed(p.p_polite, 6) << '\n';
}

// ---------------------------------------------------------------------------
// Training loop

struct TrainLog {
    std::vector<double> train_loss_per_epoch;
    std::vector<double> dev_accuracy_per_epoch;
};

namespace detail {

struct ExampleGrad {
    nn::ModelParams<float> params;
    Matrix<float> input;
    const std::vector<int>* ids = nullptr;
    double loss = 0.0;
};

inline std::uint64_t example_seed(std::uint64_t base, std::size_t epoch, std::size_t ordinal) {
    return splitmix64(base ^ (static_cast<std::uint64_t>(epoch) << 40) ^
                      static_cast<std::uint64_t>(ordinal));
}

}  // namespace detail

/// Mini-batch Adam with dev-set model selection. Returns the checkpoint of
/// the best dev-accuracy epoch; training stops early after `patience`
/// epochs without improvement. Fully deterministic given (config, data).
inline Checkpoint train(const std::vector<LabeledExample>& train_set,
                        const std::vector<LabeledExample>& dev_set, const Vocabulary& vocab,
                        EmbeddingTable embeddings, const TrainConfig& config,
                        std::ostream* log = nullptr, TrainLog* history = nullptr) {
    config.validate();
    if (train_set.empty() || dev_set.empty())
        throw DataError("train: empty train or dev split");
    if (embeddings.vocab_hash() != vocab.hash())
        throw DataError("train: embedding table was built for a different vocabulary");
    embeddings.validate();

    auto params = nn::ModelParams<float>::random_init(config.dims, config.seed);

    std::vector<std::vector<int>> train_ids(train_set.size());
    for (std::size_t i = 0; i < train_set.size(); ++i)
        train_ids[i] = detail::encode_example(train_set[i], vocab, config);

    // "before" snapshot: after initialization, immediately before step one.
    std::vector<EmbeddingSnapshot> snapshots{embed::snapshot(embeddings, "before")};

    auto state = AdamState<float>::init(params, embeddings.vocab_size());

    Checkpoint best;
    best.params = params;
    best.embeddings = embeddings;
    best.vocab = vocab;
    best.vocab_hash = vocab.hash();
    best.config = config;
    best.epoch = 0;
    best.dev_accuracy = evaluate(params, embeddings, vocab, dev_set, config).accuracy;
    best.snapshots = snapshots;

    nn::ModelParams<float> grad_acc = nn::ModelParams<float>::zeros(config.dims);
    Matrix<float> emb_grad(embeddings.vocab_size(), config.dims.embedding_dim);

    std::size_t epochs_since_best = 0;
    for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
        std::vector<std::size_t> order(train_set.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        Rng shuffle_rng(splitmix64(config.seed ^ 0x65706f6368ULL) + epoch);
        politelens::shuffle(order, shuffle_rng);

        double epoch_loss = 0.0;
        std::size_t ordinal = 0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t stop = std::min(order.size(), start + config.batch_size);
            const std::size_t batch = stop - start;

            grad_acc.for_each_tensor(
                [](const std::string&, std::vector<float>& v) { std::fill(v.begin(), v.end(), 0.0f); });
            emb_grad.fill(0.0f);

            std::vector<detail::ExampleGrad> slots(batch);
            auto run_example = [&](std::size_t k) {
                const std::size_t idx = order[start + k];
                const auto& ids = train_ids[idx];
                auto input = embed::lookup<float>(embeddings, ids);
                auto trace = nn::forward(params, input, static_cast<float>(config.dropout),
                                         nn::Mode::Train,
                                         detail::example_seed(config.seed, epoch, ordinal + k));
                auto g = nn::backward(params, trace, train_set[idx].label);
                slots[k].params = std::move(g.params);
                slots[k].input = std::move(g.input);
                slots[k].ids = &ids;
                slots[k].loss = static_cast<double>(nn::cross_entropy(trace, train_set[idx].label));
            };
            if (config.threads <= 1 || batch == 1) {
                for (std::size_t k = 0; k < batch; ++k) run_example(k);
            } else {
                const std::size_t nthreads = std::min(config.threads, batch);
                std::vector<std::thread> pool;
                pool.reserve(nthreads);
                for (std::size_t t = 0; t < nthreads; ++t)
                    pool.emplace_back([&, t] {
                        for (std::size_t k = t; k < batch; k += nthreads) run_example(k);
                    });
                for (auto& th : pool) th.join();
            }

            // Reduce in example order so parallel and sequential runs agree
            // bit-for-bit.
            for (std::size_t k = 0; k < batch; ++k) {
                if (!std::isfinite(slots[k].loss)) {
                    const std::size_t idx = order[start + k];
                    throw DataError("train: loss diverged (NaN) at epoch " + std::to_string(epoch) +
                                    ", batch " + std::to_string(start / config.batch_size) +
                                    ", example " + train_set[idx].source_id);
                }
                epoch_loss += slots[k].loss;
                grad_acc.for_each_tensor([&](const std::string& name, std::vector<float>& acc) {
                    slots[k].params.for_each_tensor(
                        [&](const std::string& n2, const std::vector<float>& g) {
                            if (n2 != name) return;
                            for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += g[i];
                        });
                });
                const auto& ids = *slots[k].ids;
                for (std::size_t pos = 0; pos < ids.size(); ++pos) {
                    const auto row = static_cast<std::size_t>(ids[pos]);
                    if (!embeddings.row_trainable(row)) continue;
                    float* dst = emb_grad.row(row);
                    const float* src = slots[k].input.row(pos);
                    for (std::size_t c = 0; c < config.dims.embedding_dim; ++c) dst[c] += src[c];
                }
            }

            const float scale = 1.0f / static_cast<float>(batch);
            grad_acc.for_each_tensor([&](const std::string&, std::vector<float>& v) {
                for (float& x : v) x *= scale;
            });
            for (float& x : emb_grad.values()) x *= scale;

            adam_step(state, params, embeddings.matrix(), grad_acc, emb_grad, config);
            ordinal += batch;
        }

        const double dev_acc = evaluate(params, embeddings, vocab, dev_set, config).accuracy;
        const double mean_loss = epoch_loss / static_cast<double>(train_set.size());
        if (history) {
            history->train_loss_per_epoch.push_back(mean_loss);
            history->dev_accuracy_per_epoch.push_back(dev_acc);
        }
        if (log)
            (*log) << "epoch " << epoch << " loss " << format_fixed(mean_loss, 4) << " dev_acc "
                   << format_fixed(dev_acc, 4) << '\n';

        if (dev_acc > best.dev_accuracy) {
            best.params = params;
            best.embeddings = embeddings;
            best.dev_accuracy = dev_acc;
            best.epoch = epoch;
            epochs_since_best = 0;
        } else {
            if (dev_acc == best.dev_accuracy) {
                // among equal-accuracy epochs keep the latest: the longer-
                // trained model has lower loss and sharper margins
                best.params = params;
                best.embeddings = embeddings;
                best.epoch = epoch;
            }
            ++epochs_since_best;
            if (epochs_since_best >= config.patience) {
                if (log) (*log) << "early stop after epoch " << epoch << '\n';
                break;
            }
        }
    }
    return best;
}

}  // namespace politelens::train

#endif  // POLITELENS_TRAIN_HPP
