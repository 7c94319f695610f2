#ifndef POLITELENS_NN_HPP
#define POLITELENS_NN_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "politelens/common.hpp"
#include "politelens/corpus.hpp"

namespace politelens::nn {

using corpus::Label;

enum class Mode { Train, Eval };

struct ModelDims {
    std::size_t embedding_dim = 300;
    std::vector<std::size_t> windows = {3, 4, 5};
    std::size_t feature_maps = 75;  // filters per window size
    static constexpr std::size_t kClasses = 2;

    std::size_t pooled_size() const { return windows.size() * feature_maps; }
    std::size_t max_window() const {
        return *std::max_element(windows.begin(), windows.end());
    }
    std::size_t bank_offset(std::size_t bank) const { return bank * feature_maps; }

    bool operator==(const ModelDims& o) const {
        return embedding_dim == o.embedding_dim && windows == o.windows &&
               feature_maps == o.feature_maps;
    }
};

/// Filters for one window size. Row f of `weights` is one t x d filter
/// flattened row-major, so it aligns with a window of t consecutive
/// embedding rows.
template <typename T>
struct FilterBank {
    std::size_t window = 0;
    Matrix<T> weights;   // feature_maps x (window * embedding_dim)
    std::vector<T> bias;  // feature_maps
};

template <typename T>
struct ModelParams {
    ModelDims dims;
    std::vector<FilterBank<T>> banks;
    Matrix<T> dense_w;     // pooled_size x kClasses
    std::vector<T> dense_b;  // kClasses

    static ModelParams zeros(const ModelDims& dims) {
        ModelParams p;
        p.dims = dims;
        for (std::size_t w : dims.windows) {
            FilterBank<T> bank;
            bank.window = w;
            bank.weights = Matrix<T>(dims.feature_maps, w * dims.embedding_dim);
            bank.bias.assign(dims.feature_maps, T{});
            p.banks.push_back(std::move(bank));
        }
        p.dense_w = Matrix<T>(dims.pooled_size(), ModelDims::kClasses);
        p.dense_b.assign(ModelDims::kClasses, T{});
        return p;
    }

    /// Uniform unit-scaling init: weights uniform(-sqrt(3/fan_in), +),
    /// biases zero.
    static ModelParams random_init(const ModelDims& dims, std::uint64_t seed) {
        ModelParams p = zeros(dims);
        Rng rng(splitmix64(seed) ^ 0x706172616dULL);
        for (auto& bank : p.banks) {
            const double r = std::sqrt(3.0 / static_cast<double>(bank.window * dims.embedding_dim));
            for (T& v : bank.weights.values()) v = static_cast<T>(rng.uniform(-r, r));
        }
        const double r = std::sqrt(3.0 / static_cast<double>(dims.pooled_size()));
        for (T& v : p.dense_w.values()) v = static_cast<T>(rng.uniform(-r, r));
        return p;
    }

    /// Visits every parameter tensor as (name, vector<T>&), in a fixed order.
    template <typename F>
    void for_each_tensor(F&& f) {
        for (auto& bank : banks) {
            std::string prefix = "conv" + std::to_string(bank.window);
            f(prefix + ".w", bank.weights.values());
            f(prefix + ".b", bank.bias);
        }
        f("dense.w", dense_w.values());
        f("dense.b", dense_b);
    }
    template <typename F>
    void for_each_tensor(F&& f) const {
        const_cast<ModelParams*>(this)->for_each_tensor(
            [&](const std::string& name, std::vector<T>& v) {
                f(name, static_cast<const std::vector<T>&>(v));
            });
    }

    std::uint64_t content_hash() const {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        h = (h ^ dims.embedding_dim) * 0x100000001b3ULL;
        h = (h ^ dims.feature_maps) * 0x100000001b3ULL;
        for (std::size_t w : dims.windows) h = (h ^ w) * 0x100000001b3ULL;
        for_each_tensor([&](const std::string&, const std::vector<T>& v) {
            h = fnv1a64(v.data(), v.size() * sizeof(T), h);
        });
        return h;
    }

    bool all_finite() const {
        bool ok = true;
        for_each_tensor([&](const std::string&, const std::vector<T>& v) {
            for (T x : v)
                if (!std::isfinite(static_cast<double>(x))) ok = false;
        });
        return ok;
    }
};

/// Everything the backward pass (and the cluster/saliency analyses) need
/// from one forward evaluation.
template <typename T>
struct ForwardTrace {
    Matrix<T> input;                      // E, n x d
    std::vector<Matrix<T>> feature_maps;  // per bank: feature_maps x (n-t+1), post-ReLU
    std::vector<T> pooled;                // pooled_size, pooled[j] = max of map j
    std::vector<std::size_t> argmax;      // winning position per pooled unit
    std::vector<T> dropout_scale;         // 0 or 1/(1-q) in Train mode; 1 in Eval
    std::vector<T> dropped;               // pooled * dropout_scale (dense input)
    std::vector<T> scores;                // pre-softmax S, kClasses
    std::vector<T> probs;                 // softmax(S)
    Mode mode = Mode::Eval;
    std::uint64_t params_hash = 0;
};

/// Gradients of a scalar objective with respect to every parameter and the
/// input embedding matrix.
template <typename T>
struct Gradients {
    ModelParams<T> params;  // same shapes as the model, holding gradient values
    Matrix<T> input;        // n x d

    static Gradients zeros_like(const ModelParams<T>& p, std::size_t n) {
        Gradients g;
        g.params = ModelParams<T>::zeros(p.dims);
        g.input = Matrix<T>(n, p.dims.embedding_dim);
        return g;
    }
};

/// One convolution feature: f(<filter, window> + bias) with f = ReLU.
template <typename T>
T conv_feature(const Matrix<T>& filter, T bias, const Matrix<T>& window) {
    if (filter.rows() != window.rows() || filter.cols() != window.cols())
        throw std::invalid_argument("conv_feature: filter and window shapes differ");
    T a = dot(filter.values().data(), window.values().data(), filter.size()) + bias;
    return a > T{} ? a : T{};
}

template <typename T>
void softmax_inplace(std::vector<T>& s) {
    T m = *std::max_element(s.begin(), s.end());
    T sum = T{};
    for (T& v : s) {
        v = std::exp(v - m);
        sum += v;
    }
    for (T& v : s) v /= sum;
}

template <typename T>
ForwardTrace<T> forward(const ModelParams<T>& params, const Matrix<T>& input, T dropout_rate,
                        Mode mode, std::uint64_t seed) {
    const ModelDims& dims = params.dims;
    const std::size_t n = input.rows();
    const std::size_t d = input.cols();
    if (d != dims.embedding_dim)
        throw std::invalid_argument("forward: input has " + std::to_string(d) +
                                    " columns, model expects " +
                                    std::to_string(dims.embedding_dim));
    if (n < dims.max_window())
        throw std::invalid_argument("forward: sequence length " + std::to_string(n) +
                                    " shorter than largest filter window " +
                                    std::to_string(dims.max_window()));
    if (!(dropout_rate >= T{0} && dropout_rate < T{1}))
        throw std::invalid_argument("forward: dropout rate must be in [0,1)");

    ForwardTrace<T> trace;
    trace.input = input;
    trace.mode = mode;
    trace.params_hash = params.content_hash();

    const std::size_t pooled_size = dims.pooled_size();
    trace.pooled.assign(pooled_size, T{});
    trace.argmax.assign(pooled_size, 0);
    trace.feature_maps.reserve(params.banks.size());

    for (std::size_t b = 0; b < params.banks.size(); ++b) {
        const FilterBank<T>& bank = params.banks[b];
        const std::size_t t = bank.window;
        const std::size_t positions = n - t + 1;
        const std::size_t span = t * d;
        Matrix<T> fmap(dims.feature_maps, positions);
        for (std::size_t f = 0; f < dims.feature_maps; ++f) {
            const T* w = bank.weights.row(f);
            const T bias = bank.bias[f];
            T best = T{-1};
            std::size_t best_i = 0;
            for (std::size_t i = 0; i < positions; ++i) {
                T a = dot(w, input.row(i), span) + bias;
                T c = a > T{} ? a : T{};
                fmap(f, i) = c;
                if (c > best) {  // strict: ties keep the lowest index
                    best = c;
                    best_i = i;
                }
            }
            const std::size_t j = dims.bank_offset(b) + f;
            trace.pooled[j] = fmap(f, best_i);
            trace.argmax[j] = best_i;
        }
        trace.feature_maps.push_back(std::move(fmap));
    }

    // Inverted dropout on the pooled vector: kept units scale by 1/(1-q) so
    // Eval needs no rescaling.
    trace.dropout_scale.assign(pooled_size, T{1});
    if (mode == Mode::Train && dropout_rate > T{0}) {
        Rng rng(splitmix64(seed) ^ 0x64726f70ULL);
        const T keep_scale = T{1} / (T{1} - dropout_rate);
        for (std::size_t j = 0; j < pooled_size; ++j)
            trace.dropout_scale[j] =
                rng.uniform01() < static_cast<double>(dropout_rate) ? T{} : keep_scale;
    }
    trace.dropped.resize(pooled_size);
    for (std::size_t j = 0; j < pooled_size; ++j)
        trace.dropped[j] = trace.pooled[j] * trace.dropout_scale[j];

    trace.scores.assign(ModelDims::kClasses, T{});
    for (std::size_t k = 0; k < ModelDims::kClasses; ++k) {
        T s = params.dense_b[k];
        for (std::size_t j = 0; j < pooled_size; ++j)
            s += trace.dropped[j] * params.dense_w(j, k);
        trace.scores[k] = s;
    }
    trace.probs = trace.scores;
    softmax_inplace(trace.probs);
    return trace;
}

/// Cross-entropy of the true label, computed from the pre-softmax scores via
/// log-sum-exp for numerical stability.
template <typename T>
T cross_entropy(const ForwardTrace<T>& trace, Label label) {
    const auto& s = trace.scores;
    T m = *std::max_element(s.begin(), s.end());
    T lse = T{};
    for (T v : s) lse += std::exp(v - m);
    return std::log(lse) + m - s[static_cast<std::size_t>(label)];
}

/// Reverse pass from an arbitrary gradient seed on the pre-softmax scores.
/// The loss backward seeds with (p - onehot(y)); first-derivative saliency
/// seeds with onehot(y) to differentiate the raw score S_y instead.
template <typename T>
Gradients<T> backward_from_scores(const ModelParams<T>& params, const ForwardTrace<T>& trace,
                                  const std::vector<T>& dscores) {
    if (trace.params_hash != params.content_hash())
        throw DataError("backward: stale trace (params hash mismatch)");
    if (dscores.size() != ModelDims::kClasses)
        throw std::invalid_argument("backward: score gradient must have one entry per class");

    const ModelDims& dims = params.dims;
    const std::size_t n = trace.input.rows();
    const std::size_t d = dims.embedding_dim;
    const std::size_t pooled_size = dims.pooled_size();
    Gradients<T> g = Gradients<T>::zeros_like(params, n);

    // dense layer
    std::vector<T> ddropped(pooled_size, T{});
    for (std::size_t k = 0; k < ModelDims::kClasses; ++k) {
        g.params.dense_b[k] = dscores[k];
        for (std::size_t j = 0; j < pooled_size; ++j) {
            g.params.dense_w(j, k) = trace.dropped[j] * dscores[k];
            ddropped[j] += params.dense_w(j, k) * dscores[k];
        }
    }

    // dropout, max-pool routing, ReLU gate, convolution
    for (std::size_t b = 0; b < params.banks.size(); ++b) {
        const FilterBank<T>& bank = params.banks[b];
        const std::size_t t = bank.window;
        const std::size_t span = t * d;
        for (std::size_t f = 0; f < dims.feature_maps; ++f) {
            const std::size_t j = dims.bank_offset(b) + f;
            T dpooled = ddropped[j] * trace.dropout_scale[j];
            if (dpooled == T{}) continue;
            if (!(trace.pooled[j] > T{})) continue;  // ReLU inactive at the winner
            const std::size_t i = trace.argmax[j];
            const T* window_data = trace.input.row(i);
            T* wgrad = g.params.banks[b].weights.row(f);
            const T* w = bank.weights.row(f);
            T* igrad = g.input.row(i);
            for (std::size_t x = 0; x < span; ++x) {
                wgrad[x] += dpooled * window_data[x];
                igrad[x] += dpooled * w[x];
            }
            g.params.banks[b].bias[f] += dpooled;
        }
    }
    return g;
}

/// Gradients of cross-entropy loss at the given true label.
template <typename T>
Gradients<T> backward(const ModelParams<T>& params, const ForwardTrace<T>& trace, Label label) {
    std::vector<T> dscores = trace.probs;
    dscores[static_cast<std::size_t>(label)] -= T{1};
    return backward_from_scores(params, trace, dscores);
}

// ---------------------------------------------------------------------------
// Finite-difference verification

struct GradCheckReport {
    double max_rel_error = 0.0;
    std::string worst_coordinate;
    std::size_t checked = 0;
    double tolerance = 0.0;
    bool pass = false;
};

namespace detail {

/// rel = |ga - gn| / (|ga| + |gn| + 1e-6); the additive floor keeps
/// finite-difference roundoff noise on near-zero coordinates from
/// registering as error.
inline double relative_error(double analytic, double numeric) {
    return std::abs(analytic - numeric) / (std::abs(analytic) + std::abs(numeric) + 1e-6);
}

}  // namespace detail

/// Compares a precomputed analytic gradient against central finite
/// differences of the Eval-mode loss, coordinate by coordinate.
template <typename T>
GradCheckReport grad_check_against(const ModelParams<T>& params, const Matrix<T>& input,
                                   Label label, double tolerance, double step,
                                   const Gradients<T>& analytic) {
    if (step <= 0.0) throw std::invalid_argument("grad_check: perturbation step must be positive");

    GradCheckReport report;
    report.tolerance = tolerance;

    ModelParams<T> work = params;
    Matrix<T> work_input = input;
    auto loss_at = [&]() {
        auto trace = forward(work, work_input, T{0}, Mode::Eval, 0);
        return static_cast<double>(cross_entropy(trace, label));
    };
    auto check_coord = [&](const std::string& name, T& slot, double analytic_value) {
        const T saved = slot;
        slot = static_cast<T>(saved + step);
        double up = loss_at();
        slot = static_cast<T>(saved - step);
        double down = loss_at();
        slot = saved;
        double numeric = (up - down) / (2.0 * step);
        double rel = detail::relative_error(analytic_value, numeric);
        ++report.checked;
        if (rel > report.max_rel_error) {
            report.max_rel_error = rel;
            report.worst_coordinate = name;
        }
    };

    analytic.params.for_each_tensor([&](const std::string& name, const std::vector<T>& gvec) {
        // locate the matching parameter tensor by name
        work.for_each_tensor([&](const std::string& pname, std::vector<T>& pvec) {
            if (pname != name) return;
            for (std::size_t i = 0; i < pvec.size(); ++i)
                check_coord(name + "[" + std::to_string(i) + "]", pvec[i],
                            static_cast<double>(gvec[i]));
        });
    });
    for (std::size_t i = 0; i < work_input.size(); ++i)
        check_coord("input[" + std::to_string(i) + "]", work_input.values()[i],
                    static_cast<double>(analytic.input.values()[i]));

    report.pass = report.max_rel_error < tolerance;
    return report;
}

/// Full check: runs backward itself, then verifies it against central
/// differences. Failures are reported, not thrown.
template <typename T>
GradCheckReport grad_check(const ModelParams<T>& params, const Matrix<T>& input, Label label,
                           double tolerance, double step = 1e-5) {
    auto trace = forward(params, input, T{0}, Mode::Eval, 0);
    auto analytic = backward(params, trace, label);
    return grad_check_against(params, input, label, tolerance, step, analytic);
}

}  // namespace politelens::nn

#endif  // POLITELENS_NN_HPP
