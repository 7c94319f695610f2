#include "politelens/nn.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace politelens;
using namespace politelens::nn;
using corpus::Label;

namespace {

template <typename T>
Matrix<T> random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double lo = -1.0,
                        double hi = 1.0) {
    Matrix<T> m(rows, cols);
    for (auto& v : m.values()) v = static_cast<T>(rng.uniform(lo, hi));
    return m;
}

// Independent brute-force forward pass: straight-line loops only, no shared
// helpers with the implementation under test.
template <typename T>
std::vector<double> oracle_probs(const ModelParams<T>& params, const Matrix<T>& input) {
    std::vector<double> pooled;
    for (const auto& bank : params.banks) {
        for (std::size_t f = 0; f < params.dims.feature_maps; ++f) {
            double best = -1.0;
            for (std::size_t pos = 0; pos + bank.window <= input.rows(); ++pos) {
                double acc = static_cast<double>(bank.bias[f]);
                for (std::size_t r = 0; r < bank.window; ++r)
                    for (std::size_t c = 0; c < input.cols(); ++c)
                        acc += static_cast<double>(bank.weights(f, r * input.cols() + c)) *
                               static_cast<double>(input(pos + r, c));
                double relu = acc > 0.0 ? acc : 0.0;
                if (relu > best) best = relu;
            }
            pooled.push_back(best);
        }
    }
    std::vector<double> scores;
    for (std::size_t k = 0; k < 2; ++k) {
        double s = static_cast<double>(params.dense_b[k]);
        for (std::size_t j = 0; j < pooled.size(); ++j)
            s += pooled[j] * static_cast<double>(params.dense_w(j, k));
        scores.push_back(s);
    }
    double m = std::max(scores[0], scores[1]);
    double e0 = std::exp(scores[0] - m), e1 = std::exp(scores[1] - m);
    return {e0 / (e0 + e1), e1 / (e0 + e1)};
}

ModelDims small_dims(std::size_t d = 5, std::size_t f = 2,
                     std::vector<std::size_t> windows = {3, 4, 5}) {
    ModelDims dims;
    dims.embedding_dim = d;
    dims.windows = std::move(windows);
    dims.feature_maps = f;
    return dims;
}

}  // namespace

TEST(ConvFeature, ZeroFilterGivesZero) {
    Matrix<double> filter(2, 3), window(2, 3);
    Rng rng(1);
    for (auto& v : window.values()) v = rng.uniform(-1, 1);
    EXPECT_EQ(conv_feature(filter, 0.0, window), 0.0);
}

TEST(ConvFeature, HandComputedCase) {
    // t=2, d=1, filter [[1],[-1]], bias 0.5, window [[2],[1]] -> ReLU(2-1+0.5)
    Matrix<double> filter(2, 1), window(2, 1);
    filter(0, 0) = 1.0;
    filter(1, 0) = -1.0;
    window(0, 0) = 2.0;
    window(1, 0) = 1.0;
    EXPECT_DOUBLE_EQ(conv_feature(filter, 0.5, window), 1.5);
}

TEST(ConvFeature, LargeNegativeBiasClampsToZero) {
    Matrix<double> filter(2, 4), window(2, 4);
    Rng rng(3);
    for (auto& v : filter.values()) v = rng.uniform(-1, 1);
    for (auto& v : window.values()) v = rng.uniform(-1, 1);
    // |<f,w>| <= t*d = 8 < 10, so the pre-activation is negative
    EXPECT_EQ(conv_feature(filter, -10.0, window), 0.0);
}

TEST(ConvFeature, ShapeMismatchRejected) {
    Matrix<double> filter(2, 3), window(3, 3);
    EXPECT_THROW(conv_feature(filter, 0.0, window), std::invalid_argument);
}

TEST(Forward, DefaultDimsGivePooled225) {
    ModelDims dims;  // windows 3/4/5, 75 feature maps, d=300
    auto params = ModelParams<float>::random_init(dims, 1);
    Rng rng(2);
    auto input = random_matrix<float>(8, dims.embedding_dim, rng);
    auto trace = forward(params, input, 0.0f, Mode::Eval, 0);
    EXPECT_EQ(trace.pooled.size(), 225u);
    EXPECT_EQ(trace.dropped.size(), 225u);
    EXPECT_EQ(trace.feature_maps.size(), 3u);
    EXPECT_EQ(trace.feature_maps[0].cols(), 8u - 3u + 1u);
    EXPECT_EQ(trace.feature_maps[2].cols(), 8u - 5u + 1u);
}

TEST(Forward, AllZeroParamsGiveUniformProbs) {
    auto dims = small_dims();
    auto params = ModelParams<float>::zeros(dims);
    Rng rng(5);
    auto input = random_matrix<float>(7, dims.embedding_dim, rng);
    auto trace = forward(params, input, 0.0f, Mode::Eval, 0);
    EXPECT_FLOAT_EQ(trace.probs[0], 0.5f);
    EXPECT_FLOAT_EQ(trace.probs[1], 0.5f);
    // every feature map is all-ties here, so the lowest index must win
    for (std::size_t j = 0; j < trace.argmax.size(); ++j) EXPECT_EQ(trace.argmax[j], 0u);
}

TEST(Forward, TooShortSequenceRejected) {
    auto dims = small_dims();
    auto params = ModelParams<float>::zeros(dims);
    Rng rng(5);
    auto input = random_matrix<float>(4, dims.embedding_dim, rng);
    EXPECT_THROW(forward(params, input, 0.0f, Mode::Eval, 0), std::invalid_argument);
}

TEST(Forward, MatchesBruteForceOracle) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto dims = small_dims(4, 3, {2, 3});
        auto params = ModelParams<double>::random_init(dims, seed);
        Rng rng(seed + 100);
        for (auto& bank : params.banks)
            for (auto& b : bank.bias) b = rng.uniform(-0.5, 0.5);
        for (auto& b : params.dense_b) b = rng.uniform(-0.5, 0.5);
        auto input = random_matrix<double>(6, 4, rng);

        auto trace = forward(params, input, 0.0, Mode::Eval, 0);
        auto want = oracle_probs(params, input);
        EXPECT_NEAR(trace.probs[0], want[0], 1e-9);
        EXPECT_NEAR(trace.probs[1], want[1], 1e-9);
    }
}

TEST(Forward, SoftmaxNormalizationAndShiftInvariance) {
    auto dims = small_dims();
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        auto params = ModelParams<float>::random_init(dims, rng.next_u32());
        auto input = random_matrix<float>(9, dims.embedding_dim, rng, -2, 2);
        auto trace = forward(params, input, 0.0f, Mode::Eval, 0);
        float sum = trace.probs[0] + trace.probs[1];
        EXPECT_NEAR(sum, 1.0f, 1e-6f);
        EXPECT_GE(trace.probs[0], 0.0f);
        EXPECT_LE(trace.probs[0], 1.0f);

        // adding a constant to both dense biases shifts both scores equally
        auto shifted = params;
        shifted.dense_b[0] += 3.25f;
        shifted.dense_b[1] += 3.25f;
        auto trace2 = forward(shifted, input, 0.0f, Mode::Eval, 0);
        EXPECT_NEAR(trace2.probs[0], trace.probs[0], 1e-6f);
        EXPECT_NEAR(trace2.probs[1], trace.probs[1], 1e-6f);
    }
}

TEST(Forward, ReluNonnegativity) {
    auto dims = small_dims();
    Rng rng(13);
    auto params = ModelParams<float>::random_init(dims, 21);
    auto input = random_matrix<float>(10, dims.embedding_dim, rng, -3, 3);
    auto trace = forward(params, input, 0.0f, Mode::Eval, 0);
    for (const auto& fmap : trace.feature_maps)
        for (float v : fmap.values()) EXPECT_GE(v, 0.0f);
    for (float v : trace.pooled) EXPECT_GE(v, 0.0f);
}

TEST(Forward, PoolingTraceConsistency) {
    auto dims = small_dims();
    Rng rng(17);
    auto params = ModelParams<float>::random_init(dims, 23);
    auto input = random_matrix<float>(9, dims.embedding_dim, rng);
    auto train_trace = forward(params, input, 0.5f, Mode::Train, 99);
    auto eval_trace = forward(params, input, 0.0f, Mode::Eval, 0);
    for (std::size_t j = 0; j < train_trace.pooled.size(); ++j) {
        EXPECT_EQ(train_trace.pooled[j], eval_trace.pooled[j]);
        EXPECT_EQ(train_trace.argmax[j], eval_trace.argmax[j]);
    }
    // stored pooled value equals the feature map at the stored argmax, bit-exactly
    for (std::size_t b = 0; b < params.banks.size(); ++b)
        for (std::size_t f = 0; f < dims.feature_maps; ++f) {
            std::size_t j = dims.bank_offset(b) + f;
            EXPECT_EQ(eval_trace.pooled[j], eval_trace.feature_maps[b](f, eval_trace.argmax[j]));
        }
}

TEST(Forward, DeterministicGivenSeed) {
    auto dims = small_dims();
    Rng rng(19);
    auto params = ModelParams<float>::random_init(dims, 29);
    auto input = random_matrix<float>(8, dims.embedding_dim, rng);
    auto t1 = forward(params, input, 0.5f, Mode::Train, 1234);
    auto t2 = forward(params, input, 0.5f, Mode::Train, 1234);
    EXPECT_EQ(t1.dropout_scale, t2.dropout_scale);
    EXPECT_EQ(t1.dropped, t2.dropped);
    EXPECT_EQ(t1.probs, t2.probs);
    auto t3 = forward(params, input, 0.5f, Mode::Train, 1235);
    EXPECT_NE(t1.dropout_scale, t3.dropout_scale);
}

TEST(Forward, DropoutExpectationMatchesEval) {
    // average of 10,000 masked forwards vs the Eval value, within 2% per unit
    auto dims = small_dims(4, 2, {2, 3});
    auto params = ModelParams<double>::random_init(dims, 31);
    // lift biases so every pooled unit is comfortably positive
    for (auto& bank : params.banks)
        for (auto& b : bank.bias) b = 0.5;
    Rng rng(37);
    auto input = random_matrix<double>(6, 4, rng);
    auto eval_trace = forward(params, input, 0.0, Mode::Eval, 0);

    const std::size_t pooled_size = eval_trace.pooled.size();
    std::vector<double> mean(pooled_size, 0.0);
    const int samples = 10000;
    for (int s = 0; s < samples; ++s) {
        auto t = forward(params, input, 0.5, Mode::Train, static_cast<std::uint64_t>(s));
        for (std::size_t j = 0; j < pooled_size; ++j) mean[j] += t.dropped[j];
    }
    for (std::size_t j = 0; j < pooled_size; ++j) {
        mean[j] /= samples;
        ASSERT_GT(eval_trace.pooled[j], 0.1);
        EXPECT_NEAR(mean[j], eval_trace.pooled[j], 0.02 * eval_trace.pooled[j]) << "unit " << j;
    }
}

TEST(Backward, NearOptimumGradientsVanish) {
    auto dims = small_dims();
    auto params = ModelParams<double>::random_init(dims, 41);
    params.dense_b[1] = 60.0;  // p -> one-hot at label 1
    Rng rng(43);
    auto input = random_matrix<double>(7, dims.embedding_dim, rng);
    auto trace = forward(params, input, 0.0, Mode::Eval, 0);
    ASSERT_GT(trace.probs[1], 1.0 - 1e-12);
    auto g = backward(params, trace, Label::Polite);
    g.params.for_each_tensor([&](const std::string& name, const std::vector<double>& v) {
        for (double x : v) EXPECT_LT(std::abs(x), 1e-6) << name;
    });
    for (double x : g.input.values()) EXPECT_LT(std::abs(x), 1e-6);
}

TEST(Backward, MatchesCentralFiniteDifferences) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto dims = small_dims(5, 2);
        auto params = ModelParams<double>::random_init(dims, seed * 7 + 1);
        Rng rng(seed + 51);
        for (auto& bank : params.banks)
            for (auto& b : bank.bias) b = rng.uniform(-0.3, 0.3);
        auto input = random_matrix<double>(7, 5, rng);
        Label label = (seed % 2 == 0) ? Label::Polite : Label::Impolite;
        auto report = grad_check(params, input, label, 1e-4);
        EXPECT_TRUE(report.pass) << "seed " << seed << ": worst " << report.worst_coordinate
                                 << " rel " << report.max_rel_error;
    }
}

TEST(Backward, UntouchedWordHasExactlyZeroGradient) {
    auto dims = small_dims(3, 2);
    auto params = ModelParams<double>::zeros(dims);
    // all-positive identical filters: every filter's argmax window starts at 0
    for (auto& bank : params.banks)
        for (auto& v : bank.weights.values()) v = 0.5;
    Rng rng(61);
    for (auto& v : params.dense_w.values()) v = rng.uniform(-1, 1);

    Matrix<double> input(7, 3);
    for (std::size_t c = 0; c < 3; ++c) input(0, c) = 5.0;  // row 0 dominates
    for (std::size_t r = 1; r < 7; ++r)
        for (std::size_t c = 0; c < 3; ++c) input(r, c) = -0.01 * static_cast<double>(r);

    auto trace = forward(params, input, 0.0, Mode::Eval, 0);
    for (std::size_t j = 0; j < trace.argmax.size(); ++j) ASSERT_EQ(trace.argmax[j], 0u);

    auto g = backward(params, trace, Label::Impolite);
    // rows beyond the largest window never participate in a winning window
    for (std::size_t r = 5; r < 7; ++r)
        for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(g.input(r, c), 0.0);
    // row 0 does participate
    double row0 = 0.0;
    for (std::size_t c = 0; c < 3; ++c) row0 += std::abs(g.input(0, c));
    EXPECT_GT(row0, 0.0);
}

TEST(Backward, StaleTraceRejected) {
    auto dims = small_dims();
    auto params = ModelParams<float>::random_init(dims, 71);
    Rng rng(73);
    auto input = random_matrix<float>(7, dims.embedding_dim, rng);
    auto trace = forward(params, input, 0.0f, Mode::Eval, 0);
    params.dense_b[0] += 1.0f;
    EXPECT_THROW(backward(params, trace, Label::Polite), DataError);
}

TEST(GradCheck, ZeroStepRejected) {
    auto dims = small_dims(3, 1);
    auto params = ModelParams<double>::random_init(dims, 81);
    Rng rng(83);
    auto input = random_matrix<double>(6, 3, rng);
    EXPECT_THROW(grad_check(params, input, Label::Polite, 1e-4, 0.0), std::invalid_argument);
}

TEST(GradCheck, CorruptedBiasGradientIsNamed) {
    auto dims = small_dims(3, 1);
    auto params = ModelParams<double>::random_init(dims, 91);
    Rng rng(93);
    auto input = random_matrix<double>(6, 3, rng);
    auto trace = forward(params, input, 0.0, Mode::Eval, 0);
    auto analytic = backward(params, trace, Label::Polite);
    analytic.params.dense_b[1] += 1.0;  // inject a fault
    auto report = grad_check_against(params, input, Label::Polite, 1e-4, 1e-5, analytic);
    EXPECT_FALSE(report.pass);
    EXPECT_EQ(report.worst_coordinate, "dense.b[1]");
}
