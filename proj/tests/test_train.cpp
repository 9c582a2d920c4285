#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gradcheck.hpp"
#include "property.hpp"
#include "qtsc/train.hpp"

using namespace qtsc::train;
using namespace qtsc::model;
using qtsc::WindowedSequence;
using qtsc::quant::Precision;

TEST(CrossEntropy, Examples) {
    EXPECT_NEAR(cross_entropy(Vec{{0, 1000, 0}}, 1), 0.0, 1e-12);
    EXPECT_NEAR(cross_entropy(Vec::Zero(5), 3), std::log(5.0), 1e-12);
    EXPECT_NEAR(cross_entropy(Vec{{1, 2, 3}}, 2), 0.4076, 1e-3);
    EXPECT_TRUE(std::isfinite(cross_entropy(Vec{{-1000, 1000}}, 0)));
}

TEST(LossGradient, Examples) {
    const Vec g = loss_gradient(Vec{{0.7, 0.3}}, 0);
    EXPECT_NEAR(g(0), -0.3, 1e-15);
    EXPECT_NEAR(g(1), 0.3, 1e-15);
    EXPECT_TRUE(loss_gradient(Vec{{0, 1, 0}}, 1).isZero());
    const Vec p = softmax(Vec{{0.3, -1.2, 2.0, 0.1}});
    EXPECT_NEAR(loss_gradient(p, 2).sum(), 0.0, 1e-15);
}

TEST(SequenceLoss, SingleStepIsCrossEntropy) {
    std::mt19937_64 rng(3);
    NetworkParams p = qtsc::testing::random_tiny_network(rng);
    p.cfg.steps = 1;
    const WindowedSequence s = qtsc::testing::random_window_sequence(rng, p.cfg);
    NetworkParams g = zero_params(p.cfg);
    const double loss = sequence_loss_and_grads(s, p, g);
    const Mat logits = forward_logits(s, p);
    EXPECT_NEAR(loss, cross_entropy(logits.row(0).transpose(), s.label), 1e-14);
}

TEST(SequenceLoss, IsMeanOfStepLosses) {
    qtsc::testing::for_all(30, 31, [](qtsc::testing::Gen& gen) {
        NetworkParams p = qtsc::testing::random_tiny_network(gen.rng);
        const WindowedSequence s = qtsc::testing::random_window_sequence(gen.rng, p.cfg);
        const Mat logits = forward_logits(s, p);
        double sum = 0;
        for (int k = 0; k < p.cfg.steps; ++k) sum += cross_entropy(logits.row(k).transpose(), s.label);
        NetworkParams g = zero_params(p.cfg);
        ASSERT_NEAR(sequence_loss_and_grads(s, p, g), sum / p.cfg.steps, 1e-12);
        ASSERT_NEAR(sequence_loss(s, p), sum / p.cfg.steps, 1e-12);
        ASSERT_NEAR(sequence_loss(s, p, false), cross_entropy(logits.row(p.cfg.steps - 1).transpose(), s.label), 1e-12);
    });
}

TEST(Gradients, SpecTinyNetworkMatchesFiniteDifferences) {
    NetworkConfig c;
    c.hidden = 4;
    c.window = 3;
    c.steps = 2;
    c.classes = 2;
    c.cnn_layers = {{2, 2}};
    std::mt19937_64 rng(17);
    NetworkParams p = zero_params(c);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    p.for_each_tensor([&](const TensorView& t) {
        for (double& v : t.flat()) v = u(rng);
    });
    const WindowedSequence s = qtsc::testing::random_window_sequence(rng, c);
    const auto r = qtsc::testing::gradient_check(p, s);
    EXPECT_EQ(r.checked, p.parameter_count());
    EXPECT_LT(r.max_rel_error, 1e-4) << r.worst_tensor;
}

TEST(Gradients, RandomNetworksMatchFiniteDifferences) {
    qtsc::testing::for_all(15, 32, [](qtsc::testing::Gen& gen) {
        const NetworkParams p = qtsc::testing::random_tiny_network(gen.rng, gen.coin());
        const WindowedSequence s = qtsc::testing::random_window_sequence(gen.rng, p.cfg);
        const auto r = qtsc::testing::gradient_check(p, s);
        ASSERT_LT(r.max_rel_error, 1e-4) << r.worst_tensor;
    });
}

TEST(Gradients, ConvergedExampleHasNearZeroGradient) {
    NetworkConfig c;
    c.use_cnn = false;
    c.window = 2;
    c.steps = 2;
    c.hidden = 2;
    c.classes = 2;
    NetworkParams p = zero_params(c);
    p.lstm.by = Vec{{40.0, -40.0}};
    const WindowedSequence s{{{0.3, -0.2}, {0.1, 0.5}}, 0};
    NetworkParams g = zero_params(c);
    EXPECT_LT(sequence_loss_and_grads(s, p, g), 1e-30);
    g.for_each_tensor([](const TensorView& t) {
        for (double v : t.flat()) EXPECT_LT(std::abs(v), 1e-30);
    });
}

TEST(Ste, GradientsOutsideRangeAreZero) {
    NetworkConfig c;
    c.hidden = 3;
    c.window = 4;
    c.steps = 2;
    c.cnn_layers = {{2, 3}};
    NetworkParams shadow = init_params(c, Precision::ternary, 5, 2.0);  // half the weights beyond |1|
    NetworkParams grads = zero_params(c, Precision::ternary);
    std::mt19937_64 rng(1);
    sequence_loss_and_grads(qtsc::testing::random_window_sequence(rng, c), effective_params(shadow), grads);
    apply_ste(grads, shadow);
    std::vector<std::span<double>> sv;
    shadow.for_each_tensor([&](const TensorView& t) { sv.push_back(t.flat()); });
    std::size_t idx = 0;
    grads.for_each_tensor([&](const TensorView& t) {
        const auto r = sv[idx++];
        auto g = t.flat();
        for (std::size_t k = 0; k < g.size(); ++k) {
            if (t.role == TensorRole::bias) {
                EXPECT_EQ(g[k], 0.0);
            }
            if (t.role == TensorRole::quantizable && std::abs(r[k]) > 1.0) {
                EXPECT_EQ(g[k], 0.0);
            }
        }
    });
}

TEST(Adagrad, Examples) {
    NetworkConfig c;
    c.use_cnn = false;
    c.window = 1;
    c.hidden = 1;
    c.classes = 1;
    NetworkParams p = zero_params(c);
    NetworkParams g = zero_params(c);
    AdagradState st(p);
    TrainConfig tc;
    tc.learning_rate = 0.05;
    g.lstm.wf(0, 0) = 1.0;
    g.lstm.wi(0, 0) = 7.0;
    adagrad_step(p, g, st, tc);
    EXPECT_NEAR(p.lstm.wf(0, 0), -0.05, 1e-9);
    EXPECT_NEAR(p.lstm.wi(0, 0), -0.05, 1e-9);
    // lstm.wi is the third tensor (no CNN): accumulator saw the clipped 5, not 7
    EXPECT_DOUBLE_EQ(st.accum[1][0], 25.0);
    EXPECT_EQ(p.lstm.wo(0, 0), 0.0);
    EXPECT_EQ(st.accum[2][0], 0.0);
}

TEST(AdagradProperty, AccumulatorNonDecreasingAndClamp) {
    qtsc::testing::for_all(20, 33, [](qtsc::testing::Gen& gen) {
        NetworkConfig c;
        c.hidden = 3;
        c.window = 3;
        c.steps = 1;
        c.cnn_layers = {{2, 2}};
        const Precision prec = gen.coin() ? Precision::ternary : Precision::binary;
        NetworkParams p = init_params(c, prec, 9, 0.9);
        AdagradState st(p);
        TrainConfig tc;
        tc.learning_rate = 0.5;
        for (int step = 0; step < 10; ++step) {
            NetworkParams g = zero_params(c, prec);
            g.for_each_tensor([&](const TensorView& t) {
                for (double& v : t.flat()) v = gen.uniform(-10, 10);
            });
            const auto before = st.accum;
            adagrad_step(p, g, st, tc);
            for (std::size_t i = 0; i < before.size(); ++i)
                for (std::size_t k = 0; k < before[i].size(); ++k) ASSERT_GE(st.accum[i][k], before[i][k]);
            p.for_each_tensor([&](const TensorView& t) {
                for (double v : t.flat()) {
                    if (t.role == TensorRole::quantizable) {
                        ASSERT_LE(std::abs(v), 1.0);
                    }
                    if (t.role == TensorRole::bias) {
                        ASSERT_EQ(v, 0.0);
                    }
                }
            });
        }
    });
}

TEST(Auc, KnownValues) {
    EXPECT_DOUBLE_EQ(binary_auc({0.1, 0.2, 0.8, 0.9}, {false, false, true, true}), 1.0);
    EXPECT_DOUBLE_EQ(binary_auc({0.9, 0.8, 0.2, 0.1}, {false, false, true, true}), 0.0);
    EXPECT_DOUBLE_EQ(binary_auc({0.5, 0.5}, {false, true}), 0.5);
    // 1 positive ranked above 2 of 3 negatives
    EXPECT_NEAR(binary_auc({0.1, 0.3, 0.5, 0.4}, {false, false, false, true}), 2.0 / 3.0, 1e-15);
    EXPECT_TRUE(std::isnan(binary_auc({0.1, 0.2}, {true, true})));
}

namespace {

std::vector<WindowedSequence> toy_split(std::uint64_t seed, int n) {
    // class 0: rising ramp, class 1: falling ramp, plus noise
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> noise(-0.1, 0.1);
    std::vector<WindowedSequence> out;
    for (int k = 0; k < n; ++k) {
        WindowedSequence s;
        s.label = k % 2;
        for (int w = 0; w < 2; ++w) {
            std::vector<double> win(4);
            for (int t = 0; t < 4; ++t) win[static_cast<std::size_t>(t)] = (s.label ? -0.2 : 0.2) * (t - 1.5) + noise(rng);
            s.windows.push_back(win);
        }
        out.push_back(s);
    }
    return out;
}

NetworkConfig toy_config() {
    NetworkConfig c;
    c.window = 4;
    c.steps = 2;
    c.hidden = 6;
    c.classes = 2;
    c.cnn_layers = {{3, 3}};
    return c;
}

}  // namespace

TEST(Train, LearnsToyTaskAndIsDeterministic) {
    const auto tr = toy_split(1, 64), te = toy_split(2, 32);
    TrainConfig tc;
    tc.epochs = 30;
    tc.batch_size = 8;
    tc.learning_rate = 0.05;
    tc.seed = 4;
    int calls = 0;
    const TrainResult a = train(tr, te, toy_config(), Precision::full, tc, [&](int, double, double) { ++calls; });
    const TrainResult b = train(tr, te, toy_config(), Precision::full, tc);
    EXPECT_EQ(calls, 30);
    EXPECT_EQ(a.loss_trace, b.loss_trace);
    EXPECT_EQ(a.accuracy_trace, b.accuracy_trace);
    EXPECT_LT(a.loss_trace.back(), a.loss_trace.front());
    EXPECT_GE(a.accuracy_trace.back(), 0.9);
    const EvalReport rep = evaluate(a.params, te);
    EXPECT_EQ(rep.accuracy, a.accuracy_trace.back());
    EXPECT_GE(rep.macro_auc, 0.9);
    int total = 0;
    for (const auto& r : rep.confusion)
        for (int v : r) total += v;
    EXPECT_EQ(total, 32);
}

TEST(Train, TernaryKeepsShadowInvariants) {
    const auto tr = toy_split(1, 32), te = toy_split(2, 16);
    TrainConfig tc;
    tc.epochs = 5;
    tc.batch_size = 8;
    tc.learning_rate = 0.1;
    const TrainResult r = train(tr, te, toy_config(), Precision::ternary, tc);
    r.params.for_each_tensor([](const TensorView& t) {
        for (double v : t.flat()) {
            if (t.role == TensorRole::quantizable) {
                EXPECT_LE(std::abs(v), 1.0);
            }
            if (t.role == TensorRole::bias) {
                EXPECT_EQ(v, 0.0);
            }
        }
    });
}

TEST(Train, RejectsEmptySplitsAndBadLabels) {
    TrainConfig tc;
    tc.epochs = 1;
    const auto tr = toy_split(1, 4);
    EXPECT_THROW(train(tr, {}, toy_config(), Precision::full, tc), qtsc::DataError);
    EXPECT_THROW(train({}, tr, toy_config(), Precision::full, tc), qtsc::DataError);
    auto bad = tr;
    bad[0].label = 5;
    EXPECT_THROW(train(bad, tr, toy_config(), Precision::full, tc), qtsc::DataError);
    TrainConfig neg;
    neg.learning_rate = -1;
    EXPECT_THROW(train(tr, tr, toy_config(), Precision::full, neg), std::invalid_argument);
}
