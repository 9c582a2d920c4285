#pragma once

// Backpropagation through time with sequential target replication,
// cross-entropy loss, gradient clipping and Adagrad. Quantized modes train
// full-precision shadow weights through the straight-through estimator.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

#include "qtsc/error.hpp"
#include "qtsc/model.hpp"
#include "qtsc/quant.hpp"
#include "qtsc/sequence.hpp"

namespace qtsc::train {

using model::Mat;
using model::NetworkConfig;
using model::NetworkParams;
using model::TensorRole;
using model::TensorView;
using model::Vec;

struct TrainConfig {
    double learning_rate = 0.05;
    double clip = 5.0;  // gradients clipped to [-clip, clip]
    int epochs = 50;
    int batch_size = 32;
    double init_range = 0.01;
    std::uint64_t seed = 1;
    bool replication = true;
    double epsilon = 1e-8;

    void validate() const {
        if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be positive");
        if (!(clip > 0.0)) throw std::invalid_argument("clip must be positive");
        if (epochs < 0 || batch_size < 1) throw std::invalid_argument("epochs >= 0 and batch_size >= 1 required");
    }
};

/// 0.05 for full precision, 0.1 for binary/ternary.
inline double default_learning_rate(quant::Precision p) noexcept { return quant::is_quantized(p) ? 0.1 : 0.05; }

inline double cross_entropy(const Vec& logits, int label) {
    const double m = logits.maxCoeff();
    const double lse = m + std::log((logits.array() - m).exp().sum());
    return lse - logits(label);
}

/// dL/dlogits = p - onehot(label).
inline Vec loss_gradient(const Vec& probabilities, int label) {
    Vec g = probabilities;
    g(label) -= 1.0;
    return g;
}

/// Loss of one sequence. `effective` must hold the weights the forward pass
/// uses (see model::effective_params).
inline double sequence_loss(const WindowedSequence& seq, const NetworkParams& effective, bool replication = true) {
    const Mat logits = model::forward_logits(seq, effective);
    const int q = static_cast<int>(logits.rows());
    if (!replication) return cross_entropy(logits.row(q - 1).transpose(), seq.label);
    double loss = 0.0;
    for (int k = 0; k < q; ++k) loss += cross_entropy(logits.row(k).transpose(), seq.label);
    return loss / q;
}

/// Adds d(loss)/d(effective weights) into `grads` (same shapes as
/// `effective`) and returns the loss.
inline double sequence_loss_and_grads(const WindowedSequence& seq, const NetworkParams& effective, NetworkParams& grads,
                                      bool replication = true) {
    const NetworkConfig& cfg = effective.cfg;
    if (seq.label < 0 || seq.label >= cfg.classes) throw ShapeError("label out of range");
    std::vector<model::StepCache> caches;
    const Mat logits = model::forward_logits(seq, effective, &caches);
    const int q = cfg.steps;
    const int H = cfg.hidden;
    const int L = cfg.window;
    const double w = replication ? 1.0 / q : 1.0;

    double loss = 0.0;
    std::vector<Vec> dy(static_cast<std::size_t>(q), Vec::Zero(cfg.classes));
    for (int k = 0; k < q; ++k) {
        if (!replication && k != q - 1) continue;
        const Vec y = logits.row(k).transpose();
        loss += cross_entropy(y, seq.label);
        dy[static_cast<std::size_t>(k)] = loss_gradient(model::softmax(y), seq.label) * w;
    }
    loss *= w;

    const model::LstmParams& P = effective.lstm;
    model::LstmParams& G = grads.lstm;
    Vec dh_next = Vec::Zero(H);
    Vec dc_next = Vec::Zero(H);
    for (int k = q - 1; k >= 0; --k) {
        const model::StepCache& s = caches[static_cast<std::size_t>(k)];
        const Vec& dyk = dy[static_cast<std::size_t>(k)];
        G.wy.noalias() += s.h * dyk.transpose();
        G.by += dyk;
        const Vec dh = P.wy * dyk + dh_next;
        const Vec d_o = dh.cwiseProduct(s.tc);
        const Vec dc = dh.cwiseProduct(s.o).cwiseProduct((1.0 - s.tc.array().square()).matrix()) + dc_next;
        dc_next = dc.cwiseProduct(s.f);
        const Vec dzf = (dc.array() * s.c_prev.array() * s.f.array() * (1.0 - s.f.array())).matrix();
        const Vec dzi = (dc.array() * s.g.array() * s.i.array() * (1.0 - s.i.array())).matrix();
        const Vec dzo = (d_o.array() * s.o.array() * (1.0 - s.o.array())).matrix();
        const Vec dzg = (dc.array() * s.i.array() * (1.0 - s.g.array().square())).matrix();
        G.wf.noalias() += s.xx * dzf.transpose();
        G.wi.noalias() += s.xx * dzi.transpose();
        G.wo.noalias() += s.xx * dzo.transpose();
        G.wc.noalias() += s.xx * dzg.transpose();
        G.bf += dzf;
        G.bi += dzi;
        G.bo += dzo;
        G.bc += dzg;
        Vec dxx = P.wf * dzf;
        dxx.noalias() += P.wi * dzi;
        dxx.noalias() += P.wo * dzo;
        dxx.noalias() += P.wc * dzg;
        dh_next = dxx.head(H);

        if (!cfg.has_cnn()) continue;
        const Vec du = dxx.tail(cfg.input_len());
        grads.fc.weights.noalias() += du * s.features.transpose();
        const Vec dfeat = effective.fc.weights.transpose() * du;
        Mat dA = Eigen::Map<const model::RowMat>(dfeat.data(), cfg.cnn_layers.back().filters, L);
        for (int l = static_cast<int>(effective.cnn.size()) - 1; l >= 0; --l) {
            const auto& layer = effective.cnn[static_cast<std::size_t>(l)];
            auto& glayer = grads.cnn[static_cast<std::size_t>(l)];
            const Mat& x = s.conv_in[static_cast<std::size_t>(l)];
            const Mat dZ = dA.cwiseProduct((s.conv_pre[static_cast<std::size_t>(l)].array() > 0.0).cast<double>().matrix());
            const int pl = model::pad_left(layer.taps);
            Mat dX = Mat::Zero(x.rows(), x.cols());
            for (int o = 0; o < layer.filters; ++o) {
                for (int i = 0; i < L; ++i) {
                    const double dz = dZ(o, i);
                    if (dz == 0.0) continue;
                    glayer.bias(o) += dz;
                    for (int d = 0; d < layer.in_depth; ++d)
                        for (int a = 0; a < layer.taps; ++a) {
                            const int t = i + a - pl;
                            if (t < 0 || t >= L) continue;
                            glayer.weights(o, d * layer.taps + a) += dz * x(d, t);
                            dX(d, t) += dz * layer.weights(o, d * layer.taps + a);
                        }
                }
            }
            dA = std::move(dX);
        }
    }
    return loss;
}

/// Turns gradients w.r.t. effective weights into gradients w.r.t. the shadow
/// weights (STE on quantizable tensors, biases frozen). No-op in full precision.
inline void apply_ste(NetworkParams& grads, const NetworkParams& shadow) {
    if (!quant::is_quantized(shadow.precision)) return;
    std::vector<std::span<double>> shadow_views;
    shadow.for_each_tensor([&](const TensorView& t) { shadow_views.push_back(t.flat()); });
    std::size_t idx = 0;
    grads.for_each_tensor([&](const TensorView& t) {
        const auto r = shadow_views[idx++];
        auto g = t.flat();
        if (t.role == TensorRole::bias) {
            std::fill(g.begin(), g.end(), 0.0);
        } else if (t.role == TensorRole::quantizable) {
            for (std::size_t k = 0; k < g.size(); ++k) g[k] = quant::ste_backward(g[k], r[k]);
        }
    });
}

struct AdagradState {
    std::vector<std::vector<double>> accum;  // one per tensor, for_each_tensor order

    explicit AdagradState(const NetworkParams& p) {
        p.for_each_tensor([&](const TensorView& t) { accum.emplace_back(t.flat().size(), 0.0); });
    }
};

inline void adagrad_step(NetworkParams& params, const NetworkParams& grads, AdagradState& state, const TrainConfig& tc) {
    std::vector<std::span<double>> gviews;
    grads.for_each_tensor([&](const TensorView& t) { gviews.push_back(t.flat()); });
    const bool quantized = quant::is_quantized(params.precision);
    std::size_t idx = 0;
    params.for_each_tensor([&](const TensorView& t) {
        const auto g = gviews[idx];
        auto& acc = state.accum[idx];
        ++idx;
        if (quantized && t.role == TensorRole::bias) return;
        auto theta = t.flat();
        for (std::size_t k = 0; k < theta.size(); ++k) {
            const double gk = std::clamp(g[k], -tc.clip, tc.clip);
            if (gk == 0.0) continue;
            acc[k] += gk * gk;
            theta[k] -= tc.learning_rate * gk / (std::sqrt(acc[k]) + tc.epsilon);
        }
        if (quantized && t.role == TensorRole::quantizable) quant::clamp_shadow(theta);
    });
}

// ---------------------------------------------------------------------------
// Evaluation

struct EvalReport {
    double accuracy = 0.0;
    double macro_auc = 0.0;
    std::vector<std::vector<int>> confusion;  // [target][predicted]
    double mean_loss = 0.0;
};

/// One-vs-rest AUC via the Mann-Whitney statistic (ties count one half).
inline double binary_auc(const std::vector<double>& scores, const std::vector<bool>& positive) {
    std::vector<std::size_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    std::vector<double> rank(scores.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && scores[idx[j + 1]] == scores[idx[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) rank[idx[k]] = r;
        i = j + 1;
    }
    double n_pos = 0, n_neg = 0, rank_sum = 0;
    for (std::size_t k = 0; k < scores.size(); ++k) {
        if (positive[k]) {
            n_pos += 1;
            rank_sum += rank[k];
        } else {
            n_neg += 1;
        }
    }
    if (n_pos == 0 || n_neg == 0) return std::nan("");
    return (rank_sum - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg);
}

inline EvalReport evaluate(const NetworkParams& params, const std::vector<WindowedSequence>& data) {
    const NetworkParams eff = model::effective_params(params);
    const int C = params.cfg.classes;
    EvalReport rep;
    rep.confusion.assign(static_cast<std::size_t>(C), std::vector<int>(static_cast<std::size_t>(C), 0));
    if (data.empty()) return rep;
    std::vector<std::vector<double>> prob(static_cast<std::size_t>(C));
    int correct = 0;
    double loss = 0.0;
    for (const auto& seq : data) {
        const Mat logits = model::forward_logits(seq, eff);
        const Vec last = logits.row(logits.rows() - 1).transpose();
        const int pred = model::argmax(last);
        correct += pred == seq.label;
        ++rep.confusion[static_cast<std::size_t>(seq.label)][static_cast<std::size_t>(pred)];
        loss += cross_entropy(last, seq.label);
        const Vec p = model::softmax(last);
        for (int k = 0; k < C; ++k) prob[static_cast<std::size_t>(k)].push_back(p(k));
    }
    rep.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
    rep.mean_loss = loss / static_cast<double>(data.size());
    double auc_sum = 0.0;
    int auc_n = 0;
    for (int k = 0; k < C; ++k) {
        std::vector<bool> pos;
        pos.reserve(data.size());
        for (const auto& seq : data) pos.push_back(seq.label == k);
        const double a = binary_auc(prob[static_cast<std::size_t>(k)], pos);
        if (!std::isnan(a)) {
            auc_sum += a;
            ++auc_n;
        }
    }
    rep.macro_auc = auc_n ? auc_sum / auc_n : std::nan("");
    return rep;
}

inline double accuracy(const NetworkParams& params, const std::vector<WindowedSequence>& data) {
    return evaluate(params, data).accuracy;
}

// ---------------------------------------------------------------------------
// Training loop

struct TrainResult {
    NetworkParams params;
    std::vector<double> loss_trace;      // mean training loss per epoch
    std::vector<double> accuracy_trace;  // test accuracy after each epoch
};

using EpochCallback = std::function<void(int epoch, double loss, double test_accuracy)>;

inline TrainResult train(const std::vector<WindowedSequence>& train_set, const std::vector<WindowedSequence>& test_set,
                         const NetworkConfig& net, quant::Precision precision, const TrainConfig& tc,
                         const EpochCallback& on_epoch = {}) {
    tc.validate();
    net.validate();
    if (train_set.empty() || test_set.empty()) throw DataError("train: both splits must be non-empty");
    for (const auto* set : {&train_set, &test_set})
        for (const auto& s : *set) {
            model::check_sequence(s, net);
            if (s.label < 0 || s.label >= net.classes) throw DataError("train: label out of range");
        }

    TrainResult res;
    res.params = model::init_params(net, precision, tc.seed, tc.init_range);
    AdagradState state(res.params);
    std::mt19937_64 rng(tc.seed * 0x9E3779B97F4A7C15ull + 1);
    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 1; epoch <= tc.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(tc.batch_size)) {
            const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(tc.batch_size));
            const NetworkParams eff = model::effective_params(res.params);
            NetworkParams grads = model::zero_params(net, precision);
            for (std::size_t b = start; b < end; ++b)
                epoch_loss += sequence_loss_and_grads(train_set[order[b]], eff, grads, tc.replication);
            const double scale = 1.0 / static_cast<double>(end - start);
            grads.for_each_tensor([&](const TensorView& t) {
                for (double& v : t.flat()) v *= scale;
            });
            apply_ste(grads, res.params);
            adagrad_step(res.params, grads, state, tc);
        }
        const double mean_loss = epoch_loss / static_cast<double>(train_set.size());
        const double acc = accuracy(res.params, test_set);
        res.loss_trace.push_back(mean_loss);
        res.accuracy_trace.push_back(acc);
        if (on_epoch) on_epoch(epoch, mean_loss, acc);
    }
    return res;
}

}  // namespace qtsc::train
