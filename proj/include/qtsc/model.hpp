#pragma once

// Real-valued CNN -> FC(+residual) -> LSTM -> output-layer network. Shared
// by the trainer and used as the reference for the fixed-point engine.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "qtsc/error.hpp"
#include "qtsc/kv.hpp"
#include "qtsc/quant.hpp"
#include "qtsc/sequence.hpp"

namespace qtsc::model {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct ConvSpec {
    int filters = 1;
    int taps = 1;
    friend bool operator==(const ConvSpec&, const ConvSpec&) = default;
};

struct NetworkConfig {
    int window = 20;   // samples per channel per step
    int steps = 4;     // windows per classification
    int channels = 1;  // input channels
    int hidden = 250;  // LSTM state size
    int classes = 2;
    std::vector<ConvSpec> cnn_layers{{10, 5}, {30, 3}};
    bool use_cnn = true;
    bool residual = true;

    int input_len() const noexcept { return channels * window; }
    int xx_len() const noexcept { return hidden + input_len(); }
    bool has_cnn() const noexcept { return use_cnn && !cnn_layers.empty(); }
    int layer_in_depth(std::size_t l) const { return l == 0 ? channels : cnn_layers[l - 1].filters; }
    int feature_len() const { return has_cnn() ? cnn_layers.back().filters * window : 0; }

    void validate() const {
        if (window < 1 || steps < 1 || channels < 1 || hidden < 1 || classes < 1)
            throw ShapeError("network config: window, steps, channels, hidden and classes must be positive");
        for (const auto& c : cnn_layers)
            if (c.filters < 1 || c.taps < 1) throw ShapeError("network config: CNN filters/taps must be positive");
    }

    friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;
};

inline std::string format_cnn_layers(const std::vector<ConvSpec>& layers) {
    if (layers.empty()) return "none";
    std::string out;
    for (const auto& l : layers) {
        if (!out.empty()) out += ',';
        out += std::to_string(l.filters) + "x" + std::to_string(l.taps);
    }
    return out;
}

/// Parses "10x5,30x3" (filters x taps per layer) or "none".
inline std::vector<ConvSpec> parse_cnn_layers(const std::string& s) {
    std::vector<ConvSpec> out;
    if (s.empty() || s == "none") return out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto x = item.find('x');
        try {
            if (x == std::string::npos) throw std::invalid_argument(item);
            out.push_back({std::stoi(trim(item.substr(0, x))), std::stoi(trim(item.substr(x + 1)))});
        } catch (const std::exception&) {
            throw DataError("cnn_layers: expected FILTERSxTAPS, got '" + item + "'");
        }
    }
    return out;
}

inline NetworkConfig network_config_from(const KeyValues& kv, NetworkConfig base = {}) {
    base.window = kv.get_or("window", base.window);
    base.steps = kv.get_or("steps", base.steps);
    base.channels = kv.get_or("channels", base.channels);
    base.hidden = kv.get_or("hidden", base.hidden);
    base.classes = kv.get_or("classes", base.classes);
    base.use_cnn = kv.get_or("use_cnn", base.use_cnn);
    base.residual = kv.get_or("residual", base.residual);
    if (kv.has("cnn_layers")) base.cnn_layers = parse_cnn_layers(kv.get<std::string>("cnn_layers"));
    base.validate();
    return base;
}

inline void write_network_config(KeyValues& kv, const NetworkConfig& c) {
    kv.set("window", c.window);
    kv.set("steps", c.steps);
    kv.set("channels", c.channels);
    kv.set("hidden", c.hidden);
    kv.set("classes", c.classes);
    kv.set("use_cnn", c.use_cnn ? 1 : 0);
    kv.set("residual", c.residual ? 1 : 0);
    kv.set("cnn_layers", format_cnn_layers(c.cnn_layers));
}

// ---------------------------------------------------------------------------
// Parameters

struct CnnLayerParams {
    int filters = 0;
    int taps = 0;
    int in_depth = 0;
    Mat weights;  // filters x (in_depth * taps), column d * taps + a
    Vec bias;     // filters
};

struct FcParams {
    Mat weights;  // input_len x (filters * window)
};

struct LstmParams {
    Mat wf, wi, wo, wc;  // (hidden + input_len) x hidden
    Vec bf, bi, bo, bc;  // hidden
    Mat wy;              // hidden x classes
    Vec by;              // classes
};

/// quantizable: binarized/ternarized in quantized modes (gate matrices, CNN
/// kernels). dense: kept real (FC and output layer). bias: zero and frozen
/// in quantized modes.
enum class TensorRole { quantizable, dense, bias };

struct TensorView {
    std::string name;
    TensorRole role;
    Eigen::Index rows;
    Eigen::Index cols;
    double* data;  // column-major

    std::span<double> flat() const noexcept { return {data, static_cast<std::size_t>(rows * cols)}; }
    double& at(Eigen::Index r, Eigen::Index c) const noexcept { return data[c * rows + r]; }
};

struct NetworkParams {
    NetworkConfig cfg;
    quant::Precision precision = quant::Precision::full;
    std::vector<CnnLayerParams> cnn;
    FcParams fc;
    LstmParams lstm;

    template <class F>
    void for_each_tensor(F&& f) {
        auto emit = [&](std::string name, TensorRole role, auto& m) {
            f(TensorView{std::move(name), role, m.rows(), m.cols(), m.data()});
        };
        for (std::size_t l = 0; l < cnn.size(); ++l) {
            emit("cnn" + std::to_string(l) + ".weight", TensorRole::quantizable, cnn[l].weights);
            emit("cnn" + std::to_string(l) + ".bias", TensorRole::bias, cnn[l].bias);
        }
        if (cfg.has_cnn()) emit("fc.weight", TensorRole::dense, fc.weights);
        emit("lstm.wf", TensorRole::quantizable, lstm.wf);
        emit("lstm.wi", TensorRole::quantizable, lstm.wi);
        emit("lstm.wo", TensorRole::quantizable, lstm.wo);
        emit("lstm.wc", TensorRole::quantizable, lstm.wc);
        emit("lstm.bf", TensorRole::bias, lstm.bf);
        emit("lstm.bi", TensorRole::bias, lstm.bi);
        emit("lstm.bo", TensorRole::bias, lstm.bo);
        emit("lstm.bc", TensorRole::bias, lstm.bc);
        emit("out.wy", TensorRole::dense, lstm.wy);
        emit("out.by", TensorRole::bias, lstm.by);
    }

    template <class F>
    void for_each_tensor(F&& f) const {
        const_cast<NetworkParams*>(this)->for_each_tensor(std::forward<F>(f));
    }

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for_each_tensor([&](const TensorView& t) { n += static_cast<std::size_t>(t.rows * t.cols); });
        return n;
    }
};

/// All-zero parameters with the shapes `cfg` implies.
inline NetworkParams zero_params(const NetworkConfig& cfg, quant::Precision precision = quant::Precision::full) {
    cfg.validate();
    NetworkParams p;
    p.cfg = cfg;
    p.precision = precision;
    if (cfg.has_cnn()) {
        for (std::size_t l = 0; l < cfg.cnn_layers.size(); ++l) {
            const auto& spec = cfg.cnn_layers[l];
            CnnLayerParams layer;
            layer.filters = spec.filters;
            layer.taps = spec.taps;
            layer.in_depth = cfg.layer_in_depth(l);
            layer.weights = Mat::Zero(spec.filters, layer.in_depth * spec.taps);
            layer.bias = Vec::Zero(spec.filters);
            p.cnn.push_back(std::move(layer));
        }
        p.fc.weights = Mat::Zero(cfg.input_len(), cfg.feature_len());
    }
    const int rows = cfg.xx_len();
    for (Mat* m : {&p.lstm.wf, &p.lstm.wi, &p.lstm.wo, &p.lstm.wc}) *m = Mat::Zero(rows, cfg.hidden);
    for (Vec* b : {&p.lstm.bf, &p.lstm.bi, &p.lstm.bo, &p.lstm.bc}) *b = Vec::Zero(cfg.hidden);
    p.lstm.wy = Mat::Zero(cfg.hidden, cfg.classes);
    p.lstm.by = Vec::Zero(cfg.classes);
    return p;
}

/// Weights uniform in [-range, range]; biases zero.
inline NetworkParams init_params(const NetworkConfig& cfg, quant::Precision precision, std::uint64_t seed,
                                 double range = 0.01) {
    NetworkParams p = zero_params(cfg, precision);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-range, range);
    p.for_each_tensor([&](const TensorView& t) {
        if (t.role == TensorRole::bias) return;
        for (double& v : t.flat()) v = u(rng);
    });
    return p;
}

/// Copy in which quantizable tensors hold their codes and biases are zero
/// (quantized modes); the identity in full precision.
inline NetworkParams effective_params(const NetworkParams& p) {
    if (!quant::is_quantized(p.precision)) return p;
    NetworkParams e = p;
    e.for_each_tensor([&](const TensorView& t) {
        if (t.role == TensorRole::quantizable)
            for (double& v : t.flat()) v = quant::effective_weight(v, p.precision);
        else if (t.role == TensorRole::bias)
            for (double& v : t.flat()) v = 0.0;
    });
    return e;
}

// ---------------------------------------------------------------------------
// Forward pieces

/// Left zero-padding: (taps - 1) / 2, the remainder goes on the right.
inline int pad_left(int taps) noexcept { return (taps - 1) / 2; }

/// Same-length 1-D convolution, stride 1: z(o, i) = b(o) + sum_{d,a} W(o, d, a) x(d, i + a - pad).
inline Mat conv1d(const Mat& x, const CnnLayerParams& p) {
    if (x.rows() != p.in_depth) throw ShapeError("conv1d: input depth mismatch");
    const Eigen::Index len = x.cols();
    const int pl = pad_left(p.taps);
    Mat z(p.filters, len);
    for (int o = 0; o < p.filters; ++o) {
        for (Eigen::Index i = 0; i < len; ++i) {
            double s = p.bias.size() ? p.bias(o) : 0.0;
            for (int d = 0; d < p.in_depth; ++d)
                for (int a = 0; a < p.taps; ++a) {
                    const Eigen::Index t = i + a - pl;
                    if (t >= 0 && t < len) s += p.weights(o, d * p.taps + a) * x(d, t);
                }
            z(o, i) = s;
        }
    }
    return z;
}

inline Mat relu(const Mat& z) { return z.cwiseMax(0.0); }

inline Mat conv1d_relu(const Mat& x, const CnnLayerParams& p) { return relu(conv1d(x, p)); }

/// Feature maps flattened filter-major: element (o, i) at o * n + i.
inline Vec flatten_maps(const Mat& maps) {
    const Mat t = maps.transpose();
    return Eigen::Map<const Vec>(t.data(), t.size());
}

inline Vec fc_residual(const Mat& maps, const FcParams& fc, const Vec& x_window, bool residual) {
    if (fc.weights.cols() != maps.size() || fc.weights.rows() != x_window.size())
        throw ShapeError("fc_residual: weight shape does not match feature maps / window");
    Vec p = fc.weights * flatten_maps(maps);
    if (residual) p += x_window;
    return p;
}

inline double sigmoid(double v) noexcept { return 1.0 / (1.0 + std::exp(-v)); }

struct LstmState {
    Vec h;
    Vec c;
    static LstmState zeros(int hidden) { return {Vec::Zero(hidden), Vec::Zero(hidden)}; }
};

/// Everything one step produces; the trainer keeps these for BPTT.
struct StepCache {
    std::vector<Mat> conv_in;   // input to each CNN layer (depth x window)
    std::vector<Mat> conv_pre;  // pre-ReLU output of each layer
    Vec features;               // flattened last-layer maps
    Vec xx;                     // [h_prev, u]
    Vec f, i, o, g;             // gate activations
    Vec c_prev, c, tc, h;       // cell state before/after, tanh(c), output
    Vec logits;
};

struct StepResult {
    LstmState state;
    Vec logits;
};

inline StepResult lstm_step(const Vec& xx, const LstmState& s, const LstmParams& p, StepCache* cache = nullptr) {
    if (xx.size() != p.wf.rows()) throw ShapeError("lstm_step: xx length does not match gate matrices");
    const Vec f = (p.wf.transpose() * xx + p.bf).unaryExpr([](double v) { return sigmoid(v); });
    const Vec i = (p.wi.transpose() * xx + p.bi).unaryExpr([](double v) { return sigmoid(v); });
    const Vec o = (p.wo.transpose() * xx + p.bo).unaryExpr([](double v) { return sigmoid(v); });
    const Vec g = (p.wc.transpose() * xx + p.bc).array().tanh().matrix();
    StepResult r;
    r.state.c = f.cwiseProduct(s.c) + g.cwiseProduct(i);
    const Vec tc = r.state.c.array().tanh().matrix();
    r.state.h = o.cwiseProduct(tc);
    r.logits = p.wy.transpose() * r.state.h + p.by;
    if (cache) {
        cache->xx = xx;
        cache->f = f;
        cache->i = i;
        cache->o = o;
        cache->g = g;
        cache->c_prev = s.c;
        cache->c = r.state.c;
        cache->tc = tc;
        cache->h = r.state.h;
        cache->logits = r.logits;
    }
    return r;
}

inline void check_sequence(const WindowedSequence& seq, const NetworkConfig& cfg) {
    if (static_cast<int>(seq.windows.size()) != cfg.steps)
        throw ShapeError("sequence has " + std::to_string(seq.windows.size()) + " windows, network expects " +
                         std::to_string(cfg.steps));
    for (const auto& w : seq.windows)
        if (static_cast<int>(w.size()) != cfg.input_len()) throw ShapeError("window length does not match network input");
}

/// LSTM input for one window: CNN -> FC (+ residual) when enabled, else the raw window.
inline Vec window_features(const std::vector<double>& window, const NetworkParams& p, StepCache* cache = nullptr) {
    const NetworkConfig& cfg = p.cfg;
    const Vec x = Eigen::Map<const Vec>(window.data(), static_cast<Eigen::Index>(window.size()));
    if (!cfg.has_cnn()) return x;
    Mat a = Eigen::Map<const RowMat>(window.data(), cfg.channels, cfg.window);
    for (const auto& layer : p.cnn) {
        Mat z = conv1d(a, layer);
        if (cache) {
            cache->conv_in.push_back(a);
            cache->conv_pre.push_back(z);
        }
        a = relu(z);
    }
    if (cache) cache->features = flatten_maps(a);
    return fc_residual(a, p.fc, x, cfg.residual);
}

/// Per-step logits (steps x classes). `p` must already hold effective
/// weights; see network_forward for the precision-aware entry point.
inline Mat forward_logits(const WindowedSequence& seq, const NetworkParams& p, std::vector<StepCache>* caches = nullptr) {
    check_sequence(seq, p.cfg);
    LstmState s = LstmState::zeros(p.cfg.hidden);
    Mat out(p.cfg.steps, p.cfg.classes);
    if (caches) caches->assign(static_cast<std::size_t>(p.cfg.steps), StepCache{});
    for (int k = 0; k < p.cfg.steps; ++k) {
        StepCache* cache = caches ? &(*caches)[static_cast<std::size_t>(k)] : nullptr;
        const Vec u = window_features(seq.windows[static_cast<std::size_t>(k)], p, cache);
        Vec xx(p.cfg.xx_len());
        xx << s.h, u;
        StepResult r = lstm_step(xx, s, p.lstm, cache);
        out.row(k) = r.logits.transpose();
        s = std::move(r.state);
    }
    return out;
}

inline Mat network_forward(const WindowedSequence& seq, const NetworkParams& p) {
    if (!quant::is_quantized(p.precision)) return forward_logits(seq, p);
    return forward_logits(seq, effective_params(p));
}

/// Index of the largest entry; ties go to the lowest index.
template <class V>
inline int argmax(const V& v) {
    int best = 0;
    for (int k = 1; k < static_cast<int>(v.size()); ++k)
        if (v[k] > v[best]) best = k;
    return best;
}

inline Vec softmax(const Vec& logits) {
    const double m = logits.maxCoeff();
    Vec e = (logits.array() - m).exp().matrix();
    return e / e.sum();
}

/// Final-step class.
inline int predict(const WindowedSequence& seq, const NetworkParams& effective) {
    const Mat logits = forward_logits(seq, effective);
    return argmax(logits.row(logits.rows() - 1));
}

}  // namespace qtsc::model
