#pragma once

// Fixed-point forward pass of a binary/ternary network. This is the golden
// model the cycle simulator must match bit for bit.
//
// Quantization boundaries (every other value is an exact integer):
//   * input samples        -> activation format
//   * each dot product     -> accumulated exactly in 64 bits, requantized once
//   * residual add         -> saturating add in activation format
//   * LUT outputs          -> 10-bit entries converted to activation format
//   * c = f*c + g*i        -> both products summed exactly, requantized once
//   * h = o*tanh(c)        -> requantized once

#include <array>
#include <cstdint>
#include <vector>

#include "qtsc/error.hpp"
#include "qtsc/fxp.hpp"
#include "qtsc/model.hpp"
#include "qtsc/quant.hpp"

namespace qtsc::model {

enum Gate : std::size_t { kForget = 0, kInput = 1, kOutput = 2, kCell = 3 };

struct HardwareConv {
    int filters = 0;
    int taps = 0;
    int in_depth = 0;
    std::vector<std::int8_t> codes;  // (o * in_depth + d) * taps + a
};

struct HardwareModel {
    NetworkConfig cfg;
    quant::Precision precision = quant::Precision::ternary;
    fxp::QFormat act = fxp::kQ4_8;
    fxp::QFormat weight = fxp::kQ2_10;
    std::vector<HardwareConv> cnn;
    std::vector<std::int32_t> fc;                     // input_len x feature_len, row-major, `weight` format
    std::array<std::vector<std::int8_t>, 4> gates;    // xx_len x hidden, row-major, order f, i, o, c
    std::vector<std::int32_t> wy;                     // hidden x classes, row-major, `weight` format
    std::vector<std::int32_t> by;                     // classes, `act` format
    fxp::LutTable sigmoid = fxp::sigmoid_lut();
    fxp::LutTable tanh = fxp::tanh_lut();
};

/// Quantizes trained parameters into hardware form. Gate and CNN biases must
/// be zero (they are in binary/ternary training).
inline HardwareModel to_hardware(const NetworkParams& p, fxp::QFormat act = fxp::kQ4_8,
                                 fxp::QFormat weight = fxp::kQ2_10, std::size_t lut_size = 64) {
    if (!quant::is_quantized(p.precision)) throw std::invalid_argument("to_hardware: model must be binary or ternary");
    act.validate();
    weight.validate();
    HardwareModel hw;
    hw.cfg = p.cfg;
    hw.precision = p.precision;
    hw.act = act;
    hw.weight = weight;
    hw.sigmoid = fxp::sigmoid_lut(lut_size);
    hw.tanh = fxp::tanh_lut(lut_size);
    const auto code = [&](double r) { return quant::quantize_code(r, p.precision); };

    for (const auto& layer : p.cnn) {
        if (layer.bias.cwiseAbs().maxCoeff() != 0.0) throw std::invalid_argument("to_hardware: CNN biases must be zero");
        HardwareConv c{layer.filters, layer.taps, layer.in_depth, {}};
        c.codes.reserve(static_cast<std::size_t>(layer.weights.size()));
        for (int o = 0; o < layer.filters; ++o)
            for (int d = 0; d < layer.in_depth; ++d)
                for (int a = 0; a < layer.taps; ++a) c.codes.push_back(code(layer.weights(o, d * layer.taps + a)));
        hw.cnn.push_back(std::move(c));
    }
    if (p.cfg.has_cnn())
        for (Eigen::Index k = 0; k < p.fc.weights.rows(); ++k)
            for (Eigen::Index j = 0; j < p.fc.weights.cols(); ++j)
                hw.fc.push_back(fxp::to_fixed(p.fc.weights(k, j), weight).raw);

    const std::array<const Mat*, 4> mats{&p.lstm.wf, &p.lstm.wi, &p.lstm.wo, &p.lstm.wc};
    const std::array<const Vec*, 4> biases{&p.lstm.bf, &p.lstm.bi, &p.lstm.bo, &p.lstm.bc};
    for (std::size_t g = 0; g < 4; ++g) {
        if (biases[g]->size() && biases[g]->cwiseAbs().maxCoeff() != 0.0)
            throw std::invalid_argument("to_hardware: gate biases must be zero");
        const Mat& m = *mats[g];
        hw.gates[g].reserve(static_cast<std::size_t>(m.size()));
        for (Eigen::Index j = 0; j < m.rows(); ++j)
            for (Eigen::Index k = 0; k < m.cols(); ++k) hw.gates[g].push_back(code(m(j, k)));
    }
    for (Eigen::Index j = 0; j < p.lstm.wy.rows(); ++j)
        for (Eigen::Index k = 0; k < p.lstm.wy.cols(); ++k) hw.wy.push_back(fxp::to_fixed(p.lstm.wy(j, k), weight).raw);
    for (Eigen::Index k = 0; k < p.lstm.by.size(); ++k) hw.by.push_back(fxp::to_fixed(p.lstm.by(k), act).raw);
    return hw;
}

struct FixedOutput {
    std::vector<std::int32_t> logits;  // final step, activation format
    std::vector<std::int32_t> h;
    std::vector<std::int32_t> c;
    int label = 0;
};

inline std::vector<std::int32_t> quantize_samples(const std::vector<double>& w, fxp::QFormat fmt) {
    std::vector<std::int32_t> out(w.size());
    for (std::size_t k = 0; k < w.size(); ++k) out[k] = fxp::to_fixed(w[k], fmt).raw;
    return out;
}

inline std::int32_t lut_to_act(std::int32_t raw_in, const fxp::LutTable& t, fxp::QFormat act) {
    return fxp::convert(fxp::lut_eval({raw_in, act}, t), act).raw;
}

inline FixedOutput network_forward_fixed(const WindowedSequence& seq, const HardwareModel& hw) {
    const NetworkConfig& cfg = hw.cfg;
    check_sequence(seq, cfg);
    const fxp::QFormat act = hw.act;
    const int fa = act.frac_bits;
    const int fw = hw.weight.frac_bits;
    const auto H = static_cast<std::size_t>(cfg.hidden);
    const auto in_len = static_cast<std::size_t>(cfg.input_len());
    const auto L = static_cast<std::size_t>(cfg.window);

    std::vector<std::int32_t> h(H, 0), c(H, 0);
    for (const auto& window : seq.windows) {
        const std::vector<std::int32_t> x = quantize_samples(window, act);
        std::vector<std::int32_t> u = x;
        if (cfg.has_cnn()) {
            std::vector<std::int32_t> a = x;  // depth x L, row-major
            for (const auto& layer : hw.cnn) {
                const int pl = pad_left(layer.taps);
                std::vector<std::int32_t> z(static_cast<std::size_t>(layer.filters) * L);
                for (int o = 0; o < layer.filters; ++o)
                    for (std::size_t i = 0; i < L; ++i) {
                        std::int64_t acc = 0;
                        for (int d = 0; d < layer.in_depth; ++d)
                            for (int tap = 0; tap < layer.taps; ++tap) {
                                const auto t = static_cast<std::ptrdiff_t>(i) + tap - pl;
                                if (t < 0 || t >= static_cast<std::ptrdiff_t>(L)) continue;
                                const std::int8_t w = layer.codes[static_cast<std::size_t>((o * layer.in_depth + d) * layer.taps + tap)];
                                acc += w * std::int64_t{a[static_cast<std::size_t>(d) * L + static_cast<std::size_t>(t)]};
                            }
                        z[static_cast<std::size_t>(o) * L + i] = fxp::relu(fxp::requantize(acc, fa, act)).raw;
                    }
                a = std::move(z);
            }
            const std::size_t feat = a.size();
            for (std::size_t k = 0; k < in_len; ++k) {
                std::int64_t acc = 0;
                for (std::size_t j = 0; j < feat; ++j) acc += std::int64_t{hw.fc[k * feat + j]} * a[j];
                const std::int32_t p = fxp::requantize(acc, fa + fw, act).raw;
                u[k] = cfg.residual ? fxp::add({x[k], act}, {p, act}).raw : p;
            }
        }

        std::vector<std::int32_t> xx(h);
        xx.insert(xx.end(), u.begin(), u.end());
        std::array<std::vector<std::int32_t>, 4> pre;
        for (std::size_t g = 0; g < 4; ++g) {
            pre[g].assign(H, 0);
            for (std::size_t k = 0; k < H; ++k) {
                std::int64_t acc = 0;
                for (std::size_t j = 0; j < xx.size(); ++j) acc += hw.gates[g][j * H + k] * std::int64_t{xx[j]};
                pre[g][k] = fxp::requantize(acc, fa, act).raw;
            }
        }
        for (std::size_t k = 0; k < H; ++k) {
            const std::int64_t f = lut_to_act(pre[kForget][k], hw.sigmoid, act);
            const std::int64_t i = lut_to_act(pre[kInput][k], hw.sigmoid, act);
            const std::int64_t o = lut_to_act(pre[kOutput][k], hw.sigmoid, act);
            const std::int64_t g = lut_to_act(pre[kCell][k], hw.tanh, act);
            c[k] = fxp::requantize(f * c[k] + g * i, 2 * fa, act).raw;
            const std::int64_t tc = lut_to_act(c[k], hw.tanh, act);
            h[k] = fxp::requantize(o * tc, 2 * fa, act).raw;
        }
    }

    FixedOutput out;
    const auto C = static_cast<std::size_t>(cfg.classes);
    out.logits.assign(C, 0);
    for (std::size_t k = 0; k < C; ++k) {
        std::int64_t acc = std::int64_t{hw.by[k]} << fw;
        for (std::size_t j = 0; j < H; ++j) acc += std::int64_t{hw.wy[j * C + k]} * h[j];
        out.logits[k] = fxp::requantize(acc, fa + fw, act).raw;
    }
    out.label = argmax(out.logits);
    out.h = std::move(h);
    out.c = std::move(c);
    return out;
}

}  // namespace qtsc::model
