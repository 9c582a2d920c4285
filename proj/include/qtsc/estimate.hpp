#pragma once

// Analytic memory and MAC estimators plus response-time arithmetic.
//
// Memory itemization (biases are left out, they are tiny and zero in the
// quantized networks):
//   CNN weights      sum over layers of I_d * m * f          at the quantizable width
//   FC weights       input_len * feature_len                  at the dense width
//   gate weights     4 * (N_h + input_len) * N_h              at the quantizable width
//   output weights   N_h * N_y                                at the dense width
//   intermediates    q * (largest map + 2 * N_h) values       at 12 bits
//
// Widths:  full32 -> 32 / 32,  ternary2 -> 2 / 12,  fixed12 -> 12 / 12.

#include <algorithm>
#include <cstdint>
#include <iomanip>
#include <ostream>
#include <stdexcept>
#include <string>

#include "qtsc/model.hpp"

namespace qtsc::estimate {

enum class WeightPrecision { full32, ternary2, fixed12 };

inline const char* to_string(WeightPrecision p) noexcept {
    switch (p) {
        case WeightPrecision::full32: return "full32";
        case WeightPrecision::ternary2: return "ternary2";
        case WeightPrecision::fixed12: return "fixed12";
    }
    return "?";
}

inline WeightPrecision weight_precision_from_string(const std::string& s) {
    if (s == "full32" || s == "full") return WeightPrecision::full32;
    if (s == "ternary2" || s == "ternary" || s == "binary") return WeightPrecision::ternary2;
    if (s == "fixed12" || s == "fixed") return WeightPrecision::fixed12;
    throw std::invalid_argument("unknown weight precision '" + s + "'");
}

inline constexpr int kIntermediateBits = 12;

inline int quantizable_bits(WeightPrecision p) noexcept {
    return p == WeightPrecision::full32 ? 32 : p == WeightPrecision::ternary2 ? 2 : 12;
}
inline int dense_bits(WeightPrecision p) noexcept { return p == WeightPrecision::full32 ? 32 : 12; }

struct CostModelInput {
    model::NetworkConfig net;
    WeightPrecision precision = WeightPrecision::full32;
    bool include_intermediates = true;
};

inline std::uint64_t cnn_weight_count(std::uint64_t in_depth, std::uint64_t taps, std::uint64_t filters) noexcept {
    return in_depth * taps * filters;
}

inline std::uint64_t lstm_weight_count(std::uint64_t hidden, std::uint64_t input_len) noexcept {
    return 4 * (hidden + input_len) * hidden;
}

struct MemoryBreakdown {
    double cnn_bits = 0;
    double fc_bits = 0;
    double gate_bits = 0;
    double output_bits = 0;
    double intermediate_bits = 0;

    double total() const noexcept { return cnn_bits + fc_bits + gate_bits + output_bits + intermediate_bits; }
};

/// Largest single buffer the datapath holds for one window: the input
/// window or any CNN feature map.
inline std::uint64_t largest_map(const model::NetworkConfig& net) {
    std::uint64_t m = static_cast<std::uint64_t>(net.input_len());
    if (net.has_cnn())
        for (const auto& l : net.cnn_layers)
            m = std::max<std::uint64_t>(m, static_cast<std::uint64_t>(l.filters) * static_cast<std::uint64_t>(net.window));
    return m;
}

inline MemoryBreakdown memory_breakdown(const CostModelInput& in) {
    const auto& net = in.net;
    const double qb = quantizable_bits(in.precision);
    const double db = dense_bits(in.precision);
    MemoryBreakdown b;
    if (net.has_cnn()) {
        for (std::size_t l = 0; l < net.cnn_layers.size(); ++l)
            b.cnn_bits += qb * static_cast<double>(cnn_weight_count(static_cast<std::uint64_t>(net.layer_in_depth(l)),
                                                                    static_cast<std::uint64_t>(net.cnn_layers[l].taps),
                                                                    static_cast<std::uint64_t>(net.cnn_layers[l].filters)));
        b.fc_bits = db * static_cast<double>(net.input_len()) * static_cast<double>(net.feature_len());
    }
    b.gate_bits = qb * static_cast<double>(lstm_weight_count(static_cast<std::uint64_t>(net.hidden),
                                                             static_cast<std::uint64_t>(net.input_len())));
    b.output_bits = db * static_cast<double>(net.hidden) * static_cast<double>(net.classes);
    if (in.include_intermediates)
        b.intermediate_bits = kIntermediateBits * static_cast<double>(net.steps) *
                              static_cast<double>(largest_map(net) + 2 * static_cast<std::uint64_t>(net.hidden));
    return b;
}

inline double memory_bits(const CostModelInput& in) { return memory_breakdown(in).total(); }

enum class MacVariant { paper, true_count };
enum class MacScope { window, sequence };

/// Paper variant: (M * w + N_h) * N_h per window, one gate. True variant:
/// every multiply the datapath issues, padded CNN taps included, with the
/// output layer charged once per sequence.
inline std::uint64_t mac_count(const model::NetworkConfig& net, MacVariant variant, MacScope scope) {
    const auto H = static_cast<std::uint64_t>(std::max(net.hidden, 0));
    const auto in = static_cast<std::uint64_t>(std::max(net.input_len(), 0));
    const auto q = static_cast<std::uint64_t>(std::max(net.steps, 0));
    if (variant == MacVariant::paper) {
        const std::uint64_t w = (in + H) * H;
        return scope == MacScope::window ? w : q * w;
    }
    std::uint64_t w = 4 * (in + H) * H;
    if (net.has_cnn()) {
        const auto L = static_cast<std::uint64_t>(net.window);
        for (std::size_t l = 0; l < net.cnn_layers.size(); ++l)
            w += cnn_weight_count(static_cast<std::uint64_t>(net.layer_in_depth(l)),
                                  static_cast<std::uint64_t>(net.cnn_layers[l].taps),
                                  static_cast<std::uint64_t>(net.cnn_layers[l].filters)) *
                 L;
        w += in * static_cast<std::uint64_t>(net.feature_len());
    }
    if (scope == MacScope::window) return w;
    return q * w + H * static_cast<std::uint64_t>(std::max(net.classes, 0));
}

inline double response_time(double macs, double gops) {
    if (!(gops > 0.0)) throw std::invalid_argument("response_time: gops must be positive");
    return macs / (gops * 1e9);
}

// ---------------------------------------------------------------------------
// Table output: memory (Mb, 1 Mb = 1e6 bits) and MACs (M) per sequence for
// the four architecture/precision combinations.

struct TableRow {
    std::string label;
    model::NetworkConfig net;
    WeightPrecision precision;
    double memory_mb = 0;
    double paper_macs_m = 0;
    double true_macs_m = 0;
};

/// FP rows use `net`; ternary rows use `ternary_hidden` neurons.
inline std::vector<TableRow> table_rows(const model::NetworkConfig& net, int ternary_hidden, bool include_intermediates = true) {
    std::vector<TableRow> rows;
    const auto add = [&](const char* label, bool cnn, WeightPrecision p) {
        model::NetworkConfig c = net;
        c.use_cnn = cnn;
        if (p != WeightPrecision::full32) c.hidden = ternary_hidden;
        TableRow r{label, c, p};
        r.memory_mb = memory_bits({c, p, include_intermediates}) / 1e6;
        r.paper_macs_m = static_cast<double>(mac_count(c, MacVariant::paper, MacScope::sequence)) / 1e6;
        r.true_macs_m = static_cast<double>(mac_count(c, MacVariant::true_count, MacScope::sequence)) / 1e6;
        rows.push_back(r);
    };
    add("FP-LSTM", false, WeightPrecision::full32);
    add("T-LSTM", false, WeightPrecision::ternary2);
    if (!net.cnn_layers.empty()) {
        add("FP-CNN-LSTM", true, WeightPrecision::full32);
        add("T-CNN-LSTM", true, WeightPrecision::ternary2);
    }
    return rows;
}

inline void print_table(std::ostream& os, const std::string& name, const std::vector<TableRow>& rows) {
    os << "dataset: " << name << '\n';
    os << std::left << std::setw(13) << "network" << std::right << std::setw(8) << "N_h" << std::setw(13) << "Memory(Mb)"
       << std::setw(16) << "MAC paper (M)" << std::setw(15) << "MAC true (M)" << '\n';
    const auto flags = os.flags();
    const auto prec = os.precision();
    os << std::fixed << std::setprecision(3);
    for (const auto& r : rows)
        os << std::left << std::setw(13) << r.label << std::right << std::setw(8) << r.net.hidden << std::setw(13)
           << r.memory_mb << std::setw(16) << r.paper_macs_m << std::setw(15) << r.true_macs_m << '\n';
    os.flags(flags);
    os.precision(prec);
}

}  // namespace qtsc::estimate
