#pragma once

// Cycle-level simulator of the eight-state inference machine.
//
//   1  convolution + ReLU (visited once per CNN layer; a single load-only
//      visit when the network has no CNN)
//   2  FC + residual
//   3  gate matrix products
//   4  LUT nonlinearities for the four gates
//   5  cell update c = f*c + g*i
//   6  tanh(c)
//   7  h = o * tanh(c)
//   8  output layer; charged only after the last window
//
// Each state visit has a compute cost (the lane-count formulas) and a data
// volume on three ports: the weight-buffer read port, and the intermediate
// memory read and write ports. A visit lasts as long as the slower of the
// two, and data moves in beats no wider than the port.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "qtsc/error.hpp"
#include "qtsc/estimate.hpp"
#include "qtsc/fxp.hpp"
#include "qtsc/kv.hpp"
#include "qtsc/model.hpp"
#include "qtsc/model_fixed.hpp"

namespace qtsc::fsm {

struct MachineConfig {
    int mac_lanes = 32;
    int bus_bits = 96;
    int wb_read_bits_per_cycle = 64;
    int im_bits_per_cycle = 48;
    int lut_size = 64;
    double clock_hz = 1e8;
    fxp::QFormat activation = fxp::kQ4_8;
    fxp::QFormat dense_weight = fxp::kQ2_10;
    std::uint64_t wb_capacity_bits = 16'000'000;
    std::uint64_t im_capacity_bits = 1'000'000;

    void validate() const {
        if (mac_lanes < 1 || bus_bits < 1 || wb_read_bits_per_cycle < 1 || im_bits_per_cycle < 1 || lut_size < 1 ||
            !(clock_hz > 0.0) || wb_capacity_bits == 0 || im_capacity_bits == 0)
            throw std::invalid_argument("machine config: all parameters must be positive");
        if (!std::has_single_bit(static_cast<unsigned>(lut_size)))
            throw std::invalid_argument("machine config: lut_size must be a power of two");
        activation.validate();
        dense_weight.validate();
        if (activation.total_bits > im_bits_per_cycle || dense_weight.total_bits > wb_read_bits_per_cycle)
            throw std::invalid_argument("machine config: a port is narrower than one value");
    }
};

inline MachineConfig machine_config_from(const KeyValues& kv, MachineConfig m = {}) {
    m.mac_lanes = kv.get_or("mac_lanes", m.mac_lanes);
    m.bus_bits = kv.get_or("bus_bits", m.bus_bits);
    m.wb_read_bits_per_cycle = kv.get_or("wb_read_bits_per_cycle", m.wb_read_bits_per_cycle);
    m.im_bits_per_cycle = kv.get_or("im_bits_per_cycle", m.im_bits_per_cycle);
    m.lut_size = kv.get_or("lut_size", m.lut_size);
    m.clock_hz = kv.get_or("clock_hz", m.clock_hz);
    m.activation.total_bits = kv.get_or("activation_total_bits", m.activation.total_bits);
    m.activation.frac_bits = kv.get_or("activation_frac_bits", m.activation.frac_bits);
    m.dense_weight.total_bits = kv.get_or("dense_weight_total_bits", m.dense_weight.total_bits);
    m.dense_weight.frac_bits = kv.get_or("dense_weight_frac_bits", m.dense_weight.frac_bits);
    m.wb_capacity_bits = kv.get_or("wb_capacity_bits", m.wb_capacity_bits);
    m.im_capacity_bits = kv.get_or("im_capacity_bits", m.im_capacity_bits);
    m.validate();
    return m;
}

inline MachineConfig load_machine_config(const std::filesystem::path& path) {
    return machine_config_from(KeyValues::load(path.string()));
}

inline void write_machine_config(KeyValues& kv, const MachineConfig& m) {
    kv.set("mac_lanes", m.mac_lanes);
    kv.set("bus_bits", m.bus_bits);
    kv.set("wb_read_bits_per_cycle", m.wb_read_bits_per_cycle);
    kv.set("im_bits_per_cycle", m.im_bits_per_cycle);
    kv.set("lut_size", m.lut_size);
    kv.set("clock_hz", m.clock_hz);
    kv.set("activation_total_bits", m.activation.total_bits);
    kv.set("activation_frac_bits", m.activation.frac_bits);
    kv.set("dense_weight_total_bits", m.dense_weight.total_bits);
    kv.set("dense_weight_frac_bits", m.dense_weight.frac_bits);
    kv.set("wb_capacity_bits", m.wb_capacity_bits);
    kv.set("im_capacity_bits", m.im_capacity_bits);
}

inline constexpr int kCodeBits = 2;

inline std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) { return (a + b - 1) / b; }

// ---------------------------------------------------------------------------
// Cost model

/// Compute cycles and data volume of one state visit.
struct StatePlan {
    int state = 1;
    int layer = -1;  // CNN layer for state 1, else -1
    std::uint64_t compute_cycles = 0;
    std::uint64_t wb_bits = 0;
    std::uint64_t im_read_bits = 0;
    std::uint64_t im_write_bits = 0;

    std::uint64_t cycles(const MachineConfig& mc) const {
        return std::max({compute_cycles, ceil_div(wb_bits, static_cast<std::uint64_t>(mc.wb_read_bits_per_cycle)),
                         ceil_div(im_read_bits, static_cast<std::uint64_t>(mc.im_bits_per_cycle)),
                         ceil_div(im_write_bits, static_cast<std::uint64_t>(mc.im_bits_per_cycle))});
    }
};

/// Convolution cycles of one layer: (w - m + 1) * f * ceil(I_d * m / lanes).
inline std::uint64_t conv_cycles(int window, int taps, int filters, int in_depth, const MachineConfig& mc) {
    const std::uint64_t positions = window >= taps ? static_cast<std::uint64_t>(window - taps + 1) : 0;
    return positions * static_cast<std::uint64_t>(filters) *
           ceil_div(static_cast<std::uint64_t>(in_depth) * static_cast<std::uint64_t>(taps),
                    static_cast<std::uint64_t>(mc.mac_lanes));
}

/// ReLU overhead of one layer: (w - m + 1) * ceil(f / lanes).
inline std::uint64_t relu_cycles(int window, int taps, int filters, const MachineConfig& mc) {
    const std::uint64_t positions = window >= taps ? static_cast<std::uint64_t>(window - taps + 1) : 0;
    return positions * ceil_div(static_cast<std::uint64_t>(filters), static_cast<std::uint64_t>(mc.mac_lanes));
}

/// Hidden units served per cycle in state 3 (four gates share the lanes).
inline std::uint64_t gate_lanes(const MachineConfig& mc) {
    return static_cast<std::uint64_t>(std::max(1, mc.mac_lanes / 4));
}

/// The visits one window makes, in order, ending with state 8.
inline std::vector<StatePlan> window_plan(const model::NetworkConfig& net, const MachineConfig& mc) {
    const auto ab = static_cast<std::uint64_t>(mc.activation.total_bits);
    const auto db = static_cast<std::uint64_t>(mc.dense_weight.total_bits);
    const auto H = static_cast<std::uint64_t>(net.hidden);
    const auto Y = static_cast<std::uint64_t>(net.classes);
    const auto in = static_cast<std::uint64_t>(net.input_len());
    const auto L = static_cast<std::uint64_t>(net.window);
    const auto xx = H + in;
    std::vector<StatePlan> plan;

    if (net.has_cnn()) {
        for (std::size_t l = 0; l < net.cnn_layers.size(); ++l) {
            const auto& c = net.cnn_layers[l];
            const int d = net.layer_in_depth(l);
            StatePlan s{1, static_cast<int>(l)};
            s.compute_cycles = conv_cycles(net.window, c.taps, c.filters, d, mc) + relu_cycles(net.window, c.taps, c.filters, mc);
            s.wb_bits = static_cast<std::uint64_t>(c.filters) * static_cast<std::uint64_t>(d) * static_cast<std::uint64_t>(c.taps) * kCodeBits;
            s.im_read_bits = static_cast<std::uint64_t>(d) * L * ab;
            s.im_write_bits = static_cast<std::uint64_t>(c.filters) * L * ab + (l == 0 ? in * ab : 0);
            plan.push_back(s);
        }
        const auto feat = static_cast<std::uint64_t>(net.feature_len());
        StatePlan s{2};
        s.compute_cycles = ceil_div(in * feat, static_cast<std::uint64_t>(mc.mac_lanes));
        s.wb_bits = in * feat * db;
        s.im_read_bits = feat * ab + (net.residual ? in * ab : 0);
        s.im_write_bits = in * ab;
        plan.push_back(s);
    } else {
        StatePlan load{1};
        load.im_write_bits = in * ab;
        plan.push_back(load);
        plan.push_back(StatePlan{2});
    }

    const std::uint64_t blocks = ceil_div(H, gate_lanes(mc));
    plan.push_back({3, -1, xx * blocks, 4 * xx * H * kCodeBits, blocks * xx * ab, 4 * H * ab});
    plan.push_back({4, -1, H, 0, 4 * H * ab, 4 * H * ab});
    plan.push_back({5, -1, H, 0, 4 * H * ab, H * ab});
    plan.push_back({6, -1, H, 0, H * ab, H * ab});
    plan.push_back({7, -1, H, 0, 2 * H * ab, H * ab});
    plan.push_back({8, -1, H * Y, H * Y * db + Y * ab, H * ab, Y * ab});
    return plan;
}

/// Cycles charged for one visit of `state` (state 1 summed over layers).
inline std::uint64_t state_cycle_cost(int state, const model::NetworkConfig& net, const MachineConfig& mc) {
    if (state < 1 || state > 8) throw std::out_of_range("state_cycle_cost: state must be 1..8");
    std::uint64_t total = 0;
    for (const auto& s : window_plan(net, mc))
        if (s.state == state) total += s.cycles(mc);
    return total;
}

// ---------------------------------------------------------------------------
// Memories and ports

class Port {
public:
    Port(std::string name, int bits_per_cycle) : name_(std::move(name)), cap_(bits_per_cycle) {}

    void beat(std::uint64_t bits) {
        if (bits > static_cast<std::uint64_t>(cap_))
            throw BandwidthError(name_ + ": " + std::to_string(bits) + " bits in one cycle, port is " +
                                 std::to_string(cap_));
        total_ += bits;
        max_beat_ = std::max(max_beat_, bits);
        ++beats_;
    }

    const std::string& name() const noexcept { return name_; }
    int width() const noexcept { return cap_; }
    std::uint64_t total_bits() const noexcept { return total_; }
    std::uint64_t beats() const noexcept { return beats_; }
    std::uint64_t max_beat() const noexcept { return max_beat_; }

private:
    std::string name_;
    int cap_;
    std::uint64_t total_ = 0;
    std::uint64_t beats_ = 0;
    std::uint64_t max_beat_ = 0;
};

/// Weight buffers, filled from a quantized model.
struct MemoryBanks {
    model::HardwareModel weights;
    std::uint64_t wb_bits = 0;
};

inline std::uint64_t weight_bank_bits(const model::HardwareModel& hw) {
    std::uint64_t bits = 0;
    for (const auto& c : hw.cnn) bits += c.codes.size() * kCodeBits;
    for (const auto& g : hw.gates) bits += g.size() * kCodeBits;
    bits += (hw.fc.size() + hw.wy.size()) * static_cast<std::uint64_t>(hw.weight.total_bits);
    bits += hw.by.size() * static_cast<std::uint64_t>(hw.act.total_bits);
    return bits;
}

/// Values held in intermediate memory for one window.
inline std::uint64_t intermediate_words(const model::NetworkConfig& net) {
    const auto H = static_cast<std::uint64_t>(net.hidden);
    const auto in = static_cast<std::uint64_t>(net.input_len());
    std::uint64_t maps = 0;
    if (net.has_cnn()) {
        // ping-pong pair of the two largest consecutive maps, plus u
        std::uint64_t prev = in;
        for (const auto& l : net.cnn_layers) {
            const std::uint64_t cur = static_cast<std::uint64_t>(l.filters) * static_cast<std::uint64_t>(net.window);
            maps = std::max(maps, prev + cur);
            prev = cur;
        }
        maps += in;
    }
    // x, xx, 4 pre-activations, 4 activations, c, tanh(c), logits
    return in + maps + (H + in) + 8 * H + 2 * H + static_cast<std::uint64_t>(net.classes);
}

inline MemoryBanks load_banks(const model::HardwareModel& hw, const MachineConfig& mc) {
    mc.validate();
    if (hw.act != mc.activation) throw std::invalid_argument("load_banks: model activation format differs from machine");
    if (hw.weight != mc.dense_weight) throw std::invalid_argument("load_banks: model dense weight format differs from machine");
    if (hw.sigmoid.size() != static_cast<std::size_t>(mc.lut_size) || hw.tanh.size() != static_cast<std::size_t>(mc.lut_size))
        throw std::invalid_argument("load_banks: model LUT size differs from machine");
    MemoryBanks b{hw, weight_bank_bits(hw)};
    if (b.wb_bits > mc.wb_capacity_bits)
        throw CapacityError("weight buffers: model needs " + std::to_string(b.wb_bits) + " bits, capacity " +
                            std::to_string(mc.wb_capacity_bits));
    const std::uint64_t im = intermediate_words(hw.cfg) * static_cast<std::uint64_t>(mc.activation.total_bits);
    if (im > mc.im_capacity_bits)
        throw CapacityError("intermediate memory: network needs " + std::to_string(im) + " bits, capacity " +
                            std::to_string(mc.im_capacity_bits));
    return b;
}

// ---------------------------------------------------------------------------
// Simulation

struct CycleReport {
    std::array<std::uint64_t, 8> cycles_per_state{};
    std::uint64_t total_cycles = 0;
    std::uint64_t window_cycles = 0;  // states 1-7 of one window
    std::uint64_t final_cycles = 0;   // state 8 after the last window
    double clock_hz = 1e8;
    double latency_seconds = 0;
    std::uint64_t executed_macs = 0;
    std::uint64_t paper_macs = 0;
    std::uint64_t wb_bits_read = 0;
    std::uint64_t im_bits_read = 0;
    std::uint64_t im_bits_written = 0;
    std::uint64_t im_bits_transferred = 0;
    std::uint64_t stall_cycles = 0;  // cycles beyond the compute formulas
    std::uint64_t max_wb_beat = 0;
    std::uint64_t max_im_beat = 0;
    std::vector<int> state_trace;

    /// Worst single-window latency: one window plus the output layer.
    double window_latency_seconds() const { return static_cast<double>(window_cycles + final_cycles) / clock_hz; }
};

struct InferenceResult {
    int label = 0;
    std::vector<std::int32_t> logits;
    std::vector<std::int32_t> h;
    std::vector<std::int32_t> c;
    CycleReport report;
};

namespace detail {

class Machine {
public:
    Machine(const MemoryBanks& banks, const MachineConfig& mc, std::ostream* trace)
        : b_(banks.weights), mc_(mc), trace_(trace),
          wb_("WB", mc.wb_read_bits_per_cycle),
          im_rd_("IM.read", mc.im_bits_per_cycle),
          im_wr_("IM.write", mc.im_bits_per_cycle) {
        if (trace_) *trace_ << "cycle,state,unit,op\n";
    }

    InferenceResult run(const WindowedSequence& seq) {
        const auto& cfg = b_.cfg;
        model::check_sequence(seq, cfg);
        const auto H = static_cast<std::size_t>(cfg.hidden);
        h_.assign(H, 0);
        c_.assign(H, 0);
        plan_ = window_plan(cfg, mc_);

        for (std::size_t w = 0; w < seq.windows.size(); ++w) {
            const bool last = w + 1 == seq.windows.size();
            const std::uint64_t before = rep_.total_cycles;
            std::size_t visit = 0;
            x_ = model::quantize_samples(seq.windows[w], b_.act);
            if (cfg.has_cnn()) {
                maps_ = x_;
                for (std::size_t l = 0; l < b_.cnn.size(); ++l) {
                    conv_layer(l);
                    issue(plan_[visit++], "conv+relu L" + std::to_string(l));
                }
                fc_residual();
                issue(plan_[visit++], "fc+residual");
            } else {
                u_ = x_;
                issue(plan_[visit++], "load window");
                issue(plan_[visit++], "pass-through");
            }
            gates();
            issue(plan_[visit++], "gate products");
            nonlinear();
            issue(plan_[visit++], "sigmoid/tanh LUT");
            cell_update();
            issue(plan_[visit++], "c = f*c + g*i");
            tanh_c();
            issue(plan_[visit++], "tanh(c)");
            hidden_update();
            issue(plan_[visit++], "h = o*tanh(c)");
            if (w == 0) rep_.window_cycles = rep_.total_cycles - before;
            if (last) {
                output_layer();
                const std::uint64_t t0 = rep_.total_cycles;
                issue(plan_[visit++], "classify");
                rep_.final_cycles = rep_.total_cycles - t0;
            } else {
                rep_.state_trace.push_back(8);
                emit(rep_.total_cycles, 8, "MC", "next window");
            }
        }

        rep_.clock_hz = mc_.clock_hz;
        rep_.latency_seconds = static_cast<double>(rep_.total_cycles) / mc_.clock_hz;
        rep_.paper_macs = estimate::mac_count(cfg, estimate::MacVariant::paper, estimate::MacScope::sequence);
        rep_.wb_bits_read = wb_.total_bits();
        rep_.im_bits_read = im_rd_.total_bits();
        rep_.im_bits_written = im_wr_.total_bits();
        rep_.im_bits_transferred = rep_.im_bits_read + rep_.im_bits_written;
        rep_.max_wb_beat = wb_.max_beat();
        rep_.max_im_beat = std::max(im_rd_.max_beat(), im_wr_.max_beat());

        InferenceResult out;
        out.logits = logits_;
        out.label = model::argmax(logits_);
        out.h = h_;
        out.c = c_;
        out.report = std::move(rep_);
        return out;
    }

private:
    void emit(std::uint64_t cycle, int state, const char* unit, const std::string& op) {
        if (trace_) *trace_ << cycle << ',' << state << ',' << unit << ',' << op << '\n';
    }

    /// Advances the clock over one state visit and streams its data in beats.
    void issue(const StatePlan& s, const std::string& op) {
        const std::uint64_t start = rep_.total_cycles;
        const std::uint64_t n = s.cycles(mc_);
        emit(start, s.state, s.state == 4 || s.state == 6 ? "NFs" : "MACs", op);
        stream({{{&wb_, s.wb_bits}, {&im_rd_, s.im_read_bits}, {&im_wr_, s.im_write_bits}}}, start, n, s.state);
        rep_.cycles_per_state[static_cast<std::size_t>(s.state - 1)] += n;
        rep_.total_cycles += n;
        rep_.stall_cycles += n - s.compute_cycles;
        rep_.state_trace.push_back(s.state);
    }

    struct Transfer {
        Port* port;
        std::uint64_t bits;
    };

    /// One beat per port per cycle, from the first cycle of the visit.
    void stream(std::array<Transfer, 3> xfers, std::uint64_t start, std::uint64_t cycles, int state) {
        for (std::uint64_t k = 0;; ++k) {
            bool any = false;
            for (auto& x : xfers) {
                if (x.bits == 0) continue;
                any = true;
                if (k >= cycles)
                    throw BandwidthError(x.port->name() + ": state " + std::to_string(state) + " data does not fit its cycles");
                const std::uint64_t beat = std::min(x.bits, static_cast<std::uint64_t>(x.port->width()));
                x.port->beat(beat);
                if (trace_) emit(start + k, state, x.port->name().c_str(), std::to_string(beat) + " bits");
                x.bits -= beat;
            }
            if (!any) return;
        }
    }

    std::int32_t requant(std::int64_t acc, int frac) const { return fxp::requantize(acc, frac, b_.act).raw; }

    // State 1
    void conv_layer(std::size_t l) {
        const auto& layer = b_.cnn[l];
        const auto L = static_cast<std::ptrdiff_t>(b_.cfg.window);
        const int pl = model::pad_left(layer.taps);
        std::vector<std::int32_t> z(static_cast<std::size_t>(layer.filters * L));
        for (std::ptrdiff_t i = 0; i < L; ++i)
            for (int o = 0; o < layer.filters; ++o) {
                std::int64_t acc = 0;
                for (int d = 0; d < layer.in_depth; ++d)
                    for (int a = 0; a < layer.taps; ++a) {
                        ++rep_.executed_macs;
                        const std::ptrdiff_t t = i + a - pl;
                        if (t < 0 || t >= L) continue;
                        const auto code = layer.codes[static_cast<std::size_t>((o * layer.in_depth + d) * layer.taps + a)];
                        acc += code * std::int64_t{maps_[static_cast<std::size_t>(d * L + t)]};
                    }
                z[static_cast<std::size_t>(o * L + i)] = std::max(requant(acc, b_.act.frac_bits), 0);
            }
        maps_ = std::move(z);
    }

    // State 2
    void fc_residual() {
        const std::size_t in = x_.size();
        const std::size_t feat = maps_.size();
        u_.assign(in, 0);
        for (std::size_t k = 0; k < in; ++k) {
            std::int64_t acc = 0;
            for (std::size_t j = 0; j < feat; ++j) acc += std::int64_t{b_.fc[k * feat + j]} * maps_[j];
            rep_.executed_macs += feat;
            const std::int32_t p = requant(acc, b_.act.frac_bits + b_.weight.frac_bits);
            u_[k] = b_.cfg.residual ? fxp::add({x_[k], b_.act}, {p, b_.act}).raw : p;
        }
    }

    // State 3: blocks of hidden units, all four gates per unit in parallel.
    void gates() {
        const std::size_t H = h_.size();
        std::vector<std::int32_t> xx(h_);
        xx.insert(xx.end(), u_.begin(), u_.end());
        const std::size_t block = gate_lanes(mc_);
        for (auto& p : pre_) p.assign(H, 0);
        for (std::size_t k0 = 0; k0 < H; k0 += block) {
            const std::size_t k1 = std::min(H, k0 + block);
            std::vector<std::array<std::int64_t, 4>> acc(k1 - k0, {0, 0, 0, 0});
            for (std::size_t j = 0; j < xx.size(); ++j)
                for (std::size_t k = k0; k < k1; ++k)
                    for (std::size_t g = 0; g < 4; ++g) acc[k - k0][g] += b_.gates[g][j * H + k] * std::int64_t{xx[j]};
            rep_.executed_macs += 4 * (k1 - k0) * xx.size();
            for (std::size_t k = k0; k < k1; ++k)
                for (std::size_t g = 0; g < 4; ++g) pre_[g][k] = requant(acc[k - k0][g], b_.act.frac_bits);
        }
    }

    // State 4
    void nonlinear() {
        const std::size_t H = h_.size();
        for (auto& a : act_) a.assign(H, 0);
        for (std::size_t k = 0; k < H; ++k) {
            act_[model::kForget][k] = model::lut_to_act(pre_[model::kForget][k], b_.sigmoid, b_.act);
            act_[model::kInput][k] = model::lut_to_act(pre_[model::kInput][k], b_.sigmoid, b_.act);
            act_[model::kOutput][k] = model::lut_to_act(pre_[model::kOutput][k], b_.sigmoid, b_.act);
            act_[model::kCell][k] = model::lut_to_act(pre_[model::kCell][k], b_.tanh, b_.act);
        }
    }

    // State 5
    void cell_update() {
        for (std::size_t k = 0; k < c_.size(); ++k) {
            const std::int64_t f = act_[model::kForget][k], i = act_[model::kInput][k], g = act_[model::kCell][k];
            c_[k] = requant(f * c_[k] + g * i, 2 * b_.act.frac_bits);
        }
    }

    // State 6
    void tanh_c() {
        tc_.assign(c_.size(), 0);
        for (std::size_t k = 0; k < c_.size(); ++k) tc_[k] = model::lut_to_act(c_[k], b_.tanh, b_.act);
    }

    // State 7
    void hidden_update() {
        for (std::size_t k = 0; k < h_.size(); ++k)
            h_[k] = requant(std::int64_t{act_[model::kOutput][k]} * tc_[k], 2 * b_.act.frac_bits);
    }

    // State 8
    void output_layer() {
        const auto C = static_cast<std::size_t>(b_.cfg.classes);
        const std::size_t H = h_.size();
        logits_.assign(C, 0);
        for (std::size_t k = 0; k < C; ++k) {
            std::int64_t acc = std::int64_t{b_.by[k]} << b_.weight.frac_bits;
            for (std::size_t j = 0; j < H; ++j) acc += std::int64_t{b_.wy[j * C + k]} * h_[j];
            rep_.executed_macs += H;
            logits_[k] = requant(acc, b_.act.frac_bits + b_.weight.frac_bits);
        }
    }

    const model::HardwareModel& b_;
    MachineConfig mc_;
    std::ostream* trace_;
    Port wb_, im_rd_, im_wr_;
    std::vector<StatePlan> plan_;
    CycleReport rep_;
    std::vector<std::int32_t> x_, maps_, u_, h_, c_, tc_, logits_;
    std::array<std::vector<std::int32_t>, 4> pre_, act_;
};

}  // namespace detail

/// Runs one sequence through the machine. `trace`, when given, receives a
/// `cycle,state,unit,op` CSV of every visit and memory beat.
inline InferenceResult run_inference(const WindowedSequence& seq, const MemoryBanks& banks, const MachineConfig& mc,
                                     std::ostream* trace = nullptr) {
    return detail::Machine(banks, mc, trace).run(seq);
}

/// The trace has the shape (1+ 2 3 4 5 6 7 8)^q.
inline bool trace_is_well_formed(const std::vector<int>& t, int steps) {
    std::size_t i = 0;
    for (int w = 0; w < steps; ++w) {
        if (i >= t.size() || t[i] != 1) return false;
        while (i < t.size() && t[i] == 1) ++i;
        for (int s = 2; s <= 8; ++s, ++i)
            if (i >= t.size() || t[i] != s) return false;
    }
    return i == t.size();
}

// ---------------------------------------------------------------------------
// Reports

struct LatencyReport {
    bool pass = false;
    double latency_seconds = 0;
    double budget_seconds = 0;
    double margin = 0;  // budget / latency
};

/// Real-time budget of one window: w samples at `sample_rate_hz`.
inline double window_budget_seconds(int window, double sample_rate_hz) { return window / sample_rate_hz; }

inline LatencyReport latency_report(const CycleReport& rep, double budget_seconds) {
    LatencyReport r;
    r.latency_seconds = rep.window_latency_seconds();
    r.budget_seconds = budget_seconds;
    r.margin = r.latency_seconds > 0 ? budget_seconds / r.latency_seconds : (budget_seconds > 0 ? INFINITY : 0.0);
    r.pass = budget_seconds > 0 && r.latency_seconds < budget_seconds;
    return r;
}

inline const char* state_name(int s) {
    static const char* names[] = {"conv+relu", "fc+residual", "gates", "lut", "cell", "tanh(c)", "hidden", "output"};
    return s >= 1 && s <= 8 ? names[s - 1] : "?";
}

inline void write_report_text(std::ostream& os, const CycleReport& r) {
    os << "state  name          cycles\n";
    for (int s = 1; s <= 8; ++s) {
        std::ostringstream line;
        line << "  " << s << "    " << state_name(s);
        std::string str = line.str();
        str.resize(20, ' ');
        os << str << r.cycles_per_state[static_cast<std::size_t>(s - 1)] << '\n';
    }
    os << "total_cycles        " << r.total_cycles << '\n'
       << "window_cycles       " << r.window_cycles << '\n'
       << "stall_cycles        " << r.stall_cycles << '\n'
       << "latency_seconds     " << r.latency_seconds << '\n'
       << "window_latency_s    " << r.window_latency_seconds() << '\n'
       << "executed_macs       " << r.executed_macs << '\n'
       << "paper_macs          " << r.paper_macs << '\n'
       << "wb_bits_read        " << r.wb_bits_read << '\n'
       << "im_bits_transferred " << r.im_bits_transferred << '\n';
}

inline void write_report_csv_header(std::ostream& os) {
    os << "sequence,label,predicted,s1,s2,s3,s4,s5,s6,s7,s8,total_cycles,latency_seconds,executed_macs,paper_macs,"
          "wb_bits_read,im_bits_transferred\n";
}

inline void write_report_csv_row(std::ostream& os, std::size_t index, int label, int predicted, const CycleReport& r) {
    os << index << ',' << label << ',' << predicted;
    for (auto c : r.cycles_per_state) os << ',' << c;
    os << ',' << r.total_cycles << ',' << r.latency_seconds << ',' << r.executed_macs << ',' << r.paper_macs << ','
       << r.wb_bits_read << ',' << r.im_bits_transferred << '\n';
}

}  // namespace qtsc::fsm
