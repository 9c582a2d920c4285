#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "hwgen.hpp"
#include "property.hpp"
#include "qtsc/estimate.hpp"
#include "qtsc/fsm.hpp"

using namespace qtsc;
namespace qt = qtsc::testing;
using namespace qtsc::fsm;
using qtsc::model::NetworkConfig;

namespace {

NetworkConfig dba_config() {
    NetworkConfig c;
    c.window = 5;
    c.steps = 30;
    c.channels = 128;
    c.hidden = 250;
    c.classes = 8;
    return c;
}

InferenceResult simulate(const model::NetworkParams& p, const WindowedSequence& s, const MachineConfig& mc = {},
                         std::ostream* trace = nullptr) {
    return run_inference(s, load_banks(model::to_hardware(p), mc), mc, trace);
}

}  // namespace

TEST(StateCycleCost, Examples) {
    const MachineConfig mc;
    EXPECT_EQ(conv_cycles(50, 5, 10, 1, mc), 460u);
    NetworkConfig c;
    c.hidden = 250;
    EXPECT_EQ(state_cycle_cost(4, c, mc), 250u);
    c.classes = 8;
    EXPECT_EQ(state_cycle_cost(8, c, mc), 2000u);
    EXPECT_THROW(state_cycle_cost(0, c, mc), std::out_of_range);
    EXPECT_THROW(state_cycle_cost(9, c, mc), std::out_of_range);
}

TEST(StateCycleCost, ConvLayerIncludesRelu) {
    MachineConfig mc;
    NetworkConfig c;
    c.window = 50;
    c.cnn_layers = {{10, 5}};
    // 460 conv + 46 ReLU; data movement fits inside
    EXPECT_EQ(state_cycle_cost(1, c, mc), 506u);
}

TEST(StateCycleCost, GateStateFormula) {
    MachineConfig mc;
    NetworkConfig c;
    c.use_cnn = false;
    c.hidden = 250;
    c.window = 20;
    // (N_h + input) * ceil(N_h / 8)
    EXPECT_EQ(state_cycle_cost(3, c, mc), 270u * 32u);
}

TEST(StateCycleCost, FcIsWeightBandwidthBound) {
    MachineConfig mc;
    NetworkConfig c = dba_config();
    const std::uint64_t in = 640, feat = 150;
    EXPECT_EQ(state_cycle_cost(2, c, mc), (in * feat * 12 + 63) / 64);
}

TEST(StateCycleCost, MonotoneInHiddenAndWindow) {
    const MachineConfig mc;
    qt::for_all(200, 11, [&](qt::Gen& g) {
        std::mt19937_64 rng(g.rng());
        const NetworkConfig c = qt::random_hw_config(rng);
        const auto total = [&](const NetworkConfig& n) {
            std::uint64_t t = 0;
            for (const auto& s : window_plan(n, mc)) t += s.cycles(mc);
            return t;
        };
        NetworkConfig bigger_h = c;
        bigger_h.hidden += g.integer(1, 5);
        NetworkConfig bigger_w = c;
        bigger_w.window += g.integer(1, 5);
        EXPECT_GE(total(bigger_h), total(c));
        EXPECT_GE(total(bigger_w), total(c));
    });
}

TEST(RunInference, ZeroWeightsGiveClassZero) {
    NetworkConfig c;
    c.hidden = 6;
    c.window = 4;
    c.steps = 3;
    c.classes = 4;
    const model::NetworkParams p = model::zero_params(c, quant::Precision::ternary);
    std::mt19937_64 rng(3);
    const auto r = simulate(p, qt::random_input(rng, c));
    EXPECT_EQ(r.label, 0);
    for (auto v : r.logits) EXPECT_EQ(v, 0);
}

TEST(RunInference, MatchesGoldenModelTinyNoCnn) {
    std::mt19937_64 rng(5);
    NetworkConfig c;
    c.hidden = 8;
    c.window = 4;
    c.steps = 3;
    c.use_cnn = false;
    const auto p = qt::random_quantized_params(rng, c);
    const auto s = qt::random_input(rng, c);
    const auto sim = simulate(p, s);
    const auto gold = model::network_forward_fixed(s, model::to_hardware(p));
    EXPECT_EQ(sim.logits, gold.logits);
    EXPECT_EQ(sim.h, gold.h);
    EXPECT_EQ(sim.c, gold.c);
    EXPECT_EQ(sim.label, gold.label);
}

TEST(RunInference, GoldenModelEquivalenceProperty) {
    qt::for_all(300, 21, [](qt::Gen& g) {
        std::mt19937_64 rng(g.rng());
        const NetworkConfig c = qt::random_hw_config(rng);
        const auto prec = g.coin() ? quant::Precision::ternary : quant::Precision::binary;
        const auto p = qt::random_quantized_params(rng, c, prec);
        const auto s = qt::random_input(rng, c, g.uniform(0.1, 10.0));
        const auto sim = simulate(p, s);
        const auto gold = model::network_forward_fixed(s, model::to_hardware(p));
        ASSERT_EQ(sim.logits, gold.logits);
        ASSERT_EQ(sim.h, gold.h);
        ASSERT_EQ(sim.c, gold.c);
        ASSERT_EQ(sim.label, gold.label);
    });
}

TEST(RunInference, ExecutedMacsMatchEstimate) {
    qt::for_all(200, 31, [](qt::Gen& g) {
        std::mt19937_64 rng(g.rng());
        const NetworkConfig c = qt::random_hw_config(rng);
        const auto p = qt::random_quantized_params(rng, c);
        const auto r = simulate(p, qt::random_input(rng, c)).report;
        EXPECT_EQ(r.executed_macs,
                  estimate::mac_count(c, estimate::MacVariant::true_count, estimate::MacScope::sequence));
        EXPECT_EQ(r.paper_macs, estimate::mac_count(c, estimate::MacVariant::paper, estimate::MacScope::sequence));
        EXPECT_GE(r.executed_macs, r.paper_macs);
    });
}

TEST(RunInference, ReportInvariants) {
    qt::for_all(200, 41, [](qt::Gen& g) {
        std::mt19937_64 rng(g.rng());
        const NetworkConfig c = qt::random_hw_config(rng);
        MachineConfig mc;
        mc.clock_hz = g.uniform(1e6, 1e9);
        const auto r = simulate(qt::random_quantized_params(rng, c), qt::random_input(rng, c), mc).report;
        std::uint64_t sum = 0;
        for (auto v : r.cycles_per_state) sum += v;
        EXPECT_EQ(r.total_cycles, sum);
        EXPECT_DOUBLE_EQ(r.latency_seconds, static_cast<double>(r.total_cycles) / mc.clock_hz);
        EXPECT_EQ(r.total_cycles, r.window_cycles * static_cast<std::uint64_t>(c.steps) + r.final_cycles);
        EXPECT_EQ(r.final_cycles, state_cycle_cost(8, c, mc));
        EXPECT_TRUE(trace_is_well_formed(r.state_trace, c.steps));
        const std::size_t ones = c.has_cnn() ? c.cnn_layers.size() : 1;
        EXPECT_EQ(r.state_trace.size(), static_cast<std::size_t>(c.steps) * (ones + 7));
        EXPECT_LE(r.max_wb_beat, 64u);
        EXPECT_LE(r.max_im_beat, 48u);
    });
}

TEST(RunInference, StateTraceShape) {
    EXPECT_TRUE(trace_is_well_formed({1, 1, 2, 3, 4, 5, 6, 7, 8, 1, 1, 2, 3, 4, 5, 6, 7, 8}, 2));
    EXPECT_TRUE(trace_is_well_formed({1, 2, 3, 4, 5, 6, 7, 8}, 1));
    EXPECT_FALSE(trace_is_well_formed({1, 2, 3, 4, 5, 6, 7, 8}, 2));
    EXPECT_FALSE(trace_is_well_formed({2, 3, 4, 5, 6, 7, 8}, 1));
    EXPECT_FALSE(trace_is_well_formed({1, 2, 3, 5, 4, 6, 7, 8}, 1));
    EXPECT_FALSE(trace_is_well_formed({1, 2, 3, 4, 5, 6, 7, 8, 8}, 1));
}

TEST(RunInference, DoublingClockHalvesLatency) {
    std::mt19937_64 rng(7);
    NetworkConfig c;
    c.hidden = 10;
    c.window = 6;
    c.steps = 2;
    const auto p = qt::random_quantized_params(rng, c);
    const auto s = qt::random_input(rng, c);
    MachineConfig a, b;
    b.clock_hz = 2 * a.clock_hz;
    const auto ra = simulate(p, s, a).report, rb = simulate(p, s, b).report;
    EXPECT_EQ(ra.total_cycles, rb.total_cycles);
    EXPECT_EQ(rb.latency_seconds, ra.latency_seconds / 2);
}

TEST(RunInference, DbaConfigurationMeetsBudget) {
    const NetworkConfig c = dba_config();
    std::mt19937_64 rng(9);
    const auto p = qt::random_quantized_params(rng, c);
    const auto r = simulate(p, qt::random_input(rng, c)).report;
    EXPECT_GE(r.executed_macs / static_cast<std::uint64_t>(c.steps), (5u * 128u + 250u) * 250u);
    const auto lat = latency_report(r, 10e-3);
    EXPECT_TRUE(lat.pass);
    EXPECT_GT(lat.margin, 10.0);
    EXPECT_FALSE(latency_report(r, 0.0).pass);
}

TEST(RunInference, WindowCountMismatchThrows) {
    NetworkConfig c;
    c.hidden = 4;
    c.window = 3;
    c.steps = 2;
    std::mt19937_64 rng(1);
    const auto p = qt::random_quantized_params(rng, c);
    auto s = qt::random_input(rng, c);
    s.windows.pop_back();
    EXPECT_THROW(simulate(p, s), ShapeError);
}

TEST(LoadBanks, CapacityErrors) {
    NetworkConfig c;
    c.hidden = 16;
    c.window = 8;
    std::mt19937_64 rng(2);
    const auto hw = model::to_hardware(qt::random_quantized_params(rng, c));
    MachineConfig mc;
    mc.wb_capacity_bits = weight_bank_bits(hw) - 1;
    EXPECT_THROW(load_banks(hw, mc), CapacityError);
    mc.wb_capacity_bits = weight_bank_bits(hw);
    EXPECT_NO_THROW(load_banks(hw, mc));
    mc.im_capacity_bits = 12;
    EXPECT_THROW(load_banks(hw, mc), CapacityError);
}

TEST(LoadBanks, FormatMismatchRejected) {
    NetworkConfig c;
    c.hidden = 4;
    c.window = 3;
    std::mt19937_64 rng(2);
    const auto hw = model::to_hardware(qt::random_quantized_params(rng, c));
    MachineConfig mc;
    mc.lut_size = 32;
    EXPECT_THROW(load_banks(hw, mc), std::invalid_argument);
}

TEST(Port, RejectsOverwideBeats) {
    Port p("WB", 64);
    p.beat(64);
    EXPECT_THROW(p.beat(65), BandwidthError);
    EXPECT_EQ(p.total_bits(), 64u);
    EXPECT_EQ(p.max_beat(), 64u);
}

TEST(Trace, CsvRowsAreOrderedAndBounded) {
    std::mt19937_64 rng(13);
    NetworkConfig c;
    c.hidden = 5;
    c.window = 4;
    c.steps = 2;
    c.cnn_layers = {{2, 3}};
    std::ostringstream os;
    const auto r = simulate(qt::random_quantized_params(rng, c), qt::random_input(rng, c), {}, &os);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line, "cycle,state,unit,op");
    std::uint64_t last = 0;
    int rows = 0;
    while (std::getline(is, line)) {
        ++rows;
        const auto cycle = std::stoull(line.substr(0, line.find(',')));
        EXPECT_GE(cycle, last);
        EXPECT_LT(cycle, r.report.total_cycles + 1);
        last = cycle;
    }
    EXPECT_GT(rows, 16);
}

TEST(MachineConfig, KeyValueRoundTrip) {
    MachineConfig m;
    m.mac_lanes = 16;
    m.clock_hz = 2.5e8;
    KeyValues kv;
    write_machine_config(kv, m);
    const MachineConfig back = machine_config_from(kv);
    EXPECT_EQ(back.mac_lanes, 16);
    EXPECT_EQ(back.clock_hz, 2.5e8);
    KeyValues bad;
    bad.set("lut_size", 48);
    EXPECT_THROW(machine_config_from(bad), std::invalid_argument);
}
