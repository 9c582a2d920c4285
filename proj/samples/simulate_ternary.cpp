// Runs one sequence through the cycle-level accelerator model and compares it with the fixed-point reference.
#include <iostream>
#include <random>

#include "qtsc/fsm.hpp"
#include "qtsc/model_fixed.hpp"

using namespace qtsc;

int main() {
    model::NetworkConfig net;
    net.window = 8;
    net.steps = 3;
    net.hidden = 16;
    net.classes = 3;

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    model::NetworkParams p = model::zero_params(net, quant::Precision::ternary);
    p.for_each_tensor([&](const model::TensorView& t) {
        if (t.role == model::TensorRole::bias) return;
        for (double& v : t.flat()) v = u(rng);
    });

    WindowedSequence seq;
    for (int k = 0; k < net.steps; ++k) {
        std::vector<double> w(static_cast<std::size_t>(net.input_len()));
        for (double& v : w) v = 2.0 * u(rng);
        seq.windows.push_back(w);
    }

    const fsm::MachineConfig mc;
    const auto hw = model::to_hardware(p);
    const auto result = fsm::run_inference(seq, fsm::load_banks(hw, mc), mc);
    const auto reference = model::network_forward_fixed(seq, hw);

    fsm::write_report_text(std::cout, result.report);
    std::cout << "label " << result.label << " (reference " << reference.label << ")\n"
              << "logits match reference: " << (result.logits == reference.logits ? "yes" : "no") << "\n";
}
