// Trains a small ternary CNN-LSTM on the five-class sine bank and prints the test accuracy per epoch.
#include <cstdio>

#include "qtsc/datagen.hpp"
#include "qtsc/ingest.hpp"
#include "qtsc/train.hpp"

using namespace qtsc;

int main() {
    model::NetworkConfig net;
    net.window = 20;
    net.steps = 10;
    net.hidden = 32;
    net.classes = 5;

    datagen::GeneratorConfig g;
    g.system = datagen::System::sine;
    g.classes = net.classes;
    g.per_class = 60;
    g.length = net.window * net.steps;
    g.sine_beta = 0.1;
    const auto ds = datagen::generate(g);

    const auto split = ingest::normalize_and_split(ds.data, 0.7, 1);
    const auto train_set = cut_all(split.train.records, net.window, net.steps);
    const auto test_set = cut_all(split.test.records, net.window, net.steps);

    train::TrainConfig tc;
    tc.learning_rate = train::default_learning_rate(quant::Precision::ternary);
    tc.epochs = 30;
    const auto res = train::train(train_set, test_set, net, quant::Precision::ternary, tc,
                                  [](int epoch, double loss, double acc) {
                                      std::printf("epoch %2d  loss %.4f  test accuracy %.3f\n", epoch, loss, acc);
                                  });
    const auto rep = train::evaluate(res.params, test_set);
    std::printf("final accuracy %.3f, macro AUC %.3f\n", rep.accuracy, rep.macro_auc);
}
