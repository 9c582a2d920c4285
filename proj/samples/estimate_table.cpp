// Memory and MAC estimates for the ECG200 network shape, full precision against ternary.
#include <iostream>

#include "qtsc/estimate.hpp"

using namespace qtsc;

int main() {
    model::NetworkConfig net;  // window 20, 4 steps, two conv layers
    net.hidden = 250;
    net.classes = 2;
    estimate::print_table(std::cout, "ECG200", estimate::table_rows(net, 350));

    const auto macs = estimate::mac_count(net, estimate::MacVariant::true_count, estimate::MacScope::sequence);
    std::cout << "\nMACs per sequence " << macs << ", at 6.3 GOPs " << estimate::response_time(double(macs), 6.3) * 1e6
              << " us\n";
}
