#pragma once

#include <cstddef>
#include <vector>

namespace qtsc {

/// q consecutive windows of one (possibly multichannel) signal and its label.
/// Each window is channel-major: sample t of channel d sits at d * window + t.
struct WindowedSequence {
    std::vector<std::vector<double>> windows;
    int label = 0;

    std::size_t steps() const noexcept { return windows.size(); }
};

}  // namespace qtsc
