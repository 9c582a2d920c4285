#pragma once

#include <stdexcept>
#include <string>

namespace qtsc {

/// Malformed or inconsistent input data (files, datasets, manifests).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Tensor or sequence dimensions that do not fit together.
struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A simulator memory bank was asked to hold more than it can.
struct CapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A simulated port moved more bits in one cycle than it is wired for.
struct BandwidthError : std::logic_error {
    using std::logic_error::logic_error;
};

}  // namespace qtsc
