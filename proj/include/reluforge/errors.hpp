#pragma once

#include <stdexcept>
#include <string>

namespace reluforge {

struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Caller passed arguments that violate a documented precondition.
struct precondition_error : error {
    using error::error;
};

// Vector length does not match the network or operand dimension.
struct dimension_error : error {
    using error::error;
};

struct parse_error : error {
    parse_error(const std::string& what, int layer = -1)
        : error(layer >= 0 ? "layer " + std::to_string(layer) + ": " + what : what), layer_(layer) {}
    // -1 when the problem is not attached to a specific layer.
    int layer() const noexcept { return layer_; }

private:
    int layer_;
};

// A numerical routine could not reach its stated accuracy.
struct numeric_error : error {
    using error::error;
};

inline void require(bool ok, const std::string& what) {
    if (!ok) throw precondition_error(what);
}

}  // namespace reluforge
