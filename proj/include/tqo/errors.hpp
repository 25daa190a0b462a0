#pragma once

#include <stdexcept>
#include <string>

namespace tqo {

// Bad input or a violated precondition.
struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A computation would exceed a configured dimension cap.
struct ResourceError : std::runtime_error {
    long long dimension;
    ResourceError(const std::string& what, long long dim)
        : std::runtime_error(what + " (dimension " + std::to_string(dim) + ")"), dimension(dim) {}
};

// A numerical procedure failed to converge or broke down.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace tqo
