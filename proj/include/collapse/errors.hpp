#pragma once

#include <stdexcept>
#include <string>

namespace collapse {

// Bad user input (CLI flags, config files, out-of-range parameters).
// The CLI maps this to exit code 2.
struct ConfigError : std::invalid_argument {
    explicit ConfigError(const std::string& msg) : std::invalid_argument(msg) {}
};

// A machine-checked invariant failed. Signals an implementation bug,
// never a statistical fluctuation. CLI exit code 1.
struct InvariantViolation : std::logic_error {
    explicit InvariantViolation(const std::string& msg) : std::logic_error(msg) {}
};

// An event-count cap was hit before the requested stop condition.
struct TruncationError : std::runtime_error {
    explicit TruncationError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace collapse
