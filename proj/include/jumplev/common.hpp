#pragma once

#include <stdexcept>
#include <string>

namespace jumplev {

inline constexpr const char* kVersion = "0.1.0";

// Estimator could not produce a value (degenerate inputs, all bins truncated,
// window out of range). CLI maps this to exit code 1.
class estimation_error : public std::runtime_error {
public:
    explicit estimation_error(const std::string& what) : std::runtime_error(what) {}
};

// File / format problems. CLI maps this to exit code 2.
class io_error : public std::runtime_error {
public:
    explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace jumplev
