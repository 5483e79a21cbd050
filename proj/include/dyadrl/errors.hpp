#pragma once

#include <stdexcept>
#include <string>

namespace dyadrl {

/// Invalid user-supplied configuration (bad spreads, unknown keys, ...).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical calibration failed (degenerate scale, bisection out of bracket).
struct CalibrationError : std::runtime_error {
    explicit CalibrationError(const std::string& what) : std::runtime_error(what) {}
};

/// A caller broke an API precondition. Always checked, also in release builds.
struct ContractViolation : std::logic_error {
    explicit ContractViolation(const std::string& what) : std::logic_error(what) {}
};

namespace detail {
inline void check(bool cond, const char* msg) {
    if (!cond) throw ContractViolation(msg);
}
}  // namespace detail

}  // namespace dyadrl

#define DYADRL_CHECK(cond, msg) ::dyadrl::detail::check((cond), (msg))
