#ifndef CTSIM_ERRORS_HPP
#define CTSIM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ctsim {

// Raised for malformed or out-of-bounds scenario input. CLI maps it to exit 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when a runtime invariant is broken mid-run. CLI maps it to exit 3.
// The message names the violated invariant.
class InvariantViolation : public std::runtime_error {
public:
    explicit InvariantViolation(const std::string& what) : std::runtime_error(what) {}
};

} // namespace ctsim

#endif
