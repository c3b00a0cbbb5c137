#pragma once

#include <stdexcept>
#include <string>

namespace wgmopo {

// Solver failed to converge or produced an unusable number.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// A requested tuning target lies outside the reachable range of the mechanism.
class RangeError : public std::runtime_error {
public:
    RangeError(const std::string& what, double achievable_hz)
        : std::runtime_error(what), achievable_hz(achievable_hz) {}
    double achievable_hz;
};

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace wgmopo
