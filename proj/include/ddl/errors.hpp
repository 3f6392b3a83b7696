#pragma once

#include <stdexcept>
#include <string>

namespace ddl {

/// Invalid parameters, bad grids, malformed configuration. Maps to CLI exit code 2.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Numerical failure during a computation (NaN, singular system, divergence). Exit code 3.
class ComputationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace ddl
