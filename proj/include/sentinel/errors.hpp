#pragma once

#include <stdexcept>
#include <string>

namespace sentinel {

// Malformed or inconsistent input data (files, CSV rows, value ranges).
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid configuration: bad config files, inconsistent model shapes,
// out-of-range hyperparameters.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numeric failure: NaN/Inf loss, diverged training, degenerate gradients.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace sentinel

