#pragma once

#include <stdexcept>
#include <string>

namespace labelmeas {

/// Bad run configuration or unusable CLI arguments (exit code 2).
struct config_error : std::runtime_error {
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed or inconsistent input data (exit code 3).
struct data_error : std::runtime_error {
    explicit data_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical failure: singular system, divergence, invalid domain (exit code 4).
struct numeric_error : std::runtime_error {
    explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace labelmeas
