#pragma once

#include <stdexcept>
#include <string>

namespace pinn {

/// Bad arguments to a library call (dimension mismatch, degenerate grid, ...).
struct InvalidInput : std::invalid_argument {
    explicit InvalidInput(const std::string& what) : std::invalid_argument(what) {}
};

/// A computation produced non-finite values it cannot recover from.
struct NumericalFailure : std::runtime_error {
    explicit NumericalFailure(const std::string& what) : std::runtime_error(what) {}
};

/// Rejection sampling ran out of budget (pathological inputs).
struct SamplingFailure : std::runtime_error {
    explicit SamplingFailure(const std::string& what) : std::runtime_error(what) {}
};

/// A problem definition contradicts itself (e.g. boundary data that cannot hold).
struct InconsistentProblem : std::runtime_error {
    explicit InconsistentProblem(const std::string& what) : std::runtime_error(what) {}
};

/// Config file errors; `key` names the offending entry when known.
struct ConfigError : std::runtime_error {
    std::string key;
    ConfigError(std::string key_, const std::string& what)
        : std::runtime_error(key_.empty() ? what : key_ + ": " + what), key(std::move(key_)) {}
};

}  // namespace pinn
