#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace thetaem {

/// Rejected configuration: bad stepsize, inadmissible (theta, delta, radius)
/// combination, mismatched grids, out-of-range query times.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Truncation schedule failed its admissibility checks.
class ScheduleError : public ConfigError {
public:
    explicit ScheduleError(const std::string& what) : ConfigError(what) {}
};

struct StepDiagnostics {
    int iterations = 0;       // residual evaluations performed
    double residual = 0.0;    // |y - theta*delta*f(y) - c| at exit
    bool fallback_used = false;
};

/// Implicit solve failed to reach tolerance, or was fed a non-finite state.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, StepDiagnostics diag,
                std::optional<std::size_t> step = std::nullopt)
        : std::runtime_error(step ? what + " (at step " + std::to_string(*step) + ")" : what),
          diagnostics(diag),
          step_index(step) {}

    StepDiagnostics diagnostics;
    std::optional<std::size_t> step_index;
};

}  // namespace thetaem
