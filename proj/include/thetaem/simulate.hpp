#pragma once

#include "thetaem/brownian.hpp"
#include "thetaem/stepper.hpp"

#include <iosfwd>
#include <optional>
#include <vector>

namespace thetaem {

struct PathDiagnostics {
    double max_residual = 0.0;
    int max_iterations = 0;
    int fallback_steps = 0;
    std::optional<std::size_t> diverged_at;  // first step with a non-finite state
};

/// Discrete trajectory y_{t_0..t_M}. states[0] is the initial state;
/// exit_index, when present, is the minimal k with |states[k]| >= the
/// truncation radius. Paths are simulated past exit (no absorption).
struct PathResult {
    std::vector<Vec> states;
    double stepsize = 0.0;
    double horizon = 0.0;
    std::optional<std::size_t> exit_index;
    PathDiagnostics diagnostics;
    double sup_norm = 0.0;  // max_k |states[k]|; +inf if the path diverged
};

/// Iterate theta_step over the grid. Deterministic in (problem, config,
/// grid). Solver failures propagate with the step index attached; explicit
/// (theta = 0) runs record divergence instead of failing.
PathResult simulate_path(const Problem& problem, const SchemeConfig& config,
                         const BrownianGrid& grid);

/// Continuous-form value at a fine-grid time t in [t_k, t_{k+1}):
///   Z(t) = z_k + f(y_k)(t - t_k) + sigma(y_k)(W(t) - W(t_k)),
///   Y(t) = the implicit solve applied to Z(t)   (Y = Z when theta = 0),
/// with W read off `fine`, a refinement of the path's grid. At grid points
/// returns states[k] exactly.
Vec interpolate_continuous(const Problem& problem, const SchemeConfig& config,
                           const PathResult& path, const BrownianGrid& fine, double t);

/// Left-continuous piecewise-constant interpolant: states[floor(t/D)], with
/// the half-open interval closed at the horizon.
Vec piecewise_constant(const PathResult& path, double t);

/// Minimal k with |states[k]| >= radius, absent if none.
std::optional<std::size_t> first_exit(const PathResult& path, double radius);

/// CSV rows "t,y_1,..,y_n", one per grid point.
void write_path_csv(std::ostream& out, const PathResult& path);

}  // namespace thetaem
