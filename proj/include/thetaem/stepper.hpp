#pragma once

#include "thetaem/errors.hpp"
#include "thetaem/problem.hpp"
#include "thetaem/truncation.hpp"

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace thetaem {

/// One-step scheme parameters. theta = 0 is the explicit scheme, theta = 1
/// the fully implicit one. With truncation on, the drift is b multiplied by
/// the radial cutoff at `truncation_radius`.
struct SchemeConfig {
    double theta = 1.0;
    double stepsize = 0.0;
    double horizon = 1.0;               // T, used by the experiment drivers
    bool truncated = true;
    double truncation_radius = 8.0;     // g; requires >= 2 when truncated
    double solver_tolerance = 1e-12;    // absolute residual norm
    int solver_max_iters = 200;
};

struct AdmissibilityReport {
    bool ok = false;
    double delta2 = 0.0;  // 1/(2 theta L), +inf for theta = 0
    double mbar = 0.0;    // one-sided bound used by the solver
    double mu = 1.0;      // 1 - theta*delta*mbar
    std::vector<std::string> failures;
    std::vector<std::string> warnings;
};

/// Largest implicit-scheme stepsize 1/(2 theta L); unbounded for theta = 0.
double max_implicit_stepsize(const Problem& problem, double theta);

/// One-sided Lipschitz bound of the stepped drift: the truncated-drift
/// constant at the configured radius, or M_R at a large sentinel radius for
/// untruncated runs (finite only for globally one-sided Lipschitz problems).
double effective_onesided_bound(const Problem& problem, const SchemeConfig& config);

/// The drift actually stepped: b, or zeta*b at the configured radius.
Vec effective_drift(const Problem& problem, const SchemeConfig& config, const Vec& x);

/// Validate a configuration before any stepping. In pragmatic mode a
/// non-positive strong-monotonicity margin is reported as a warning instead
/// of a failure; everything else rejects. `delta1_limit` adds the schedule
/// domain check when running a literal schedule.
AdmissibilityReport check_admissible(const Problem& problem, const SchemeConfig& config,
                                     bool pragmatic_mode = true,
                                     std::optional<double> delta1_limit = std::nullopt);

/// check_admissible + throw ConfigError naming the first violated condition.
void require_admissible(const Problem& problem, const SchemeConfig& config,
                        bool pragmatic_mode = true,
                        std::optional<double> delta1_limit = std::nullopt);

/// Solve y - theta_delta * f(y) = c. The iteration is damped fixed-point
/// y <- y - lambda (F(y) - c) with lambda = 1/(1 + theta_delta * max(Mbar, 0)),
/// accelerated by a secant step in 1-D (with a bracketing bisection safeguard)
/// and by Anderson mixing in n-D; acceleration falls back to the damped step
/// whenever it fails to reduce the residual.
std::pair<Vec, StepDiagnostics> solve_implicit(
    const Vec& c, double theta_delta, const std::function<Vec(const Vec&)>& drift_map,
    double onesided_bound, double tolerance = 1e-12, int max_iters = 200,
    const std::optional<Vec>& initial_guess = std::nullopt);

/// One step of the scheme:
///   y' = y + theta*D*f(y') + (1-theta)*D*f(y) + sigma(y)*dW,   f = b or zeta*b.
/// theta = 0 evaluates the explicit formula directly with no solver involved.
std::pair<Vec, StepDiagnostics> theta_step(const Problem& problem, const SchemeConfig& config,
                                           const Vec& y, const Vec& dW);

/// z = y - theta*D*f(y), the transformed state the implicit solve inverts:
/// solve_implicit(transform_z(y)) recovers y.
Vec transform_z(const Problem& problem, const SchemeConfig& config, const Vec& y);

}  // namespace thetaem
