#include "thetaem/stepper.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>

namespace thetaem {

namespace {

// Radius standing in for "all of R^n" when bounding an untruncated drift.
constexpr double kGlobalRadiusSentinel = 1e6;

}  // namespace

double max_implicit_stepsize(const Problem& problem, double theta) {
    if (theta <= 0.0) return std::numeric_limits<double>::infinity();
    return 1.0 / (2.0 * theta * problem.growth_constant);
}

double effective_onesided_bound(const Problem& problem, const SchemeConfig& config) {
    if (config.truncated) {
        return truncated_onesided_constant(problem, config.truncation_radius);
    }
    return problem.local_onesided_constant(kGlobalRadiusSentinel);
}

Vec effective_drift(const Problem& problem, const SchemeConfig& config, const Vec& x) {
    if (!config.truncated) return problem.drift(x);
    return truncated_drift(problem, Cutoff{config.truncation_radius, kCutoffLipschitz}, x);
}

AdmissibilityReport check_admissible(const Problem& problem, const SchemeConfig& config,
                                     bool pragmatic_mode, std::optional<double> delta1_limit) {
    AdmissibilityReport report;
    report.delta2 = max_implicit_stepsize(problem, config.theta);

    if (!(config.stepsize > 0.0)) report.failures.push_back("delta must be positive");
    if (!(config.theta >= 0.0 && config.theta <= 1.0)) {
        report.failures.push_back("theta must be in [0,1]");
    }
    if (config.theta > 0.0 && config.stepsize > 0.0 &&
        config.theta * config.stepsize >= 1.0 / (2.0 * problem.growth_constant)) {
        report.failures.push_back("theta*delta must be < 1/(2L)");
    }
    if (delta1_limit && config.stepsize > *delta1_limit) {
        report.failures.push_back("delta must be <= Delta1");
    }
    if (config.truncated) {
        if (!(config.truncation_radius >= 2.0)) {
            report.failures.push_back("truncation radius must be >= 2");
        } else if (problem.initial_state.size() > 0 &&
                   problem.initial_state.norm() > config.truncation_radius - 1.0) {
            report.failures.push_back("initial state must lie in the identity region |x0| <= g-1");
        }
    }
    if (!(config.solver_tolerance > 0.0)) {
        report.failures.push_back("solver tolerance must be positive");
    }
    if (config.solver_max_iters < 1) {
        report.failures.push_back("solver iteration budget must be positive");
    }

    report.mbar = effective_onesided_bound(problem, config);
    report.mu = 1.0 - config.theta * config.stepsize * report.mbar;
    if (config.theta > 0.0 && !(report.mu > 0.0)) {
        std::ostringstream msg;
        msg << "strong-monotonicity margin mu = 1 - theta*delta*Mbar must be positive"
            << " (mu = " << report.mu << ")";
        if (pragmatic_mode) {
            report.warnings.push_back(msg.str() +
                                      "; continuing with the safeguarded solver");
        } else {
            report.failures.push_back("strong-monotonicity margin mu = 1 - theta*delta*Mbar "
                                      "must be positive");
        }
    }
    report.ok = report.failures.empty();
    return report;
}

void require_admissible(const Problem& problem, const SchemeConfig& config, bool pragmatic_mode,
                        std::optional<double> delta1_limit) {
    const AdmissibilityReport report =
        check_admissible(problem, config, pragmatic_mode, delta1_limit);
    if (!report.ok) throw ConfigError(report.failures.front());
}

namespace {

using DriftMap = std::function<Vec(const Vec&)>;

std::pair<Vec, StepDiagnostics> solve_scalar(const Vec& c_vec, double td, const DriftMap& f,
                                             double lambda, double tol, int max_iters,
                                             double y0) {
    StepDiagnostics diag;
    const double c = c_vec[0];
    auto residual = [&](double y) {
        ++diag.iterations;
        Vec yv = Vec::Constant(1, y);
        return y - td * f(yv)[0] - c;
    };

    double y = y0;
    double r = residual(y);
    if (std::abs(r) <= tol) return {Vec::Constant(1, y), {diag.iterations, std::abs(r), false}};

    // Establish a sign-change bracket around the iterate. F(y) - c grows like
    // y - c far out for every admissible drift, so doubling terminates.
    double lo = y, rlo = r, hi = y, rhi = r;
    double step = std::max(1.0, std::abs(y)) * 0.5;
    for (int i = 0; i < 200 && rlo > 0.0; ++i) {
        lo -= step;
        rlo = residual(lo);
        step *= 2.0;
    }
    step = std::max(1.0, std::abs(y)) * 0.5;
    for (int i = 0; i < 200 && rhi < 0.0; ++i) {
        hi += step;
        rhi = residual(hi);
        step *= 2.0;
    }
    if (rlo > 0.0 || rhi < 0.0) {
        throw SolverError("implicit solver could not bracket a root", diag);
    }

    double y_prev = lo, r_prev = rlo;
    if (std::abs(rhi) < std::abs(r)) {
        y = hi;
        r = rhi;
        y_prev = lo;
        r_prev = rlo;
    } else if (std::abs(rlo) < std::abs(r)) {
        y = lo;
        r = rlo;
        y_prev = hi;
        r_prev = rhi;
    }

    // One residual evaluation per iteration. A failed halving of the residual
    // forces a bisection step next, so either the residual or the bracket
    // halves every other evaluation; convergence is guaranteed even where F
    // is locally non-monotone.
    bool force_bisect = false;
    while (diag.iterations < max_iters) {
        if (std::abs(r) <= tol) {
            return {Vec::Constant(1, y), {diag.iterations, std::abs(r), diag.fallback_used}};
        }
        double cand = 0.0;
        bool have_cand = false;
        if (!force_bisect && r != r_prev) {
            cand = y - r * (y - y_prev) / (r - r_prev);  // secant acceleration
            have_cand = std::isfinite(cand) && cand > lo && cand < hi;
        }
        if (!have_cand && !force_bisect) {
            cand = y - lambda * r;  // damped fixed-point step
            diag.fallback_used = true;
            have_cand = cand > lo && cand < hi;
        }
        if (!have_cand) {
            cand = 0.5 * (lo + hi);
            diag.fallback_used = true;
        }
        const double rc = residual(cand);
        force_bisect = std::abs(rc) > 0.5 * std::abs(r);
        if (rc < 0.0) lo = cand; else hi = cand;
        y_prev = y;
        r_prev = r;
        y = cand;
        r = rc;
    }
    if (std::abs(r) <= tol) return {Vec::Constant(1, y), {diag.iterations, std::abs(r), diag.fallback_used}};
    throw SolverError("implicit solver did not converge", {diag.iterations, std::abs(r), diag.fallback_used});
}

std::pair<Vec, StepDiagnostics> solve_anderson(const Vec& c, double td, const DriftMap& f,
                                               double lambda, double tol, int max_iters,
                                               const Vec& y0) {
    StepDiagnostics diag;
    auto residual = [&](const Vec& y) {
        ++diag.iterations;
        return Vec(y - td * f(y) - c);
    };

    constexpr int kWindow = 3;
    std::deque<Vec> ys, rs;
    Vec y = y0;
    Vec r = residual(y);
    double rn = r.norm();
    int stagnation = 0;

    while (diag.iterations < max_iters) {
        if (rn <= tol) return {y, {diag.iterations, rn, diag.fallback_used}};
        ys.push_back(y);
        rs.push_back(r);
        if (static_cast<int>(ys.size()) > kWindow + 1) {
            ys.pop_front();
            rs.pop_front();
        }

        Vec y_next;
        Vec r_next;
        bool accepted = false;
        const int hist = static_cast<int>(ys.size());
        if (hist >= 2) {
            const int m = hist - 1;
            Mat dR(c.size(), m), dY(c.size(), m);
            for (int j = 0; j < m; ++j) {
                dR.col(j) = rs[j + 1] - rs[j];
                dY.col(j) = ys[j + 1] - ys[j];
            }
            const Vec gamma = dR.colPivHouseholderQr().solve(r);
            const Vec cand = y - dY * gamma - lambda * (r - dR * gamma);
            if (cand.allFinite()) {
                const Vec rc = residual(cand);
                if (rc.norm() < rn) {
                    y_next = cand;
                    r_next = rc;
                    accepted = true;
                }
            }
        }
        if (!accepted) {
            const Vec cand = y - lambda * r;
            const Vec rc = residual(cand);
            diag.fallback_used = true;
            y_next = cand;
            r_next = rc;
        }
        const double rn_next = r_next.norm();
        stagnation = rn_next >= rn * (1.0 - 1e-3) ? stagnation + 1 : 0;
        if (stagnation > 8) {
            throw SolverError("implicit solver stagnated",
                              {diag.iterations, rn_next, diag.fallback_used});
        }
        y = y_next;
        r = r_next;
        rn = rn_next;
    }
    if (rn <= tol) return {y, {diag.iterations, rn, diag.fallback_used}};
    throw SolverError("implicit solver did not converge", {diag.iterations, rn, diag.fallback_used});
}

}  // namespace

std::pair<Vec, StepDiagnostics> solve_implicit(const Vec& c, double theta_delta,
                                               const DriftMap& drift_map, double onesided_bound,
                                               double tolerance, int max_iters,
                                               const std::optional<Vec>& initial_guess) {
    if (!c.allFinite()) {
        throw SolverError("non-finite right-hand side in implicit solve",
                          {0, std::numeric_limits<double>::quiet_NaN(), false});
    }
    if (theta_delta == 0.0) return {c, StepDiagnostics{0, 0.0, false}};
    const double lambda = 1.0 / (1.0 + std::max(0.0, theta_delta * onesided_bound));
    const Vec y0 = initial_guess && initial_guess->size() == c.size() ? *initial_guess : c;
    if (c.size() == 1) {
        return solve_scalar(c, theta_delta, drift_map, lambda, tolerance, max_iters, y0[0]);
    }
    return solve_anderson(c, theta_delta, drift_map, lambda, tolerance, max_iters, y0);
}

std::pair<Vec, StepDiagnostics> theta_step(const Problem& problem, const SchemeConfig& config,
                                           const Vec& y, const Vec& dW) {
    const double delta = config.stepsize;
    const double theta = config.theta;
    if (theta == 0.0) {
        Vec next = y + delta * effective_drift(problem, config, y) + problem.diffusion(y) * dW;
        return {std::move(next), StepDiagnostics{0, 0.0, false}};
    }
    Vec c = y + problem.diffusion(y) * dW;
    if (theta < 1.0) c += (1.0 - theta) * delta * effective_drift(problem, config, y);
    auto f = [&](const Vec& state) { return effective_drift(problem, config, state); };
    return solve_implicit(c, theta * delta, f, effective_onesided_bound(problem, config),
                          config.solver_tolerance, config.solver_max_iters, y);
}

Vec transform_z(const Problem& problem, const SchemeConfig& config, const Vec& y) {
    if (config.theta == 0.0) return y;
    Vec z = y - config.theta * config.stepsize * effective_drift(problem, config, y);
    // quadratic lower bound inherited from the drift's growth condition
    assert(!y.allFinite() ||
           z.squaredNorm() >= (1.0 - 2.0 * config.theta * problem.growth_constant *
                                         config.stepsize) *
                                      y.squaredNorm() -
                                  2.0 * config.theta * problem.growth_constant * config.stepsize);
    return z;
}

}  // namespace thetaem
