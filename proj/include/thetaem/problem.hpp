#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace thetaem {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// An autonomous SDE  dX = b(X) dt + sigma(X) dW  together with the constants
/// of its growth and local one-sided Lipschitz conditions:
///
///   <x, b(x)> v ||sigma(x)||^2 <= L (1 + |x|^2),   |b(x)| <= L (1 + |x|^l)
///   <x-y, b(x)-b(y)> v ||sigma(x)-sigma(y)||^2 <= M_R |x-y|^2  on |x|,|y| <= R
///
/// Coefficient callables must be pure: deterministic, total on R^n, and free
/// of hidden state. Instances are immutable after construction and safe for
/// concurrent shared reads.
struct Problem {
    int dim_state = 1;
    int dim_noise = 1;
    Vec initial_state;
    std::function<Vec(const Vec&)> drift;
    std::function<Mat(const Vec&)> diffusion;
    double growth_constant = 1.0;  // L > 0
    double growth_exponent = 1.0;  // l >= 1
    std::function<double(double)> local_onesided_constant;  // R -> M_R, nondecreasing, >= 1

    /// Closed-form solution map (t, W(t)) -> X(t), when one exists.
    std::function<Vec(double, const Vec&)> exact_solution;
    bool has_exact() const { return static_cast<bool>(exact_solution); }

    std::string id;
};

/// Scalar SDE with drift b(x) = x + |x|^2 - x^3 - |x|^{1/2} and sigma(x) = x.
/// The drift is superlinear and not locally Lipschitz at the origin.
/// Declared constants: L = 2, l = 3, M_R = 2R + 1.
Problem builtin_example1(double x0 = 1.0);

/// Scalar linear SDE dX = aX dt + sX dW with the closed form
/// X(t) = x0 exp((a - s^2/2) t + s W(t)). L = max(|a|, s^2, 1), l = 1,
/// M_R = max(a, s^2, 1).
Problem builtin_linear(double a, double s, double x0);

/// Registry lookup: "example1", "example1:<x0>", "linear:a,s,x0".
Problem make_problem(const std::string& id);

struct AssumptionViolation {
    Vec x;
    std::optional<Vec> y;  // set for pairwise (one-sided) checks
    std::string inequality;
    double lhs = 0.0;
    double rhs = 0.0;
};

/// Sampled audit of the declared constants. An empty violation list
/// certifies the constants on the sampled set only; no global claim.
struct AssumptionReport {
    std::size_t samples_checked = 0;
    double worst_a1_inner = 0.0;   // max <x,b(x)> / (1+|x|^2)
    double worst_a1_diff = 0.0;    // max ||sigma(x)||^2 / (1+|x|^2)
    double worst_a1_growth = 0.0;  // max |b(x)| / (1+|x|^l)
    double worst_a2_drift = 0.0;   // max <x-y,b(x)-b(y)> / |x-y|^2
    double worst_a2_diff = 0.0;    // max ||sigma(x)-sigma(y)||^2 / |x-y|^2
    std::vector<AssumptionViolation> violations;

    bool passed() const { return violations.empty(); }
    double worst_a2_ratio() const { return std::max(worst_a2_drift, worst_a2_diff); }
};

/// Evaluate the three growth inequalities at every point. Points violating a
/// bound by more than rel_tol are recorded; a failed check is report content,
/// not an error.
AssumptionReport check_a1(const Problem& problem, const std::vector<Vec>& points,
                          double rel_tol = 1e-9);

/// Evaluate the pairwise one-sided inequalities against the declared M_R.
/// All pair members must lie in the R-ball and differ; anything else is a
/// precondition violation.
AssumptionReport check_a2(const Problem& problem, double radius,
                          const std::vector<std::pair<Vec, Vec>>& pairs,
                          double rel_tol = 1e-9);

/// Deterministic samplers used by the audits and the CLI.
std::vector<Vec> sample_states(std::uint64_t seed, std::size_t count, int dim,
                               double halfwidth);
std::vector<Vec> sample_ball_states(std::uint64_t seed, std::size_t count, int dim,
                                    double radius);
std::vector<std::pair<Vec, Vec>> sample_pairs_in_ball(std::uint64_t seed, std::size_t count,
                                                      int dim, double radius);

}  // namespace thetaem
