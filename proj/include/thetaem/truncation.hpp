#pragma once

#include "thetaem/problem.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace thetaem {

/// C-infinity transition profile: 0 for s <= 0, 1 for s >= 1, strictly
/// increasing in between, symmetric about s = 1/2 (so profile(1/2) = 1/2).
double cutoff_profile(double s);
double cutoff_profile_derivative(double s);

/// sup |profile'| = 2, attained at the midpoint. Any radial cutoff built from
/// the profile with unit transition width is Lipschitz with this constant.
inline constexpr double kCutoffLipschitz = 2.0;

/// Radial bump: 1 on |x| <= radius-1, 0 on |x| > radius, smooth in between.
struct Cutoff {
    double radius = 2.0;               // >= 2
    double lipschitz_constant = kCutoffLipschitz;
};

Cutoff make_cutoff(double radius);

/// Value in [0,1]; exactly 1 inside the unit-width inner ball and exactly 0
/// outside the support.
double cutoff_value(const Cutoff& cutoff, const Vec& x);

/// zeta(x) * b(x). Returns b(x) bit-for-bit on the inner ball and an exact
/// zero vector outside the support.
Vec truncated_drift(const Problem& problem, const Cutoff& cutoff, const Vec& x);

/// Stepsize-indexed truncation radius g on (0, delta1], strictly decreasing,
/// g(delta1) >= 2, g -> infinity as delta -> 0, with the one-sided constant
/// map used by its admissibility checks:
///
///   M_{g(d)} e^{M_{g(d)}} d^{1/4} <= 1   and   g(d)^l d <= 1.
struct TruncationSchedule {
    double delta1 = 1.0;
    std::function<double(double)> g;
    std::function<double(double)> m_of_g;  // R -> constant used in the checks
    std::string id;

    /// g(delta); rejects stepsizes outside (0, delta1].
    double radius_at(double delta) const;
};

/// g(delta) = c * ln(1/delta) with delta1 = exp(-2/c) so that g(delta1) = 2.
/// The check constant is the radius itself.
TruncationSchedule log_schedule(double c);

/// The stock logarithmic schedule: g(delta) = ln(1/delta)/16, delta1 = e^-32.
TruncationSchedule remark22_schedule();

/// The stock schedule rebound to the problem's own M_R. Throws ScheduleError
/// when the combination fails validation on the default grid (e.g. M_R grows
/// superlinearly), prompting a custom schedule.
TruncationSchedule default_schedule(const Problem& problem);

struct ScheduleReport {
    bool passed = false;
    bool min_radius_ok = false;          // g(delta1) >= 2
    bool strictly_decreasing = false;    // between consecutive grid stepsizes
    bool onesided_bound_ok = false;      // M e^M delta^{1/4} <= 1 on the grid
    bool growth_bound_ok = false;        // g^l delta <= 1 on the grid
    std::optional<double> first_violation_delta;
    std::string detail;
};

/// Check all admissibility conditions at every grid stepsize plus strict
/// monotonicity between consecutive points. The grid must be a finite subset
/// of (0, delta1].
ScheduleReport validate_schedule(const TruncationSchedule& schedule, const Problem& problem,
                                 const std::vector<double>& delta_grid);

/// Geometric grid of `points` stepsizes spanning [delta1 * e^-40, delta1].
std::vector<double> default_validation_grid(const TruncationSchedule& schedule,
                                            int points = 64);

/// Global one-sided Lipschitz constant of the truncated drift:
///   Mbar = M_R + C_zeta * L * (1 + R^l)  at R = radius.
double truncated_onesided_constant(const Problem& problem, double radius);

/// Same constant evaluated at R = g(delta), with M_R from the problem.
double global_onesided_constant(const TruncationSchedule& schedule, const Problem& problem,
                                double delta);

}  // namespace thetaem
