#include "thetaem/truncation.hpp"

#include "thetaem/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace thetaem {

namespace {

inline double bump(double s) { return std::exp(-1.0 / s); }  // s > 0

}  // namespace

double cutoff_profile(double s) {
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    const double a = bump(s);
    const double b = bump(1.0 - s);
    return a / (a + b);
}

double cutoff_profile_derivative(double s) {
    if (s <= 0.0 || s >= 1.0) return 0.0;
    const double a = bump(s);
    const double b = bump(1.0 - s);
    const double sum = a + b;
    return a * b * (1.0 / (s * s) + 1.0 / ((1.0 - s) * (1.0 - s))) / (sum * sum);
}

Cutoff make_cutoff(double radius) {
    if (!(radius >= 2.0)) throw std::invalid_argument("cutoff radius must be >= 2");
    return Cutoff{radius, kCutoffLipschitz};
}

double cutoff_value(const Cutoff& cutoff, const Vec& x) {
    const double s = cutoff.radius - x.norm();
    if (s >= 1.0) return 1.0;
    if (s <= 0.0) return 0.0;
    return cutoff_profile(s);
}

Vec truncated_drift(const Problem& problem, const Cutoff& cutoff, const Vec& x) {
    const double zeta = cutoff_value(cutoff, x);
    if (zeta == 1.0) return problem.drift(x);
    if (zeta == 0.0) return Vec::Zero(x.size());
    return Vec(zeta * problem.drift(x));
}

double TruncationSchedule::radius_at(double delta) const {
    if (!(delta > 0.0) || delta > delta1) {
        std::ostringstream msg;
        msg << "schedule " << id << " is defined on (0, " << delta1 << "], got delta = " << delta;
        throw ScheduleError(msg.str());
    }
    return g(delta);
}

TruncationSchedule log_schedule(double c) {
    if (!(c > 0.0)) throw std::invalid_argument("log schedule coefficient must be positive");
    TruncationSchedule s;
    s.delta1 = std::exp(-2.0 / c);
    s.g = [c](double delta) { return -c * std::log(delta); };
    s.m_of_g = [](double radius) { return radius; };
    std::ostringstream id;
    id << "log:" << c;
    s.id = id.str();
    return s;
}

TruncationSchedule remark22_schedule() {
    TruncationSchedule s = log_schedule(1.0 / 16.0);
    s.id = "remark22";
    return s;
}

TruncationSchedule default_schedule(const Problem& problem) {
    if (!problem.local_onesided_constant) {
        throw std::invalid_argument("problem has no one-sided constant map");
    }
    TruncationSchedule s = remark22_schedule();
    s.m_of_g = problem.local_onesided_constant;
    s.id = "default";
    const ScheduleReport report = validate_schedule(s, problem, default_validation_grid(s));
    if (!report.passed) {
        throw ScheduleError("default schedule inadmissible for problem " + problem.id +
                            " (" + report.detail + "); provide a custom schedule");
    }
    return s;
}

std::vector<double> default_validation_grid(const TruncationSchedule& schedule, int points) {
    std::vector<double> grid(points);
    const double log_top = std::log(schedule.delta1);
    for (int i = 0; i < points; ++i) {
        grid[i] = std::exp(log_top - 40.0 * i / (points - 1));
    }
    return grid;
}

ScheduleReport validate_schedule(const TruncationSchedule& schedule, const Problem& problem,
                                 const std::vector<double>& delta_grid) {
    if (delta_grid.empty()) throw std::invalid_argument("validation grid is empty");
    for (double d : delta_grid) {
        if (!(d > 0.0) || d > schedule.delta1 * (1.0 + 1e-12)) {
            throw std::invalid_argument("validation grid must lie in (0, delta1]");
        }
    }
    std::vector<double> grid = delta_grid;
    std::sort(grid.begin(), grid.end(), std::greater<>());

    ScheduleReport report;
    report.min_radius_ok = schedule.g(schedule.delta1) >= 2.0;
    report.strictly_decreasing = true;
    report.onesided_bound_ok = true;
    report.growth_bound_ok = true;

    auto flag = [&](double delta, const char* what) {
        if (!report.first_violation_delta) {
            report.first_violation_delta = delta;
            report.detail = what;
        }
    };
    if (!report.min_radius_ok) flag(schedule.delta1, "g(delta1) < 2");

    const double l = problem.growth_exponent;
    double prev_radius = -std::numeric_limits<double>::infinity();
    double prev_delta = std::numeric_limits<double>::infinity();
    for (double delta : grid) {
        const double radius = schedule.g(delta);
        if (delta < prev_delta && !(radius > prev_radius)) {
            report.strictly_decreasing = false;
            flag(delta, "g not strictly decreasing");
        }
        const double m = schedule.m_of_g(radius);
        if (!(m * std::exp(m) * std::pow(delta, 0.25) <= 1.0)) {
            report.onesided_bound_ok = false;
            flag(delta, "M e^M delta^{1/4} > 1");
        }
        if (!(std::pow(radius, l) * delta <= 1.0)) {
            report.growth_bound_ok = false;
            flag(delta, "g^l delta > 1");
        }
        prev_radius = radius;
        prev_delta = delta;
    }
    report.passed = report.min_radius_ok && report.strictly_decreasing &&
                    report.onesided_bound_ok && report.growth_bound_ok;
    if (report.passed) report.detail = "ok";
    return report;
}

double truncated_onesided_constant(const Problem& problem, double radius) {
    if (!(radius >= 1.0)) throw std::invalid_argument("radius must be >= 1");
    const double m_r = problem.local_onesided_constant(radius);
    return m_r + kCutoffLipschitz * problem.growth_constant *
                     (1.0 + std::pow(radius, problem.growth_exponent));
}

double global_onesided_constant(const TruncationSchedule& schedule, const Problem& problem,
                                double delta) {
    return truncated_onesided_constant(problem, schedule.radius_at(delta));
}

}  // namespace thetaem
