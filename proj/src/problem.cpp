#include "thetaem/problem.hpp"

#include "thetaem/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace thetaem {

Problem builtin_example1(double x0) {
    Problem p;
    p.dim_state = 1;
    p.dim_noise = 1;
    p.initial_state = Vec::Constant(1, x0);
    p.drift = [](const Vec& x) {
        const double v = x[0];
        Vec out(1);
        out[0] = v + v * v - v * v * v - std::sqrt(std::abs(v));
        return out;
    };
    p.diffusion = [](const Vec& x) {
        Mat out(1, 1);
        out(0, 0) = x[0];
        return out;
    };
    p.growth_constant = 2.0;
    p.growth_exponent = 3.0;
    p.local_onesided_constant = [](double radius) { return 2.0 * radius + 1.0; };
    p.id = "example1";
    return p;
}

Problem builtin_linear(double a, double s, double x0) {
    Problem p;
    p.dim_state = 1;
    p.dim_noise = 1;
    p.initial_state = Vec::Constant(1, x0);
    p.drift = [a](const Vec& x) { return Vec(a * x); };
    p.diffusion = [s](const Vec& x) {
        Mat out(1, 1);
        out(0, 0) = s * x[0];
        return out;
    };
    p.growth_constant = std::max({std::abs(a), s * s, 1.0});
    p.growth_exponent = 1.0;
    p.local_onesided_constant = [a, s](double) { return std::max({a, s * s, 1.0}); };
    p.exact_solution = [a, s, x0](double t, const Vec& w) {
        return Vec(Vec::Constant(1, x0 * std::exp((a - 0.5 * s * s) * t + s * w[0])));
    };
    p.id = "linear:" + std::to_string(a) + "," + std::to_string(s) + "," + std::to_string(x0);
    return p;
}

Problem make_problem(const std::string& id) {
    if (id == "example1") return builtin_example1();
    if (id.rfind("example1:", 0) == 0) {
        return builtin_example1(std::stod(id.substr(9)));
    }
    if (id.rfind("linear:", 0) == 0) {
        const std::string args = id.substr(7);
        const auto c1 = args.find(',');
        const auto c2 = args.find(',', c1 == std::string::npos ? c1 : c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos) {
            throw std::invalid_argument("linear problem id must be linear:a,s,x0");
        }
        const double a = std::stod(args.substr(0, c1));
        const double s = std::stod(args.substr(c1 + 1, c2 - c1 - 1));
        const double x0 = std::stod(args.substr(c2 + 1));
        return builtin_linear(a, s, x0);
    }
    throw std::invalid_argument("unknown problem id: " + id);
}

AssumptionReport check_a1(const Problem& problem, const std::vector<Vec>& points,
                          double rel_tol) {
    if (points.empty()) throw std::invalid_argument("check_a1 needs at least one point");
    AssumptionReport report;
    const double L = problem.growth_constant;
    const double l = problem.growth_exponent;
    for (const Vec& x : points) {
        const Vec b = problem.drift(x);
        const Mat sigma = problem.diffusion(x);
        const double n2 = x.squaredNorm();
        const double inner = x.dot(b);
        const double diff = sigma.squaredNorm();
        const double growth = b.norm();
        const double quad_bound = L * (1.0 + n2);
        const double poly_bound = L * (1.0 + std::pow(x.norm(), l));
        report.worst_a1_inner = std::max(report.worst_a1_inner, inner / (1.0 + n2));
        report.worst_a1_diff = std::max(report.worst_a1_diff, diff / (1.0 + n2));
        report.worst_a1_growth = std::max(report.worst_a1_growth, growth / (1.0 + std::pow(x.norm(), l)));
        if (inner > quad_bound * (1.0 + rel_tol)) {
            report.violations.push_back({x, std::nullopt, "<x,b(x)> <= L(1+|x|^2)", inner, quad_bound});
        }
        if (diff > quad_bound * (1.0 + rel_tol)) {
            report.violations.push_back({x, std::nullopt, "||sigma(x)||^2 <= L(1+|x|^2)", diff, quad_bound});
        }
        if (growth > poly_bound * (1.0 + rel_tol)) {
            report.violations.push_back({x, std::nullopt, "|b(x)| <= L(1+|x|^l)", growth, poly_bound});
        }
        ++report.samples_checked;
    }
    return report;
}

AssumptionReport check_a2(const Problem& problem, double radius,
                          const std::vector<std::pair<Vec, Vec>>& pairs, double rel_tol) {
    if (pairs.empty()) throw std::invalid_argument("check_a2 needs at least one pair");
    if (radius < 1.0) throw std::invalid_argument("check_a2 radius must be >= 1");
    AssumptionReport report;
    report.worst_a2_drift = -std::numeric_limits<double>::infinity();
    const double m_r = problem.local_onesided_constant(radius);
    const double ball = radius * (1.0 + 1e-12);
    for (const auto& [x, y] : pairs) {
        if (x.norm() > ball || y.norm() > ball) {
            throw std::invalid_argument("check_a2 pair outside the R-ball");
        }
        const double dist2 = (x - y).squaredNorm();
        if (dist2 == 0.0) throw std::invalid_argument("check_a2 pair members must be distinct");
        const double drift_ratio = (x - y).dot(problem.drift(x) - problem.drift(y)) / dist2;
        const double diff_ratio = (problem.diffusion(x) - problem.diffusion(y)).squaredNorm() / dist2;
        report.worst_a2_drift = std::max(report.worst_a2_drift, drift_ratio);
        report.worst_a2_diff = std::max(report.worst_a2_diff, diff_ratio);
        if (drift_ratio > m_r * (1.0 + rel_tol)) {
            report.violations.push_back({x, y, "<x-y,b(x)-b(y)> <= M_R|x-y|^2", drift_ratio, m_r});
        }
        if (diff_ratio > m_r * (1.0 + rel_tol)) {
            report.violations.push_back({x, y, "||sigma(x)-sigma(y)||^2 <= M_R|x-y|^2", diff_ratio, m_r});
        }
        ++report.samples_checked;
    }
    return report;
}

std::vector<Vec> sample_states(std::uint64_t seed, std::size_t count, int dim, double halfwidth) {
    std::vector<Vec> out;
    out.reserve(count);
    std::uint64_t ctr = 0;
    for (std::size_t i = 0; i < count; ++i) {
        Vec x(dim);
        for (int j = 0; j < dim; ++j) {
            const double u = rng::uniform01(rng::philox2x64(seed, rng::kPlaneStates, ctr++).x0);
            x[j] = halfwidth * (2.0 * u - 1.0);
        }
        out.push_back(std::move(x));
    }
    return out;
}

namespace {

Vec ball_point(std::uint64_t seed, std::uint64_t plane, std::uint64_t& ctr, int dim,
               double radius) {
    Vec z(dim);
    for (int j = 0; j < dim; ++j) {
        z[j] = rng::standard_normal(seed, plane, ctr++);
    }
    double norm = z.norm();
    if (norm < 1e-300) {
        z[0] = 1.0;
        norm = 1.0;
    }
    const double u = rng::uniform01(rng::philox2x64(seed, plane, ctr++).x0);
    return Vec(z * (radius * std::pow(u, 1.0 / dim) / norm));
}

}  // namespace

std::vector<Vec> sample_ball_states(std::uint64_t seed, std::size_t count, int dim,
                                    double radius) {
    std::vector<Vec> out;
    out.reserve(count);
    std::uint64_t ctr = 0;
    for (std::size_t i = 0; i < count; ++i) {
        out.push_back(ball_point(seed, rng::kPlaneStates, ctr, dim, radius));
    }
    return out;
}

std::vector<std::pair<Vec, Vec>> sample_pairs_in_ball(std::uint64_t seed, std::size_t count,
                                                      int dim, double radius) {
    std::vector<std::pair<Vec, Vec>> out;
    out.reserve(count);
    std::uint64_t ctr = 0;
    while (out.size() < count) {
        Vec x = ball_point(seed, rng::kPlanePairs, ctr, dim, radius);
        Vec y = ball_point(seed, rng::kPlanePairs, ctr, dim, radius);
        if ((x - y).squaredNorm() == 0.0) continue;
        out.emplace_back(std::move(x), std::move(y));
    }
    return out;
}

}  // namespace thetaem
