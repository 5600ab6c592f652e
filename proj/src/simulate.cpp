#include "thetaem/simulate.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace thetaem {

namespace {

bool stepsizes_match(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(a, b); }

}  // namespace

PathResult simulate_path(const Problem& problem, const SchemeConfig& config,
                         const BrownianGrid& grid) {
    if (!stepsizes_match(grid.stepsize, config.stepsize)) {
        throw ConfigError("grid stepsize does not match the configuration");
    }
    if (grid.dim_noise != problem.dim_noise) {
        throw ConfigError("grid noise dimension does not match the problem");
    }
    if (problem.initial_state.size() != problem.dim_state) {
        throw ConfigError("initial state dimension does not match the problem");
    }

    const std::size_t steps = grid.steps();
    PathResult path;
    path.stepsize = config.stepsize;
    path.horizon = grid.horizon;
    path.states.reserve(steps + 1);
    path.states.push_back(problem.initial_state);
    path.sup_norm = problem.initial_state.norm();

    const double exit_radius =
        config.truncated ? config.truncation_radius : std::numeric_limits<double>::infinity();
    if (path.sup_norm >= exit_radius) path.exit_index = 0;

    Vec y = problem.initial_state;
    for (std::size_t k = 0; k < steps; ++k) {
        Vec next;
        try {
            auto [state, diag] = theta_step(problem, config, y, grid.increment(k));
            next = std::move(state);
            path.diagnostics.max_residual = std::max(path.diagnostics.max_residual, diag.residual);
            path.diagnostics.max_iterations =
                std::max(path.diagnostics.max_iterations, diag.iterations);
            if (diag.fallback_used) ++path.diagnostics.fallback_steps;
        } catch (const SolverError& err) {
            throw SolverError(err.what(), err.diagnostics, k);
        }
        if (!next.allFinite()) {
            // Explicit runs can blow up; record the divergence and freeze the
            // remaining states instead of failing.
            path.diagnostics.diverged_at = k + 1;
            path.sup_norm = std::numeric_limits<double>::infinity();
            if (!path.exit_index) path.exit_index = k + 1;
            while (path.states.size() < steps + 1) path.states.push_back(next);
            return path;
        }
        y = next;
        path.states.push_back(y);
        const double norm = y.norm();
        path.sup_norm = std::max(path.sup_norm, norm);
        if (!path.exit_index && norm >= exit_radius) path.exit_index = path.states.size() - 1;
    }
    return path;
}

Vec interpolate_continuous(const Problem& problem, const SchemeConfig& config,
                           const PathResult& path, const BrownianGrid& fine, double t) {
    const double delta = path.stepsize;
    const double fine_delta = fine.stepsize;
    const double ratio_d = delta / fine_delta;
    const auto ratio = static_cast<std::size_t>(std::llround(ratio_d));
    if (ratio < 1 || std::abs(ratio_d - static_cast<double>(ratio)) > 1e-9) {
        throw ConfigError("fine grid stepsize does not refine the path stepsize");
    }
    const std::size_t last = path.states.size() - 1;
    if (t < 0.0 || t > delta * static_cast<double>(last) * (1.0 + 1e-12)) {
        throw ConfigError("time out of range");
    }
    const double idx_d = t / fine_delta;
    const auto idx = static_cast<std::size_t>(std::llround(idx_d));
    if (std::abs(idx_d - static_cast<double>(idx)) > 1e-9 * std::max(1.0, idx_d)) {
        throw ConfigError("time is not on the fine grid");
    }

    const std::size_t k = std::min(idx / ratio, last);
    if (idx == k * ratio) return path.states[k];

    const Vec& y_k = path.states[k];
    const Vec f_k = effective_drift(problem, config, y_k);
    Vec dw = Vec::Zero(fine.dim_noise);
    for (std::size_t j = k * ratio; j < idx; ++j) dw += fine.increment(j);

    const double t_k = static_cast<double>(k) * delta;
    Vec z = y_k - config.theta * delta * f_k + (t - t_k) * f_k + problem.diffusion(y_k) * dw;
    if (config.theta == 0.0) return z;
    auto f = [&](const Vec& state) { return effective_drift(problem, config, state); };
    return solve_implicit(z, config.theta * delta, f, effective_onesided_bound(problem, config),
                          config.solver_tolerance, config.solver_max_iters, y_k)
        .first;
}

Vec piecewise_constant(const PathResult& path, double t) {
    const std::size_t last = path.states.size() - 1;
    const double t_last = path.stepsize * static_cast<double>(last);
    if (t < 0.0 || t > std::max(t_last, path.horizon) * (1.0 + 1e-12)) {
        throw ConfigError("time out of range");
    }
    const auto k = static_cast<std::size_t>(std::floor(t / path.stepsize));
    return path.states[std::min(k, last)];
}

std::optional<std::size_t> first_exit(const PathResult& path, double radius) {
    if (!(radius > 0.0)) throw std::invalid_argument("exit radius must be positive");
    for (std::size_t k = 0; k < path.states.size(); ++k) {
        const double norm = path.states[k].norm();
        if (norm >= radius || !std::isfinite(norm)) return k;
    }
    return std::nullopt;
}

void write_path_csv(std::ostream& out, const PathResult& path) {
    out << "t";
    for (Eigen::Index i = 0; i < path.states.front().size(); ++i) out << ",y_" << (i + 1);
    out << "\n";
    char buf[32];
    for (std::size_t k = 0; k < path.states.size(); ++k) {
        std::snprintf(buf, sizeof(buf), "%.17g", static_cast<double>(k) * path.stepsize);
        out << buf;
        for (Eigen::Index i = 0; i < path.states[k].size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", path.states[k][i]);
            out << "," << buf;
        }
        out << "\n";
    }
}

}  // namespace thetaem
