#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "thetaem/simulate.hpp"

#include <cmath>
#include <sstream>

using namespace thetaem;

namespace {

Vec scalar(double v) { return Vec::Constant(1, v); }

}  // namespace

TEST_CASE("degenerate problem: the state never moves") {
    const Problem still = builtin_linear(0.0, 0.0, 2.0);
    SchemeConfig config;
    config.theta = 1.0;
    config.stepsize = 0.125;
    config.truncated = false;
    const BrownianGrid grid = sample_grid(3, 1.0, 0.125, 1);
    const PathResult path = simulate_path(still, config, grid);
    REQUIRE(path.states.size() == 9);
    for (const Vec& y : path.states) CHECK(y[0] == 2.0);
    CHECK(path.sup_norm == 2.0);
    CHECK_FALSE(path.exit_index.has_value());
}

TEST_CASE("backward Euler on the deterministic linear problem") {
    const double a = -1.0, delta = 0.1;
    const Problem ode = builtin_linear(a, 0.0, 1.0);
    SchemeConfig config;
    config.theta = 1.0;
    config.stepsize = delta;
    config.truncated = false;
    BrownianGrid grid = sample_grid(1, 1.0, delta, 1);
    std::fill(grid.increments.begin(), grid.increments.end(), 0.0);
    const PathResult path = simulate_path(ode, config, grid);
    for (std::size_t k = 0; k < path.states.size(); ++k) {
        const double expected = std::pow(1.0 / (1.0 - a * delta), static_cast<double>(k));
        CHECK(path.states[k][0] == doctest::Approx(expected).epsilon(1e-10));
    }
}

TEST_CASE("implicit path on the superlinear problem stays bounded") {
    const Problem p = builtin_example1();
    SchemeConfig config;
    config.theta = 1.0;
    config.stepsize = std::pow(2.0, -10.0);
    config.truncated = true;
    config.truncation_radius = 8.0;
    const BrownianGrid grid = sample_grid(42, 1.0, config.stepsize, 1);
    const PathResult path = simulate_path(p, config, grid);
    CHECK(std::isfinite(path.sup_norm));
    CHECK_FALSE(path.exit_index.has_value());
    CHECK(path.diagnostics.max_residual <= config.solver_tolerance);

    // self-consistency at a tighter solver tolerance
    SchemeConfig tight = config;
    tight.solver_tolerance = 1e-14;
    const PathResult path2 = simulate_path(p, tight, grid);
    for (std::size_t k = 0; k < path.states.size(); ++k) {
        CHECK(std::abs(path.states[k][0] - path2.states[k][0]) <= 1e-10);
    }
}

TEST_CASE("identical inputs give identical paths") {
    const Problem p = builtin_example1();
    SchemeConfig config;
    config.theta = 0.5;
    config.stepsize = 1.0 / 64.0;
    config.truncated = true;
    config.truncation_radius = 8.0;
    const BrownianGrid grid = sample_grid(7, 1.0, config.stepsize, 1);
    const PathResult a = simulate_path(p, config, grid);
    const PathResult b = simulate_path(p, config, grid);
    REQUIRE(a.states.size() == b.states.size());
    for (std::size_t k = 0; k < a.states.size(); ++k) CHECK(a.states[k][0] == b.states[k][0]);
}

TEST_CASE("grid and config must agree") {
    const Problem p = builtin_example1();
    SchemeConfig config;
    config.theta = 0.0;
    config.stepsize = 0.25;
    const BrownianGrid grid = sample_grid(1, 1.0, 0.125, 1);
    CHECK_THROWS_AS((void)simulate_path(p, config, grid), ConfigError);
}

TEST_CASE("continuous interpolant") {
    const Problem p = builtin_example1();
    SchemeConfig config;
    config.theta = 1.0;
    config.stepsize = 0.125;
    config.truncated = true;
    config.truncation_radius = 8.0;
    const BrownianGrid fine = sample_grid(11, 1.0, 0.125 / 16.0, 1);
    const BrownianGrid grid = coarsen(fine, 16);
    const PathResult path = simulate_path(p, config, grid);

    // grid points reproduce the discrete states
    for (std::size_t k = 0; k < path.states.size(); ++k) {
        const Vec y = interpolate_continuous(p, config, path, fine, k * 0.125);
        CHECK(std::abs(y[0] - path.states[k][0]) <= 10.0 * config.solver_tolerance);
    }

    // interior fine-grid times stay between the surrounding magnitudes scale
    const Vec mid = interpolate_continuous(p, config, path, fine, 0.125 + 3.0 * 0.125 / 16.0);
    CHECK(std::isfinite(mid[0]));

    // off-grid times are rejected
    CHECK_THROWS_AS((void)interpolate_continuous(p, config, path, fine, 0.1234567), ConfigError);
    CHECK_THROWS_AS((void)interpolate_continuous(p, config, path, fine, 1.5), ConfigError);

    // explicit scheme: the interpolant is the closed-form expression
    SchemeConfig explicit_config = config;
    explicit_config.theta = 0.0;
    const PathResult epath = simulate_path(p, explicit_config, grid);
    const std::size_t k = 2;
    const double t = k * 0.125 + 5.0 * 0.125 / 16.0;
    const Vec direct = interpolate_continuous(p, explicit_config, epath, fine, t);
    Vec dw = Vec::Zero(1);
    for (std::size_t j = k * 16; j < k * 16 + 5; ++j) dw += fine.increment(j);
    const Vec y_k = epath.states[k];
    const Vec expected = y_k +
                         effective_drift(p, explicit_config, y_k) * (t - k * 0.125) +
                         p.diffusion(y_k) * dw;
    CHECK(direct[0] == doctest::Approx(expected[0]).epsilon(1e-14));
}

TEST_CASE("piecewise-constant interpolant") {
    PathResult path;
    path.stepsize = 0.25;
    path.horizon = 1.0;
    for (double v : {1.0, 2.0, 3.0, 4.0, 5.0}) path.states.push_back(scalar(v));
    CHECK(piecewise_constant(path, 0.0)[0] == 1.0);
    CHECK(piecewise_constant(path, 0.2499999)[0] == 1.0);
    CHECK(piecewise_constant(path, 0.25)[0] == 2.0);
    CHECK(piecewise_constant(path, 1.0)[0] == 5.0);  // horizon closes the last interval
    CHECK_THROWS_AS((void)piecewise_constant(path, -0.1), ConfigError);
    CHECK_THROWS_AS((void)piecewise_constant(path, 1.1), ConfigError);
}

TEST_CASE("first exit") {
    PathResult path;
    path.stepsize = 1.0;
    path.horizon = 2.0;
    for (double v : {0.0, 3.0, 1.0}) path.states.push_back(scalar(v));
    CHECK(first_exit(path, 2.0) == 1);
    CHECK_FALSE(first_exit(path, 4.0).has_value());
    PathResult at_start;
    at_start.stepsize = 1.0;
    at_start.horizon = 1.0;
    at_start.states.push_back(scalar(1.0));
    at_start.states.push_back(scalar(0.0));
    CHECK(first_exit(at_start, 0.5) == 0);

    // enlarging the radius never decreases the exit index
    std::optional<std::size_t> prev = first_exit(path, 0.5);
    for (double radius : {1.0, 2.0, 2.5, 3.0, 10.0}) {
        const auto cur = first_exit(path, radius);
        const std::size_t a = prev.value_or(path.states.size());
        const std::size_t b = cur.value_or(path.states.size());
        CHECK(b >= a);
        prev = cur;
    }
}

TEST_CASE("exit metadata is tracked while simulation continues") {
    // strong outward drift pushes the state past the radius quickly
    Problem runaway;
    runaway.dim_state = 1;
    runaway.dim_noise = 1;
    runaway.initial_state = scalar(1.0);
    runaway.drift = [](const Vec& x) { return Vec(30.0 * x); };
    runaway.diffusion = [](const Vec&) { return Mat(Mat::Zero(1, 1)); };
    runaway.growth_constant = 30.0;
    runaway.growth_exponent = 1.0;
    runaway.local_onesided_constant = [](double) { return 30.0; };
    runaway.id = "runaway";

    SchemeConfig config;
    config.theta = 0.0;
    config.stepsize = 0.125;
    config.truncated = true;
    config.truncation_radius = 2.0;
    const BrownianGrid grid = sample_grid(5, 1.0, 0.125, 1);
    const PathResult path = simulate_path(runaway, config, grid);
    REQUIRE(path.exit_index.has_value());
    CHECK(*path.exit_index >= 1);
    CHECK(path.states.size() == grid.steps() + 1);  // no absorption
    // truncation freezes the drift outside the support, so late states are finite
    CHECK(std::isfinite(path.states.back()[0]));
}

TEST_CASE("explicit divergence is recorded, not thrown") {
    const Problem p = builtin_example1(3.0);
    SchemeConfig config;
    config.theta = 0.0;
    config.stepsize = 0.0625;
    config.truncated = false;
    // hand-crafted shocks that kick the explicit scheme into the unstable regime
    BrownianGrid grid = sample_grid(1, 1.0, 0.0625, 1);
    std::fill(grid.increments.begin(), grid.increments.end(), 0.0);
    grid.increments[0] = 2.0;
    const PathResult path = simulate_path(p, config, grid);
    CHECK(path.diagnostics.diverged_at.has_value());
    CHECK(std::isinf(path.sup_norm));
    CHECK(path.states.size() == grid.steps() + 1);
}

TEST_CASE("path CSV layout") {
    PathResult path;
    path.stepsize = 0.5;
    path.horizon = 1.0;
    path.states.push_back(scalar(1.0));
    path.states.push_back(scalar(-2.0));
    path.states.push_back(scalar(0.25));
    std::ostringstream out;
    write_path_csv(out, path);
    CHECK(out.str() == "t,y_1\n0,1\n0.5,-2\n1,0.25\n");
}
