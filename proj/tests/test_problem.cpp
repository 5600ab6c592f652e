#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "thetaem/problem.hpp"
#include "thetaem/rng.hpp"

#include <cmath>

using namespace thetaem;

namespace {

Vec scalar(double v) { return Vec::Constant(1, v); }

Problem zero_problem() {
    Problem p;
    p.dim_state = 1;
    p.dim_noise = 1;
    p.initial_state = scalar(0.0);
    p.drift = [](const Vec& x) { return Vec(Vec::Zero(x.size())); };
    p.diffusion = [](const Vec&) { return Mat(Mat::Zero(1, 1)); };
    p.growth_constant = 1.0;
    p.growth_exponent = 1.0;
    p.local_onesided_constant = [](double) { return 1.0; };
    p.id = "zero";
    return p;
}

}  // namespace

TEST_CASE("example1 drift values") {
    const Problem p = builtin_example1();
    CHECK(p.drift(scalar(0.0))[0] == 0.0);
    CHECK(p.drift(scalar(1.0))[0] == 0.0);
    CHECK(p.drift(scalar(4.0))[0] == doctest::Approx(-46.0).epsilon(1e-14));
    CHECK(p.diffusion(scalar(2.5))(0, 0) == 2.5);
    CHECK(p.local_onesided_constant(3.0) == 7.0);
    CHECK(p.growth_constant == 2.0);
    CHECK(p.growth_exponent == 3.0);
    CHECK_FALSE(p.has_exact());
}

TEST_CASE("example1 coefficients are pure") {
    const Problem p = builtin_example1();
    const Vec x = scalar(0.37);
    CHECK(p.drift(x)[0] == p.drift(x)[0]);
    CHECK(p.drift(x).isApprox(p.drift(x), 0.0));
    CHECK(p.diffusion(x).isApprox(p.diffusion(x), 0.0));
}

TEST_CASE("linear problem closed form") {
    const Problem still = builtin_linear(0.0, 0.0, 2.5);
    CHECK(still.exact_solution(0.0, scalar(0.0))[0] == 2.5);
    CHECK(still.exact_solution(3.0, scalar(0.4))[0] == 2.5);

    const Problem ode = builtin_linear(1.0, 0.0, 1.0);
    CHECK(ode.exact_solution(1.0, scalar(0.0))[0] ==
          doctest::Approx(std::exp(1.0)).epsilon(1e-14));
    CHECK(ode.exact_solution(0.0, scalar(0.7))[0] == 1.0);
}

TEST_CASE("linear closed form has the right mean at t = 1") {
    const double a = 0.5, s = 0.5, x0 = 1.0;
    const Problem p = builtin_linear(a, s, x0);
    const std::size_t n = 100000;
    double sum = 0.0, sumsq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = rng::standard_normal(2024, 17, i);
        const double x = p.exact_solution(1.0, scalar(w))[0];
        sum += x;
        sumsq += x * x;
    }
    const double mean = sum / n;
    const double stderr_mean = std::sqrt((sumsq / n - mean * mean) / n);
    CHECK(std::abs(mean - x0 * std::exp(a)) <= 3.0 * stderr_mean);
}

TEST_CASE("registry ids") {
    CHECK(make_problem("example1").initial_state[0] == 1.0);
    CHECK(make_problem("example1:3").initial_state[0] == 3.0);
    const Problem lin = make_problem("linear:1,0,2");
    CHECK(lin.drift(scalar(3.0))[0] == 3.0);
    CHECK(lin.initial_state[0] == 2.0);
    CHECK_THROWS_AS((void)make_problem("nope"), std::invalid_argument);
    CHECK_THROWS_AS((void)make_problem("linear:1"), std::invalid_argument);
}

TEST_CASE("growth audit passes for example1 on [-10,10]") {
    const Problem p = builtin_example1();
    std::vector<Vec> grid;
    const int n = 10000;
    grid.reserve(n);
    for (int i = 0; i < n; ++i) grid.push_back(scalar(-10.0 + 20.0 * i / (n - 1)));
    const AssumptionReport report = check_a1(p, grid);
    CHECK(report.passed());
    CHECK(report.samples_checked == n);
    CHECK(report.worst_a1_inner <= 2.0);
    CHECK(report.worst_a1_growth <= 2.0);
}

TEST_CASE("growth audit on degenerate and linear problems") {
    const std::vector<Vec> pts = sample_states(7, 100, 1, 5.0);
    const AssumptionReport zero = check_a1(zero_problem(), pts);
    CHECK(zero.passed());
    CHECK(zero.worst_a1_inner == 0.0);
    CHECK(zero.worst_a1_diff == 0.0);
    CHECK(zero.worst_a1_growth == 0.0);

    const AssumptionReport lin = check_a1(builtin_linear(1.0, 1.0, 1.0), pts);
    CHECK(lin.passed());
    CHECK(lin.worst_a1_inner < 1.0);
}

TEST_CASE("one-sided audit for example1 in the 2-ball") {
    const Problem p = builtin_example1();
    const auto pairs = sample_pairs_in_ball(11, 10000, 1, 2.0);
    const AssumptionReport report = check_a2(p, 2.0, pairs);
    CHECK(report.passed());
    CHECK(report.worst_a2_ratio() <= 5.0);
    CHECK(report.samples_checked == 10000);
}

TEST_CASE("one-sided ratio matches the directional derivative") {
    const Problem p = builtin_example1();
    const double x = 0.7, eps = 1e-6;
    const std::vector<std::pair<Vec, Vec>> pair = {{scalar(x + eps), scalar(x)}};
    const AssumptionReport report = check_a2(p, 2.0, pair);
    const double derivative = 1.0 + 2.0 * x - 3.0 * x * x - 0.5 / std::sqrt(x);
    CHECK(report.worst_a2_drift == doctest::Approx(derivative).epsilon(1e-4));
}

TEST_CASE("one-sided constant can be negative and still passes") {
    const Problem p = builtin_linear(-5.0, 0.0, 1.0);
    const auto pairs = sample_pairs_in_ball(3, 1000, 1, 2.0);
    const AssumptionReport report = check_a2(p, 2.0, pairs);
    CHECK(report.passed());
    CHECK(report.worst_a2_drift == doctest::Approx(-5.0).epsilon(1e-12));
}

TEST_CASE("one-sided audit rejects pairs outside the ball") {
    const Problem p = builtin_example1();
    const std::vector<std::pair<Vec, Vec>> bad = {{scalar(3.0), scalar(0.5)}};
    CHECK_THROWS_AS((void)check_a2(p, 2.0, bad), std::invalid_argument);
    const std::vector<std::pair<Vec, Vec>> same = {{scalar(0.5), scalar(0.5)}};
    CHECK_THROWS_AS((void)check_a2(p, 2.0, same), std::invalid_argument);
}

TEST_CASE("audits are deterministic in their inputs") {
    const Problem p = builtin_example1();
    const auto pts = sample_states(5, 500, 1, 10.0);
    const AssumptionReport a = check_a1(p, pts);
    const AssumptionReport b = check_a1(p, pts);
    CHECK(a.worst_a1_inner == b.worst_a1_inner);
    CHECK(a.worst_a1_growth == b.worst_a1_growth);
    CHECK(a.violations.size() == b.violations.size());
}
