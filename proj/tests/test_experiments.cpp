#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "thetaem/experiments.hpp"
#include "thetaem/rng.hpp"

#include <cmath>
#include <sstream>

using namespace thetaem;

namespace {

Problem additive_noise_problem() {
    Problem p;
    p.dim_state = 1;
    p.dim_noise = 1;
    p.initial_state = Vec::Constant(1, 1.0);
    p.drift = [](const Vec& x) { return Vec(Vec::Zero(x.size())); };
    p.diffusion = [](const Vec&) { return Mat(Mat::Constant(1, 1, 1.0)); };
    p.growth_constant = 1.0;
    p.growth_exponent = 1.0;
    p.local_onesided_constant = [](double) { return 1.0; };
    p.id = "additive";
    return p;
}

SchemeConfig pragmatic_config(double theta) {
    SchemeConfig config;
    config.theta = theta;
    config.truncated = true;
    config.truncation_radius = 8.0;
    return config;
}

}  // namespace

TEST_CASE("exact error vanishes for the constant problem") {
    const Problem still = builtin_linear(0.0, 0.0, 1.0);
    SchemeConfig config;
    config.theta = 1.0;
    config.truncated = false;
    const auto rows = strong_error_exact(still, config, {0.25, 0.125, 0.0625}, 8, 1);
    REQUIRE(rows.size() == 3);
    for (const auto& row : rows) {
        CHECK(row.strong_error_sq == 0.0);
        CHECK(row.std_error == 0.0);
    }
}

TEST_CASE("exact error reproduces the backward-Euler ODE rate") {
    const Problem ode = builtin_linear(-1.0, 0.0, 1.0);
    SchemeConfig config;
    config.theta = 1.0;
    config.truncated = false;
    const std::vector<double> deltas = {0.25, 0.125, 0.0625, 0.03125};
    const auto rows = strong_error_exact(ode, config, deltas, 2, 9);
    REQUIRE(rows.size() == 4);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        CHECK(rows[i].strong_error_sq < rows[i - 1].strong_error_sq);
        REQUIRE(rows[i].empirical_order.has_value());
        CHECK(*rows[i].empirical_order == doctest::Approx(2.0).epsilon(0.15));
    }
    // deterministic problem: zero Monte Carlo spread
    for (const auto& row : rows) CHECK(row.std_error <= 1e-18);
}

TEST_CASE("exact error on the multiplicative-noise problem decays at the classical rate") {
    const Problem gbm = builtin_linear(0.5, 0.5, 1.0);
    SchemeConfig config;
    config.theta = 1.0;
    config.truncated = false;
    const std::vector<double> deltas = {std::pow(2.0, -4), std::pow(2.0, -5),
                                        std::pow(2.0, -6), std::pow(2.0, -7)};
    const auto rows = strong_error_exact(gbm, config, deltas, 200, 42);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        CHECK(rows[i].strong_error_sq < rows[i - 1].strong_error_sq);
    }
    // least-squares slope of log error against log delta
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& row : rows) {
        const double x = std::log2(row.stepsize);
        const double y = std::log2(row.strong_error_sq);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = static_cast<double>(rows.size());
    const double slope = (sxy - sx * sy / n) / (sxx - sx * sx / n);
    CHECK(slope > 0.6);
    CHECK(slope < 1.4);
}

TEST_CASE("self error is exactly zero at the reference level") {
    const Problem p = builtin_example1();
    const auto rows = strong_error_self(p, pragmatic_config(1.0), {0.125}, 0, 4, 5);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].strong_error_sq == 0.0);
}

TEST_CASE("additive-noise self error telescopes to nothing") {
    const Problem p = additive_noise_problem();
    SchemeConfig config;
    config.theta = 0.0;
    config.truncated = false;
    const auto rows = strong_error_self(p, config, {0.25, 0.125}, 3, 16, 5);
    for (const auto& row : rows) CHECK(row.strong_error_sq <= 1e-12);
}

TEST_CASE("self error decays on the superlinear problem") {
    const Problem p = builtin_example1();
    const std::vector<double> deltas = {std::pow(2.0, -4), std::pow(2.0, -5), std::pow(2.0, -6)};
    const auto rows = strong_error_self(p, pragmatic_config(1.0), deltas, 2, 100, 42);
    REQUIRE(rows.size() == 3);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        CHECK(rows[i].strong_error_sq < rows[i - 1].strong_error_sq);
    }
}

TEST_CASE("coupling rejects non-dyadic stepsize lists") {
    const Problem p = builtin_example1();
    CHECK_THROWS_AS(
        (void)strong_error_self(p, pragmatic_config(1.0), {0.1, 0.03}, 2, 4, 1), ConfigError);
    CHECK_THROWS_AS(
        (void)strong_error_self(p, pragmatic_config(1.0), {0.125, 0.25}, 2, 4, 1), ConfigError);
}

TEST_CASE("sup moment of the frozen problem is exact") {
    const Problem still = builtin_linear(0.0, 0.0, 2.0);
    SchemeConfig config;
    config.theta = 1.0;
    config.truncated = false;
    const MomentRow row = sup_moment(still, config, 0.125, 4.0, 32, 3);
    CHECK(row.sup_moment == 16.0);
    CHECK(row.std_error == 0.0);
    CHECK_THROWS_AS((void)sup_moment(still, config, 0.125, 1.0, 8, 3), ConfigError);
}

TEST_CASE("sup moment respects the initial state floor") {
    const Problem p = builtin_example1();
    const MomentRow row = sup_moment(p, pragmatic_config(1.0), 0.0625, 4.0, 200, 7);
    CHECK(row.sup_moment >= 1.0 - 3.0 * row.std_error);  // sup includes k = 0
}

TEST_CASE("explicit untruncated moments blow up for a far-out start") {
    // At this stepsize the explicit scheme's stability basin ends near
    // sqrt(2/delta) = 2.8, well inside reach of the very first shock.
    const Problem p = builtin_example1(3.0);
    SchemeConfig config;
    config.theta = 0.0;
    config.truncated = false;
    bool exploded = false;
    for (std::uint64_t seed = 1; seed <= 5 && !exploded; ++seed) {
        const MomentRow row = sup_moment(p, config, 0.25, 4.0, 200, seed);
        if (row.sup_moment > 1e10) exploded = true;
    }
    CHECK(exploded);
}

TEST_CASE("exit probability endpoints") {
    // radius below the start: every path exits at k = 0
    const Problem far = builtin_example1(3.0);
    const auto at_start = exit_probability(far, pragmatic_config(1.0), 0.0625, 2.0, 4.0, 50, 1);
    CHECK(at_start.estimate == 1.0);

    // enormous radius: nothing exits
    const Problem p = builtin_example1();
    SchemeConfig config;
    config.theta = 1.0;
    config.truncated = false;
    const auto never = exit_probability(p, config, 0.0625, 1e6, 4.0, 50, 1);
    CHECK(never.estimate == 0.0);
    CHECK(never.chebyshev_bound >= 0.0);
}

TEST_CASE("exit estimate never beats its moment bound") {
    const Problem p = builtin_example1();
    for (double radius : {2.0, 4.0, 8.0}) {
        const auto result =
            exit_probability(p, pragmatic_config(1.0), 1.0 / 256.0, radius, 4.0, 200, 42);
        CHECK(result.estimate <= result.chebyshev_bound + 3.0 * result.std_error);
    }
}

TEST_CASE("empirical orders from error ratios") {
    std::vector<ConvergenceRow> rows;
    rows.push_back({0.4, 10, 4e-2, 0.0, std::nullopt});
    rows.push_back({0.1, 10, 1e-2, 0.0, std::nullopt});
    fill_empirical_orders(rows);
    CHECK_FALSE(rows[0].empirical_order.has_value());
    REQUIRE(rows[1].empirical_order.has_value());
    CHECK(*rows[1].empirical_order == doctest::Approx(1.0).epsilon(1e-12));

    std::vector<ConvergenceRow> flat;
    flat.push_back({0.4, 10, 3e-2, 0.0, std::nullopt});
    flat.push_back({0.2, 10, 3e-2, 0.0, std::nullopt});
    fill_empirical_orders(flat);
    CHECK(*flat[1].empirical_order == 0.0);

    std::vector<ConvergenceRow> single;
    single.push_back({0.4, 10, 3e-2, 0.0, std::nullopt});
    fill_empirical_orders(single);
    CHECK_FALSE(single[0].empirical_order.has_value());
}

TEST_CASE("estimators are bit-reproducible and worker-count independent") {
    const Problem p = builtin_example1();
    const auto a = strong_error_self(p, pragmatic_config(1.0), {0.125, 0.0625}, 1, 32, 11);
    const auto b = strong_error_self(p, pragmatic_config(1.0), {0.125, 0.0625}, 1, 32, 11);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].strong_error_sq == b[i].strong_error_sq);
        CHECK(a[i].std_error == b[i].std_error);
    }

    ExperimentOptions serial;
    serial.workers = 1;
    ExperimentOptions parallel;
    parallel.workers = 4;
    const MomentRow ms = sup_moment(p, pragmatic_config(1.0), 0.0625, 4.0, 64, 13, serial);
    const MomentRow mp = sup_moment(p, pragmatic_config(1.0), 0.0625, 4.0, 64, 13, parallel);
    CHECK(ms.sup_moment == mp.sup_moment);
    CHECK(ms.std_error == mp.std_error);
}

TEST_CASE("intra-step wiggle of the continuous form scales with the stepsize") {
    const Problem p = builtin_example1();
    const SchemeConfig base = pragmatic_config(1.0);
    const std::size_t n_paths = 1000;
    const int refine = 8;
    auto mean_wiggle = [&](double delta) {
        SchemeConfig config = base;
        config.stepsize = delta;
        double sum = 0.0;
        for (std::size_t i = 0; i < n_paths; ++i) {
            const BrownianGrid fine =
                sample_grid(rng::derive_stream_seed(42, i), 1.0, delta / refine, 1);
            const BrownianGrid grid = coarsen(fine, refine);
            const PathResult path = simulate_path(p, config, grid);
            double worst = 0.0;
            for (std::size_t k = 0; k < grid.steps(); ++k) {
                for (int j = 1; j < refine; ++j) {
                    const double t = (k + static_cast<double>(j) / refine) * delta;
                    const Vec y = interpolate_continuous(p, config, path, fine, t);
                    worst = std::max(worst, (y - path.states[k]).squaredNorm());
                }
            }
            sum += worst;
        }
        return sum / static_cast<double>(n_paths);
    };
    // Coarser pairs sit below the band: the max over ~T/delta steps carries a
    // log factor that only fades as the stepsize shrinks.
    const double coarse = mean_wiggle(std::pow(2.0, -6));
    const double fine = mean_wiggle(std::pow(2.0, -8));
    const double slope = std::log2(coarse / fine) / 2.0;  // stepsize quartered
    CHECK(slope > 0.65);
    CHECK(slope < 1.35);
}

TEST_CASE("csv layout is fixed and reproducible") {
    std::vector<CsvRow> rows;
    rows.push_back({"converge", 1.0, 0.25, 100, 0.5, 0.01, std::nullopt, 8.0, 42});
    rows.push_back({"converge", 1.0, 0.125, 100, 0.25, 0.005, 1.0, 8.0, 42});
    std::ostringstream a, b;
    write_csv(a, {"command=converge", "seed=42"}, rows);
    write_csv(b, {"command=converge", "seed=42"}, rows);
    CHECK(a.str() == b.str());
    const std::string expected =
        "# command=converge\n# seed=42\n"
        "experiment,theta,delta,n_paths,value,std_error,order,radius,seed\n"
        "converge,1,0.25,100,0.5,0.01,,8,42\n"
        "converge,1,0.125,100,0.25,0.0050000000000000001,1,8,42\n";
    CHECK(a.str() == expected);
}

TEST_CASE("tables render one line per row") {
    std::vector<ConvergenceRow> rows;
    rows.push_back({0.25, 100, 0.5, 0.01, std::nullopt});
    rows.push_back({0.125, 100, 0.25, 0.005, 1.0});
    const std::string table = format_convergence_table(rows);
    CHECK(table.find("delta") != std::string::npos);
    CHECK(std::count(table.begin(), table.end(), '\n') == 3);
}
