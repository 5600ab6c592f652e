#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "thetaem/experiments.hpp"

#include <sstream>

namespace py = pybind11;
using namespace thetaem;

namespace {

Mat states_matrix(const PathResult& path) {
    const auto rows = static_cast<Eigen::Index>(path.states.size());
    const Eigen::Index cols = rows > 0 ? path.states.front().size() : 0;
    Mat out(rows, cols);
    for (Eigen::Index k = 0; k < rows; ++k) out.row(k) = path.states[k].transpose();
    return out;
}

Mat increments_matrix(const BrownianGrid& grid) {
    const auto rows = static_cast<Eigen::Index>(grid.steps());
    Mat out(rows, grid.dim_noise);
    for (Eigen::Index k = 0; k < rows; ++k) {
        out.row(k) = grid.increment(static_cast<std::size_t>(k)).transpose();
    }
    return out;
}

std::string csv_string(const std::vector<std::string>& comments, const std::vector<CsvRow>& rows) {
    std::ostringstream out;
    write_csv(out, comments, rows);
    return out.str();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "truncated-drift theta-Euler-Maruyama scheme for SDEs with locally "
              "one-sided Lipschitz drift";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);

    py::class_<Problem>(m, "Problem")
        .def_readonly("dim_state", &Problem::dim_state)
        .def_readonly("dim_noise", &Problem::dim_noise)
        .def_readonly("initial_state", &Problem::initial_state)
        .def_readonly("growth_constant", &Problem::growth_constant)
        .def_readonly("growth_exponent", &Problem::growth_exponent)
        .def_readonly("id", &Problem::id)
        .def("drift", [](const Problem& p, const Vec& x) { return p.drift(x); })
        .def("diffusion", [](const Problem& p, const Vec& x) { return p.diffusion(x); })
        .def("onesided_constant",
             [](const Problem& p, double radius) { return p.local_onesided_constant(radius); })
        .def("has_exact", &Problem::has_exact)
        .def("exact_solution",
             [](const Problem& p, double t, const Vec& w) {
                 if (!p.has_exact()) throw ConfigError("problem has no closed-form solution");
                 return p.exact_solution(t, w);
             })
        .def("__repr__", [](const Problem& p) { return "<Problem " + p.id + ">"; });

    m.def("builtin_example1", &builtin_example1, py::arg("x0") = 1.0);
    m.def("builtin_linear", &builtin_linear, py::arg("a"), py::arg("s"), py::arg("x0"));
    m.def("make_problem", &make_problem, py::arg("id"));

    py::class_<AssumptionViolation>(m, "AssumptionViolation")
        .def_readonly("x", &AssumptionViolation::x)
        .def_readonly("y", &AssumptionViolation::y)
        .def_readonly("inequality", &AssumptionViolation::inequality)
        .def_readonly("lhs", &AssumptionViolation::lhs)
        .def_readonly("rhs", &AssumptionViolation::rhs);

    py::class_<AssumptionReport>(m, "AssumptionReport")
        .def_readonly("samples_checked", &AssumptionReport::samples_checked)
        .def_readonly("worst_a1_inner", &AssumptionReport::worst_a1_inner)
        .def_readonly("worst_a1_diff", &AssumptionReport::worst_a1_diff)
        .def_readonly("worst_a1_growth", &AssumptionReport::worst_a1_growth)
        .def_readonly("worst_a2_drift", &AssumptionReport::worst_a2_drift)
        .def_readonly("worst_a2_diff", &AssumptionReport::worst_a2_diff)
        .def_readonly("violations", &AssumptionReport::violations)
        .def("passed", &AssumptionReport::passed)
        .def("worst_a2_ratio", &AssumptionReport::worst_a2_ratio);

    m.def("check_a1", &check_a1, py::arg("problem"), py::arg("points"),
          py::arg("rel_tol") = 1e-9);
    m.def("check_a2", &check_a2, py::arg("problem"), py::arg("radius"), py::arg("pairs"),
          py::arg("rel_tol") = 1e-9);
    m.def("sample_states", &sample_states, py::arg("seed"), py::arg("count"), py::arg("dim"),
          py::arg("halfwidth"));
    m.def("sample_ball_states", &sample_ball_states, py::arg("seed"), py::arg("count"),
          py::arg("dim"), py::arg("radius"));
    m.def("sample_pairs_in_ball", &sample_pairs_in_ball, py::arg("seed"), py::arg("count"),
          py::arg("dim"), py::arg("radius"));

    m.def("cutoff_profile", &cutoff_profile, py::arg("s"));
    m.def("cutoff_profile_derivative", &cutoff_profile_derivative, py::arg("s"));
    py::class_<Cutoff>(m, "Cutoff")
        .def_readonly("radius", &Cutoff::radius)
        .def_readonly("lipschitz_constant", &Cutoff::lipschitz_constant);
    m.def("make_cutoff", &make_cutoff, py::arg("radius"));
    m.def("cutoff_value", &cutoff_value, py::arg("cutoff"), py::arg("x"));
    m.def("truncated_drift", &truncated_drift, py::arg("problem"), py::arg("cutoff"),
          py::arg("x"));
    m.def("truncated_onesided_constant", &truncated_onesided_constant, py::arg("problem"),
          py::arg("radius"));

    py::class_<TruncationSchedule>(m, "TruncationSchedule")
        .def_readonly("delta1", &TruncationSchedule::delta1)
        .def_readonly("id", &TruncationSchedule::id)
        .def("radius_at", &TruncationSchedule::radius_at, py::arg("delta"))
        .def("g", [](const TruncationSchedule& s, double delta) { return s.g(delta); })
        .def("m_of_g", [](const TruncationSchedule& s, double r) { return s.m_of_g(r); })
        .def("__repr__",
             [](const TruncationSchedule& s) { return "<TruncationSchedule " + s.id + ">"; });
    m.def("remark22_schedule", &remark22_schedule);
    m.def("log_schedule", &log_schedule, py::arg("c"));
    m.def("default_schedule", &default_schedule, py::arg("problem"));

    py::class_<ScheduleReport>(m, "ScheduleReport")
        .def_readonly("passed", &ScheduleReport::passed)
        .def_readonly("min_radius_ok", &ScheduleReport::min_radius_ok)
        .def_readonly("strictly_decreasing", &ScheduleReport::strictly_decreasing)
        .def_readonly("onesided_bound_ok", &ScheduleReport::onesided_bound_ok)
        .def_readonly("growth_bound_ok", &ScheduleReport::growth_bound_ok)
        .def_readonly("first_violation_delta", &ScheduleReport::first_violation_delta)
        .def_readonly("detail", &ScheduleReport::detail);
    m.def("validate_schedule", &validate_schedule, py::arg("schedule"), py::arg("problem"),
          py::arg("delta_grid"));
    m.def("default_validation_grid", &default_validation_grid, py::arg("schedule"),
          py::arg("points") = 64);
    m.def("global_onesided_constant", &global_onesided_constant, py::arg("schedule"),
          py::arg("problem"), py::arg("delta"));

    py::class_<SchemeConfig>(m, "SchemeConfig")
        .def(py::init([](double theta, double stepsize, double horizon, bool truncated,
                         double truncation_radius, double solver_tolerance,
                         int solver_max_iters) {
                 SchemeConfig config;
                 config.theta = theta;
                 config.stepsize = stepsize;
                 config.horizon = horizon;
                 config.truncated = truncated;
                 config.truncation_radius = truncation_radius;
                 config.solver_tolerance = solver_tolerance;
                 config.solver_max_iters = solver_max_iters;
                 return config;
             }),
             py::arg("theta") = 1.0, py::arg("stepsize") = 0.0, py::arg("horizon") = 1.0,
             py::arg("truncated") = true, py::arg("truncation_radius") = 8.0,
             py::arg("solver_tolerance") = 1e-12, py::arg("solver_max_iters") = 200)
        .def_readwrite("theta", &SchemeConfig::theta)
        .def_readwrite("stepsize", &SchemeConfig::stepsize)
        .def_readwrite("horizon", &SchemeConfig::horizon)
        .def_readwrite("truncated", &SchemeConfig::truncated)
        .def_readwrite("truncation_radius", &SchemeConfig::truncation_radius)
        .def_readwrite("solver_tolerance", &SchemeConfig::solver_tolerance)
        .def_readwrite("solver_max_iters", &SchemeConfig::solver_max_iters);

    py::class_<StepDiagnostics>(m, "StepDiagnostics")
        .def_readonly("iterations", &StepDiagnostics::iterations)
        .def_readonly("residual", &StepDiagnostics::residual)
        .def_readonly("fallback_used", &StepDiagnostics::fallback_used);

    py::class_<AdmissibilityReport>(m, "AdmissibilityReport")
        .def_readonly("ok", &AdmissibilityReport::ok)
        .def_readonly("delta2", &AdmissibilityReport::delta2)
        .def_readonly("mbar", &AdmissibilityReport::mbar)
        .def_readonly("mu", &AdmissibilityReport::mu)
        .def_readonly("failures", &AdmissibilityReport::failures)
        .def_readonly("warnings", &AdmissibilityReport::warnings);

    m.def("max_implicit_stepsize", &max_implicit_stepsize, py::arg("problem"), py::arg("theta"));
    m.def("effective_onesided_bound", &effective_onesided_bound, py::arg("problem"),
          py::arg("config"));
    m.def("check_admissible", &check_admissible, py::arg("problem"), py::arg("config"),
          py::arg("pragmatic_mode") = true, py::arg("delta1_limit") = std::nullopt);
    m.def("require_admissible", &require_admissible, py::arg("problem"), py::arg("config"),
          py::arg("pragmatic_mode") = true, py::arg("delta1_limit") = std::nullopt);
    m.def(
        "solve_implicit",
        [](const Vec& c, double theta_delta, const std::function<Vec(const Vec&)>& drift_map,
           double onesided_bound, double tolerance, int max_iters,
           const std::optional<Vec>& initial_guess) {
            return solve_implicit(c, theta_delta, drift_map, onesided_bound, tolerance, max_iters,
                                  initial_guess);
        },
        py::arg("c"), py::arg("theta_delta"), py::arg("drift_map"), py::arg("onesided_bound"),
        py::arg("tolerance") = 1e-12, py::arg("max_iters") = 200,
        py::arg("initial_guess") = std::nullopt);
    m.def("theta_step", &theta_step, py::arg("problem"), py::arg("config"), py::arg("y"),
          py::arg("dW"));
    m.def("transform_z", &transform_z, py::arg("problem"), py::arg("config"), py::arg("y"));

    py::class_<BrownianGrid>(m, "BrownianGrid")
        .def_readonly("seed", &BrownianGrid::seed)
        .def_readonly("horizon", &BrownianGrid::horizon)
        .def_readonly("stepsize", &BrownianGrid::stepsize)
        .def_readonly("dim_noise", &BrownianGrid::dim_noise)
        .def("steps", &BrownianGrid::steps)
        .def("increments", &increments_matrix)
        .def("__repr__", [](const BrownianGrid& g) {
            return "<BrownianGrid steps=" + std::to_string(g.steps()) + ">";
        });
    m.def("sample_grid", &sample_grid, py::arg("seed"), py::arg("horizon"), py::arg("stepsize"),
          py::arg("dim_noise"));
    m.def("coarsen", &coarsen, py::arg("grid"), py::arg("factor"));
    m.def("path_values", &path_values, py::arg("grid"));
    m.def("save_grid", &save_grid_file, py::arg("grid"), py::arg("path"));
    m.def("load_grid", &load_grid_file, py::arg("path"));

    py::class_<PathDiagnostics>(m, "PathDiagnostics")
        .def_readonly("max_residual", &PathDiagnostics::max_residual)
        .def_readonly("max_iterations", &PathDiagnostics::max_iterations)
        .def_readonly("fallback_steps", &PathDiagnostics::fallback_steps)
        .def_readonly("diverged_at", &PathDiagnostics::diverged_at);

    py::class_<PathResult>(m, "PathResult")
        .def_readonly("stepsize", &PathResult::stepsize)
        .def_readonly("horizon", &PathResult::horizon)
        .def_readonly("exit_index", &PathResult::exit_index)
        .def_readonly("diagnostics", &PathResult::diagnostics)
        .def_readonly("sup_norm", &PathResult::sup_norm)
        .def("states", &states_matrix)
        .def("__repr__", [](const PathResult& p) {
            return "<PathResult states=" + std::to_string(p.states.size()) + ">";
        });
    m.def("simulate_path", &simulate_path, py::arg("problem"), py::arg("config"),
          py::arg("grid"));
    m.def("interpolate_continuous", &interpolate_continuous, py::arg("problem"),
          py::arg("config"), py::arg("path"), py::arg("fine"), py::arg("t"));
    m.def("piecewise_constant", &piecewise_constant, py::arg("path"), py::arg("t"));
    m.def("first_exit", &first_exit, py::arg("path"), py::arg("radius"));

    py::class_<ConvergenceRow>(m, "ConvergenceRow")
        .def_readonly("stepsize", &ConvergenceRow::stepsize)
        .def_readonly("n_paths", &ConvergenceRow::n_paths)
        .def_readonly("strong_error_sq", &ConvergenceRow::strong_error_sq)
        .def_readonly("std_error", &ConvergenceRow::std_error)
        .def_readonly("empirical_order", &ConvergenceRow::empirical_order);
    py::class_<MomentRow>(m, "MomentRow")
        .def_readonly("stepsize", &MomentRow::stepsize)
        .def_readonly("p", &MomentRow::p)
        .def_readonly("sup_moment", &MomentRow::sup_moment)
        .def_readonly("std_error", &MomentRow::std_error);
    py::class_<ExitProbabilityResult>(m, "ExitProbabilityResult")
        .def_readonly("estimate", &ExitProbabilityResult::estimate)
        .def_readonly("std_error", &ExitProbabilityResult::std_error)
        .def_readonly("chebyshev_bound", &ExitProbabilityResult::chebyshev_bound);
    py::class_<ExperimentOptions>(m, "ExperimentOptions")
        .def(py::init())
        .def_readwrite("workers", &ExperimentOptions::workers);

    m.def("strong_error_exact", &strong_error_exact, py::arg("problem"), py::arg("config"),
          py::arg("deltas"), py::arg("n_paths"), py::arg("seed"),
          py::arg("options") = ExperimentOptions{});
    m.def("strong_error_self", &strong_error_self, py::arg("problem"), py::arg("config"),
          py::arg("deltas"), py::arg("refinement"), py::arg("n_paths"), py::arg("seed"),
          py::arg("options") = ExperimentOptions{});
    m.def("sup_moment", &sup_moment, py::arg("problem"), py::arg("config"), py::arg("delta"),
          py::arg("p"), py::arg("n_paths"), py::arg("seed"),
          py::arg("options") = ExperimentOptions{});
    m.def("exit_probability", &exit_probability, py::arg("problem"), py::arg("config"),
          py::arg("delta"), py::arg("radius"), py::arg("p"), py::arg("n_paths"), py::arg("seed"),
          py::arg("options") = ExperimentOptions{});
    m.def("format_convergence_table", &format_convergence_table, py::arg("rows"));
    m.def("format_moment_table", &format_moment_table, py::arg("rows"));

    py::class_<CsvRow>(m, "CsvRow")
        .def(py::init([](std::string experiment, double theta, double delta, std::size_t n_paths,
                         double value, double std_error, std::optional<double> order,
                         double radius, std::uint64_t seed) {
                 return CsvRow{std::move(experiment), theta, delta, n_paths,
                               value,               std_error, order, radius, seed};
             }),
             py::arg("experiment"), py::arg("theta"), py::arg("delta"), py::arg("n_paths"),
             py::arg("value"), py::arg("std_error"), py::arg("order") = std::nullopt,
             py::arg("radius") = 8.0, py::arg("seed") = 42);
    m.def("csv_string", &csv_string, py::arg("comments"), py::arg("rows"));
}
