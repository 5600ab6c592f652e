#include <CLI11.hpp>

#include "thetaem/experiments.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

using namespace thetaem;

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_short(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

double parse_delta_token(const std::string& token) {
    if (token.rfind("2^", 0) == 0) {
        return std::ldexp(1.0, std::stoi(token.substr(2)));
    }
    return std::stod(token);
}

/// "2^-4..2^-9" expands to the dyadic list; comma lists also accepted.
std::vector<double> parse_deltas(const std::string& text) {
    std::vector<double> deltas;
    std::stringstream stream(text);
    std::string token;
    while (std::getline(stream, token, ',')) {
        const auto range = token.find("..");
        if (range != std::string::npos) {
            const std::string lo = token.substr(0, range);
            const std::string hi = token.substr(range + 2);
            if (lo.rfind("2^", 0) != 0 || hi.rfind("2^", 0) != 0) {
                throw ConfigError("delta ranges must use the 2^k form, e.g. 2^-4..2^-9");
            }
            const int from = std::stoi(lo.substr(2));
            const int to = std::stoi(hi.substr(2));
            if (to > from) throw ConfigError("delta ranges must descend, e.g. 2^-4..2^-9");
            for (int e = from; e >= to; --e) deltas.push_back(std::ldexp(1.0, e));
        } else if (!token.empty()) {
            deltas.push_back(parse_delta_token(token));
        }
    }
    if (deltas.empty()) throw ConfigError("no stepsizes given");
    for (std::size_t i = 1; i < deltas.size(); ++i) {
        if (!(deltas[i] < deltas[i - 1])) throw ConfigError("stepsizes must be descending");
    }
    return deltas;
}

struct RadiusMode {
    bool literal = false;
    double pragmatic_radius = 8.0;
};

RadiusMode parse_radius_mode(const std::string& text) {
    RadiusMode mode;
    if (text == "literal") {
        mode.literal = true;
        return mode;
    }
    if (text.rfind("pragmatic:", 0) == 0) {
        mode.pragmatic_radius = std::stod(text.substr(10));
        return mode;
    }
    throw ConfigError("radius mode must be 'literal' or 'pragmatic:<radius>'");
}

TruncationSchedule parse_schedule(const std::string& id) {
    if (id == "remark22") return remark22_schedule();
    if (id.rfind("log:", 0) == 0) return log_schedule(std::stod(id.substr(4)));
    throw ConfigError("schedule must be 'remark22' or 'log:<c>'");
}

struct CommonOpts {
    std::string problem_id = "example1";
    double theta = 1.0;
    double horizon = 1.0;
    std::uint64_t seed = 42;
    std::size_t paths = 1000;
    std::string radius_mode = "pragmatic:8";
    std::string schedule_id = "remark22";
    bool untruncated = false;
    int workers = 0;
    double solver_tolerance = 1e-12;
    int solver_max_iters = 200;
    std::string output;

    void attach(CLI::App* cmd, bool with_paths = true) {
        cmd->add_option("--problem", problem_id, "problem id: example1[:x0] or linear:a,s,x0");
        cmd->add_option("--theta", theta, "implicitness parameter in [0,1]");
        cmd->add_option("--T", horizon, "time horizon");
        cmd->add_option("--seed", seed, "master RNG seed");
        if (with_paths) cmd->add_option("--paths", paths, "Monte Carlo paths");
        cmd->add_option("--radius-mode", radius_mode, "'literal' or 'pragmatic:<radius>'");
        cmd->add_option("--schedule", schedule_id, "'remark22' or 'log:<c>'");
        cmd->add_flag("--untruncated", untruncated, "step the raw drift instead of the cutoff");
        cmd->add_option("--workers", workers, "worker threads (0 = auto, env THETAEM_WORKERS)");
        cmd->add_option("--solver-tolerance", solver_tolerance, "implicit solve residual bound");
        cmd->add_option("--solver-max-iters", solver_max_iters, "implicit solve budget");
        cmd->add_option("--output", output, "CSV output path");
    }

    int resolved_workers() const {
        if (workers > 0) return workers;
        if (const char* env = std::getenv("THETAEM_WORKERS")) {
            const int parsed = std::atoi(env);
            if (parsed > 0) return parsed;
        }
        return 0;  // library default: hardware concurrency
    }

    SchemeConfig config_for(const Problem& problem, double delta) const {
        SchemeConfig config;
        config.theta = theta;
        config.stepsize = delta;
        config.horizon = horizon;
        config.solver_tolerance = solver_tolerance;
        config.solver_max_iters = solver_max_iters;
        config.truncated = !untruncated;
        if (config.truncated) {
            const RadiusMode mode = parse_radius_mode(radius_mode);
            config.truncation_radius = mode.literal
                                           ? parse_schedule(schedule_id).radius_at(delta)
                                           : mode.pragmatic_radius;
        }
        return config;
    }

    bool literal() const { return parse_radius_mode(radius_mode).literal; }

    std::vector<std::string> comment_block(const std::string& command,
                                           const std::vector<double>& deltas) const {
        std::vector<std::string> lines;
        lines.push_back("command=" + command);
        lines.push_back("problem=" + problem_id);
        lines.push_back("theta=" + fmt(theta));
        lines.push_back("T=" + fmt(horizon));
        std::string ds;
        for (std::size_t i = 0; i < deltas.size(); ++i) {
            if (i) ds += ",";
            ds += fmt(deltas[i]);
        }
        lines.push_back("deltas=" + ds);
        lines.push_back("paths=" + std::to_string(paths));
        lines.push_back("seed=" + std::to_string(seed));
        lines.push_back("radius_mode=" + radius_mode);
        lines.push_back("schedule=" + schedule_id);
        lines.push_back(std::string("truncated=") + (untruncated ? "0" : "1"));
        lines.push_back("workers=" + std::to_string(resolved_workers()));
        lines.push_back("solver_tolerance=" + fmt(solver_tolerance));
        lines.push_back("solver_max_iters=" + std::to_string(solver_max_iters));
        return lines;
    }
};

/// Admissibility is printed and enforced before any path is simulated.
void report_admissibility(const Problem& problem, const CommonOpts& opts,
                          const std::vector<double>& deltas) {
    const bool literal = opts.literal();
    std::optional<double> delta1;
    if (literal) {
        const TruncationSchedule schedule = parse_schedule(opts.schedule_id);
        delta1 = schedule.delta1;
        const ScheduleReport sched_report =
            validate_schedule(schedule, problem, default_validation_grid(schedule));
        std::cout << "schedule " << schedule.id
                  << ": min-radius/monotone-decay/one-sided-bound/growth-bound checks "
                  << (sched_report.passed ? "pass" : "FAIL (" + sched_report.detail + ")")
                  << " on the default grid\n";
    } else if (!opts.untruncated) {
        std::cout << "pragmatic radius "
                  << fmt_short(opts.config_for(problem, deltas[0]).truncation_radius)
                  << ": schedule admissibility checks skipped (warning)\n";
    }
    std::cout << "admissibility:\n";
    for (double delta : deltas) {
        const SchemeConfig config = opts.config_for(problem, delta);
        const AdmissibilityReport report =
            check_admissible(problem, config, !literal, literal ? delta1 : std::nullopt);
        std::cout << "  delta=" << fmt_short(delta)
                  << ": theta*delta=" << fmt_short(opts.theta * delta)
                  << " (bound 1/(2L)=" << fmt_short(1.0 / (2.0 * problem.growth_constant))
                  << "), Mbar=" << fmt_short(report.mbar) << ", mu=" << fmt_short(report.mu);
        if (!report.ok) {
            std::cout << " REJECTED\n";
            throw ConfigError(report.failures.front());
        }
        std::cout << (report.warnings.empty() ? " ok" : " ok (mu warning)") << "\n";
    }
}

void write_csv_file(const std::string& path, const std::vector<std::string>& comments,
                    const std::vector<CsvRow>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    write_csv(out, comments, rows);
    std::cout << "wrote " << path << "\n";
}

int run_verify(const CommonOpts& opts, double radius, std::size_t points, std::size_t pairs,
               double box) {
    const Problem problem = make_problem(opts.problem_id);
    std::cout << "problem " << problem.id << ": n=" << problem.dim_state
              << " m=" << problem.dim_noise << " L=" << fmt_short(problem.growth_constant)
              << " l=" << fmt_short(problem.growth_exponent) << " M_R(" << fmt_short(radius)
              << ")=" << fmt_short(problem.local_onesided_constant(radius)) << "\n";

    const auto states = sample_states(opts.seed, points, problem.dim_state, box);
    const AssumptionReport a1 = check_a1(problem, states);
    std::cout << "growth audit (" << a1.samples_checked << " states in the " << fmt_short(box)
              << "-box):\n"
              << "  worst <x,b(x)>/(1+|x|^2)     = " << fmt_short(a1.worst_a1_inner)
              << " (L=" << fmt_short(problem.growth_constant) << ")\n"
              << "  worst ||sigma||^2/(1+|x|^2)  = " << fmt_short(a1.worst_a1_diff) << "\n"
              << "  worst |b(x)|/(1+|x|^l)       = " << fmt_short(a1.worst_a1_growth) << "\n"
              << "  violations: " << a1.violations.size() << "\n";

    const auto ball_pairs = sample_pairs_in_ball(opts.seed, pairs, problem.dim_state, radius);
    const AssumptionReport a2 = check_a2(problem, radius, ball_pairs);
    std::cout << "one-sided audit (" << a2.samples_checked << " pairs in the "
              << fmt_short(radius) << "-ball):\n"
              << "  worst drift ratio     = " << fmt_short(a2.worst_a2_drift)
              << " (M_R=" << fmt_short(problem.local_onesided_constant(radius)) << ")\n"
              << "  worst diffusion ratio = " << fmt_short(a2.worst_a2_diff) << "\n"
              << "  violations: " << a2.violations.size() << "\n";
    for (std::size_t i = 0; i < std::min<std::size_t>(3, a2.violations.size()); ++i) {
        const auto& v = a2.violations[i];
        std::cout << "  witness: x=" << fmt_short(v.x[0]);
        if (v.y) std::cout << " y=" << fmt_short((*v.y)[0]);
        std::cout << " " << v.inequality << " lhs=" << fmt_short(v.lhs)
                  << " rhs=" << fmt_short(v.rhs) << "\n";
    }
    return 0;
}

int run_simulate(const CommonOpts& opts, double delta) {
    const Problem problem = make_problem(opts.problem_id);
    report_admissibility(problem, opts, {delta});
    const SchemeConfig config = opts.config_for(problem, delta);
    const BrownianGrid grid = sample_grid(opts.seed, opts.horizon, delta, problem.dim_noise);
    const PathResult path = simulate_path(problem, config, grid);
    std::cout << "steps: " << grid.steps() << "\n"
              << "sup |y|: " << fmt_short(path.sup_norm) << "\n";
    if (path.exit_index) {
        std::cout << "first exit at k=" << *path.exit_index
                  << " (t=" << fmt_short(static_cast<double>(*path.exit_index) * delta) << ")\n";
    } else if (config.truncated) {
        std::cout << "no exit from the truncation ball\n";
    }
    if (path.diagnostics.diverged_at) {
        std::cout << "DIVERGED at step " << *path.diagnostics.diverged_at << "\n";
    }
    std::cout << "solver: max residual " << fmt_short(path.diagnostics.max_residual)
              << ", max iterations " << path.diagnostics.max_iterations << ", fallback steps "
              << path.diagnostics.fallback_steps << "\n";
    if (!opts.output.empty()) {
        std::ofstream out(opts.output, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open " + opts.output + " for writing");
        for (const auto& line : opts.comment_block("simulate", {delta})) {
            out << "# " << line << "\n";
        }
        write_path_csv(out, path);
        std::cout << "wrote " << opts.output << "\n";
    }
    return 0;
}

int run_converge(const CommonOpts& opts, const std::string& deltas_text, std::string mode,
                 int refine) {
    const Problem problem = make_problem(opts.problem_id);
    const std::vector<double> deltas = parse_deltas(deltas_text);
    if (mode == "auto") mode = problem.has_exact() ? "exact" : "self";
    if (mode != "exact" && mode != "self") throw ConfigError("mode must be auto, exact or self");
    report_admissibility(problem, opts, deltas);

    ExperimentOptions exp_opts;
    exp_opts.workers = opts.resolved_workers();
    SchemeConfig base = opts.config_for(problem, deltas[0]);
    std::vector<ConvergenceRow> rows;
    if (mode == "exact") {
        rows = strong_error_exact(problem, base, deltas, opts.paths, opts.seed, exp_opts);
    } else {
        rows = strong_error_self(problem, base, deltas, refine, opts.paths, opts.seed, exp_opts);
    }
    std::cout << "strong sup-error, " << mode << " reference, " << opts.paths << " paths:\n"
              << format_convergence_table(rows);

    std::vector<CsvRow> csv;
    for (const auto& row : rows) {
        csv.push_back({"converge_" + mode, opts.theta, row.stepsize, row.n_paths,
                       row.strong_error_sq, row.std_error, row.empirical_order,
                       base.truncated ? base.truncation_radius
                                      : std::numeric_limits<double>::infinity(),
                       opts.seed});
    }
    auto comments = opts.comment_block("converge", deltas);
    comments.push_back("mode=" + mode);
    comments.push_back("refine=" + std::to_string(refine));
    write_csv_file(opts.output.empty() ? "thetaem_converge.csv" : opts.output, comments, csv);
    return 0;
}

int run_moments(const CommonOpts& opts, const std::string& deltas_text, double p) {
    const Problem problem = make_problem(opts.problem_id);
    const std::vector<double> deltas = parse_deltas(deltas_text);
    report_admissibility(problem, opts, deltas);
    if (opts.theta < 0.5) {
        std::cout << "warning: theta outside the moment-bound regime [1/2,1]\n";
    }
    ExperimentOptions exp_opts;
    exp_opts.workers = opts.resolved_workers();
    std::vector<MomentRow> rows;
    for (double delta : deltas) {
        rows.push_back(sup_moment(problem, opts.config_for(problem, delta), delta, p, opts.paths,
                                  opts.seed, exp_opts));
    }
    std::cout << "sup-moment estimates, p=" << fmt_short(p) << ", " << opts.paths << " paths:\n"
              << format_moment_table(rows);
    if (rows.size() > 1) {
        double lo = rows[0].sup_moment, hi = rows[0].sup_moment;
        for (const auto& row : rows) {
            lo = std::min(lo, row.sup_moment);
            hi = std::max(hi, row.sup_moment);
        }
        std::cout << "max/min ratio across stepsizes: " << fmt_short(hi / lo) << "\n";
    }

    std::vector<CsvRow> csv;
    const SchemeConfig base = opts.config_for(problem, deltas[0]);
    for (const auto& row : rows) {
        csv.push_back({"sup_moment", opts.theta, row.stepsize, opts.paths, row.sup_moment,
                       row.std_error, std::nullopt,
                       base.truncated ? base.truncation_radius
                                      : std::numeric_limits<double>::infinity(),
                       opts.seed});
    }
    auto comments = opts.comment_block("moments", deltas);
    comments.push_back("p=" + fmt(p));
    write_csv_file(opts.output.empty() ? "thetaem_moments.csv" : opts.output, comments, csv);
    return 0;
}

int run_exitprob(const CommonOpts& opts, double delta, const std::string& radii_text, double p) {
    const Problem problem = make_problem(opts.problem_id);
    report_admissibility(problem, opts, {delta});
    std::vector<double> radii;
    {
        std::stringstream stream(radii_text);
        std::string token;
        while (std::getline(stream, token, ',')) {
            if (!token.empty()) radii.push_back(std::stod(token));
        }
        if (radii.empty()) throw ConfigError("no radii given");
    }
    ExperimentOptions exp_opts;
    exp_opts.workers = opts.resolved_workers();

    std::vector<CsvRow> csv;
    std::printf("%10s %12s %12s %16s %12s\n", "radius", "estimate", "std_error", "moment_bound",
                "consistent");
    for (double radius : radii) {
        const auto result = exit_probability(problem, opts.config_for(problem, delta), delta,
                                             radius, p, opts.paths, opts.seed, exp_opts);
        const bool consistent = result.estimate <= result.chebyshev_bound + 3.0 * result.std_error;
        std::printf("%10s %12s %12s %16s %12s\n", fmt_short(radius).c_str(),
                    fmt_short(result.estimate).c_str(), fmt_short(result.std_error).c_str(),
                    fmt_short(result.chebyshev_bound).c_str(), consistent ? "yes" : "NO");
        csv.push_back({"exit_probability", opts.theta, delta, opts.paths, result.estimate,
                       result.std_error, std::nullopt, radius, opts.seed});
        csv.push_back({"chebyshev_bound", opts.theta, delta, opts.paths, result.chebyshev_bound,
                       0.0, std::nullopt, radius, opts.seed});
    }
    auto comments = opts.comment_block("exitprob", {delta});
    comments.push_back("p=" + fmt(p));
    comments.push_back("radii=" + radii_text);
    write_csv_file(opts.output.empty() ? "thetaem_exitprob.csv" : opts.output, comments, csv);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"truncated-drift theta-Euler-Maruyama toolkit"};
    app.require_subcommand(1);

    CommonOpts verify_opts, simulate_opts, converge_opts, moments_opts, exitprob_opts;

    auto* verify = app.add_subcommand("verify", "sampled audit of the growth and one-sided bounds");
    double verify_radius = 2.0, verify_box = 10.0;
    std::size_t verify_points = 10000, verify_pairs = 10000;
    verify_opts.attach(verify, false);
    verify->add_option("--radius", verify_radius, "ball radius for the one-sided audit");
    verify->add_option("--points", verify_points, "sample count for the growth audit");
    verify->add_option("--pairs", verify_pairs, "pair count for the one-sided audit");
    verify->add_option("--box", verify_box, "halfwidth of the growth-audit sampling box");

    auto* simulate = app.add_subcommand("simulate", "run one path and report diagnostics");
    std::string simulate_delta_text = "2^-8";
    simulate_opts.attach(simulate, false);
    simulate->add_option("--delta", simulate_delta_text, "stepsize (number or 2^k)");

    auto* converge = app.add_subcommand("converge", "strong-error convergence table");
    std::string converge_deltas = "2^-4..2^-8", converge_mode = "auto";
    int converge_refine = 3;
    converge_opts.attach(converge);
    converge->add_option("--deltas", converge_deltas, "stepsize list, e.g. 2^-4..2^-9 or 0.1,0.05");
    converge->add_option("--mode", converge_mode, "auto, exact (closed form) or self (coupled)");
    converge->add_option("--refine", converge_refine, "self-reference refinement exponent");

    auto* moments = app.add_subcommand("moments", "sup-moment estimates across stepsizes");
    std::string moments_deltas = "2^-4,2^-6,2^-8";
    double moments_p = 4.0;
    moments_opts.attach(moments);
    moments->add_option("--deltas", moments_deltas, "stepsize list");
    moments->add_option("--p", moments_p, "moment order (>= 2)");

    auto* exitprob = app.add_subcommand("exitprob", "exit probabilities vs moment bounds");
    std::string exitprob_delta = "2^-8", exitprob_radii = "2,4,8";
    double exitprob_p = 4.0;
    exitprob_opts.attach(exitprob);
    exitprob->add_option("--delta", exitprob_delta, "stepsize (number or 2^k)");
    exitprob->add_option("--radii", exitprob_radii, "comma list of exit radii");
    exitprob->add_option("--p", exitprob_p, "moment order for the bound");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (verify->parsed()) {
            return run_verify(verify_opts, verify_radius, verify_points, verify_pairs, verify_box);
        }
        if (simulate->parsed()) {
            return run_simulate(simulate_opts, parse_delta_token(simulate_delta_text));
        }
        if (converge->parsed()) {
            return run_converge(converge_opts, converge_deltas, converge_mode, converge_refine);
        }
        if (moments->parsed()) {
            return run_moments(moments_opts, moments_deltas, moments_p);
        }
        if (exitprob->parsed()) {
            return run_exitprob(exitprob_opts, parse_delta_token(exitprob_delta), exitprob_radii,
                                exitprob_p);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const SolverError& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
