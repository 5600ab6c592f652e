"""Truncated-drift theta-Euler-Maruyama scheme for SDEs whose drift is only
locally one-sided Lipschitz: problems, truncation schedules, seeded Brownian
grids with exact dyadic coarsening, the implicit stepper, and Monte Carlo
convergence / moment / exit-probability experiments."""

from thetaem._core import (
    AdmissibilityReport,
    AssumptionReport,
    AssumptionViolation,
    BrownianGrid,
    ConfigError,
    ConvergenceRow,
    CsvRow,
    Cutoff,
    ExitProbabilityResult,
    ExperimentOptions,
    MomentRow,
    PathDiagnostics,
    PathResult,
    Problem,
    ScheduleReport,
    SchemeConfig,
    SolverError,
    StepDiagnostics,
    TruncationSchedule,
    builtin_example1,
    builtin_linear,
    check_a1,
    check_a2,
    check_admissible,
    coarsen,
    csv_string,
    cutoff_profile,
    cutoff_profile_derivative,
    cutoff_value,
    default_schedule,
    default_validation_grid,
    effective_onesided_bound,
    exit_probability,
    first_exit,
    format_convergence_table,
    format_moment_table,
    global_onesided_constant,
    interpolate_continuous,
    load_grid,
    log_schedule,
    make_cutoff,
    make_problem,
    max_implicit_stepsize,
    path_values,
    piecewise_constant,
    remark22_schedule,
    require_admissible,
    sample_ball_states,
    sample_grid,
    sample_pairs_in_ball,
    sample_states,
    save_grid,
    simulate_path,
    solve_implicit,
    strong_error_exact,
    strong_error_self,
    sup_moment,
    theta_step,
    transform_z,
    truncated_drift,
    truncated_onesided_constant,
    validate_schedule,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
