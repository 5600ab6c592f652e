#pragma once

#include "thetaem/simulate.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace thetaem {

struct ConvergenceRow {
    double stepsize = 0.0;
    std::size_t n_paths = 0;
    double strong_error_sq = 0.0;  // E[ sup_k |X(t_k) - Y(t_k)|^2 ] estimate
    double std_error = 0.0;
    std::optional<double> empirical_order;  // log2 ratio slope vs previous row
};

struct MomentRow {
    double stepsize = 0.0;
    double p = 2.0;
    double sup_moment = 0.0;  // E[ sup_k |y_k|^p ] estimate
    double std_error = 0.0;
};

struct ExitProbabilityResult {
    double estimate = 0.0;         // fraction of paths that reach the radius
    double std_error = 0.0;        // binomial standard error
    double chebyshev_bound = 0.0;  // E[sup^p] / radius^p from the same runs
};

struct ExperimentOptions {
    int workers = 0;  // 0 = hardware concurrency
};

/// Strong error against the closed-form solution, one row per stepsize.
/// Stepsizes are descending with dyadic ratios; every row of one path is
/// driven by coarsenings of the same finest-grid increments.
std::vector<ConvergenceRow> strong_error_exact(const Problem& problem, SchemeConfig config,
                                               const std::vector<double>& deltas,
                                               std::size_t n_paths, std::uint64_t seed,
                                               const ExperimentOptions& options = {});

/// Self-convergence: the same scheme at stepsize min(deltas)/2^refinement is
/// the reference, coupled to each row through the shared Brownian path.
std::vector<ConvergenceRow> strong_error_self(const Problem& problem, SchemeConfig config,
                                              const std::vector<double>& deltas, int refinement,
                                              std::size_t n_paths, std::uint64_t seed,
                                              const ExperimentOptions& options = {});

/// Monte Carlo estimate of E[ sup_k |y_k|^p ], p >= 2.
MomentRow sup_moment(const Problem& problem, SchemeConfig config, double delta, double p,
                     std::size_t n_paths, std::uint64_t seed,
                     const ExperimentOptions& options = {});

/// Fraction of paths whose discrete trajectory reaches the given radius,
/// next to the moment-based bound E[sup^p]/radius^p from the same sample
/// (the sampled inequality holds pointwise, so estimate <= bound always).
ExitProbabilityResult exit_probability(const Problem& problem, SchemeConfig config, double delta,
                                       double radius, double p, std::size_t n_paths,
                                       std::uint64_t seed, const ExperimentOptions& options = {});

/// empirical_order[i] = log2(err_{i-1}/err_i) / log2(d_{i-1}/d_i); first row
/// and rows next to a zero error stay empty.
void fill_empirical_orders(std::vector<ConvergenceRow>& rows);

std::string format_convergence_table(const std::vector<ConvergenceRow>& rows);
std::string format_moment_table(const std::vector<MomentRow>& rows);

/// One CSV line per experiment result. Fixed schema, comma separated:
///   experiment,theta,delta,n_paths,value,std_error,order,radius,seed
struct CsvRow {
    std::string experiment;
    double theta = 0.0;
    double delta = 0.0;
    std::size_t n_paths = 0;
    double value = 0.0;
    double std_error = 0.0;
    std::optional<double> order;
    double radius = 0.0;  // +inf for untruncated runs
    std::uint64_t seed = 0;
};

/// Comment lines echo the fully resolved configuration; reruns with the same
/// flags produce byte-identical files.
void write_csv(std::ostream& out, const std::vector<std::string>& config_comments,
               const std::vector<CsvRow>& rows);

}  // namespace thetaem
