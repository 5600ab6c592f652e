#include "thetaem/experiments.hpp"

#include "thetaem/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace thetaem {

namespace {

int resolve_workers(const ExperimentOptions& options) {
    if (options.workers > 0) return options.workers;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

/// Run fn(i) for i in [0, n). Work is claimed dynamically but every result
/// lands in a caller-owned slot indexed by i, so reductions stay ordered and
/// independent of scheduling.
template <typename Fn>
void for_each_path(std::size_t n, int workers, Fn&& fn) {
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::scoped_lock lock(error_mutex);
                if (!error) error = std::current_exception();
                next.store(n);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const std::size_t count = std::min(static_cast<std::size_t>(workers), n);
    pool.reserve(count);
    for (std::size_t w = 0; w < count; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

struct MeanStdErr {
    double mean = 0.0;
    double std_error = 0.0;
};

MeanStdErr reduce_ordered(const std::vector<double>& values) {
    const auto n = static_cast<double>(values.size());
    double sum = 0.0;
    for (double v : values) sum += v;
    const double mean = sum / n;
    if (!std::isfinite(mean)) return {mean, std::numeric_limits<double>::infinity()};
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double variance = values.size() > 1 ? ss / (n - 1.0) : 0.0;
    return {mean, std::sqrt(variance / n)};
}

std::size_t dyadic_factor(double coarse, double fine) {
    const double ratio = coarse / fine;
    const auto factor = static_cast<std::size_t>(std::llround(ratio));
    if (factor < 1 || std::abs(ratio - static_cast<double>(factor)) > 1e-9 ||
        (factor & (factor - 1)) != 0) {
        throw ConfigError("stepsize ratios must be powers of two");
    }
    return factor;
}

void check_rows(const Problem& problem, const SchemeConfig& config,
                const std::vector<double>& deltas) {
    if (deltas.empty()) throw ConfigError("at least one stepsize is required");
    for (std::size_t i = 1; i < deltas.size(); ++i) {
        if (!(deltas[i] < deltas[i - 1])) throw ConfigError("stepsizes must be descending");
    }
    for (double d : deltas) {
        const double steps = config.horizon / d;
        if (std::abs(steps - std::round(steps)) > 1e-9) {
            throw ConfigError("every stepsize must divide the horizon");
        }
        SchemeConfig row = config;
        row.stepsize = d;
        require_admissible(problem, row);
    }
}

double terminal_checksum(const BrownianGrid& grid) {
    double sum = 0.0;
    for (double v : grid.increments) sum += v;
    return sum;
}

double sup_gap_sq(const PathResult& a, const PathResult& b, std::size_t stride) {
    // sup over b's grid points of |a(t_k) - b(t_k)|^2, a sampled every `stride`.
    double worst = 0.0;
    for (std::size_t k = 0; k < b.states.size(); ++k) {
        worst = std::max(worst, (a.states[k * stride] - b.states[k]).squaredNorm());
    }
    return worst;
}

}  // namespace

void fill_empirical_orders(std::vector<ConvergenceRow>& rows) {
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double prev = rows[i - 1].strong_error_sq;
        const double cur = rows[i].strong_error_sq;
        if (prev > 0.0 && cur > 0.0) {
            rows[i].empirical_order =
                std::log2(prev / cur) / std::log2(rows[i - 1].stepsize / rows[i].stepsize);
        }
    }
}

std::vector<ConvergenceRow> strong_error_exact(const Problem& problem, SchemeConfig config,
                                               const std::vector<double>& deltas,
                                               std::size_t n_paths, std::uint64_t seed,
                                               const ExperimentOptions& options) {
    if (!problem.has_exact()) {
        throw ConfigError("problem " + problem.id + " has no closed-form solution");
    }
    check_rows(problem, config, deltas);
    if (n_paths == 0) throw ConfigError("at least one path is required");
    const double fine_delta = deltas.back();
    std::vector<std::size_t> factors;
    for (double d : deltas) factors.push_back(dyadic_factor(d, fine_delta));

    // errors[row][path]; filled independently per path, reduced in order.
    std::vector<std::vector<double>> errors(deltas.size(), std::vector<double>(n_paths, 0.0));
    for_each_path(n_paths, resolve_workers(options), [&](std::size_t i) {
        const BrownianGrid fine =
            sample_grid(rng::derive_stream_seed(seed, i), config.horizon, fine_delta,
                        problem.dim_noise);
        for (std::size_t row = 0; row < deltas.size(); ++row) {
            const BrownianGrid grid = coarsen(fine, factors[row]);
            SchemeConfig row_config = config;
            row_config.stepsize = deltas[row];
            const PathResult path = simulate_path(problem, row_config, grid);
            const std::vector<Vec> w = path_values(grid);
            double worst = 0.0;
            for (std::size_t k = 0; k < path.states.size(); ++k) {
                const Vec exact =
                    problem.exact_solution(static_cast<double>(k) * deltas[row], w[k]);
                worst = std::max(worst, (exact - path.states[k]).squaredNorm());
            }
            errors[row][i] = worst;
        }
    });

    std::vector<ConvergenceRow> rows;
    for (std::size_t row = 0; row < deltas.size(); ++row) {
        const MeanStdErr stat = reduce_ordered(errors[row]);
        rows.push_back({deltas[row], n_paths, stat.mean, stat.std_error, std::nullopt});
    }
    fill_empirical_orders(rows);
    return rows;
}

std::vector<ConvergenceRow> strong_error_self(const Problem& problem, SchemeConfig config,
                                              const std::vector<double>& deltas, int refinement,
                                              std::size_t n_paths, std::uint64_t seed,
                                              const ExperimentOptions& options) {
    if (refinement < 0) throw ConfigError("refinement must be nonnegative");
    check_rows(problem, config, deltas);
    if (n_paths == 0) throw ConfigError("at least one path is required");
    const double ref_delta = deltas.back() / static_cast<double>(1u << refinement);
    SchemeConfig ref_config = config;
    ref_config.stepsize = ref_delta;
    require_admissible(problem, ref_config);
    std::vector<std::size_t> factors;
    for (double d : deltas) factors.push_back(dyadic_factor(d, ref_delta));

    std::vector<std::vector<double>> errors(deltas.size(), std::vector<double>(n_paths, 0.0));
    for_each_path(n_paths, resolve_workers(options), [&](std::size_t i) {
        const BrownianGrid ref_grid =
            sample_grid(rng::derive_stream_seed(seed, i), config.horizon, ref_delta,
                        problem.dim_noise);
        const PathResult ref_path = simulate_path(problem, ref_config, ref_grid);
        const double ref_sum = terminal_checksum(ref_grid);
        for (std::size_t row = 0; row < deltas.size(); ++row) {
            const BrownianGrid grid = coarsen(ref_grid, factors[row]);
            const double coarse_sum = terminal_checksum(grid);
            if (std::abs(coarse_sum - ref_sum) > 1e-12 * std::max(1.0, std::abs(ref_sum))) {
                throw std::logic_error("coupled grids disagree at the terminal time");
            }
            SchemeConfig row_config = config;
            row_config.stepsize = deltas[row];
            const PathResult path = simulate_path(problem, row_config, grid);
            errors[row][i] = sup_gap_sq(ref_path, path, factors[row]);
        }
    });

    std::vector<ConvergenceRow> rows;
    for (std::size_t row = 0; row < deltas.size(); ++row) {
        const MeanStdErr stat = reduce_ordered(errors[row]);
        rows.push_back({deltas[row], n_paths, stat.mean, stat.std_error, std::nullopt});
    }
    fill_empirical_orders(rows);
    return rows;
}

MomentRow sup_moment(const Problem& problem, SchemeConfig config, double delta, double p,
                     std::size_t n_paths, std::uint64_t seed, const ExperimentOptions& options) {
    if (!(p >= 2.0)) throw ConfigError("moment order p must be >= 2");
    check_rows(problem, config, {delta});
    if (n_paths == 0) throw ConfigError("at least one path is required");
    config.stepsize = delta;

    std::vector<double> values(n_paths, 0.0);
    for_each_path(n_paths, resolve_workers(options), [&](std::size_t i) {
        const BrownianGrid grid = sample_grid(rng::derive_stream_seed(seed, i), config.horizon,
                                              delta, problem.dim_noise);
        const PathResult path = simulate_path(problem, config, grid);
        values[i] = std::pow(path.sup_norm, p);
    });
    const MeanStdErr stat = reduce_ordered(values);
    return {delta, p, stat.mean, stat.std_error};
}

ExitProbabilityResult exit_probability(const Problem& problem, SchemeConfig config, double delta,
                                       double radius, double p, std::size_t n_paths,
                                       std::uint64_t seed, const ExperimentOptions& options) {
    if (!(radius > 0.0)) throw ConfigError("exit radius must be positive");
    if (!(p >= 2.0)) throw ConfigError("moment order p must be >= 2");
    check_rows(problem, config, {delta});
    if (n_paths == 0) throw ConfigError("at least one path is required");
    config.stepsize = delta;

    std::vector<double> exits(n_paths, 0.0);
    std::vector<double> moments(n_paths, 0.0);
    for_each_path(n_paths, resolve_workers(options), [&](std::size_t i) {
        const BrownianGrid grid = sample_grid(rng::derive_stream_seed(seed, i), config.horizon,
                                              delta, problem.dim_noise);
        const PathResult path = simulate_path(problem, config, grid);
        exits[i] = first_exit(path, radius) ? 1.0 : 0.0;
        moments[i] = std::pow(path.sup_norm, p);
    });
    const MeanStdErr frac = reduce_ordered(exits);
    const MeanStdErr moment = reduce_ordered(moments);
    ExitProbabilityResult result;
    result.estimate = frac.mean;
    result.std_error = std::sqrt(frac.mean * (1.0 - frac.mean) / static_cast<double>(n_paths));
    result.chebyshev_bound = moment.mean / std::pow(radius, p);
    return result;
}

std::string format_convergence_table(const std::vector<ConvergenceRow>& rows) {
    std::ostringstream out;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%14s %16s %12s %8s\n", "delta", "strong_error_sq",
                  "std_error", "order");
    out << buf;
    for (const auto& row : rows) {
        if (row.empirical_order) {
            std::snprintf(buf, sizeof(buf), "%14.8g %16.8g %12.4g %8.3f\n", row.stepsize,
                          row.strong_error_sq, row.std_error, *row.empirical_order);
        } else {
            std::snprintf(buf, sizeof(buf), "%14.8g %16.8g %12.4g %8s\n", row.stepsize,
                          row.strong_error_sq, row.std_error, "-");
        }
        out << buf;
    }
    return out.str();
}

std::string format_moment_table(const std::vector<MomentRow>& rows) {
    std::ostringstream out;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%14s %6s %16s %12s\n", "delta", "p", "sup_moment",
                  "std_error");
    out << buf;
    for (const auto& row : rows) {
        std::snprintf(buf, sizeof(buf), "%14.8g %6.3g %16.8g %12.4g\n", row.stepsize, row.p,
                      row.sup_moment, row.std_error);
        out << buf;
    }
    return out.str();
}

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

void write_csv(std::ostream& out, const std::vector<std::string>& config_comments,
               const std::vector<CsvRow>& rows) {
    for (const auto& comment : config_comments) out << "# " << comment << "\n";
    out << "experiment,theta,delta,n_paths,value,std_error,order,radius,seed\n";
    for (const auto& row : rows) {
        out << row.experiment << "," << format_double(row.theta) << ","
            << format_double(row.delta) << "," << row.n_paths << "," << format_double(row.value)
            << "," << format_double(row.std_error) << ","
            << (row.order ? format_double(*row.order) : "") << "," << format_double(row.radius)
            << "," << row.seed << "\n";
    }
}

}  // namespace thetaem
