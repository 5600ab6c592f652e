#pragma once

#include "thetaem/problem.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace thetaem {

/// Seeded Brownian increments on the uniform grid t_k = k * stepsize,
/// k = 0..M-1 with M = floor(T / stepsize). Increment k is the m-vector
/// W(t_{k+1}) - W(t_k). Immutable after creation; regeneration from the same
/// (seed, T, stepsize, m) reproduces the array exactly.
struct BrownianGrid {
    std::uint64_t seed = 0;
    double horizon = 0.0;
    double stepsize = 0.0;
    int dim_noise = 1;
    std::vector<double> increments;  // row k = increment k, m contiguous doubles

    std::size_t steps() const {
        return dim_noise > 0 ? increments.size() / static_cast<std::size_t>(dim_noise) : 0;
    }
    Eigen::Map<const Vec> increment(std::size_t k) const {
        return Eigen::Map<const Vec>(increments.data() + k * static_cast<std::size_t>(dim_noise),
                                     dim_noise);
    }
};

/// Increment coordinates are independent N(0, stepsize) draws from the
/// counter stream of `seed`.
BrownianGrid sample_grid(std::uint64_t seed, double horizon, double stepsize, int dim_noise);

/// Exact dyadic coarsening: output increment j is the left-to-right sum of
/// input increments [j*factor, (j+1)*factor). The coarse grid represents the
/// same Brownian path sampled coarser. `factor` must be a power of two that
/// divides the increment count.
BrownianGrid coarsen(const BrownianGrid& grid, std::size_t factor);

/// Prefix sums W(t_0)..W(t_M) with W(0) = 0; M+1 entries.
std::vector<Vec> path_values(const BrownianGrid& grid);

/// Binary dump/load for experiment resumption. Header: seed, horizon,
/// stepsize, dim_noise, increment count; payload: little-endian 64-bit
/// floats.
void save_grid(const BrownianGrid& grid, std::ostream& out);
BrownianGrid load_grid(std::istream& in);
void save_grid_file(const BrownianGrid& grid, const std::string& path);
BrownianGrid load_grid_file(const std::string& path);

}  // namespace thetaem
