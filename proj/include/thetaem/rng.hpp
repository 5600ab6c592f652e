#pragma once

#include <cstdint>

namespace thetaem::rng {

// Counter-based generator: a 10-round Philox-style 2x64 mixing function.
// Every random number in the library is a pure function of (key, counter),
// so streams can be partitioned by counter offset and regenerated exactly,
// independent of evaluation order or thread count.

struct Block {
    std::uint64_t x0;
    std::uint64_t x1;
};

/// 10-round 2x64 counter block. Multiplier and Weyl constants are fixed;
/// the output stream is part of the library's reproducibility contract.
Block philox2x64(std::uint64_t key, std::uint64_t ctr_hi, std::uint64_t ctr_lo);

/// Map 64 random bits to a double in the open interval (0, 1), 53-bit grid.
double uniform01(std::uint64_t bits);

/// Inverse standard normal CDF. Hastings rational initial estimate refined
/// by three Newton steps on erfc; absolute error near machine precision.
double inverse_normal_cdf(double p);

/// N(0,1) draw at a counter: inverse-CDF transform of the block's first word.
double standard_normal(std::uint64_t key, std::uint64_t ctr_hi, std::uint64_t ctr_lo);

/// Derive the seed of substream `index` (e.g. one Monte Carlo path) from a
/// master seed. Uses a reserved counter plane so substream seeds never
/// collide with increment draws.
std::uint64_t derive_stream_seed(std::uint64_t seed, std::uint64_t index);

// Counter planes (ctr_hi). Keeps the independent uses of one key disjoint.
inline constexpr std::uint64_t kPlaneIncrements = 0;
inline constexpr std::uint64_t kPlaneStreams = 1;
inline constexpr std::uint64_t kPlaneStates = 2;
inline constexpr std::uint64_t kPlanePairs = 3;

}  // namespace thetaem::rng
