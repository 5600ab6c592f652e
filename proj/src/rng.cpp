#include "thetaem/rng.hpp"

#include <cmath>
#include <limits>

namespace thetaem::rng {

namespace {

constexpr std::uint64_t kMultiplier = 0xD2B74407B1CE6E93ull;
constexpr std::uint64_t kWeyl = 0x9E3779B97F4A7C15ull;

inline void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi, std::uint64_t& lo) {
    unsigned __int128 prod = static_cast<unsigned __int128>(a) * b;
    hi = static_cast<std::uint64_t>(prod >> 64);
    lo = static_cast<std::uint64_t>(prod);
}

constexpr double kInvSqrt2 = 0.7071067811865475244;
constexpr double kNormalPdfScale = 0.3989422804014326779;  // 1/sqrt(2 pi)

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }
inline double normal_pdf(double x) { return kNormalPdfScale * std::exp(-0.5 * x * x); }

}  // namespace

Block philox2x64(std::uint64_t key, std::uint64_t ctr_hi, std::uint64_t ctr_lo) {
    std::uint64_t x0 = ctr_hi;
    std::uint64_t x1 = ctr_lo;
    std::uint64_t k = key;
    for (int round = 0; round < 10; ++round) {
        std::uint64_t hi, lo;
        mulhilo(kMultiplier, x0, hi, lo);
        x0 = hi ^ k ^ x1;
        x1 = lo;
        k += kWeyl;
    }
    return {x0, x1};
}

double uniform01(std::uint64_t bits) {
    // 52-bit grid shifted to the cell midpoints. Both the shift and the
    // scaling are exact, so the result lies in [2^-53, 1 - 2^-53].
    return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

double inverse_normal_cdf(double p) {
    if (!(p > 0.0 && p < 1.0)) return std::numeric_limits<double>::quiet_NaN();
    const double pp = p < 0.5 ? p : 1.0 - p;
    // Hastings rational approximation in t = sqrt(-2 ln pp), |error| < 4.5e-4.
    const double t = std::sqrt(-2.0 * std::log(pp));
    double x = t - (2.515517 + t * (0.802853 + t * 0.010328)) /
                       (1.0 + t * (1.432788 + t * (0.189269 + t * 0.001308)));
    x = -x;  // lower-tail quantile of pp
    for (int i = 0; i < 3; ++i) {
        x -= (normal_cdf(x) - pp) / normal_pdf(x);
    }
    return p < 0.5 ? x : -x;
}

double standard_normal(std::uint64_t key, std::uint64_t ctr_hi, std::uint64_t ctr_lo) {
    return inverse_normal_cdf(uniform01(philox2x64(key, ctr_hi, ctr_lo).x0));
}

std::uint64_t derive_stream_seed(std::uint64_t seed, std::uint64_t index) {
    return philox2x64(seed, kPlaneStreams, index).x0;
}

}  // namespace thetaem::rng
