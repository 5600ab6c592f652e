#include "thetaem/brownian.hpp"

#include "thetaem/errors.hpp"
#include "thetaem/rng.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace thetaem {

BrownianGrid sample_grid(std::uint64_t seed, double horizon, double stepsize, int dim_noise) {
    if (!(horizon > 0.0)) throw ConfigError("horizon must be positive");
    if (!(stepsize > 0.0) || stepsize > horizon) {
        throw ConfigError("stepsize must lie in (0, horizon]");
    }
    if (dim_noise < 1) throw ConfigError("noise dimension must be positive");
    BrownianGrid grid;
    grid.seed = seed;
    grid.horizon = horizon;
    grid.stepsize = stepsize;
    grid.dim_noise = dim_noise;
    const auto steps = static_cast<std::size_t>(std::floor(horizon / stepsize + 1e-9));
    grid.increments.resize(steps * static_cast<std::size_t>(dim_noise));
    const double scale = std::sqrt(stepsize);
    for (std::size_t i = 0; i < grid.increments.size(); ++i) {
        grid.increments[i] = scale * rng::standard_normal(seed, rng::kPlaneIncrements, i);
    }
    return grid;
}

BrownianGrid coarsen(const BrownianGrid& grid, std::size_t factor) {
    if (factor == 0 || (factor & (factor - 1)) != 0) {
        throw ConfigError("coarsening factor must be a power of two");
    }
    const std::size_t steps = grid.steps();
    if (factor > steps || steps % factor != 0) {
        throw ConfigError("coarsening factor does not divide the increment count");
    }
    BrownianGrid out;
    out.seed = grid.seed;
    out.horizon = grid.horizon;
    out.stepsize = grid.stepsize * static_cast<double>(factor);
    out.dim_noise = grid.dim_noise;
    const auto m = static_cast<std::size_t>(grid.dim_noise);
    out.increments.assign(steps / factor * m, 0.0);
    // Left-to-right summation per coordinate keeps the result bit-reproducible.
    for (std::size_t j = 0; j < steps / factor; ++j) {
        for (std::size_t f = 0; f < factor; ++f) {
            const double* src = grid.increments.data() + (j * factor + f) * m;
            double* dst = out.increments.data() + j * m;
            for (std::size_t c = 0; c < m; ++c) dst[c] += src[c];
        }
    }
    return out;
}

std::vector<Vec> path_values(const BrownianGrid& grid) {
    const std::size_t steps = grid.steps();
    std::vector<Vec> values;
    values.reserve(steps + 1);
    values.push_back(Vec::Zero(grid.dim_noise));
    for (std::size_t k = 0; k < steps; ++k) {
        values.push_back(Vec(values.back() + grid.increment(k)));
    }
    return values;
}

namespace {

// On-disk layout is little-endian; that is all this library targets.
static_assert(std::endian::native == std::endian::little);

constexpr char kMagic[8] = {'T', 'E', 'M', 'B', 'G', '0', '1', '\0'};

template <typename T>
void write_raw(std::ostream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_raw(std::istream& in) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    return value;
}

}  // namespace

void save_grid(const BrownianGrid& grid, std::ostream& out) {
    out.write(kMagic, sizeof(kMagic));
    write_raw(out, grid.seed);
    write_raw(out, grid.horizon);
    write_raw(out, grid.stepsize);
    write_raw(out, static_cast<std::uint64_t>(grid.dim_noise));
    write_raw(out, static_cast<std::uint64_t>(grid.steps()));
    out.write(reinterpret_cast<const char*>(grid.increments.data()),
              static_cast<std::streamsize>(grid.increments.size() * sizeof(double)));
    if (!out) throw std::runtime_error("failed to write Brownian grid");
}

BrownianGrid load_grid(std::istream& in) {
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw std::runtime_error("not a Brownian grid dump");
    }
    BrownianGrid grid;
    grid.seed = read_raw<std::uint64_t>(in);
    grid.horizon = read_raw<double>(in);
    grid.stepsize = read_raw<double>(in);
    grid.dim_noise = static_cast<int>(read_raw<std::uint64_t>(in));
    const auto steps = read_raw<std::uint64_t>(in);
    grid.increments.resize(steps * static_cast<std::size_t>(grid.dim_noise));
    in.read(reinterpret_cast<char*>(grid.increments.data()),
            static_cast<std::streamsize>(grid.increments.size() * sizeof(double)));
    if (!in) throw std::runtime_error("truncated Brownian grid dump");
    return grid;
}

void save_grid_file(const BrownianGrid& grid, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    save_grid(grid, out);
}

BrownianGrid load_grid_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return load_grid(in);
}

}  // namespace thetaem
