#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gheat/grid.hpp"
#include "gheat/rng.hpp"

namespace gheat::noise {

struct SigmaBounds {
    double lo = 0.0;
    double hi = 0.0;
};

inline SigmaBounds make_bounds(double lo, double hi) {
    if (!(lo >= 0.0 && hi >= lo && hi > 0.0))
        throw std::invalid_argument("SigmaBounds: need 0 <= lo <= hi, hi > 0");
    return {lo, hi};
}

enum class ControlKind { constant, bang_bang_random, feedback };

// Adapted, piecewise-constant volatility field sigma(t,x) in [lo,hi].
// Cell values are produced lazily while sampling so the feedback kind can
// read a past-field summary without storing the whole matrix up front.
struct VolatilityControl {
    GridSpec grid;
    SigmaBounds bounds;
    ControlKind kind = ControlKind::constant;
    double constant_value = 0.0;
    std::uint64_t control_seed = 0;
    std::string id;
};

VolatilityControl make_control(const GridSpec& grid, const SigmaBounds& bounds,
                               ControlKind kind, double constant_value,
                               std::uint64_t seed);

struct NoiseRealization {
    GridSpec grid;
    std::string control_id;
    rng::SeedPath seed_path;
    std::vector<double> increments;  // nt x nx, row-major
    std::vector<double> sigma;       // sigma actually applied per cell

    double at(int i, int j) const { return increments[i * grid.nx + j]; }
    double sigma_at(int i, int j) const { return sigma[i * grid.nx + j]; }
};

// Raw standard-normal draws for every cell, keyed by the seed path.
std::vector<double> sample_xi(const GridSpec& grid, const rng::SeedPath& seed_path);

// Past-field summary for the feedback control: value at time row i, cell
// column j, which must depend only on increments with time index < i.
using SummaryFn = std::function<double(int i, int j)>;

// Applies a control to pre-drawn normals. If the control is feedback and no
// summary is given, the realization's own cumulative column sums are used.
NoiseRealization modulate(const VolatilityControl& control,
                          const rng::SeedPath& seed_path,
                          const std::vector<double>& xi,
                          const SummaryFn& summary = nullptr);

NoiseRealization sample_noise(const GridSpec& grid, const VolatilityControl& control,
                              const rng::SeedPath& seed_path);

// Sum of increments over the rectangle, in fixed row-major order.
double rect_value(const NoiseRealization& w, const GridRect& rect);

// Default scenario dictionary: five constants between lo and hi, one
// bang-bang control and one feedback control.
std::vector<VolatilityControl> default_dictionary(const GridSpec& grid,
                                                  const SigmaBounds& bounds,
                                                  std::uint64_t seed);

}  // namespace gheat::noise
