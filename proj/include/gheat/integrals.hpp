#pragma once

#include <functional>
#include <vector>

#include "gheat/grid.hpp"
#include "gheat/noise.hpp"
#include "gheat/stats.hpp"

namespace gheat::integrals {

// Coefficient of a simple-field piece. Adapted pieces must only read noise
// increments with time index strictly below the piece's time cell.
using Coefficient = std::function<double(const noise::NoiseRealization&)>;

struct FieldPiece {
    int time_cell = 0;
    int j0 = 0, j1 = 0;  // half-open space-cell range
    Coefficient coeff;
};

// Adapted step random field sum_pieces X_i 1_[t_i,t_{i+1}) 1_[x_{j0},x_{j1}).
struct SimpleRandomField {
    GridSpec grid;
    std::vector<FieldPiece> pieces;
};

SimpleRandomField make_simple_field(const GridSpec& grid,
                                    std::vector<FieldPiece> pieces);

// Step-field value at cell (i,j) under realization w (0 off the support).
double value_at(const SimpleRandomField& field, const noise::NoiseRealization& w,
                int i, int j);

double stochastic_integral(const SimpleRandomField& field,
                           const noise::NoiseRealization& w);

// Anticipating coefficients are allowed here.
double bochner_integral(const SimpleRandomField& field,
                        const noise::NoiseRealization& w);

struct DeterministicKernel {
    std::function<double(double, double)> h;  // h(t, x)
    double l2_norm_sq = 0.0;                  // per-cell Gauss quadrature
    double l2_midpoint_sq = 0.0;              // midpoint sum matching I_h
};

DeterministicKernel make_kernel(const GridSpec& grid,
                                std::function<double(double, double)> h);

// I_h(field) with h evaluated at cell centers.
double kernel_weighted_integral(const DeterministicKernel& h,
                                const SimpleRandomField& field,
                                const noise::NoiseRealization& w);

struct EnsembleSpec {
    GridSpec grid;
    std::vector<noise::VolatilityControl> controls;
    int realizations = 0;
    std::uint64_t master_seed = 0;
};

// sup over grid cells of the max-over-scenarios MC second moment of the
// field value, with the stderr of the attaining (scenario, cell).
stats::MeanStderr empirical_s2_norm(const SimpleRandomField& field,
                                    const EnsembleSpec& ensemble);

// Future-perturbation adaptedness probe: re-draws all increments with time
// index >= each piece's time cell and checks the coefficient is unchanged.
bool is_adapted(const SimpleRandomField& field,
                const noise::VolatilityControl& control,
                const rng::SeedPath& seed_path);

}  // namespace gheat::integrals
