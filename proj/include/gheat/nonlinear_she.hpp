#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gheat/grid.hpp"
#include "gheat/identities.hpp"
#include "gheat/integrals.hpp"
#include "gheat/kernels.hpp"
#include "gheat/linear_she.hpp"
#include "gheat/noise.hpp"

namespace gheat::nonlinear_she {

using linear_she::FieldPath;

struct Coefficients {
    std::function<double(double)> a;   // noise coefficient
    std::function<double(double)> b;   // drift
    double lipschitz_a = 0.0;
    double lipschitz_b = 0.0;
    std::function<double(double)> u0;  // initial data on [0,L]
    std::optional<double> holder_alpha;
};

// Two-point sampled Lipschitz check against the declared constants.
void validate_coefficients(const Coefficients& coeffs, std::uint64_t seed = 17);

struct PicardTrace {
    std::vector<double> diffs;  // D_n over iterations
    std::optional<int> converged_at;
};

struct PicardResult {
    // fields[s][r] is the final iterate for scenario s, realization r;
    // noises[s][r] is the realization it solves the mild equation against.
    std::vector<std::vector<FieldPath>> fields;
    std::vector<std::vector<noise::NoiseRealization>> noises;
    PicardTrace trace;
    bool converged = false;
};

PicardResult picard_solve(const Coefficients& coeffs, const GridSpec& grid,
                          const integrals::EnsembleSpec& ensemble,
                          const kernels::GWeightTable& gtab, int n_max = 25,
                          double tol = 1e-6);

// Single-realization Picard iteration from a given initial iterate; used by
// the uniqueness probe. Returns the final field.
FieldPath picard_iterate_one(const Coefficients& coeffs, const GridSpec& grid,
                             const kernels::GWeightTable& gtab,
                             const noise::VolatilityControl& control,
                             const rng::SeedPath& seed_path, int n_max, double tol,
                             double initial_shift = 0.0);

// int u0(y) g(t_i, x_j, y) dy with u0 sampled at cell centers and the Green
// cell integral exact.
std::vector<double> green_flow_part(const std::function<double(double)>& u0,
                                    const GridSpec& grid, double tol = 1e-12);

// Max-node defect of the mild-form fixed point equation.
double mild_residual(const FieldPath& u, const Coefficients& coeffs,
                     const kernels::GWeightTable& gtab,
                     const noise::NoiseRealization& w);

// Same with a precomputed deterministic part (shared across realizations).
double mild_residual(const FieldPath& u, const Coefficients& coeffs,
                     const kernels::GWeightTable& gtab,
                     const noise::NoiseRealization& w,
                     const std::vector<double>& u0part);

struct ContractionReport {
    bool eventually_decreasing = false;
    bool log_concave_tail = false;
    double geometric_ratio = 0.0;  // median D_{n+1}/D_n over the tail
};

ContractionReport contraction_diagnostics(const PicardTrace& trace);

struct HolderRow {
    double delta = 0.0;
    double empirical_upper = 0.0;
    double stderr_ = 0.0;
};

struct HolderReport {
    std::vector<HolderRow> rows;
    double fitted_slope = 0.0;
    double target_exponent = 0.0;
};

// Log-log slope of upper second moments of solution increments at fixed
// time (space axis) or fixed position (time axis).
HolderReport holder_moment_diagnostics(const PicardResult& result,
                                       const std::vector<double>& delta_list,
                                       linear_she::IncrementAxis axis,
                                       double t_eval, double x_eval,
                                       double target_exponent);

double weak_form_residual_neumann(const FieldPath& u,
                                  const identities::TestFunction& phi,
                                  const Coefficients& coeffs,
                                  const noise::NoiseRealization& w);

}  // namespace gheat::nonlinear_she
