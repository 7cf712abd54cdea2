#pragma once

#include <functional>
#include <string>
#include <vector>

#include "gheat/grid.hpp"
#include "gheat/identities.hpp"
#include "gheat/integrals.hpp"
#include "gheat/kernels.hpp"
#include "gheat/noise.hpp"

namespace gheat::linear_she {

// One realization of the solution field on grid nodes.
struct FieldPath {
    GridSpec grid;
    std::vector<double> values;  // (nt+1) x (nx+1), row-major
    std::string scenario_id;
    rng::SeedPath seed_path;

    double at(int i, int j) const { return values[i * (grid.nx + 1) + j]; }
    double& at(int i, int j) { return values[i * (grid.nx + 1) + j]; }
};

// Deterministic part int u0(y) p(t_i, x_j - y) dy by 4-point Gauss per cell.
std::vector<double> heat_flow_part(const std::function<double(double)>& u0,
                                   const GridSpec& grid);

// Stochastic convolution Z(t_i, x_j) at a single node.
double z_at(const noise::NoiseRealization& w, const kernels::PWeightTable& table,
            int i, int j);

FieldPath solve_linear(const std::function<double(double)>& u0, const GridSpec& grid,
                       const noise::NoiseRealization& w,
                       const kernels::PWeightTable& table);

FieldPath solve_linear(const std::function<double(double)>& u0, const GridSpec& grid,
                       const noise::NoiseRealization& w);

// Grid transcription of the weak-form identity; returns |residual|.
double weak_form_residual(const FieldPath& u, const identities::TestFunction& phi,
                          const std::function<double(double)>& u0,
                          const noise::NoiseRealization& w);

struct MomentRow {
    double delta = 0.0;
    double empirical_upper = 0.0;  // max over scenarios of MC mean |dZ|^2
    double stderr_ = 0.0;          // stderr of the attaining scenario
    double bound = 0.0;            // Lemma-type bound
    std::string attaining_scenario;
};

enum class IncrementAxis { space, time };

// Empirical upper second moments of Z increments against the closed-form
// bounds (sigma_hi^2/2 * delta for space, sigma_hi^2 sqrt(delta/pi) for time).
std::vector<MomentRow> z_increment_moments(const integrals::EnsembleSpec& ensemble,
                                           const kernels::PWeightTable& table,
                                           double t, double x,
                                           const std::vector<double>& delta_list,
                                           IncrementAxis axis);

// Discrete variance sum sum_w w^2 dt dx for Z(t_i, x_j) under sigma == 1.
double z_weight_sum_sq(const kernels::PWeightTable& table, int i, int j);

}  // namespace gheat::linear_she
