#pragma once

#include <vector>

#include "gheat/grid.hpp"

namespace gheat::kernels {

enum class Representation { image_sum, spectral };

struct KernelEval {
    double value = 0.0;
    Representation representation_used = Representation::image_sum;
    int truncation_terms = 1;
};

// Gaussian heat kernel p(t,x) = (4*pi*t)^{-1/2} exp(-x^2/(4t)), t > 0.
double heat_kernel(double t, double x);

// Neumann Green's function on [0,L]: image sum for small t, cosine series for
// large t, with crossover at t* = L^2/pi. Truncation chosen so the analytic
// tail bound is below tol.
KernelEval green_neumann(double t, double x, double y, double L, double tol);

// Integral over the given representation only (used by cross-checking tests).
KernelEval green_neumann_image(double t, double x, double y, double L, double tol);
KernelEval green_neumann_spectral(double t, double x, double y, double L, double tol);

// int_0^t int_R |p(t-s, x+delta-y) - p(t-s, x-y)|^2 dy ds  (<= delta/2).
double p_increment_x_sq_integral(double t, double delta);

// int over all past s of int_R |p(t+delta-s,.) - p(t-s,.)|^2 dy ds,
// closed form (sqrt(2)-1) sqrt(delta/(2*pi)).
double p_increment_t_sq_integral(double delta);
// Independent quadrature route for the same quantity.
double p_increment_t_sq_integral_quad(double delta);

// int_t^{t+delta} int_R |p(t+delta-s, x-y)|^2 dy ds = sqrt(delta/(2*pi)).
double p_tail_sq_integral(double delta);
double p_tail_sq_integral_quad(double delta);

// Cell-averaged heat-kernel weight:
// (1/(dt*dx)) int_{cell(i_src,j_src)} p(t_eval - s, x_eval - y) dy ds,
// with the spatial integral exact (erf) and the time integral by midpoint.
double cell_averaged_p_weight(const GridSpec& grid, int i_src, int j_src,
                              double t_eval, double x_eval);

// Exact spatial integral of p over [y0,y1) at time lag tau, evaluated at x.
double p_cell_integral_x(double tau, double x, double y0, double y1);

// Exact spatial integral of the Neumann Green's function over [y0,y1).
double green_neumann_cell_integral_y(double tau, double x, double y0, double y1,
                                     double L, double tol);

// Translation-invariant table of cell-averaged heat-kernel weights:
// weight(di, dj) for evaluation node (t_i, x_j) and source cell (k, l) with
// di = i - k >= 1 and dj = j - l in [-nx, nx].
struct PWeightTable {
    GridSpec grid;
    int nx = 0;
    std::vector<double> w;  // (nt) x (2*nx+1), row di-1
    double at(int di, int dj) const { return w[(di - 1) * (2 * nx + 1) + dj + nx]; }
};

PWeightTable make_p_weight_table(const GridSpec& grid);

// Cell-averaged Neumann Green weights G(di, j, l) on [0,L] with evaluation
// nodes x_j = j*dx (j = 0..nx) and source cells [x_l, x_{l+1}).
struct GWeightTable {
    GridSpec grid;
    double L = 0.0;
    std::vector<double> w;  // nt x (nx+1) x nx, row di-1
    double at(int di, int j, int l) const {
        return w[((di - 1) * (grid.nx + 1) + j) * grid.nx + l];
    }
};

GWeightTable make_g_weight_table(const GridSpec& grid, double tol = 1e-12);

}  // namespace gheat::kernels
