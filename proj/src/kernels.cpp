#include "gheat/kernels.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "gheat/parallel.hpp"
#include "gheat/quadrature.hpp"

namespace gheat::kernels {

namespace {

constexpr double kPi = std::numbers::pi;

double crossover_time(double L) { return L * L / kPi; }

void check_green_args(double t, double x, double y, double L, double tol) {
    if (!(t > 0.0)) throw std::domain_error("green_neumann: t must be positive");
    if (!(L > 0.0)) throw std::domain_error("green_neumann: L must be positive");
    if (x < 0.0 || x > L || y < 0.0 || y > L)
        throw std::domain_error("green_neumann: x, y must lie in [0,L]");
    if (!(tol > 0.0)) throw std::domain_error("green_neumann: tol must be positive");
}

}  // namespace

double heat_kernel(double t, double x) {
    if (!(t > 0.0)) throw std::domain_error("heat_kernel: t must be positive");
    return std::exp(-x * x / (4.0 * t)) / std::sqrt(4.0 * kPi * t);
}

KernelEval green_neumann_image(double t, double x, double y, double L, double tol) {
    check_green_args(t, x, y, L, tol);
    double sum = heat_kernel(t, x - y) + heat_kernel(t, x + y);
    int terms = 2;
    for (int n = 1;; ++n) {
        const double tn = 2.0 * n * L;
        sum += heat_kernel(t, x - y - tn) + heat_kernel(t, x + y - tn) +
               heat_kernel(t, x - y + tn) + heat_kernel(t, x + y + tn);
        terms += 4;
        // Terms beyond |n| have |argument| >= 2 n L, geometric decay in n.
        const double bound_term = heat_kernel(t, 2.0 * n * L);
        const double ratio = std::exp(-(8.0 * n + 4.0) * L * L / (4.0 * t));
        const double tail = 4.0 * bound_term / (1.0 - ratio);
        if (tail < tol && n >= 1) break;
        if (n > 10000) break;
    }
    return {sum, Representation::image_sum, terms};
}

KernelEval green_neumann_spectral(double t, double x, double y, double L,
                                  double tol) {
    check_green_args(t, x, y, L, tol);
    double sum = 1.0 / L;
    int terms = 1;
    const double q = kPi * kPi * t / (L * L);
    for (int n = 1;; ++n) {
        sum += (2.0 / L) * std::cos(n * kPi * x / L) * std::cos(n * kPi * y / L) *
               std::exp(-double(n) * n * q);
        ++terms;
        const double head = std::exp(-double(n + 1) * (n + 1) * q);
        const double tail = (2.0 / L) * head / (1.0 - std::exp(-(2.0 * n + 3.0) * q));
        if (tail < tol) break;
        if (n > 100000)
            throw std::runtime_error("green_neumann_spectral: series too slow");
    }
    return {sum, Representation::spectral, terms};
}

KernelEval green_neumann(double t, double x, double y, double L, double tol) {
    check_green_args(t, x, y, L, tol);
    if (t <= crossover_time(L)) return green_neumann_image(t, x, y, L, tol);
    return green_neumann_spectral(t, x, y, L, tol);
}

double p_increment_x_sq_integral(double t, double delta) {
    if (!(t > 0.0))
        throw std::domain_error("p_increment_x_sq_integral: t must be positive");
    if (delta < 0.0)
        throw std::domain_error("p_increment_x_sq_integral: delta must be >= 0");
    if (delta == 0.0) return 0.0;
    // Gaussian product reduction collapses the y-integral:
    //   int |p(u, y+delta) - p(u, y)|^2 dy = 2 p(2u, 0) - 2 p(2u, delta),
    // then substitute u = v^2 to remove the 1/sqrt(u) endpoint singularity.
    const double c0 = 4.0 / std::sqrt(8.0 * kPi);
    auto f = [&](double v) {
        if (v == 0.0) return c0;
        return c0 - 4.0 * v * heat_kernel(2.0 * v * v, delta);
    };
    return quad::adaptive(f, 0.0, std::sqrt(t), 1e-12);
}

double p_increment_t_sq_integral(double delta) {
    if (delta < 0.0)
        throw std::domain_error("p_increment_t_sq_integral: delta must be >= 0");
    return (std::sqrt(2.0) - 1.0) * std::sqrt(delta / (2.0 * kPi));
}

double p_increment_t_sq_integral_quad(double delta) {
    if (delta < 0.0)
        throw std::domain_error("p_increment_t_sq_integral_quad: delta must be >= 0");
    if (delta == 0.0) return 0.0;
    // With u the time lag, the y-integral reduces to
    //   p(2u,0) + p(2u+2 delta,0) - 2 p(2u+delta,0);
    // substitute u = v^2 (the p(2u,0) part becomes an exact constant).
    const double c0 = 2.0 / std::sqrt(8.0 * kPi);
    auto f = [&](double v) {
        const double u = v * v;
        double s = c0;
        s += 2.0 * v / std::sqrt(4.0 * kPi * (2.0 * u + 2.0 * delta));
        s -= 4.0 * v / std::sqrt(4.0 * kPi * (2.0 * u + delta));
        return s;
    };
    const double U = 100.0 * std::max(delta, 1.0);
    const double body = quad::adaptive(f, 0.0, std::sqrt(U), 1e-12);
    // Analytic tail from the elementary antiderivative, written in a
    // cancellation-free form.
    const double a = std::sqrt(2.0 * U);
    const double b = std::sqrt(2.0 * U + 2.0 * delta);
    const double c = std::sqrt(2.0 * U + delta);
    const double tail =
        2.0 * delta * delta / ((a + b) * (b + c) * (a + c) * std::sqrt(4.0 * kPi));
    return body + tail;
}

double p_tail_sq_integral(double delta) {
    if (delta < 0.0)
        throw std::domain_error("p_tail_sq_integral: delta must be >= 0");
    return std::sqrt(delta / (2.0 * kPi));
}

double p_tail_sq_integral_quad(double delta) {
    if (delta < 0.0)
        throw std::domain_error("p_tail_sq_integral_quad: delta must be >= 0");
    if (delta == 0.0) return 0.0;
    auto f = [&](double v) { return 2.0 * v * (v > 0.0 ? heat_kernel(2.0 * v * v, 0.0)
                                                       : 0.0); };
    auto g = [&](double v) {
        if (v == 0.0) return 2.0 / std::sqrt(8.0 * kPi);
        return f(v);
    };
    return quad::adaptive(g, 0.0, std::sqrt(delta), 1e-13);
}

double p_cell_integral_x(double tau, double x, double y0, double y1) {
    const double s = 2.0 * std::sqrt(tau);
    return 0.5 * (std::erf((x - y0) / s) - std::erf((x - y1) / s));
}

double cell_averaged_p_weight(const GridSpec& grid, int i_src, int j_src,
                              double t_eval, double x_eval) {
    if (i_src < 0 || i_src >= grid.nt || j_src < 0 || j_src >= grid.nx)
        throw std::out_of_range("cell_averaged_p_weight: source cell out of range");
    const double t0 = grid.t(i_src);
    if (!(t_eval > t0))
        throw std::domain_error("cell_averaged_p_weight: causality violation");
    const double s_hi = std::min(grid.t(i_src + 1), t_eval);
    const double tau = t_eval - 0.5 * (t0 + s_hi);
    const double spatial =
        p_cell_integral_x(tau, x_eval, grid.x(j_src), grid.x(j_src + 1));
    return (s_hi - t0) * spatial / (grid.dt * grid.dx);
}

PWeightTable make_p_weight_table(const GridSpec& grid) {
    PWeightTable tab;
    tab.grid = grid;
    tab.nx = grid.nx;
    tab.w.assign(static_cast<std::size_t>(grid.nt) * (2 * grid.nx + 1), 0.0);
    parallel::for_range(grid.nt, [&](int row) {
        const int di = row + 1;
        const double tau = di * grid.dt - 0.5 * grid.dt;
        for (int dj = -grid.nx; dj <= grid.nx; ++dj) {
            const double spatial =
                p_cell_integral_x(tau, dj * grid.dx, 0.0, grid.dx);
            tab.w[(di - 1) * (2 * grid.nx + 1) + dj + grid.nx] = spatial / grid.dx;
        }
    });
    return tab;
}

double green_neumann_cell_integral_y(double tau, double x, double y0, double y1,
                                     double L, double tol) {
    if (!(tau > 0.0))
        throw std::domain_error("green_neumann_cell_integral_y: tau must be > 0");
    if (tau <= crossover_time(L)) {
        const double s = 2.0 * std::sqrt(tau);
        auto direct = [&](double center) {
            return 0.5 * (std::erf((center - y0) / s) - std::erf((center - y1) / s));
        };
        auto mirrored = [&](double center) {
            return 0.5 * (std::erf((center + y1) / s) - std::erf((center + y0) / s));
        };
        double sum = direct(x) + mirrored(x);
        for (int n = 1;; ++n) {
            const double tn = 2.0 * n * L;
            sum += direct(x - tn) + mirrored(x - tn) + direct(x + tn) +
                   mirrored(x + tn);
            const double bound_term = (y1 - y0) * heat_kernel(tau, 2.0 * n * L);
            const double ratio = std::exp(-(8.0 * n + 4.0) * L * L / (4.0 * tau));
            if (4.0 * bound_term / (1.0 - ratio) < tol) break;
            if (n > 10000) break;
        }
        return sum;
    }
    double sum = (y1 - y0) / L;
    const double q = kPi * kPi * tau / (L * L);
    for (int n = 1;; ++n) {
        sum += (2.0 / (n * kPi)) * std::cos(n * kPi * x / L) *
               (std::sin(n * kPi * y1 / L) - std::sin(n * kPi * y0 / L)) *
               std::exp(-double(n) * n * q);
        const double head = std::exp(-double(n + 1) * (n + 1) * q);
        if ((4.0 / (n * kPi)) * head / (1.0 - std::exp(-(2.0 * n + 3.0) * q)) < tol)
            break;
        if (n > 100000)
            throw std::runtime_error("green_neumann_cell_integral_y: series too slow");
    }
    return sum;
}

GWeightTable make_g_weight_table(const GridSpec& grid, double tol) {
    if (std::fabs(grid.x_lo) > 1e-300)
        throw std::invalid_argument("make_g_weight_table: domain must start at 0");
    GWeightTable tab;
    tab.grid = grid;
    tab.L = grid.x_hi - grid.x_lo;
    tab.w.assign(static_cast<std::size_t>(grid.nt) * (grid.nx + 1) * grid.nx, 0.0);
    parallel::for_range(grid.nt, [&](int row) {
        const int di = row + 1;
        const double tau = di * grid.dt - 0.5 * grid.dt;
        for (int j = 0; j <= grid.nx; ++j) {
            const double x = grid.x(j);
            for (int l = 0; l < grid.nx; ++l) {
                const double v = green_neumann_cell_integral_y(
                    tau, x, grid.x(l), grid.x(l + 1), tab.L, tol);
                tab.w[((di - 1) * (grid.nx + 1) + j) * grid.nx + l] = v / grid.dx;
            }
        }
    });
    return tab;
}

}  // namespace gheat::kernels
