#include "gheat/linear_she.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "gheat/parallel.hpp"
#include "gheat/quadrature.hpp"

namespace gheat::linear_she {

std::vector<double> heat_flow_part(const std::function<double(double)>& u0,
                                   const GridSpec& grid) {
    std::vector<double> vals((grid.nt + 1) * (grid.nx + 1), 0.0);
    for (int j = 0; j <= grid.nx; ++j) {
        const double v = u0(grid.x(j));
        if (!std::isfinite(v))
            throw std::invalid_argument("heat_flow_part: u0 not finite at a node");
        vals[j] = v;
    }
    parallel::for_range(grid.nt, [&](int row) {
        const int i = row + 1;
        const double t = grid.t(i);
        for (int j = 0; j <= grid.nx; ++j) {
            const double x = grid.x(j);
            double s = 0.0;
            for (int l = 0; l < grid.nx; ++l)
                s += quad::gauss4(
                    [&](double y) { return u0(y) * kernels::heat_kernel(t, x - y); },
                    grid.x(l), grid.x(l + 1));
            vals[i * (grid.nx + 1) + j] = s;
        }
    });
    return vals;
}

double z_at(const noise::NoiseRealization& w, const kernels::PWeightTable& table,
            int i, int j) {
    const GridSpec& g = w.grid;
    if (!g.same_as(table.grid))
        throw std::invalid_argument("z_at: weight table grid mismatch");
    if (i < 0 || i > g.nt || j < 0 || j > g.nx)
        throw std::out_of_range("z_at: node out of range");
    double s = 0.0;
    for (int k = 0; k < i; ++k)
        for (int l = 0; l < g.nx; ++l) s += table.at(i - k, j - l) * w.at(k, l);
    return s;
}

namespace {

void check_truncation(const GridSpec& grid) {
    const double half = 0.5 * (grid.x_hi - grid.x_lo);
    if (half < 8.0 * std::sqrt(grid.t_end))
        throw std::invalid_argument(
            "solve_linear: domain truncation narrower than 8*sqrt(t_end)");
}

}  // namespace

FieldPath solve_linear(const std::function<double(double)>& u0, const GridSpec& grid,
                       const noise::NoiseRealization& w,
                       const kernels::PWeightTable& table) {
    if (!grid.same_as(w.grid))
        throw std::invalid_argument("solve_linear: realization grid mismatch");
    check_truncation(grid);
    FieldPath u;
    u.grid = grid;
    u.scenario_id = w.control_id;
    u.seed_path = w.seed_path;
    u.values = heat_flow_part(u0, grid);
    bool has_noise = false;
    for (double v : w.increments)
        if (v != 0.0) {
            has_noise = true;
            break;
        }
    if (has_noise)
        for (int i = 1; i <= grid.nt; ++i)
            for (int j = 0; j <= grid.nx; ++j)
                u.at(i, j) += z_at(w, table, i, j);
    return u;
}

FieldPath solve_linear(const std::function<double(double)>& u0, const GridSpec& grid,
                       const noise::NoiseRealization& w) {
    return solve_linear(u0, grid, w, kernels::make_p_weight_table(grid));
}

double weak_form_residual(const FieldPath& u, const identities::TestFunction& phi,
                          const std::function<double(double)>& u0,
                          const noise::NoiseRealization& w) {
    const GridSpec& g = u.grid;
    if (!g.same_as(w.grid))
        throw std::invalid_argument("weak_form_residual: grid mismatch");
    double boundary = 0.0;
    for (int j = 0; j < g.nx; ++j)
        boundary += (u.at(g.nt, j) * phi.phi(g.t_end, g.x(j)) -
                     u0(g.x(j)) * phi.phi(0.0, g.x(j))) *
                    g.dx;
    double body = 0.0;
    for (int i = 0; i < g.nt; ++i)
        for (int j = 0; j < g.nx; ++j)
            body += u.at(i, j) *
                    (phi.phi_t(g.t(i), g.x(j)) + phi.phi_xx(g.t(i), g.x(j))) * g.dt *
                    g.dx;
    double pairing = 0.0;
    for (int i = 0; i < g.nt; ++i)
        for (int j = 0; j < g.nx; ++j) pairing += phi.phi(g.t(i), g.x(j)) * w.at(i, j);
    return std::fabs(boundary - body - pairing);
}

double z_weight_sum_sq(const kernels::PWeightTable& table, int i, int j) {
    const GridSpec& g = table.grid;
    double s = 0.0;
    for (int k = 0; k < i; ++k)
        for (int l = 0; l < g.nx; ++l) {
            const double wv = table.at(i - k, j - l);
            s += wv * wv;
        }
    return s * g.dt * g.dx;
}

std::vector<MomentRow> z_increment_moments(const integrals::EnsembleSpec& ensemble,
                                           const kernels::PWeightTable& table,
                                           double t, double x,
                                           const std::vector<double>& delta_list,
                                           IncrementAxis axis) {
    const GridSpec& g = ensemble.grid;
    if (!g.same_as(table.grid))
        throw std::invalid_argument("z_increment_moments: table grid mismatch");
    const auto node_t = [&](double tv) {
        const double fi = tv / g.dt;
        const int i = static_cast<int>(std::llround(fi));
        if (std::fabs(fi - i) > 1e-9 || i < 0 || i > g.nt)
            throw std::invalid_argument("z_increment_moments: time off grid");
        return i;
    };
    const auto node_x = [&](double xv) {
        const double fj = (xv - g.x_lo) / g.dx;
        const int j = static_cast<int>(std::llround(fj));
        if (std::fabs(fj - j) > 1e-9 || j < 0 || j > g.nx)
            throw std::invalid_argument("z_increment_moments: position off grid");
        return j;
    };

    const int i0 = node_t(t);
    const int j0 = node_x(x);
    const std::size_t nd = delta_list.size();

    // Difference-weight tables, one per delta, over source cells (k, l).
    int i_max = i0;
    std::vector<int> i1(nd, i0), j1(nd, j0);
    for (std::size_t d = 0; d < nd; ++d) {
        if (delta_list[d] < 0.0)
            throw std::invalid_argument("z_increment_moments: negative delta");
        if (axis == IncrementAxis::space)
            j1[d] = node_x(x + delta_list[d]);
        else {
            i1[d] = node_t(t + delta_list[d]);
            i_max = std::max(i_max, i1[d]);
        }
    }
    std::vector<std::vector<double>> dw(nd);
    for (std::size_t d = 0; d < nd; ++d) {
        dw[d].assign(static_cast<std::size_t>(i_max) * g.nx, 0.0);
        for (int k = 0; k < i_max; ++k)
            for (int l = 0; l < g.nx; ++l) {
                double a = (k < i1[d]) ? table.at(i1[d] - k, j1[d] - l) : 0.0;
                double b = (k < i0) ? table.at(i0 - k, j0 - l) : 0.0;
                dw[d][k * g.nx + l] = a - b;
            }
    }

    std::vector<MomentRow> rows(nd);
    std::vector<std::vector<std::vector<double>>> sq(
        ensemble.controls.size(),
        std::vector<std::vector<double>>(nd));
    for (std::size_t s = 0; s < ensemble.controls.size(); ++s) {
        for (std::size_t d = 0; d < nd; ++d)
            sq[s][d].assign(ensemble.realizations, 0.0);
        parallel::for_range(ensemble.realizations, [&](int r) {
            const auto w = noise::sample_noise(
                g, ensemble.controls[s],
                {ensemble.master_seed, static_cast<std::uint64_t>(s),
                 static_cast<std::uint64_t>(r)});
            std::vector<double> dz(nd, 0.0);
            for (int k = 0; k < i_max; ++k)
                for (int l = 0; l < g.nx; ++l) {
                    const double inc = w.at(k, l);
                    if (inc == 0.0) continue;
                    for (std::size_t d = 0; d < nd; ++d)
                        dz[d] += dw[d][k * g.nx + l] * inc;
                }
            for (std::size_t d = 0; d < nd; ++d) sq[s][d][r] = dz[d] * dz[d];
        });
    }
    const double sig_hi = ensemble.controls.front().bounds.hi;
    for (std::size_t d = 0; d < nd; ++d) {
        MomentRow row;
        row.delta = delta_list[d];
        if (delta_list[d] == 0.0) {
            row.bound = 0.0;
        } else if (axis == IncrementAxis::space) {
            row.bound = 0.5 * sig_hi * sig_hi * delta_list[d];
        } else {
            row.bound =
                sig_hi * sig_hi * std::sqrt(delta_list[d] / std::numbers::pi);
        }
        for (std::size_t s = 0; s < ensemble.controls.size(); ++s) {
            const auto ms = stats::mean_stderr(sq[s][d]);
            if (ms.mean >= row.empirical_upper) {
                row.empirical_upper = ms.mean;
                row.stderr_ = ms.stderr_;
                row.attaining_scenario = ensemble.controls[s].id;
            }
        }
        rows[d] = row;
    }
    return rows;
}

}  // namespace gheat::linear_she
