#include "gheat/nonlinear_she.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gheat/parallel.hpp"

namespace gheat::nonlinear_she {

void validate_coefficients(const Coefficients& coeffs, std::uint64_t seed) {
    if (!coeffs.a || !coeffs.b || !coeffs.u0)
        throw std::invalid_argument("Coefficients: a, b and u0 must be set");
    const rng::SeedPath sp{seed, 0, 0};
    for (int k = 0; k < 1000; ++k) {
        const double x = -10.0 + 20.0 * rng::uniform(sp, 2 * k);
        const double y = -10.0 + 20.0 * rng::uniform(sp, 2 * k + 1);
        if (x == y) continue;
        const double ga = std::fabs(coeffs.a(x) - coeffs.a(y)) / std::fabs(x - y);
        const double gb = std::fabs(coeffs.b(x) - coeffs.b(y)) / std::fabs(x - y);
        if (ga > coeffs.lipschitz_a * (1.0 + 1e-9) ||
            gb > coeffs.lipschitz_b * (1.0 + 1e-9))
            throw std::invalid_argument(
                "Coefficients: sampled Lipschitz ratio exceeds declared constant");
    }
}

std::vector<double> green_flow_part(const std::function<double(double)>& u0,
                                    const GridSpec& grid, double tol) {
    const double L = grid.x_hi - grid.x_lo;
    std::vector<double> vals((grid.nt + 1) * (grid.nx + 1), 0.0);
    for (int j = 0; j <= grid.nx; ++j) vals[j] = u0(grid.x(j));
    for (int i = 1; i <= grid.nt; ++i)
        for (int j = 0; j <= grid.nx; ++j) {
            double s = 0.0;
            for (int l = 0; l < grid.nx; ++l)
                s += u0(grid.x_center(l)) *
                     kernels::green_neumann_cell_integral_y(
                         grid.t(i), grid.x(j), grid.x(l), grid.x(l + 1), L, tol);
            vals[i * (grid.nx + 1) + j] = s;
        }
    return vals;
}

namespace {

double cell_value(const FieldPath& u, int i, int l) {
    return 0.5 * (u.at(i, l) + u.at(i, l + 1));
}

// One Picard sweep: u_new = u0part + G * (b dt dx + a dW).
void picard_sweep(const Coefficients& coeffs, const GridSpec& g,
                  const kernels::GWeightTable& gtab,
                  const noise::NoiseRealization& w,
                  const std::vector<double>& u0part, const FieldPath& u_prev,
                  FieldPath& u_new) {
    const double da = g.dt * g.dx;
    std::vector<double> rhs(static_cast<std::size_t>(g.nt) * g.nx, 0.0);
    for (int k = 0; k < g.nt; ++k)
        for (int l = 0; l < g.nx; ++l) {
            const double uv = cell_value(u_prev, k, l);
            rhs[k * g.nx + l] = coeffs.b(uv) * da + coeffs.a(uv) * w.at(k, l);
        }
    for (int j = 0; j <= g.nx; ++j) u_new.at(0, j) = u0part[j];
    for (int i = 1; i <= g.nt; ++i)
        for (int j = 0; j <= g.nx; ++j) {
            double s = u0part[i * (g.nx + 1) + j];
            for (int k = 0; k < i; ++k)
                for (int l = 0; l < g.nx; ++l)
                    s += gtab.at(i - k, j, l) * rhs[k * g.nx + l];
            if (!std::isfinite(s))
                throw std::runtime_error(
                    "picard_solve: non-finite field value at node (" +
                    std::to_string(i) + "," + std::to_string(j) + ")");
            u_new.at(i, j) = s;
        }
}

noise::SummaryFn field_summary(const FieldPath& u) {
    return [&u](int i, int j) { return cell_value(u, std::max(i, 0), j); };
}

// Feedback controls re-read the previous iterate's summary only during the
// first few sweeps; afterwards the volatility field is frozen so the map
// becomes a genuine contraction (the frozen control is still adapted: it is a
// deterministic function of the noise through the early iterates).
constexpr int kFeedbackFreezeIter = 4;

}  // namespace

PicardResult picard_solve(const Coefficients& coeffs, const GridSpec& grid,
                          const integrals::EnsembleSpec& ensemble,
                          const kernels::GWeightTable& gtab, int n_max,
                          double tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("picard_solve: tol must be > 0");
    if (!grid.same_as(gtab.grid))
        throw std::invalid_argument("picard_solve: weight table grid mismatch");
    validate_coefficients(coeffs);
    const auto u0part = green_flow_part(coeffs.u0, grid, 1e-12);
    const std::size_t S = ensemble.controls.size();
    const int M = ensemble.realizations;

    PicardResult res;
    res.fields.assign(S, std::vector<FieldPath>());
    res.noises.assign(S, std::vector<noise::NoiseRealization>());
    std::vector<std::vector<std::vector<double>>> xi(S);
    for (std::size_t s = 0; s < S; ++s) {
        xi[s].reserve(M);
        for (int r = 0; r < M; ++r) {
            const rng::SeedPath sp{ensemble.master_seed,
                                   static_cast<std::uint64_t>(s),
                                   static_cast<std::uint64_t>(r)};
            xi[s].push_back(noise::sample_xi(grid, sp));
            FieldPath u;
            u.grid = grid;
            u.scenario_id = ensemble.controls[s].id;
            u.seed_path = sp;
            u.values = u0part;
            res.fields[s].push_back(std::move(u));
            res.noises[s].push_back(noise::modulate(
                ensemble.controls[s], sp, xi[s].back(), field_summary(res.fields[s].back())));
        }
    }

    const std::size_t nodes = (grid.nt + 1) * static_cast<std::size_t>(grid.nx + 1);

    for (int n = 0; n < n_max; ++n) {
        double dn = 0.0;
        for (std::size_t s = 0; s < S; ++s) {
            // Per-realization squared diffs, reduced afterwards in index order.
            std::vector<std::vector<double>> diff_sq(M);
            parallel::for_range(M, [&](int r) {
                FieldPath& u_prev = res.fields[s][r];
                if (n < kFeedbackFreezeIter)
                    res.noises[s][r] = noise::modulate(ensemble.controls[s],
                                                       u_prev.seed_path, xi[s][r],
                                                       field_summary(u_prev));
                const noise::NoiseRealization& w = res.noises[s][r];
                FieldPath u_next = u_prev;
                picard_sweep(coeffs, grid, gtab, w, u0part, u_prev, u_next);
                diff_sq[r].resize(nodes);
                for (std::size_t q = 0; q < nodes; ++q) {
                    const double d = u_next.values[q] - u_prev.values[q];
                    diff_sq[r][q] = d * d;
                }
                u_prev.values = std::move(u_next.values);
            });
            std::vector<double> node_sq(nodes, 0.0);
            for (int r = 0; r < M; ++r)
                for (std::size_t q = 0; q < nodes; ++q) node_sq[q] += diff_sq[r][q];
            for (std::size_t q = 0; q < nodes; ++q)
                dn = std::max(dn, node_sq[q] / M);
        }
        res.trace.diffs.push_back(dn);
        if (dn < tol) {
            res.trace.converged_at = n + 1;
            res.converged = true;
            break;
        }
    }
    return res;
}

FieldPath picard_iterate_one(const Coefficients& coeffs, const GridSpec& grid,
                             const kernels::GWeightTable& gtab,
                             const noise::VolatilityControl& control,
                             const rng::SeedPath& seed_path, int n_max, double tol,
                             double initial_shift) {
    validate_coefficients(coeffs);
    const auto u0part = green_flow_part(coeffs.u0, grid, 1e-12);
    const auto xi = noise::sample_xi(grid, seed_path);
    FieldPath u_prev;
    u_prev.grid = grid;
    u_prev.scenario_id = control.id;
    u_prev.seed_path = seed_path;
    u_prev.values = u0part;
    for (auto& v : u_prev.values) v += initial_shift;
    FieldPath u_new = u_prev;
    noise::NoiseRealization w;
    for (int n = 0; n < n_max; ++n) {
        if (n < kFeedbackFreezeIter)
            w = noise::modulate(control, seed_path, xi, field_summary(u_prev));
        picard_sweep(coeffs, grid, gtab, w, u0part, u_prev, u_new);
        double dn = 0.0;
        for (std::size_t q = 0; q < u_new.values.size(); ++q)
            dn = std::max(dn, (u_new.values[q] - u_prev.values[q]) *
                                  (u_new.values[q] - u_prev.values[q]));
        std::swap(u_prev.values, u_new.values);
        if (dn < tol) break;
    }
    return u_prev;
}

double mild_residual(const FieldPath& u, const Coefficients& coeffs,
                     const kernels::GWeightTable& gtab,
                     const noise::NoiseRealization& w) {
    return mild_residual(u, coeffs, gtab, w,
                         green_flow_part(coeffs.u0, u.grid, 1e-12));
}

double mild_residual(const FieldPath& u, const Coefficients& coeffs,
                     const kernels::GWeightTable& gtab,
                     const noise::NoiseRealization& w,
                     const std::vector<double>& u0part) {
    const GridSpec& g = u.grid;
    if (!g.same_as(w.grid))
        throw std::invalid_argument("mild_residual: grid mismatch");
    FieldPath mapped = u;
    picard_sweep(coeffs, g, gtab, w, u0part, u, mapped);
    double worst = 0.0;
    for (int i = 1; i <= g.nt; ++i)
        for (int j = 0; j <= g.nx; ++j)
            worst = std::max(worst, std::fabs(u.at(i, j) - mapped.at(i, j)));
    return worst;
}

ContractionReport contraction_diagnostics(const PicardTrace& trace) {
    if (trace.diffs.size() < 4)
        throw std::invalid_argument(
            "contraction_diagnostics: need at least 4 recorded iterations");
    ContractionReport rep;
    rep.eventually_decreasing = true;
    for (std::size_t n = 2; n + 1 < trace.diffs.size(); ++n)
        if (trace.diffs[n + 1] > trace.diffs[n] && trace.diffs[n] > 0.0)
            rep.eventually_decreasing = false;

    std::vector<double> ratios;
    for (std::size_t n = 2; n + 1 < trace.diffs.size(); ++n)
        if (trace.diffs[n] > 0.0)
            ratios.push_back(trace.diffs[n + 1] / trace.diffs[n]);
    if (!ratios.empty()) {
        std::sort(ratios.begin(), ratios.end());
        rep.geometric_ratio = ratios[ratios.size() / 2];
    }
    // Factorial decay shows up as eventually concave log D_n.
    rep.log_concave_tail = true;
    for (std::size_t n = 2; n + 2 < trace.diffs.size(); ++n) {
        if (trace.diffs[n] <= 0.0 || trace.diffs[n + 1] <= 0.0 ||
            trace.diffs[n + 2] <= 0.0)
            continue;
        const double second = std::log(trace.diffs[n + 2]) -
                              2.0 * std::log(trace.diffs[n + 1]) +
                              std::log(trace.diffs[n]);
        if (second > 0.5) rep.log_concave_tail = false;
    }
    return rep;
}

HolderReport holder_moment_diagnostics(const PicardResult& result,
                                       const std::vector<double>& delta_list,
                                       linear_she::IncrementAxis axis,
                                       double t_eval, double x_eval,
                                       double target_exponent) {
    if (result.fields.empty() || result.fields.front().empty())
        throw std::invalid_argument("holder_moment_diagnostics: empty ensemble");
    const GridSpec& g = result.fields.front().front().grid;
    auto to_i = [&](double tv) {
        const int i = static_cast<int>(std::llround(tv / g.dt));
        if (std::fabs(tv / g.dt - i) > 1e-9 || i < 0 || i > g.nt)
            throw std::invalid_argument("holder_moment_diagnostics: time off grid");
        return i;
    };
    auto to_j = [&](double xv) {
        const int j = static_cast<int>(std::llround((xv - g.x_lo) / g.dx));
        if (std::fabs((xv - g.x_lo) / g.dx - j) > 1e-9 || j < 0 || j > g.nx)
            throw std::invalid_argument(
                "holder_moment_diagnostics: position off grid");
        return j;
    };
    const int i0 = to_i(t_eval), j0 = to_j(x_eval);

    HolderReport rep;
    rep.target_exponent = target_exponent;
    std::vector<double> log_d, log_m;
    for (double delta : delta_list) {
        HolderRow row;
        row.delta = delta;
        if (delta == 0.0) {
            rep.rows.push_back(row);
            continue;
        }
        const int i1 = axis == linear_she::IncrementAxis::time ? to_i(t_eval + delta)
                                                               : i0;
        const int j1 = axis == linear_she::IncrementAxis::space
                           ? to_j(x_eval + delta)
                           : j0;
        for (const auto& scenario : result.fields) {
            std::vector<double> sq;
            sq.reserve(scenario.size());
            for (const auto& u : scenario) {
                const double d = u.at(i1, j1) - u.at(i0, j0);
                sq.push_back(d * d);
            }
            const auto ms = stats::mean_stderr(sq);
            if (ms.mean >= row.empirical_upper) {
                row.empirical_upper = ms.mean;
                row.stderr_ = ms.stderr_;
            }
        }
        if (row.empirical_upper > 0.0) {
            log_d.push_back(std::log(delta));
            log_m.push_back(std::log(row.empirical_upper));
        }
        rep.rows.push_back(row);
    }
    if (log_d.size() >= 2) rep.fitted_slope = stats::fit_slope(log_d, log_m);
    return rep;
}

double weak_form_residual_neumann(const FieldPath& u,
                                  const identities::TestFunction& phi,
                                  const Coefficients& coeffs,
                                  const noise::NoiseRealization& w) {
    if (!phi.neumann_compatible)
        throw std::invalid_argument(
            "weak_form_residual_neumann: test function violates the Neumann "
            "boundary compatibility");
    const GridSpec& g = u.grid;
    if (!g.same_as(w.grid))
        throw std::invalid_argument("weak_form_residual_neumann: grid mismatch");
    auto trap = [&](int j) { return (j == 0 || j == g.nx) ? 0.5 : 1.0; };

    double boundary = 0.0;
    for (int j = 0; j <= g.nx; ++j)
        boundary += trap(j) *
                    (u.at(g.nt, j) * phi.phi(g.t_end, g.x(j)) -
                     coeffs.u0(g.x(j)) * phi.phi(0.0, g.x(j))) *
                    g.dx;
    // Time derivative transcribed as the exact increment of phi so constant
    // fields telescope against the boundary term.
    double body = 0.0;
    for (int i = 0; i < g.nt; ++i)
        for (int j = 0; j <= g.nx; ++j)
            body += trap(j) * u.at(i, j) *
                    ((phi.phi(g.t(i + 1), g.x(j)) - phi.phi(g.t(i), g.x(j))) +
                     phi.phi_xx(g.t(i), g.x(j)) * g.dt) *
                    g.dx;
    double drift = 0.0, pairing = 0.0;
    for (int i = 0; i < g.nt; ++i)
        for (int l = 0; l < g.nx; ++l) {
            const double uv = cell_value(u, i, l);
            drift += coeffs.b(uv) * phi.phi(g.t(i), g.x_center(l)) * g.dt * g.dx;
            pairing += coeffs.a(uv) * phi.phi(g.t(i), g.x_center(l)) * w.at(i, l);
        }
    return std::fabs(boundary - body - drift - pairing);
}

}  // namespace gheat::nonlinear_she
