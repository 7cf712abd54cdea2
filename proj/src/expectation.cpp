#include "gheat/expectation.hpp"

#include <cmath>
#include <stdexcept>

#include "gheat/parallel.hpp"

namespace gheat::expectation {

ScenarioEnsemble envelope(const Functional& functional,
                          const integrals::EnsembleSpec& ensemble) {
    if (ensemble.controls.empty())
        throw std::invalid_argument("envelope: empty scenario dictionary");
    if (ensemble.realizations < 100)
        throw std::invalid_argument("envelope: need at least 100 realizations");
    ScenarioEnsemble out;
    for (std::size_t s = 0; s < ensemble.controls.size(); ++s) {
        std::vector<double> vals(ensemble.realizations);
        parallel::for_range(ensemble.realizations, [&](int r) {
            vals[r] = functional(noise::sample_noise(
                ensemble.grid, ensemble.controls[s],
                {ensemble.master_seed, static_cast<std::uint64_t>(s),
                 static_cast<std::uint64_t>(r)}));
        });
        const auto ms = stats::mean_stderr(vals);
        out.scenarios.push_back({ensemble.controls[s].id, ms.mean, ms.stderr_,
                                 ensemble.realizations});
    }
    out.upper_estimate = out.scenarios.front().mean;
    out.lower_estimate = out.scenarios.front().mean;
    out.upper_stderr = out.scenarios.front().stderr_;
    out.lower_stderr = out.scenarios.front().stderr_;
    for (const auto& s : out.scenarios) {
        if (s.mean > out.upper_estimate) {
            out.upper_estimate = s.mean;
            out.upper_stderr = s.stderr_;
        }
        if (s.mean < out.lower_estimate) {
            out.lower_estimate = s.mean;
            out.lower_stderr = s.stderr_;
        }
    }
    return out;
}

ScalingReport envelope_scaling_check(const Functional& functional, double lambda,
                                     const integrals::EnsembleSpec& ensemble) {
    if (lambda < 0.0)
        throw std::invalid_argument("envelope_scaling_check: lambda must be >= 0");
    const auto base = envelope(functional, ensemble);
    const auto scaled = envelope(
        [&](const noise::NoiseRealization& w) { return lambda * functional(w); },
        ensemble);
    ScalingReport rep;
    rep.upper_base = base.upper_estimate;
    rep.upper_scaled = scaled.upper_estimate;
    rep.homogeneous = scaled.upper_estimate == lambda * base.upper_estimate;
    // Sub-additivity at the estimator level: max of sums <= sum of maxes.
    const auto doubled = envelope(
        [&](const noise::NoiseRealization& w) {
            return functional(w) + lambda * functional(w);
        },
        ensemble);
    rep.subadditive =
        doubled.upper_estimate <=
        base.upper_estimate + scaled.upper_estimate + 1e-12;
    return rep;
}

double g_function(const noise::SigmaBounds& bounds, double a) {
    const double pos = a > 0.0 ? a : 0.0;
    const double neg = a < 0.0 ? -a : 0.0;
    return 0.5 * (bounds.hi * bounds.hi * pos - bounds.lo * bounds.lo * neg);
}

double solve_g_heat_pde(const std::function<double(double)>& payoff, double t_end,
                        const noise::SigmaBounds& bounds, const PdeGrid1d& grid) {
    if (!(t_end > 0.0))
        throw std::invalid_argument("solve_g_heat_pde: t_end must be positive");
    if (grid.nx < 4 || !(grid.half_width > 0.0))
        throw std::invalid_argument("solve_g_heat_pde: degenerate grid");
    if (grid.half_width < 8.0 * bounds.hi * std::sqrt(t_end))
        throw std::invalid_argument(
            "solve_g_heat_pde: domain narrower than 8*sigma_hi*sqrt(t_end)");
    if (!(grid.cfl > 0.0 && grid.cfl * (1.0 + 1e-9) <= 1.0))
        throw std::invalid_argument("solve_g_heat_pde: CFL fraction must be in (0,1]");

    const int n = grid.nx;
    const double dx = 2.0 * grid.half_width / n;
    // Monotone explicit step requires dt <= dx^2 / sigma_hi^2.
    const double dt_limit = dx * dx / (bounds.hi * bounds.hi * (1.0 + 1e-9));
    const int steps = static_cast<int>(std::ceil(t_end / (grid.cfl * dt_limit)));
    const double dt = t_end / steps;

    std::vector<double> u(n + 1), unew(n + 1);
    for (int j = 0; j <= n; ++j) u[j] = payoff(-grid.half_width + j * dx);
    for (int j = 0; j <= n; ++j)
        if (!std::isfinite(u[j]))
            throw std::invalid_argument("solve_g_heat_pde: payoff not finite");

    for (int m = 0; m < steps; ++m) {
        for (int j = 1; j < n; ++j) {
            const double uxx = (u[j + 1] - 2.0 * u[j] + u[j - 1]) / (dx * dx);
            unew[j] = u[j] + dt * g_function(bounds, uxx);
        }
        // Zero-curvature extrapolation at the truncation boundary.
        unew[0] = 2.0 * unew[1] - unew[2];
        unew[n] = 2.0 * unew[n - 1] - unew[n - 2];
        std::swap(u, unew);
    }
    if (n % 2 == 0) return u[n / 2];
    return 0.5 * (u[n / 2] + u[n / 2 + 1]);
}

}  // namespace gheat::expectation
