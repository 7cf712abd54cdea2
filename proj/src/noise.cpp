#include "gheat/noise.hpp"

#include <cmath>

namespace gheat::noise {

namespace {
constexpr std::uint64_t kBangBangStream = 0xB4;
}

VolatilityControl make_control(const GridSpec& grid, const SigmaBounds& bounds,
                               ControlKind kind, double constant_value,
                               std::uint64_t seed) {
    make_bounds(bounds.lo, bounds.hi);
    VolatilityControl c;
    c.grid = grid;
    c.bounds = bounds;
    c.kind = kind;
    c.control_seed = seed;
    switch (kind) {
        case ControlKind::constant:
            if (constant_value < bounds.lo || constant_value > bounds.hi)
                throw std::invalid_argument(
                    "make_control: constant value outside sigma bounds");
            c.constant_value = constant_value;
            c.id = "const_" + std::to_string(constant_value);
            break;
        case ControlKind::bang_bang_random:
            c.id = "bang_bang";
            break;
        case ControlKind::feedback:
            c.id = "feedback";
            break;
    }
    return c;
}

std::vector<double> sample_xi(const GridSpec& grid, const rng::SeedPath& seed_path) {
    std::vector<double> xi(static_cast<std::size_t>(grid.nt) * grid.nx);
    for (int i = 0; i < grid.nt; ++i)
        for (int j = 0; j < grid.nx; ++j)
            xi[i * grid.nx + j] =
                rng::normal(seed_path, static_cast<std::uint64_t>(i) * grid.nx + j);
    return xi;
}

NoiseRealization modulate(const VolatilityControl& control,
                          const rng::SeedPath& seed_path,
                          const std::vector<double>& xi, const SummaryFn& summary) {
    const GridSpec& g = control.grid;
    if (xi.size() != static_cast<std::size_t>(g.nt) * g.nx)
        throw std::invalid_argument("modulate: xi size does not match grid");
    NoiseRealization w;
    w.grid = g;
    w.control_id = control.id;
    w.seed_path = seed_path;
    w.increments.assign(xi.size(), 0.0);
    w.sigma.assign(xi.size(), 0.0);
    const double scale = std::sqrt(g.dt * g.dx);

    // Default feedback summary: cum_prev holds column sums over rows < i-1,
    // cum_cur over rows < i.
    std::vector<double> cum_prev(g.nx, 0.0), cum_cur(g.nx, 0.0);

    const rng::SeedPath ctrl_sp{control.control_seed, seed_path.scenario,
                                seed_path.realization};

    for (int i = 0; i < g.nt; ++i) {
        for (int j = 0; j < g.nx; ++j) {
            double sig = 0.0;
            switch (control.kind) {
                case ControlKind::constant:
                    sig = control.constant_value;
                    break;
                case ControlKind::bang_bang_random: {
                    const double u = rng::uniform(
                        ctrl_sp, static_cast<std::uint64_t>(i) * g.nx + j,
                        kBangBangStream);
                    sig = u < 0.5 ? control.bounds.lo : control.bounds.hi;
                    break;
                }
                case ControlKind::feedback: {
                    auto past = [&](int jj) {
                        const int jc = std::max(0, std::min(g.nx - 1, jj));
                        if (summary) return summary(i - 1, jc);
                        return cum_prev[jc];
                    };
                    double second_diff = 0.0;
                    if (i >= 1)
                        second_diff = past(j - 1) - 2.0 * past(j) + past(j + 1);
                    // Tie at zero curvature goes to the upper bound.
                    sig = second_diff >= 0.0 ? control.bounds.hi : control.bounds.lo;
                    break;
                }
            }
            w.sigma[i * g.nx + j] = sig;
            w.increments[i * g.nx + j] = sig * scale * xi[i * g.nx + j];
        }
        if (control.kind == ControlKind::feedback && !summary) {
            cum_prev = cum_cur;
            for (int j = 0; j < g.nx; ++j)
                cum_cur[j] += w.increments[i * g.nx + j];
        }
    }
    return w;
}

NoiseRealization sample_noise(const GridSpec& grid, const VolatilityControl& control,
                              const rng::SeedPath& seed_path) {
    if (!grid.same_as(control.grid))
        throw std::invalid_argument("sample_noise: control defined on another grid");
    return modulate(control, seed_path, sample_xi(grid, seed_path));
}

double rect_value(const NoiseRealization& w, const GridRect& rect) {
    check_rect(w.grid, rect);
    double s = 0.0;
    for (int i = rect.i0; i < rect.i1; ++i)
        for (int j = rect.j0; j < rect.j1; ++j) s += w.at(i, j);
    return s;
}

std::vector<VolatilityControl> default_dictionary(const GridSpec& grid,
                                                  const SigmaBounds& bounds,
                                                  std::uint64_t seed) {
    std::vector<VolatilityControl> dict;
    const double q = (bounds.hi - bounds.lo) / 4.0;
    for (int k = 0; k <= 4; ++k)
        dict.push_back(make_control(grid, bounds, ControlKind::constant,
                                    bounds.lo + k * q, seed));
    dict.push_back(
        make_control(grid, bounds, ControlKind::bang_bang_random, 0.0, seed));
    dict.push_back(make_control(grid, bounds, ControlKind::feedback, 0.0, seed));
    return dict;
}

}  // namespace gheat::noise
