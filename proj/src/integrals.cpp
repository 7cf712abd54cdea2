#include "gheat/integrals.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gheat/quadrature.hpp"

namespace gheat::integrals {

SimpleRandomField make_simple_field(const GridSpec& grid,
                                    std::vector<FieldPiece> pieces) {
    for (const auto& p : pieces) {
        if (p.time_cell < 0 || p.time_cell >= grid.nt || p.j0 < 0 || p.j0 > p.j1 ||
            p.j1 > grid.nx)
            throw std::out_of_range("make_simple_field: piece outside grid");
        if (!p.coeff)
            throw std::invalid_argument("make_simple_field: missing coefficient");
    }
    // Pieces sharing a time index must have disjoint space ranges.
    for (std::size_t a = 0; a < pieces.size(); ++a)
        for (std::size_t b = a + 1; b < pieces.size(); ++b)
            if (pieces[a].time_cell == pieces[b].time_cell &&
                std::max(pieces[a].j0, pieces[b].j0) <
                    std::min(pieces[a].j1, pieces[b].j1))
                throw std::invalid_argument(
                    "make_simple_field: overlapping pieces at one time index");
    return {grid, std::move(pieces)};
}

double value_at(const SimpleRandomField& field, const noise::NoiseRealization& w,
                int i, int j) {
    for (const auto& p : field.pieces)
        if (p.time_cell == i && j >= p.j0 && j < p.j1) return p.coeff(w);
    return 0.0;
}

namespace {

void check_same_grid(const SimpleRandomField& f, const noise::NoiseRealization& w) {
    if (!f.grid.same_as(w.grid))
        throw std::invalid_argument("field and realization live on different grids");
}

}  // namespace

double stochastic_integral(const SimpleRandomField& field,
                           const noise::NoiseRealization& w) {
    check_same_grid(field, w);
    // Fixed time-major evaluation order.
    std::vector<const FieldPiece*> ordered;
    ordered.reserve(field.pieces.size());
    for (const auto& p : field.pieces) ordered.push_back(&p);
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const FieldPiece* a, const FieldPiece* b) {
                         return a->time_cell != b->time_cell
                                    ? a->time_cell < b->time_cell
                                    : a->j0 < b->j0;
                     });
    double s = 0.0;
    for (const FieldPiece* p : ordered)
        s += p->coeff(w) * noise::rect_value(
                               w, {p->time_cell, p->time_cell + 1, p->j0, p->j1});
    return s;
}

double bochner_integral(const SimpleRandomField& field,
                        const noise::NoiseRealization& w) {
    check_same_grid(field, w);
    double s = 0.0;
    for (const auto& p : field.pieces)
        s += p.coeff(w) * field.grid.dt * (p.j1 - p.j0) * field.grid.dx;
    return s;
}

DeterministicKernel make_kernel(const GridSpec& grid,
                                std::function<double(double, double)> h) {
    DeterministicKernel k;
    k.h = std::move(h);
    double mid = 0.0, quadv = 0.0;
    for (int i = 0; i < grid.nt; ++i) {
        for (int j = 0; j < grid.nx; ++j) {
            const double hc = k.h(grid.t_center(i), grid.x_center(j));
            if (!std::isfinite(hc))
                throw std::invalid_argument("make_kernel: kernel not finite on grid");
            mid += hc * hc * grid.dt * grid.dx;
            quadv += quad::gauss4(
                [&](double t) {
                    return quad::gauss4(
                        [&](double x) {
                            const double v = k.h(t, x);
                            return v * v;
                        },
                        grid.x(j), grid.x(j + 1));
                },
                grid.t(i), grid.t(i + 1));
        }
    }
    k.l2_midpoint_sq = mid;
    k.l2_norm_sq = quadv;
    return k;
}

double kernel_weighted_integral(const DeterministicKernel& h,
                                const SimpleRandomField& field,
                                const noise::NoiseRealization& w) {
    check_same_grid(field, w);
    double s = 0.0;
    for (const auto& p : field.pieces) {
        double inner = 0.0;
        for (int j = p.j0; j < p.j1; ++j)
            inner += h.h(field.grid.t_center(p.time_cell), field.grid.x_center(j)) *
                     w.at(p.time_cell, j);
        s += p.coeff(w) * inner;
    }
    return s;
}

stats::MeanStderr empirical_s2_norm(const SimpleRandomField& field,
                                    const EnsembleSpec& ensemble) {
    if (ensemble.controls.empty() || ensemble.realizations < 1)
        throw std::invalid_argument("empirical_s2_norm: empty ensemble");
    stats::MeanStderr best{0.0, 0.0, 0};
    for (std::size_t s = 0; s < ensemble.controls.size(); ++s) {
        // Per-cell second-moment accumulators over realizations.
        std::vector<std::vector<double>> sq(field.pieces.size());
        for (int r = 0; r < ensemble.realizations; ++r) {
            const auto w = noise::sample_noise(
                ensemble.grid, ensemble.controls[s],
                {ensemble.master_seed, static_cast<std::uint64_t>(s),
                 static_cast<std::uint64_t>(r)});
            for (std::size_t p = 0; p < field.pieces.size(); ++p) {
                const double v = field.pieces[p].coeff(w);
                sq[p].push_back(v * v);
            }
        }
        for (auto& cell : sq) {
            const auto ms = stats::mean_stderr(cell);
            if (ms.mean > best.mean) best = ms;
        }
    }
    return best;
}

bool is_adapted(const SimpleRandomField& field,
                const noise::VolatilityControl& control,
                const rng::SeedPath& seed_path) {
    const GridSpec& g = field.grid;
    const auto xi = noise::sample_xi(g, seed_path);
    const auto w = noise::modulate(control, seed_path, xi);
    for (const auto& p : field.pieces) {
        auto xi2 = xi;
        for (int i = p.time_cell; i < g.nt; ++i)
            for (int j = 0; j < g.nx; ++j)
                xi2[i * g.nx + j] = rng::normal(
                    seed_path, static_cast<std::uint64_t>(i) * g.nx + j, 0x5A);
        const auto w2 = noise::modulate(control, seed_path, xi2);
        if (p.coeff(w) != p.coeff(w2)) return false;
    }
    return true;
}

}  // namespace gheat::integrals
