#pragma once

#include <stdexcept>
#include <string>

namespace gheat {

// Uniform space-time lattice. Cell (i,j) is [t_i, t_{i+1}) x [x_j, x_{j+1})
// with t_i = i*dt and x_j = x_lo + j*dx.
struct GridSpec {
    double t_end = 0.0;
    double x_lo = 0.0;
    double x_hi = 0.0;
    int nt = 0;
    int nx = 0;
    double dt = 0.0;
    double dx = 0.0;

    double t(int i) const { return i * dt; }
    double x(int j) const { return x_lo + j * dx; }
    double x_center(int j) const { return x_lo + (j + 0.5) * dx; }
    double t_center(int i) const { return (i + 0.5) * dt; }
    int cell_count() const { return nt * nx; }

    bool same_as(const GridSpec& o) const {
        return t_end == o.t_end && x_lo == o.x_lo && x_hi == o.x_hi &&
               nt == o.nt && nx == o.nx;
    }
};

// Half-open index rectangle [t_{i0}, t_{i1}) x [x_{j0}, x_{j1}).
struct GridRect {
    int i0 = 0, i1 = 0, j0 = 0, j1 = 0;
};

inline GridSpec make_grid(double t_end, double x_lo, double x_hi, int nt, int nx) {
    if (!(t_end > 0.0))
        throw std::invalid_argument("make_grid: t_end must be positive");
    if (!(x_hi > x_lo))
        throw std::invalid_argument("make_grid: x_hi must exceed x_lo");
    if (nt < 1 || nx < 1)
        throw std::invalid_argument("make_grid: nt and nx must be >= 1");
    GridSpec g;
    g.t_end = t_end;
    g.x_lo = x_lo;
    g.x_hi = x_hi;
    g.nt = nt;
    g.nx = nx;
    g.dt = t_end / nt;
    g.dx = (x_hi - x_lo) / nx;
    return g;
}

inline void check_rect(const GridSpec& g, const GridRect& r) {
    if (r.i0 < 0 || r.i0 > r.i1 || r.i1 > g.nt || r.j0 < 0 || r.j0 > r.j1 ||
        r.j1 > g.nx)
        throw std::out_of_range("rect indices out of range for grid");
}

inline double cell_measure(const GridSpec& g, const GridRect& r) {
    check_rect(g, r);
    return (r.i1 - r.i0) * g.dt * (r.j1 - r.j0) * g.dx;
}

}  // namespace gheat
