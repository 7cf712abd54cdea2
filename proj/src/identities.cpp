#include "gheat/identities.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace gheat::identities {

DoubleSimpleField make_double_field(const GridSpec& grid,
                                    std::vector<DoublePiece> pieces) {
    for (const auto& p : pieces) {
        if (p.i < 0 || p.i >= grid.nt || p.l < 0 || p.l >= grid.nt || p.a0 < 0 ||
            p.a0 > p.a1 || p.a1 > grid.nx || p.b0 < 0 || p.b0 > p.b1 ||
            p.b1 > grid.nx)
            throw std::out_of_range("make_double_field: piece outside grid");
        if (!p.coeff)
            throw std::invalid_argument("make_double_field: missing coefficient");
    }
    return {grid, std::move(pieces)};
}

TestFunction make_bump(double t_end, double a, double b) {
    if (!(t_end > 0.0 && b > a))
        throw std::invalid_argument("make_bump: degenerate support");
    const double T = t_end;
    const double peak = std::pow(T * T / 4.0, 4) * std::pow((b - a) * (b - a) / 4.0, 4);
    const double c = 1.0 / peak;
    auto ut = [T](double t) { return std::pow(t * (T - t), 4); };
    auto dut = [T](double t) { return 4.0 * std::pow(t * (T - t), 3) * (T - 2.0 * t); };
    auto vx = [a, b](double x) { return std::pow((x - a) * (b - x), 4); };
    auto dvx = [a, b](double x) {
        return 4.0 * std::pow((x - a) * (b - x), 3) * (a + b - 2.0 * x);
    };
    auto d2vx = [a, b](double x) {
        const double w = (x - a) * (b - x);
        const double dw = a + b - 2.0 * x;
        return 12.0 * w * w * dw * dw - 8.0 * w * w * w;
    };
    auto inside = [T, a, b](double t, double x) {
        return t > 0.0 && t < T && x > a && x < b;
    };
    TestFunction f;
    f.phi = [=](double t, double x) { return inside(t, x) ? c * ut(t) * vx(x) : 0.0; };
    f.phi_t = [=](double t, double x) {
        return inside(t, x) ? c * dut(t) * vx(x) : 0.0;
    };
    f.phi_xx = [=](double t, double x) {
        return inside(t, x) ? c * ut(t) * d2vx(x) : 0.0;
    };
    f.phi_tx = [=](double t, double x) {
        return inside(t, x) ? c * dut(t) * dvx(x) : 0.0;
    };
    f.neumann_compatible = false;
    return f;
}

TestFunction make_neumann_bump(double t_end, double L) {
    if (!(t_end > 0.0 && L > 0.0))
        throw std::invalid_argument("make_neumann_bump: degenerate domain");
    const double T = t_end;
    const double pi = std::numbers::pi;
    const double c = 1.0 / std::pow(T * T / 4.0, 4);
    auto ut = [T](double t) { return std::pow(t * (T - t), 4); };
    auto dut = [T](double t) { return 4.0 * std::pow(t * (T - t), 3) * (T - 2.0 * t); };
    auto in_t = [T](double t) { return t > 0.0 && t < T; };
    TestFunction f;
    f.phi = [=](double t, double x) {
        const double cx = std::cos(pi * x / L);
        return in_t(t) ? c * ut(t) * cx * cx : 0.0;
    };
    f.phi_t = [=](double t, double x) {
        const double cx = std::cos(pi * x / L);
        return in_t(t) ? c * dut(t) * cx * cx : 0.0;
    };
    f.phi_xx = [=](double t, double x) {
        return in_t(t) ? -c * ut(t) * (2.0 * pi * pi / (L * L)) *
                             std::cos(2.0 * pi * x / L)
                       : 0.0;
    };
    f.phi_tx = [=](double t, double x) {
        return in_t(t) ? -c * dut(t) * (pi / L) * std::sin(2.0 * pi * x / L) : 0.0;
    };
    f.neumann_compatible = true;
    return f;
}

CheckResult fubini_check_simple(const DoubleSimpleField& field,
                                const noise::NoiseRealization& w) {
    if (!field.grid.same_as(w.grid))
        throw std::invalid_argument("fubini_check_simple: grid mismatch");
    const GridSpec& g = field.grid;

    std::vector<const DoublePiece*> det_order, sto_order;
    for (const auto& p : field.pieces) {
        det_order.push_back(&p);
        sto_order.push_back(&p);
    }
    std::stable_sort(det_order.begin(), det_order.end(),
                     [](auto* a, auto* b) {
                         return a->l != b->l ? a->l < b->l : a->b0 < b->b0;
                     });
    std::stable_sort(sto_order.begin(), sto_order.end(),
                     [](auto* a, auto* b) {
                         return a->i != b->i ? a->i < b->i : a->a0 < b->a0;
                     });

    // Bochner-in-(s,y) of stochastic-in-(t,x): accumulate per deterministic cell.
    double lhs = 0.0;
    for (auto* p : det_order) {
        const double sto = p->coeff(w) *
                           noise::rect_value(w, {p->i, p->i + 1, p->a0, p->a1});
        for (int jb = p->b0; jb < p->b1; ++jb) lhs += sto * g.dt * g.dx;
    }
    // Stochastic-in-(t,x) of Bochner-in-(s,y): accumulate per noise cell.
    double rhs = 0.0;
    for (auto* p : sto_order) {
        const double boch = p->coeff(w) * g.dt * (p->b1 - p->b0) * g.dx;
        for (int ja = p->a0; ja < p->a1; ++ja) rhs += boch * w.at(p->i, ja);
    }
    return {lhs, rhs, std::fabs(lhs - rhs)};
}

CheckResult convolution_fubini_check(const integrals::DeterministicKernel& h,
                                     const TestFunction& phi,
                                     const integrals::SimpleRandomField& field,
                                     const noise::NoiseRealization& w) {
    if (!field.grid.same_as(w.grid))
        throw std::invalid_argument("convolution_fubini_check: grid mismatch");
    const GridSpec& g = field.grid;
    const double da = g.dt * g.dx;

    double lhs = 0.0;
    for (int k = 0; k < g.nt; ++k) {
        for (int l = 0; l < g.nx; ++l) {
            const double fv = integrals::value_at(field, w, k, l);
            if (fv == 0.0 && w.at(k, l) == 0.0) continue;
            double gdisc = 0.0;
            for (int i = k + 1; i < g.nt; ++i)
                for (int j = 0; j < g.nx; ++j)
                    gdisc += h.h(g.t_center(i) - g.t_center(k),
                                 g.x_center(j) - g.x_center(l)) *
                             phi.phi(g.t_center(i), g.x_center(j)) * da;
            lhs += gdisc * fv * w.at(k, l);
        }
    }
    double rhs = 0.0;
    for (int i = 0; i < g.nt; ++i) {
        for (int j = 0; j < g.nx; ++j) {
            double zeta = 0.0;
            for (int k = 0; k < i; ++k)
                for (int l = 0; l < g.nx; ++l)
                    zeta += h.h(g.t_center(i) - g.t_center(k),
                                g.x_center(j) - g.x_center(l)) *
                            integrals::value_at(field, w, k, l) * w.at(k, l);
            rhs += zeta * phi.phi(g.t_center(i), g.x_center(j)) * da;
        }
    }
    return {lhs, rhs, std::fabs(lhs - rhs)};
}

std::vector<double> cumulative_field(const noise::NoiseRealization& w) {
    const GridSpec& g = w.grid;
    std::vector<double> cum((g.nt + 1) * (g.nx + 1), 0.0);
    for (int i = 1; i <= g.nt; ++i)
        for (int j = 1; j <= g.nx; ++j)
            cum[i * (g.nx + 1) + j] = cum[(i - 1) * (g.nx + 1) + j] +
                                      cum[i * (g.nx + 1) + j - 1] -
                                      cum[(i - 1) * (g.nx + 1) + j - 1] +
                                      w.at(i - 1, j - 1);
    return cum;
}

namespace {

void check_support(const TestFunction& phi, const GridSpec& g) {
    for (int j = 0; j <= g.nx; ++j) {
        if (std::fabs(phi.phi(g.t_end, g.x(j))) > 1e-12 ||
            std::fabs(phi.phi(0.0, g.x(j))) > 1e-12)
            throw std::invalid_argument("test function not supported inside domain");
    }
    for (int i = 0; i <= g.nt; ++i) {
        if (std::fabs(phi.phi(g.t(i), g.x_lo)) > 1e-12 ||
            std::fabs(phi.phi(g.t(i), g.x_hi)) > 1e-12)
            throw std::invalid_argument("test function not supported inside domain");
    }
}

}  // namespace

CheckResult derivative_pairing_check(const TestFunction& phi,
                                     const noise::NoiseRealization& w) {
    const GridSpec& g = w.grid;
    check_support(phi, g);
    const auto cum = cumulative_field(w);
    double lhs = 0.0, rhs = 0.0;
    for (int i = 0; i < g.nt; ++i) {
        for (int j = 0; j < g.nx; ++j) {
            lhs += cum[(i + 1) * (g.nx + 1) + j + 1] *
                   phi.phi_tx(g.t_center(i), g.x_center(j)) * g.dt * g.dx;
            rhs += phi.phi(g.t(i), g.x(j)) * w.at(i, j);
        }
    }
    return {lhs, rhs, std::fabs(lhs - rhs)};
}

CheckResult derivative_pairing_exact(const TestFunction& phi,
                                     const noise::NoiseRealization& w) {
    const GridSpec& g = w.grid;
    check_support(phi, g);
    const auto cum = cumulative_field(w);
    double lhs = 0.0, rhs = 0.0;
    for (int i = 0; i < g.nt; ++i) {
        for (int j = 0; j < g.nx; ++j) {
            const double mixed =
                phi.phi(g.t(i + 1), g.x(j + 1)) - phi.phi(g.t(i), g.x(j + 1)) -
                phi.phi(g.t(i + 1), g.x(j)) + phi.phi(g.t(i), g.x(j));
            lhs += cum[(i + 1) * (g.nx + 1) + j + 1] * mixed;
            rhs += phi.phi(g.t(i), g.x(j)) * w.at(i, j);
        }
    }
    return {lhs, rhs, std::fabs(lhs - rhs)};
}

}  // namespace gheat::identities
