#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>

namespace gheat::quad {

namespace detail {

template <class F>
double adaptive_simpson_rec(const F& f, double a, double b, double fa, double fm,
                            double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::fabs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

// Adaptive Simpson with absolute tolerance.
template <class F>
double adaptive(const F& f, double a, double b, double tol = 1e-10,
                int max_depth = 48) {
    if (a == b) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

// 4-point Gauss-Legendre on [a,b].
template <class F>
double gauss4(const F& f, double a, double b) {
    static const double xs[2] = {0.3399810435848562648, 0.8611363115940525752};
    static const double ws[2] = {0.6521451548625461426, 0.3478548451374538574};
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double s = 0.0;
    for (int k = 0; k < 2; ++k)
        s += ws[k] * (f(c - h * xs[k]) + f(c + h * xs[k]));
    return s * h;
}

// Composite 4-point Gauss-Legendre with n panels.
template <class F>
double gauss4_composite(const F& f, double a, double b, int n) {
    if (n < 1) throw std::invalid_argument("gauss4_composite: n >= 1 required");
    const double h = (b - a) / n;
    double s = 0.0;
    for (int k = 0; k < n; ++k) s += gauss4(f, a + k * h, a + (k + 1) * h);
    return s;
}

}  // namespace gheat::quad
