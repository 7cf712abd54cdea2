#pragma once

#include <functional>
#include <vector>

#include "gheat/grid.hpp"
#include "gheat/integrals.hpp"
#include "gheat/noise.hpp"

namespace gheat::identities {

// Four-index simple field eta(t,x,s,y): pieces carry a stochastic-axis time
// cell i with space range A and a deterministic-axis time cell l with space
// range B. Coefficients are adapted in i only.
struct DoublePiece {
    int i = 0;
    int a0 = 0, a1 = 0;
    int l = 0;
    int b0 = 0, b1 = 0;
    integrals::Coefficient coeff;
};

struct DoubleSimpleField {
    GridSpec grid;
    std::vector<DoublePiece> pieces;
};

DoubleSimpleField make_double_field(const GridSpec& grid,
                                    std::vector<DoublePiece> pieces);

// Smooth compactly-supported test function with closed-form partials.
struct TestFunction {
    std::function<double(double, double)> phi;
    std::function<double(double, double)> phi_t;
    std::function<double(double, double)> phi_xx;
    std::function<double(double, double)> phi_tx;
    bool neumann_compatible = false;  // dphi/dx vanishes at both space ends
};

// Polynomial bump (t(T-t))^4 (x-a)^4 (b-x)^4, normalized to peak 1,
// vanishing with three derivatives at the support boundary.
TestFunction make_bump(double t_end, double a, double b);

// cos^2 profile in space (Neumann compatible on [0,L]) times a time bump.
TestFunction make_neumann_bump(double t_end, double L);

struct CheckResult {
    double lhs = 0.0;
    double rhs = 0.0;
    double abs_diff = 0.0;
};

// Stochastic Fubini on simple fields: Bochner-then-stochastic vs
// stochastic-then-Bochner, summed in deliberately different orders.
CheckResult fubini_check_simple(const DoubleSimpleField& field,
                                const noise::NoiseRealization& w);

// Convolution form (kernel h paired with a test function).
CheckResult convolution_fubini_check(const integrals::DeterministicKernel& h,
                                     const TestFunction& phi,
                                     const integrals::SimpleRandomField& field,
                                     const noise::NoiseRealization& w);

// Pairing of the cumulative noise field against the mixed partial of phi
// (midpoint transcription) vs the direct pairing of phi with increments.
CheckResult derivative_pairing_check(const TestFunction& phi,
                                     const noise::NoiseRealization& w);

// Same pairing with phi replaced by its own grid step approximation; the
// two sides are then a finite summation-by-parts identity.
CheckResult derivative_pairing_exact(const TestFunction& phi,
                                     const noise::NoiseRealization& w);

// Cumulative field W(t_i, x_j) = sum of increments over [0,t_i) x [x_lo,x_j),
// as an (nt+1) x (nx+1) row-major matrix.
std::vector<double> cumulative_field(const noise::NoiseRealization& w);

}  // namespace gheat::identities
