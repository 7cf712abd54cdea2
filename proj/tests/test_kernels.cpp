#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gheat/kernels.hpp"
#include "gheat/quadrature.hpp"

using namespace gheat;
namespace k = gheat::kernels;

TEST_CASE("heat kernel reference values") {
    CHECK(k::heat_kernel(1.0, 0.0) ==
          doctest::Approx(0.28209479177387814).epsilon(1e-14));
    CHECK(k::heat_kernel(0.25, 1.0) ==
          doctest::Approx(std::exp(-1.0) / std::sqrt(std::numbers::pi))
              .epsilon(1e-14));
    CHECK(k::heat_kernel(0.25, 1.0) == doctest::Approx(0.2075537).epsilon(1e-6));
    // Symmetry and normalization.
    CHECK(k::heat_kernel(0.3, 0.7) == k::heat_kernel(0.3, -0.7));
    const double mass = quad::adaptive(
        [](double x) { return k::heat_kernel(0.2, x); }, -12.0, 12.0, 1e-12);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-10));
    CHECK_THROWS_AS(k::heat_kernel(0.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(k::heat_kernel(-1.0, 0.0), std::domain_error);
}

TEST_CASE("time increment and tail square integrals") {
    CHECK(k::p_increment_t_sq_integral(1.0) ==
          doctest::Approx(0.1652473).epsilon(1e-6));
    CHECK(k::p_increment_t_sq_integral(1.0) ==
          doctest::Approx((std::sqrt(2.0) - 1.0) *
                          std::sqrt(0.5 / std::numbers::pi))
              .epsilon(1e-15));
    CHECK(k::p_tail_sq_integral(0.5) ==
          doctest::Approx(0.28209479177387814).epsilon(1e-12));
    for (double d : {1e-3, 1e-2, 0.1, 1.0, 4.0}) {
        CHECK(k::p_increment_t_sq_integral_quad(d) ==
              doctest::Approx(k::p_increment_t_sq_integral(d)).epsilon(1e-8));
        CHECK(k::p_tail_sq_integral_quad(d) ==
              doctest::Approx(k::p_tail_sq_integral(d)).epsilon(1e-8));
    }
    CHECK(k::p_increment_t_sq_integral(0.0) == 0.0);
    CHECK(k::p_tail_sq_integral(0.0) == 0.0);
    CHECK_THROWS_AS(k::p_increment_t_sq_integral(-0.1), std::domain_error);
    CHECK_THROWS_AS(k::p_tail_sq_integral(-0.1), std::domain_error);
}

TEST_CASE("space increment square integral obeys the delta/2 bound") {
    for (double t : {0.05, 0.5, 5.0})
        for (double d : {1e-3, 0.01, 0.1, 1.0}) {
            const double v = k::p_increment_x_sq_integral(t, d);
            CHECK(v >= 0.0);
            CHECK(v <= 0.5 * d * (1.0 + 1e-12));
        }
    // Saturation: for t much larger than delta^2 the bound is nearly attained.
    const double v = k::p_increment_x_sq_integral(50.0, 0.01);
    CHECK(v == doctest::Approx(0.005).epsilon(1e-3));
    CHECK(k::p_increment_x_sq_integral(1.0, 0.0) == 0.0);
    CHECK_THROWS_AS(k::p_increment_x_sq_integral(0.0, 0.1), std::domain_error);
    CHECK_THROWS_AS(k::p_increment_x_sq_integral(1.0, -0.1), std::domain_error);
}

TEST_CASE("neumann green function representations agree") {
    const double L = 1.0;
    for (double t : {0.05, 0.2, 0.31830988618, 0.4, 1.0})
        for (double x : {0.0, 0.25, 0.5, 0.93})
            for (double y : {0.1, 0.5, 1.0}) {
                const auto a = k::green_neumann_image(t, x, y, L, 1e-13);
                const auto b = k::green_neumann_spectral(t, x, y, L, 1e-13);
                CHECK(a.value == doctest::Approx(b.value).epsilon(1e-10));
                // Symmetry in (x,y).
                const auto c = k::green_neumann(t, y, x, L, 1e-13);
                CHECK(c.value == doctest::Approx(a.value).epsilon(1e-10));
            }
    // Representation switch at t* = L^2/pi.
    CHECK(k::green_neumann(0.1, 0.3, 0.7, L, 1e-12).representation_used ==
          k::Representation::image_sum);
    CHECK(k::green_neumann(1.0, 0.3, 0.7, L, 1e-12).representation_used ==
          k::Representation::spectral);
}

TEST_CASE("neumann green function conserves mass and equilibrates") {
    const double L = 1.5;
    // Long-time limit is the uniform density 1/L.
    CHECK(k::green_neumann(40.0, 0.3, 0.7, L, 1e-14).value ==
          doctest::Approx(1.0 / L).epsilon(1e-12));
    for (double t : {0.05, 0.7, 3.0}) {
        const double mass = quad::adaptive(
            [&](double y) { return k::green_neumann(t, 0.4, y, L, 1e-13).value; },
            0.0, L, 1e-11);
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));
    }
    CHECK_THROWS_AS(k::green_neumann(0.0, 0.3, 0.7, L, 1e-12), std::domain_error);
    CHECK_THROWS_AS(k::green_neumann(1.0, -0.1, 0.7, L, 1e-12), std::domain_error);
    CHECK_THROWS_AS(k::green_neumann(1.0, 0.3, 2.0, L, 1e-12), std::domain_error);
    CHECK_THROWS_AS(k::green_neumann(1.0, 0.3, 0.7, -1.0, 1e-12), std::domain_error);
    CHECK_THROWS_AS(k::green_neumann(1.0, 0.3, 0.7, L, 0.0), std::domain_error);
}

TEST_CASE("exact cell integrals match quadrature") {
    const double tau = 0.07;
    const double direct = quad::adaptive(
        [&](double y) { return k::heat_kernel(tau, 0.4 - y); }, 0.1, 0.35, 1e-13);
    CHECK(k::p_cell_integral_x(tau, 0.4, 0.1, 0.35) ==
          doctest::Approx(direct).epsilon(1e-11));
    const double gdirect = quad::adaptive(
        [&](double y) { return k::green_neumann(tau, 0.4, y, 1.0, 1e-14).value; },
        0.1, 0.35, 1e-13);
    CHECK(k::green_neumann_cell_integral_y(tau, 0.4, 0.1, 0.35, 1.0, 1e-13) ==
          doctest::Approx(gdirect).epsilon(1e-10));
    // Spectral branch of the cell integral.
    const double gdirect2 = quad::adaptive(
        [&](double y) { return k::green_neumann(0.8, 0.4, y, 1.0, 1e-14).value; },
        0.1, 0.35, 1e-13);
    CHECK(k::green_neumann_cell_integral_y(0.8, 0.4, 0.1, 0.35, 1.0, 1e-13) ==
          doctest::Approx(gdirect2).epsilon(1e-10));
}

TEST_CASE("weight tables conserve mass") {
    const auto g = make_grid(0.1, -4.0, 4.0, 10, 100);
    const auto tab = k::make_p_weight_table(g);
    for (int di : {1, 5, 10}) {
        double s = 0.0;
        for (int dj = -g.nx; dj <= g.nx; ++dj) s += tab.at(di, dj) * g.dx;
        CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    }
    // Table entries match the direct cell-averaged weight.
    CHECK(tab.at(3, -7) ==
          doctest::Approx(k::cell_averaged_p_weight(g, 2, 27, g.t(5), g.x(20)))
              .epsilon(1e-13));

    const auto gn = make_grid(0.5, 0.0, 1.0, 8, 12);
    const auto gtab = k::make_g_weight_table(gn);
    for (int di : {1, 4, 8})
        for (int j : {0, 5, 12}) {
            double s = 0.0;
            for (int l = 0; l < gn.nx; ++l) s += gtab.at(di, j, l) * gn.dx;
            CHECK(s == doctest::Approx(1.0).epsilon(1e-10));
        }
    CHECK_THROWS_AS(k::make_g_weight_table(make_grid(0.5, -1.0, 1.0, 4, 4)),
                    std::invalid_argument);
    CHECK_THROWS_AS(k::cell_averaged_p_weight(g, 10, 0, 0.05, 0.0),
                    std::out_of_range);
    CHECK_THROWS_AS(k::cell_averaged_p_weight(g, 2, 0, g.t(2), 0.0),
                    std::domain_error);
}
