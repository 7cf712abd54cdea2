#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "gheat/expectation.hpp"

using namespace gheat;
using namespace gheat::expectation;

namespace {

integrals::EnsembleSpec small_ensemble(int realizations = 120) {
    const auto g = make_grid(0.5, 0.0, 1.0, 3, 3);
    integrals::EnsembleSpec es;
    es.grid = g;
    es.controls = noise::default_dictionary(g, noise::make_bounds(0.5, 1.0), 7);
    es.realizations = realizations;
    es.master_seed = 99;
    return es;
}

}  // namespace

TEST_CASE("g function reference values") {
    const auto b = noise::make_bounds(0.5, 1.0);
    CHECK(g_function(b, 2.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(g_function(b, -2.0) == doctest::Approx(-0.25).epsilon(1e-15));
    CHECK(g_function(b, 0.0) == 0.0);
    // Degenerate bounds reduce to the linear heat operator.
    const auto d = noise::make_bounds(1.0, 1.0);
    for (double a : {-3.0, -0.5, 0.0, 1.0, 7.0})
        CHECK(g_function(d, a) == doctest::Approx(0.5 * a).epsilon(1e-15));
}

TEST_CASE("envelope of a constant functional is exact") {
    const auto es = small_ensemble();
    const auto env =
        envelope([](const noise::NoiseRealization&) { return 3.14; }, es);
    CHECK(env.upper_estimate == doctest::Approx(3.14).epsilon(1e-14));
    CHECK(env.lower_estimate == doctest::Approx(3.14).epsilon(1e-14));
    CHECK(env.upper_stderr == doctest::Approx(0.0).epsilon(1e-14));
    REQUIRE(env.scenarios.size() == es.controls.size());
    for (const auto& s : env.scenarios)
        CHECK(s.mean == doctest::Approx(3.14).epsilon(1e-14));
    CHECK(env.upper_estimate >= env.lower_estimate);
}

TEST_CASE("envelope input validation") {
    auto es = small_ensemble();
    es.realizations = 50;
    CHECK_THROWS_AS(
        envelope([](const noise::NoiseRealization&) { return 0.0; }, es),
        std::invalid_argument);
    es = small_ensemble();
    es.controls.clear();
    CHECK_THROWS_AS(
        envelope([](const noise::NoiseRealization&) { return 0.0; }, es),
        std::invalid_argument);
}

TEST_CASE("envelope scaling and subadditivity") {
    const auto es = small_ensemble();
    const Functional f = [](const noise::NoiseRealization& w) {
        const double v = noise::rect_value(w, {0, w.grid.nt, 0, w.grid.nx});
        return v * v;
    };
    const auto rep = envelope_scaling_check(f, 2.0, es);
    CHECK(rep.homogeneous);
    CHECK(rep.subadditive);
    CHECK(rep.upper_scaled == doctest::Approx(2.0 * rep.upper_base).epsilon(1e-15));
    CHECK_THROWS_AS(envelope_scaling_check(f, -1.0, es), std::invalid_argument);
}

TEST_CASE("pde solver reproduces classical gaussian values") {
    const auto classical = noise::make_bounds(1.0, 1.0);
    // E[X_t^2] = t; the quadratic payoff is exact for the discrete laplacian.
    const double v2 = solve_g_heat_pde([](double x) { return x * x; }, 0.5,
                                       classical, {6.0, 600, 0.9});
    CHECK(v2 == doctest::Approx(0.5).epsilon(1e-5));
    const double vabs = solve_g_heat_pde([](double x) { return std::fabs(x); },
                                         1.0, classical, {8.0, 800, 0.9});
    CHECK(vabs == doctest::Approx(std::sqrt(2.0 / std::numbers::pi)).epsilon(2e-3));
}

TEST_CASE("pde solver attains the variance bounds under uncertainty") {
    const auto b = noise::make_bounds(0.5, 1.0);
    const double up = solve_g_heat_pde([](double x) { return x * x; }, 1.0, b,
                                       {8.0, 800, 0.9});
    CHECK(up == doctest::Approx(1.0).epsilon(2e-3));
    const double low = solve_g_heat_pde([](double x) { return -x * x; }, 1.0, b,
                                        {8.0, 800, 0.9});
    CHECK(-low == doctest::Approx(0.25).epsilon(2e-3));
    CHECK(up + low >= -1e-10);  // upper variance dominates the lower one
}

TEST_CASE("pde solver is monotone in the payoff") {
    const auto b = noise::make_bounds(0.5, 1.0);
    auto lo = [](double x) { return std::fabs(x - 0.3); };
    auto hi = [](double x) { return std::fabs(x - 0.3) + 0.2 * (1.0 + std::cos(x)); };
    const double vl = solve_g_heat_pde(lo, 0.5, b, {6.0, 400, 0.9});
    const double vh = solve_g_heat_pde(hi, 0.5, b, {6.0, 400, 0.9});
    CHECK(vl <= vh + 1e-12);
}

TEST_CASE("pde solver input validation") {
    const auto b = noise::make_bounds(0.5, 1.0);
    auto payoff = [](double x) { return x * x; };
    CHECK_THROWS_AS(solve_g_heat_pde(payoff, 0.0, b, {6.0, 400, 0.9}),
                    std::invalid_argument);
    CHECK_THROWS_AS(solve_g_heat_pde(payoff, 1.0, b, {2.0, 400, 0.9}),
                    std::invalid_argument);
    CHECK_THROWS_AS(solve_g_heat_pde(payoff, 1.0, b, {8.0, 2, 0.9}),
                    std::invalid_argument);
    CHECK_THROWS_AS(solve_g_heat_pde(payoff, 1.0, b, {8.0, 400, 1.5}),
                    std::invalid_argument);
    CHECK_THROWS_AS(solve_g_heat_pde(payoff, 1.0, b, {8.0, 400, 0.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        solve_g_heat_pde(
            [](double) { return std::numeric_limits<double>::infinity(); }, 1.0,
            b, {8.0, 400, 0.9}),
        std::invalid_argument);
}
