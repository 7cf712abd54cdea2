#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gheat/kernels.hpp"
#include "gheat/linear_she.hpp"
#include "gheat/noise.hpp"

using namespace gheat;
using namespace gheat::linear_she;

namespace {

noise::NoiseRealization zero_noise(const GridSpec& g) {
    const auto c = noise::make_control(g, noise::make_bounds(0.0, 1.0),
                                       noise::ControlKind::constant, 0.0, 0);
    return noise::sample_noise(g, c, {1, 0, 0});
}

noise::NoiseRealization unit_noise(const GridSpec& g, std::uint64_t r = 0) {
    const auto c = noise::make_control(g, noise::make_bounds(0.5, 1.0),
                                       noise::ControlKind::constant, 1.0, 0);
    return noise::sample_noise(g, c, {1, 0, r});
}

}  // namespace

TEST_CASE("domain truncation guard") {
    // half width 1 < 8 sqrt(1.0)
    const auto g = make_grid(1.0, -1.0, 1.0, 4, 8);
    CHECK_THROWS_AS(solve_linear([](double) { return 0.0; }, g, zero_noise(g)),
                    std::invalid_argument);
}

TEST_CASE("constant initial data is preserved without noise") {
    const auto g = make_grid(0.1, -4.0, 4.0, 5, 50);
    const auto u = solve_linear([](double) { return 2.5; }, g, zero_noise(g));
    // Away from the truncation boundary the heat flow keeps constants.
    const double margin = 10.0 * std::sqrt(g.t_end);
    for (int i = 0; i <= g.nt; ++i)
        for (int j = 0; j <= g.nx; ++j) {
            if (g.x(j) < g.x_lo + margin || g.x(j) > g.x_hi - margin) continue;
            CHECK(u.at(i, j) == doctest::Approx(2.5).epsilon(1e-9));
        }
}

TEST_CASE("semigroup oracle: gaussian initial data evolves in closed form") {
    const auto g = make_grid(0.1, -4.0, 4.0, 2, 200);
    const double t0 = 0.1;
    const auto u = solve_linear(
        [&](double x) { return kernels::heat_kernel(t0, x); }, g, zero_noise(g));
    for (int j = 0; j <= g.nx; ++j) {
        const double x = g.x(j);
        if (std::fabs(x) > 1.5) continue;
        CHECK(u.at(g.nt, j) ==
              doctest::Approx(kernels::heat_kernel(t0 + g.t_end, x)).epsilon(1e-6));
    }
}

TEST_CASE("z_at matches a brute-force weight sum") {
    const auto g = make_grid(0.1, -4.0, 4.0, 6, 30);
    const auto w = unit_noise(g);
    const auto tab = kernels::make_p_weight_table(g);
    const int i = 5, j = 17;
    double direct = 0.0;
    for (int k = 0; k < i; ++k)
        for (int l = 0; l < g.nx; ++l)
            direct += kernels::cell_averaged_p_weight(g, k, l, g.t(i), g.x(j)) *
                      w.at(k, l);
    CHECK(z_at(w, tab, i, j) == doctest::Approx(direct).epsilon(1e-12));
    CHECK(z_at(w, tab, 0, j) == 0.0);
    CHECK_THROWS_AS(z_at(w, tab, -1, 0), std::out_of_range);
    CHECK_THROWS_AS(z_at(w, tab, g.nt + 1, 0), std::out_of_range);
    const auto tab2 = kernels::make_p_weight_table(make_grid(0.1, -4.0, 4.0, 6, 31));
    CHECK_THROWS_AS(z_at(w, tab2, 2, 2), std::invalid_argument);
}

TEST_CASE("solution decomposes into heat flow plus stochastic convolution") {
    const auto g = make_grid(0.1, -4.0, 4.0, 4, 40);
    const auto w = unit_noise(g, 5);
    const auto tab = kernels::make_p_weight_table(g);
    auto u0 = [](double x) { return std::exp(-x * x); };
    const auto u = solve_linear(u0, g, w, tab);
    const auto det = heat_flow_part(u0, g);
    for (int i = 0; i <= g.nt; ++i)
        for (int j = 0; j <= g.nx; j += 7)
            CHECK(u.at(i, j) == doctest::Approx(det[i * (g.nx + 1) + j] +
                                                z_at(w, tab, i, j))
                                    .epsilon(1e-12));
}

TEST_CASE("discrete variance sum is positive and grows with time") {
    const auto g = make_grid(0.2, -4.0, 4.0, 8, 40);
    const auto tab = kernels::make_p_weight_table(g);
    double prev = 0.0;
    for (int i = 1; i <= g.nt; ++i) {
        const double s = z_weight_sum_sq(tab, i, g.nx / 2);
        CHECK(s > prev);
        prev = s;
    }
    // It approximates the continuum variance sqrt(t/(2 pi)) under sigma == 1.
    const double cont = std::sqrt(g.t_end / (2.0 * std::numbers::pi));
    CHECK(z_weight_sum_sq(tab, g.nt, g.nx / 2) ==
          doctest::Approx(cont).epsilon(0.05));
}

TEST_CASE("weak form residual vanishes for the zero solution") {
    const auto g = make_grid(0.05, -2.0, 2.0, 8, 32);
    const auto w = zero_noise(g);
    FieldPath u;
    u.grid = g;
    u.values.assign((g.nt + 1) * (g.nx + 1), 0.0);
    const auto phi = identities::make_bump(0.05, -1.0, 1.0);
    CHECK(weak_form_residual(u, phi, [](double) { return 0.0; }, w) <= 1e-14);
}

TEST_CASE("increment moments reject off-grid evaluation points") {
    const auto g = make_grid(0.1, -4.0, 4.0, 8, 32);
    const auto tab = kernels::make_p_weight_table(g);
    integrals::EnsembleSpec es;
    es.grid = g;
    es.controls = {noise::make_control(g, noise::make_bounds(0.5, 1.0),
                                       noise::ControlKind::constant, 1.0, 0)};
    es.realizations = 4;
    es.master_seed = 11;
    CHECK_THROWS_AS(
        z_increment_moments(es, tab, 0.033, 0.0, {g.dx}, IncrementAxis::space),
        std::invalid_argument);
    CHECK_THROWS_AS(
        z_increment_moments(es, tab, 0.05, 0.1, {g.dx}, IncrementAxis::space),
        std::invalid_argument);
    CHECK_THROWS_AS(
        z_increment_moments(es, tab, 0.05, 0.0, {-0.1}, IncrementAxis::time),
        std::invalid_argument);
    // Zero delta row has zero moment and zero bound.
    const auto rows =
        z_increment_moments(es, tab, 0.05, 0.0, {0.0}, IncrementAxis::time);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].empirical_upper == 0.0);
    CHECK(rows[0].bound == 0.0);
}
