#include <doctest.h>

#include <cmath>

#include "gheat/nonlinear_she.hpp"

using namespace gheat;
using namespace gheat::nonlinear_she;

namespace {

Coefficients additive() {
    Coefficients c;
    c.a = [](double) { return 1.0; };
    c.b = [](double) { return 0.0; };
    c.lipschitz_a = 0.0;
    c.lipschitz_b = 0.0;
    c.u0 = [](double) { return 1.0; };
    return c;
}

integrals::EnsembleSpec one_scenario(const GridSpec& g, int realizations,
                                     double sigma = 1.0) {
    integrals::EnsembleSpec es;
    es.grid = g;
    es.controls = {noise::make_control(g, noise::make_bounds(0.0, 1.0),
                                       noise::ControlKind::constant, sigma, 0)};
    es.realizations = realizations;
    es.master_seed = 4242;
    return es;
}

}  // namespace

TEST_CASE("coefficient validation catches understated lipschitz constants") {
    Coefficients good = additive();
    good.a = [](double u) { return 0.5 * u; };
    good.lipschitz_a = 0.5;
    CHECK_NOTHROW(validate_coefficients(good));
    Coefficients bad = good;
    bad.lipschitz_a = 0.1;
    CHECK_THROWS_AS(validate_coefficients(bad), std::invalid_argument);
    Coefficients missing = good;
    missing.b = nullptr;
    CHECK_THROWS_AS(validate_coefficients(missing), std::invalid_argument);
}

TEST_CASE("noise-free dynamics preserve constants under neumann walls") {
    const auto g = make_grid(0.5, 0.0, 1.0, 12, 10);
    Coefficients c = additive();
    c.a = [](double) { return 0.0; };
    c.u0 = [](double) { return 2.5; };
    const auto gtab = kernels::make_g_weight_table(g);
    const auto res = picard_solve(c, g, one_scenario(g, 1), gtab, 10, 1e-10);
    CHECK(res.converged);
    for (int i = 0; i <= g.nt; ++i)
        for (int j = 0; j <= g.nx; ++j)
            CHECK(res.fields[0][0].at(i, j) == doctest::Approx(2.5).epsilon(1e-9));
    // First iteration already matches the fixed point, so D_1 vanishes.
    REQUIRE(!res.trace.diffs.empty());
    CHECK(res.trace.diffs.back() <= 1e-12);
}

TEST_CASE("picard iteration converges and satisfies the mild equation") {
    const auto g = make_grid(0.25, 0.0, 1.0, 10, 10);
    const auto c = additive();
    const auto gtab = kernels::make_g_weight_table(g);
    const auto es = one_scenario(g, 3);
    const auto res = picard_solve(c, g, es, gtab, 20, 1e-8);
    CHECK(res.converged);
    REQUIRE(res.trace.converged_at.has_value());
    const auto u0part = green_flow_part(c.u0, g);
    for (int r = 0; r < es.realizations; ++r) {
        const auto w = noise::sample_noise(
            g, es.controls[0], {es.master_seed, 0, static_cast<std::uint64_t>(r)});
        CHECK(mild_residual(res.fields[0][r], c, gtab, w, u0part) <= 1e-7);
    }
}

TEST_CASE("fixed point is independent of the starting iterate") {
    const auto g = make_grid(0.25, 0.0, 1.0, 8, 8);
    Coefficients c = additive();
    c.a = [](double u) { return 0.5 * std::sin(u); };
    c.lipschitz_a = 0.5;
    c.b = [](double u) { return -u; };
    c.lipschitz_b = 1.0;
    const auto gtab = kernels::make_g_weight_table(g);
    const auto ctrl = noise::make_control(g, noise::make_bounds(0.5, 1.0),
                                          noise::ControlKind::constant, 1.0, 0);
    const auto a = picard_iterate_one(c, g, gtab, ctrl, {9, 0, 0}, 40, 1e-10, 0.0);
    const auto b = picard_iterate_one(c, g, gtab, ctrl, {9, 0, 0}, 40, 1e-10, 1.0);
    double diff = 0.0;
    for (std::size_t k = 0; k < a.values.size(); ++k)
        diff = std::max(diff, std::fabs(a.values[k] - b.values[k]));
    CHECK(diff <= 1e-6);
}

TEST_CASE("drift-only reduction matches the exponential decay ode") {
    const auto g = make_grid(1.0, 0.0, 1.0, 100, 16);
    Coefficients c = additive();
    c.a = [](double) { return 0.0; };
    c.b = [](double u) { return -u; };
    c.lipschitz_b = 1.0;
    const auto gtab = kernels::make_g_weight_table(g);
    const auto res = picard_solve(c, g, one_scenario(g, 1), gtab, 30, 1e-10);
    CHECK(res.converged);
    CHECK(res.fields[0][0].at(g.nt, g.nx / 2) ==
          doctest::Approx(std::exp(-1.0)).epsilon(1e-2));
}

TEST_CASE("contraction diagnostics on a geometric trace") {
    PicardTrace tr;
    for (int n = 0; n < 10; ++n) tr.diffs.push_back(std::pow(0.5, n));
    const auto rep = contraction_diagnostics(tr);
    CHECK(rep.eventually_decreasing);
    CHECK(rep.log_concave_tail);
    CHECK(rep.geometric_ratio == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("neumann weak form residual is tiny for the constant solution") {
    const auto g = make_grid(0.5, 0.0, 1.0, 16, 16);
    Coefficients c = additive();
    c.a = [](double) { return 0.0; };
    c.u0 = [](double) { return 2.5; };
    const auto ctrl = noise::make_control(g, noise::make_bounds(0.0, 1.0),
                                          noise::ControlKind::constant, 0.0, 0);
    const auto w = noise::sample_noise(g, ctrl, {3, 0, 0});
    FieldPath u;
    u.grid = g;
    u.values.assign((g.nt + 1) * (g.nx + 1), 2.5);
    const auto phi = identities::make_neumann_bump(0.5, 1.0);
    CHECK(weak_form_residual_neumann(u, phi, c, w) <= 1e-10);
}

TEST_CASE("mild residual detects a perturbed solution") {
    const auto g = make_grid(0.25, 0.0, 1.0, 8, 8);
    Coefficients c = additive();
    c.a = [](double) { return 0.0; };
    const auto gtab = kernels::make_g_weight_table(g);
    const auto ctrl = noise::make_control(g, noise::make_bounds(0.0, 1.0),
                                          noise::ControlKind::constant, 0.0, 0);
    const auto w = noise::sample_noise(g, ctrl, {3, 0, 0});
    FieldPath u;
    u.grid = g;
    u.values.assign((g.nt + 1) * (g.nx + 1), 1.0);
    CHECK(mild_residual(u, c, gtab, w) <= 1e-9);
    u.at(5, 4) += 1.0;
    CHECK(mild_residual(u, c, gtab, w) >= 0.5);
}
