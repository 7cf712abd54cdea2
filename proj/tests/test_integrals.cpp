#include <doctest.h>

#include <cmath>

#include "gheat/integrals.hpp"
#include "gheat/noise.hpp"

using namespace gheat;
using namespace gheat::integrals;

namespace {

noise::NoiseRealization sample(const GridSpec& g, std::uint64_t r = 0) {
    const auto c = noise::make_control(g, noise::make_bounds(0.5, 1.0),
                                       noise::ControlKind::constant, 1.0, 0);
    return noise::sample_noise(g, c, {31415, 0, r});
}

Coefficient constant(double v) {
    return [v](const noise::NoiseRealization&) { return v; };
}

}  // namespace

TEST_CASE("field construction validation") {
    const auto g = make_grid(1.0, 0.0, 1.0, 4, 4);
    CHECK_THROWS_AS(make_simple_field(g, {{4, 0, 2, constant(1.0)}}),
                    std::out_of_range);
    CHECK_THROWS_AS(make_simple_field(g, {{0, 3, 2, constant(1.0)}}),
                    std::out_of_range);
    CHECK_THROWS_AS(make_simple_field(g, {{0, 0, 5, constant(1.0)}}),
                    std::out_of_range);
    CHECK_THROWS_AS(make_simple_field(g, {{0, 0, 2, nullptr}}),
                    std::invalid_argument);
    // Same time index with overlapping space ranges is rejected.
    CHECK_THROWS_AS(
        make_simple_field(g, {{1, 0, 3, constant(1.0)}, {1, 2, 4, constant(2.0)}}),
        std::invalid_argument);
    CHECK_NOTHROW(
        make_simple_field(g, {{1, 0, 2, constant(1.0)}, {1, 2, 4, constant(2.0)}}));
}

TEST_CASE("stochastic integral of the full-grid indicator sums all increments") {
    const auto g = make_grid(1.0, 0.0, 1.0, 4, 4);
    const auto w = sample(g);
    std::vector<FieldPiece> pieces;
    for (int i = 0; i < g.nt; ++i) pieces.push_back({i, 0, g.nx, constant(1.0)});
    const auto field = make_simple_field(g, std::move(pieces));
    CHECK(stochastic_integral(field, w) ==
          doctest::Approx(noise::rect_value(w, {0, g.nt, 0, g.nx})).epsilon(1e-14));
    CHECK(value_at(field, w, 2, 3) == 1.0);
    // Bochner integral weighs by cell measure instead.
    CHECK(bochner_integral(field, w) == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("integrals are linear per realization") {
    const auto g = make_grid(1.0, 0.0, 1.0, 4, 4);
    const auto w = sample(g, 3);
    const auto f1 = make_simple_field(
        g, {{0, 0, 2, constant(1.0)}, {2, 1, 4, constant(-0.5)}});
    const auto f2 = make_simple_field(
        g, {{0, 0, 2, constant(2.0)}, {3, 0, 3, constant(0.25)}});
    const double alpha = 1.7, beta = -0.6;
    const auto merged = make_simple_field(
        g, {{0, 0, 2, constant(alpha * 1.0 + beta * 2.0)},
            {2, 1, 4, constant(alpha * -0.5)},
            {3, 0, 3, constant(beta * 0.25)}});
    CHECK(stochastic_integral(merged, w) ==
          doctest::Approx(alpha * stochastic_integral(f1, w) +
                          beta * stochastic_integral(f2, w))
              .epsilon(1e-13));
    CHECK(bochner_integral(merged, w) ==
          doctest::Approx(alpha * bochner_integral(f1, w) +
                          beta * bochner_integral(f2, w))
              .epsilon(1e-13));
}

TEST_CASE("grid mismatch is rejected") {
    const auto g = make_grid(1.0, 0.0, 1.0, 4, 4);
    const auto field = make_simple_field(g, {{0, 0, 4, constant(1.0)}});
    const auto w_other = sample(make_grid(1.0, 0.0, 1.0, 4, 5));
    CHECK_THROWS_AS(stochastic_integral(field, w_other), std::invalid_argument);
}

TEST_CASE("kernel weighted integral with unit kernel reduces to the plain one") {
    const auto g = make_grid(1.0, 0.0, 2.0, 5, 6);
    const auto w = sample(g, 4);
    const auto field = make_simple_field(
        g, {{1, 0, 6, constant(0.8)}, {3, 2, 5, constant(-1.1)}});
    const auto h1 = make_kernel(g, [](double, double) { return 1.0; });
    CHECK(h1.l2_norm_sq == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(h1.l2_midpoint_sq == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(kernel_weighted_integral(h1, field, w) ==
          doctest::Approx(stochastic_integral(field, w)).epsilon(1e-13));
    CHECK_THROWS_AS(
        make_kernel(g, [](double t, double) { return 1.0 / (t - 0.5); }),
        std::invalid_argument);
}

TEST_CASE("adaptedness probe distinguishes past from future coefficients") {
    const auto g = make_grid(1.0, 0.0, 1.0, 4, 4);
    const auto c = noise::make_control(g, noise::make_bounds(0.5, 1.0),
                                       noise::ControlKind::constant, 1.0, 0);
    const auto adapted = make_simple_field(
        g, {{2, 0, 4, [](const noise::NoiseRealization& w) {
                 return std::tanh(noise::rect_value(w, {0, 2, 0, 4}));
             }}});
    CHECK(is_adapted(adapted, c, {55, 0, 0}));
    const auto anticipating = make_simple_field(
        g, {{1, 0, 4, [](const noise::NoiseRealization& w) {
                 return noise::rect_value(w, {0, 4, 0, 4});
             }}});
    CHECK_FALSE(is_adapted(anticipating, c, {55, 0, 0}));
}

TEST_CASE("empirical second-moment norm of a constant field") {
    const auto g = make_grid(1.0, 0.0, 1.0, 2, 2);
    EnsembleSpec es;
    es.grid = g;
    es.controls = {noise::make_control(g, noise::make_bounds(0.5, 1.0),
                                       noise::ControlKind::constant, 1.0, 0)};
    es.realizations = 10;
    es.master_seed = 5;
    std::vector<FieldPiece> pieces;
    for (int i = 0; i < g.nt; ++i) pieces.push_back({i, 0, g.nx, constant(3.0)});
    const auto field = make_simple_field(g, std::move(pieces));
    const auto ms = empirical_s2_norm(field, es);
    CHECK(ms.mean == doctest::Approx(9.0).epsilon(1e-12));
    CHECK(ms.stderr_ == doctest::Approx(0.0).epsilon(1e-12));
    EnsembleSpec empty = es;
    empty.realizations = 0;
    CHECK_THROWS_AS(empirical_s2_norm(field, empty), std::invalid_argument);
}
