#include <doctest.h>

#include <cmath>

#include "gheat/noise.hpp"
#include "gheat/parallel.hpp"

using namespace gheat;
using namespace gheat::noise;

TEST_CASE("sigma bounds validation") {
    CHECK_NOTHROW(make_bounds(0.0, 1.0));
    CHECK_NOTHROW(make_bounds(0.5, 0.5));
    CHECK_THROWS_AS(make_bounds(-0.1, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(make_bounds(1.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(make_bounds(0.0, 0.0), std::invalid_argument);
}

TEST_CASE("controls keep sigma inside the bounds") {
    const auto g = make_grid(0.5, 0.0, 1.0, 6, 8);
    const auto bounds = make_bounds(0.5, 1.0);
    const rng::SeedPath sp{2024, 1, 3};
    for (const auto& c : default_dictionary(g, bounds, 99)) {
        const auto w = sample_noise(g, c, sp);
        for (int i = 0; i < g.nt; ++i)
            for (int j = 0; j < g.nx; ++j) {
                CHECK(w.sigma_at(i, j) >= bounds.lo);
                CHECK(w.sigma_at(i, j) <= bounds.hi);
            }
    }
    const auto cst = make_control(g, bounds, ControlKind::constant, 0.7, 0);
    const auto w = sample_noise(g, cst, sp);
    for (double s : w.sigma) CHECK(s == 0.7);
    const auto bb = make_control(g, bounds, ControlKind::bang_bang_random, 0.0, 5);
    const auto wb = sample_noise(g, bb, sp);
    bool saw_lo = false, saw_hi = false;
    for (double s : wb.sigma) {
        CHECK((s == bounds.lo || s == bounds.hi));
        saw_lo = saw_lo || s == bounds.lo;
        saw_hi = saw_hi || s == bounds.hi;
    }
    CHECK(saw_lo);
    CHECK(saw_hi);
    CHECK_THROWS_AS(make_control(g, bounds, ControlKind::constant, 1.2, 0),
                    std::invalid_argument);
}

TEST_CASE("increments scale the raw normals by sigma sqrt(dt dx)") {
    const auto g = make_grid(0.5, 0.0, 2.0, 4, 5);
    const rng::SeedPath sp{7, 0, 11};
    const auto xi = sample_xi(g, sp);
    const auto c = make_control(g, make_bounds(0.0, 2.0), ControlKind::constant,
                                1.5, 0);
    const auto w = modulate(c, sp, xi);
    const double scale = 1.5 * std::sqrt(g.dt * g.dx);
    for (int i = 0; i < g.nt; ++i)
        for (int j = 0; j < g.nx; ++j)
            CHECK(w.at(i, j) == doctest::Approx(scale * xi[i * g.nx + j])
                                    .epsilon(1e-15));
    CHECK_THROWS_AS(modulate(c, sp, std::vector<double>(3, 0.0)),
                    std::invalid_argument);
}

TEST_CASE("feedback control is adapted") {
    const auto g = make_grid(0.5, 0.0, 1.0, 8, 6);
    const auto c = make_control(g, make_bounds(0.5, 1.0), ControlKind::feedback,
                                0.0, 3);
    const rng::SeedPath sp{101, 0, 0};
    auto xi1 = sample_xi(g, sp);
    auto xi2 = xi1;
    const int cut = 5;  // rows >= cut get fresh draws
    for (int i = cut; i < g.nt; ++i)
        for (int j = 0; j < g.nx; ++j)
            xi2[i * g.nx + j] = rng::normal({202, 0, 0}, i * g.nx + j);
    const auto w1 = modulate(c, sp, xi1);
    const auto w2 = modulate(c, sp, xi2);
    // Sigma through row `cut` only reads increments strictly before it.
    for (int i = 0; i <= cut && i < g.nt; ++i)
        for (int j = 0; j < g.nx; ++j)
            CHECK(w1.sigma_at(i, j) == w2.sigma_at(i, j));
}

TEST_CASE("sampling is reproducible across thread counts") {
    const auto g = make_grid(0.25, 0.0, 1.0, 6, 6);
    const auto c = make_control(g, make_bounds(0.5, 1.0), ControlKind::feedback,
                                0.0, 1);
    parallel::set_thread_count(1);
    const auto w1 = sample_noise(g, c, {5, 2, 9});
    parallel::set_thread_count(4);
    const auto w2 = sample_noise(g, c, {5, 2, 9});
    parallel::set_thread_count(0);
    CHECK(w1.increments == w2.increments);
    CHECK(w1.sigma == w2.sigma);
    // Distinct realizations differ.
    const auto w3 = sample_noise(g, c, {5, 2, 10});
    CHECK(w1.increments != w3.increments);
}

TEST_CASE("rect value sums increments over the rectangle") {
    const auto g = make_grid(0.5, 0.0, 1.0, 4, 5);
    const auto c = make_control(g, make_bounds(0.5, 1.0), ControlKind::constant,
                                1.0, 0);
    const auto w = sample_noise(g, c, {17, 0, 0});
    const GridRect r{1, 3, 2, 5};
    double s = 0.0;
    for (int i = 1; i < 3; ++i)
        for (int j = 2; j < 5; ++j) s += w.at(i, j);
    CHECK(rect_value(w, r) == doctest::Approx(s).epsilon(1e-15));
    CHECK(rect_value(w, {2, 2, 0, 5}) == 0.0);
    CHECK_THROWS_AS(rect_value(w, {0, 5, 0, 5}), std::out_of_range);
}

TEST_CASE("default dictionary shape") {
    const auto g = make_grid(0.5, 0.0, 1.0, 4, 4);
    const auto dict = default_dictionary(g, make_bounds(0.5, 1.0), 7);
    CHECK(dict.size() == 7);
    int n_const = 0, n_bb = 0, n_fb = 0;
    for (const auto& c : dict) {
        if (c.kind == ControlKind::constant) ++n_const;
        if (c.kind == ControlKind::bang_bang_random) ++n_bb;
        if (c.kind == ControlKind::feedback) ++n_fb;
        for (const auto& o : dict)
            if (&o != &c) CHECK(o.id != c.id);
    }
    CHECK(n_const == 5);
    CHECK(n_bb == 1);
    CHECK(n_fb == 1);
}
