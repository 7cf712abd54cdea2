"""Smoke tests for the python bindings.

Requires the package to be installed first:
    pip install -e . --no-build-isolation
"""

import math
import tempfile

import pytest

gheat = pytest.importorskip("gheat")


def test_kernel_and_rng_oracles():
    assert gheat.heat_kernel(1.0, 0.0) == pytest.approx(
        1.0 / math.sqrt(4.0 * math.pi), abs=1e-15
    )
    assert gheat.normal_icdf(0.975) == pytest.approx(1.9599639845400536, abs=1e-12)
    assert gheat.p_tail_sq_integral(0.5) == pytest.approx(
        1.0 / math.sqrt(4.0 * math.pi), rel=1e-12
    )


def test_grid_and_noise_reproducible():
    g = gheat.make_grid(0.5, 0.0, 1.0, 10, 8)
    assert g.dt == pytest.approx(0.05)
    b = gheat.SigmaBounds(0.5, 1.0)
    ctl = gheat.make_control(g, b, "constant", 0.75, 0)
    w1 = gheat.sample_noise(g, ctl, master_seed=42)
    w2 = gheat.sample_noise(g, ctl, master_seed=42)
    assert w1.increments == w2.increments
    assert all(s == 0.75 for s in w1.sigma)
    with pytest.raises(ValueError):
        gheat.make_grid(-1.0, 0.0, 1.0, 10, 8)


def test_g_function_and_pde():
    assert gheat.g_function(0.5, 1.0, 2.0) == pytest.approx(1.0)
    assert gheat.g_function(0.5, 1.0, -2.0) == pytest.approx(-0.25)
    # E[X_t^2] for x^2 payoff equals sigma_hi^2 * t under the upper expectation.
    v = gheat.solve_g_heat_pde(lambda x: x * x, 0.5, 0.5, 1.0, 6.0, 600)
    assert v == pytest.approx(0.5, abs=1e-4)


def test_envelope_over_dictionary():
    g = gheat.make_grid(0.25, 0.0, 1.0, 8, 8)
    b = gheat.SigmaBounds(0.5, 1.0)
    dictionary = gheat.default_dictionary(g, b, 7)
    assert len(dictionary) == 7
    env = gheat.envelope(lambda w: 2.0, g, dictionary, 128, 11)
    assert env.upper_estimate == pytest.approx(2.0, abs=1e-13)
    assert env.lower_estimate == pytest.approx(2.0, abs=1e-13)


def test_runner_quick_command():
    cfg = gheat.default_config("fubini")
    cfg["quick"] = True
    with tempfile.TemporaryDirectory() as out:
        cfg["output_dir"] = out
        res = gheat.run(cfg)
    assert res["all_passed"]
    assert res["exit_code"] == 0
    assert any(c["name"] == "fubini-simple-fields" for c in res["checks"])
