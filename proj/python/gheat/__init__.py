"""Python interface to the stochastic heat equation laboratory.

The heavy lifting lives in the C++ extension module ``_gheat``; this package
re-exports its public surface.
"""

from ._gheat import (
    GridSpec,
    NoiseRealization,
    ScenarioEnsemble,
    SigmaBounds,
    VolatilityControl,
    commands,
    default_config,
    default_dictionary,
    envelope,
    g_function,
    heat_kernel,
    make_control,
    make_grid,
    normal_icdf,
    p_increment_t_sq_integral,
    p_increment_x_sq_integral,
    p_tail_sq_integral,
    run,
    sample_noise,
    set_thread_count,
    solve_g_heat_pde,
)

__version__ = "1.0.0"

__all__ = [
    "GridSpec",
    "NoiseRealization",
    "ScenarioEnsemble",
    "SigmaBounds",
    "VolatilityControl",
    "commands",
    "default_config",
    "default_dictionary",
    "envelope",
    "g_function",
    "heat_kernel",
    "make_control",
    "make_grid",
    "normal_icdf",
    "p_increment_t_sq_integral",
    "p_increment_x_sq_integral",
    "p_tail_sq_integral",
    "run",
    "sample_noise",
    "set_thread_count",
    "solve_g_heat_pde",
]
