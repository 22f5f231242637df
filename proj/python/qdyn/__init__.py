"""Process capability bounds from two complementary measurement settings."""

from ._core import (
    DimensionError,
    ParameterError,
    bounds,
    demo,
    direct,
    measure_names,
    noisy_chi,
    process_fidelity,
    settings_count,
    sqpt,
    transitions,
)

__all__ = [
    "DimensionError",
    "ParameterError",
    "bounds",
    "demo",
    "direct",
    "measure_names",
    "noisy_chi",
    "process_fidelity",
    "settings_count",
    "sqpt",
    "transitions",
]
