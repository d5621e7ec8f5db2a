"""Two identical rectangular barriers: scattering states, their transmission and
reflection subprocesses, characteristic times and wave-packet dynamics."""

from .core import BarrierSystem, get_preset, make_system, system_from_dimensionless
from .scattering import find_resonances, scatter, unit_transmission_points
from .waves import decompose
from .times import time_scales, times_profile, times_vs_L

__all__ = [
    "BarrierSystem", "make_system", "system_from_dimensionless", "get_preset",
    "scatter", "find_resonances", "unit_transmission_points", "decompose",
    "time_scales", "times_profile", "times_vs_L",
]
