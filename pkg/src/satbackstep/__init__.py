"""Backstepping tracking control through a smooth asymmetric input saturation.

The plant input is the state of a first-order saturation model driven by a
commanded input; the input gain of that model vanishes at ``u_min`` and
``u_max``.  Two tracking
controllers are provided: an unconstrained design (:mod:`.ctrl_global`) and a
barrier-Lyapunov design for a time-varying output corridor
(:mod:`.ctrl_blf`).  :mod:`.sim` integrates the closed loop and checks the
guarantees numerically; :mod:`.cli` runs JSON scenarios.
"""

from .ctrl_global import ControllerGains
from .errors import (
    BarrierViolation,
    ConfigError,
    NumericalFailure,
    SatBackstepError,
    SaturationSingularity,
    TheoremViolation,
)
from .jet import Jet
from .plant import builtin_plant, make_plant
from .saturation import REFERENCE_SATURATION, SaturationParams, invariant_bounds
from .scenario import load_scenario, parse_scenario
from .sim import ClosedLoop, IntegratorSettings, monitor_check, rk4_step, simulate

__version__ = "0.1.0"

__all__ = [
    "BarrierViolation", "ClosedLoop", "ConfigError", "ControllerGains", "IntegratorSettings",
    "Jet", "NumericalFailure", "REFERENCE_SATURATION", "SatBackstepError", "SaturationParams",
    "SaturationSingularity", "TheoremViolation", "builtin_plant", "invariant_bounds",
    "load_scenario", "make_plant", "monitor_check", "parse_scenario", "rk4_step", "simulate",
]
