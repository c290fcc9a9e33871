"""Smooth asymmetric actuator saturation.

The plant input ``u`` is the state of the first-order model

    du/dt = G(u) * u_c - p1 * p2 * u,
    G(u)  = p1 * (1 - (u / u_max)**gamma)   if u > 0
            p1 * (1 - (u / u_min)**gamma)   if u <= 0

driven by the commanded input ``u_c``.  For any bounded command the state
never leaves ``(u_min, u_max)``; :func:`invariant_bounds` gives the tighter
interval reachable under ``|u_c| <= xi`` when starting from zero.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, SaturationDomainError
from .jet import int_pow, value_of


@dataclass(frozen=True)
class SaturationParams:
    p1: float
    p2: float
    gamma: int
    u_min: float
    u_max: float

    def __post_init__(self):
        if not self.p1 > 0 or not self.p2 > 0:
            raise ConfigError(f"p1 and p2 must be positive, got p1={self.p1}, p2={self.p2}")
        if isinstance(self.gamma, bool) or not isinstance(self.gamma, int):
            raise ConfigError(f"gamma must be an integer, got {self.gamma!r}")
        if self.gamma < 2 or self.gamma % 2:
            raise ConfigError(f"gamma must be a positive even integer, got {self.gamma}")
        if not self.u_min < 0 < self.u_max:
            raise ConfigError(
                f"need u_min < 0 < u_max, got u_min={self.u_min}, u_max={self.u_max}")

    @property
    def leak(self):
        """The product ``p1 * p2`` multiplying ``u`` in the drift."""
        return self.p1 * self.p2


REFERENCE_SATURATION = SaturationParams(p1=100.0, p2=0.1, gamma=2, u_min=-0.5, u_max=0.75)


@dataclass(frozen=True)
class ConfinementCertificate:
    xi: float
    u_tilde_max: float
    u_tilde_min: float


def effective_gain(u, params):
    """Gain ``G(u)`` multiplying the commanded input.

    ``u`` may be a float, a jet or a traced scalar; the branch is selected
    on its value.

    Raises:
        SaturationDomainError: if ``u`` lies outside ``[u_min, u_max]``.
    """
    v = value_of(u)
    if v < params.u_min or v > params.u_max:
        raise SaturationDomainError(
            f"u={v!r} outside the saturation domain [{params.u_min}, {params.u_max}]")
    if v > 0:
        bracket = 1.0 - int_pow(u / params.u_max, params.gamma)
    else:
        bracket = 1.0 - int_pow(u / params.u_min, params.gamma)
    return params.p1 * bracket


def saturation_rhs(u, u_c, params):
    """Right-hand side ``du/dt`` of the saturation model."""
    return effective_gain(u, params) * u_c - params.leak * u


def invariant_bounds(params, xi):
    """Confinement interval for commands bounded by ``xi``.

    Solving ``G(u) * xi = p1 * p2 * |u|`` on each side gives the ceiling and
    floor of the reachable set.  The lower bound uses ``|u_min|`` so that it
    lies strictly between ``u_min`` and zero.
    """
    if not xi > 0:
        raise ConfigError(f"xi must be positive, got {xi}")
    inv_gamma = 1.0 / params.gamma
    u_tilde_max = params.u_max * (xi / (xi + params.p2 * params.u_max)) ** inv_gamma
    u_tilde_min = params.u_min * (xi / (xi + params.p2 * abs(params.u_min))) ** inv_gamma
    return ConfinementCertificate(xi=float(xi), u_tilde_max=u_tilde_max, u_tilde_min=u_tilde_min)


def hard_saturation(v, params):
    """Clipping nonlinearity ``sat(v)``, kept as a reference for comparisons."""
    return np.clip(v, params.u_min, params.u_max)
