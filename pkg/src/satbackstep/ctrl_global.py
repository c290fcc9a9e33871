"""Backstepping tracking controller with a bounded plant input.

Error coordinates::

    phi_1 = y - y_d,   phi_i = x_i - eta_{i-1},   varrho = u - eta_n

with stabilizing functions

    eta_1 = (dy_d - f_1 - k_1 phi_1) / g_1
    eta_i = (d eta_{i-1} - f_i - g_{i-1} phi_{i-1} - k_i phi_i) / g_i

and the command fed to the saturation model

    u_c = (p1 p2 u + d eta_n - g_n phi_n - k_{n+1} varrho) / G(u).

Along the closed loop ``dV/dt = -sum k_j phi_j^2 - k_{n+1} varrho^2`` holds
exactly for ``V = (sum phi_j^2 + varrho^2) / 2``.  Each ``eta_i`` is a jet,
so ``d eta_i`` is read from its first derivative slot.
"""

from dataclasses import dataclass
import math

from .errors import ConfigError, SaturationSingularity, SingularPlantError
from .jet import EPS_DIV, Jet
from .plant import plant_jets
from .saturation import effective_gain


@dataclass(frozen=True)
class ControllerGains:
    """Design constants.

    Attributes:
        k: ``k_1 .. k_{n+1}``, all positive.
        delta: offset inside the time-varying BLF gain.
        r: barrier exponent of the BLF controller (``2r >= n``).
    """

    k: tuple
    delta: float = 0.01
    r: int = 1

    def __post_init__(self):
        if not self.k or any(not (ki > 0 and math.isfinite(ki)) for ki in self.k):
            raise ConfigError(f"all gains k_i must be positive, got {self.k!r}")
        if not self.delta > 0:
            raise ConfigError(f"delta must be positive, got {self.delta}")
        if isinstance(self.r, bool) or not isinstance(self.r, int) or self.r < 1:
            raise ConfigError(f"r must be a positive integer, got {self.r!r}")

    def check_order(self, n):
        if len(self.k) != n + 1:
            raise ConfigError(f"an order-{n} plant needs {n + 1} gains, got {len(self.k)}")

    @property
    def decay_rate(self):
        """``min 2 k_j``: guaranteed exponential rate of ``V``."""
        return 2.0 * min(self.k)


@dataclass
class ErrorState:
    """Error coordinates at one instant.

    ``cross_term`` is the factor multiplying ``varrho`` in the Lyapunov
    derivative before the command is designed (``g_n phi_n`` here).
    """

    phi: list
    varrho: float
    eta_jets: list
    cross_term: float


def _gain_value(gi, i):
    g0 = gi.derivs[0] if isinstance(gi, Jet) else gi
    if abs(g0) < EPS_DIV:
        raise SingularPlantError(f"g{i + 1}(x) = {g0!r} is within {EPS_DIV} of zero")
    return gi


def backstep(x, u, ref_jet, model, k, first_gain=None, first_cross=None, xj=None):
    """Shared stabilizing-function recursion.

    Args:
        first_gain: extra (jet) gain added to ``k_1`` in ``eta_1``.
        first_cross: jet replacing ``g_1 phi_1`` as the cross term removed in
            the second step (or in the command when ``n = 1``).
        xj: precomputed :func:`~satbackstep.plant.plant_jets`, if available.

    Returns:
        ``(eta_jets, phi_jets, cross_term)``; ``eta_i`` has order ``n + 1 - i``.
    """
    n = model.order
    if xj is None:
        xj = plant_jets(x, u, model)
    phi = xj[0] - ref_jet.truncate(n)
    env = {"x1": xj[0]}
    f = model.f[0](env)
    g = _gain_value(model.g[0](env), 0)
    gain = k[0] if first_gain is None else first_gain + k[0]
    eta = (ref_jet.derivative().truncate(n) - f - gain * phi) / g
    etas = [eta]
    phis = [phi]
    cross = g * phi if first_cross is None else first_cross
    for i in range(1, n):
        order = n - i
        env = {f"x{j + 1}": xj[j].truncate(order) for j in range(i + 1)}
        phi = env[f"x{i + 1}"] - eta.truncate(order)
        f = model.f[i](env)
        g = _gain_value(model.g[i](env), i)
        if isinstance(cross, Jet):
            cross = cross.truncate(order)
        eta = (eta.derivative() - f - cross - k[i] * phi) / g
        cross = g * phi
        etas.append(eta)
        phis.append(phi)
    cross_value = cross.derivs[0] if isinstance(cross, Jet) else cross
    return etas, phis, cross_value


def stabilizing_functions(x, u, ref_jet, model, gains):
    """Jets ``eta_1 .. eta_n`` of the unconstrained design."""
    gains.check_order(model.order)
    return backstep(x, u, ref_jet, model, gains.k)[0]


def error_coords(x, u, ref_jet, model, gains):
    gains.check_order(model.order)
    etas, phis, cross = backstep(x, u, ref_jet, model, gains.k)
    return ErrorState(
        phi=[p.derivs[0] for p in phis],
        varrho=u - etas[-1].derivs[0],
        eta_jets=etas,
        cross_term=cross,
    )


def commanded_input(err, u, gains, params):
    """Command ``u_c`` that makes ``d varrho/dt = -cross - k_{n+1} varrho``.

    Raises:
        SaturationSingularity: if ``G(u) < EPS_DIV`` (u reached a bound).
    """
    gain = effective_gain(u, params)
    if gain < EPS_DIV:
        raise SaturationSingularity(f"saturation gain G(u)={gain!r} vanished at u={u!r}")
    eta_dot = err.eta_jets[-1].derivs[1]
    num = params.leak * u + eta_dot - err.cross_term - gains.k[-1] * err.varrho
    return num / gain


def lyapunov_v(err, gains):
    """``(V, dV/dt)`` with the closed-form derivative of the design."""
    v = 0.5 * sum(p * p for p in err.phi) + 0.5 * err.varrho * err.varrho
    v_dot = -sum(kj * p * p for kj, p in zip(gains.k, err.phi)) - gains.k[-1] * err.varrho * err.varrho
    return v, v_dot
