"""Barrier-Lyapunov tracking controller for a time-varying output corridor.

With ``alpha = y_d - lower`` and ``beta = upper - y_d`` the tracking error is
kept in ``(-alpha, beta)`` through the normalized error

    zeta = phi_1 / beta  if phi_1 > 0  else  phi_1 / alpha

and the barrier ``W_1 = ln(1 / (1 - zeta^(2r))) / (2r)``.  The first
stabilizing function carries the time-varying gain

    kbar_1 = sqrt((dalpha/alpha)^2 + (dbeta/beta)^2 + delta)

and the second step cancels ``digamma * g_1 * phi_1^(2r-1)`` with
``digamma = 1 / (beta^(2r) - phi_1^(2r))`` (``alpha`` when ``phi_1 <= 0``).
The command reuses :func:`satbackstep.ctrl_global.commanded_input`.
"""

from dataclasses import dataclass, replace
import math

from .ctrl_global import ErrorState, backstep
from .errors import BarrierViolation, ConfigError, InvariantViolation
from .jet import Jet, int_pow, log1p, sqrt
from .plant import plant_jets


@dataclass(frozen=True)
class BlfState:
    r: int
    s: int
    zeta: float
    zeta_over: float
    zeta_under: float
    digamma: float
    W: float
    k1_bar: float = None


def zeta_coords(phi1, alpha, beta, r):
    """Normalized error, barrier value and ``digamma`` (``k1_bar`` unset).

    Raises:
        BarrierViolation: if ``|zeta| >= 1``.
    """
    zeta_over = phi1 / beta
    zeta_under = phi1 / alpha
    if phi1 > 0:
        s, zeta, bound = 1, zeta_over, beta
    else:
        s, zeta, bound = 0, zeta_under, alpha
    if abs(zeta) >= 1.0:
        raise BarrierViolation(f"tracking error {phi1!r} reached the barrier (zeta={zeta!r})")
    z2r = int_pow(zeta, 2 * r)
    w1 = -log1p(-z2r) / (2 * r)
    digamma = 1.0 / (int_pow(bound, 2 * r) - int_pow(phi1, 2 * r))
    return BlfState(r=r, s=s, zeta=zeta, zeta_over=zeta_over, zeta_under=zeta_under,
                    digamma=digamma, W=w1)


def timevarying_gain_jet(alpha_jet, beta_jet, delta):
    """Jet of ``kbar_1``, one order below the corridor jets."""
    order = alpha_jet.order - 1
    ra = alpha_jet.derivative() / alpha_jet.truncate(order)
    rb = beta_jet.derivative() / beta_jet.truncate(order)
    return sqrt(ra * ra + rb * rb + delta)


def timevarying_gain(alpha_jet, beta_jet, delta):
    """Value of ``kbar_1 = sqrt((dalpha/alpha)^2 + (dbeta/beta)^2 + delta)``."""
    a, da = alpha_jet.derivs[0], alpha_jet.derivs[1]
    b, db = beta_jet.derivs[0], beta_jet.derivs[1]
    ra = da / a
    rb = db / b
    return sqrt(ra * ra + rb * rb + delta)


def _blf_terms(x, u, ref_jet, cj, model, gains):
    n = model.order
    r = gains.r
    if 2 * r < n:
        raise ConfigError(f"barrier exponent needs 2r >= n, got r={r}, n={n}")
    gains.check_order(n)
    xj = plant_jets(x, u, model)
    phi_jet = xj[0] - ref_jet.truncate(n)
    state = zeta_coords(phi_jet.derivs[0], cj.alpha.derivs[0], cj.beta.derivs[0], r)
    kbar = timevarying_gain_jet(cj.alpha, cj.beta, gains.delta)
    bound = (cj.beta if state.s else cj.alpha).truncate(n)
    digamma = 1.0 / (int_pow(bound, 2 * r) - int_pow(phi_jet, 2 * r))
    g1 = model.g[0]({"x1": xj[0]})
    first_cross = digamma * g1 * int_pow(phi_jet, 2 * r - 1)
    etas, phis, cross = backstep(x, u, ref_jet, model, gains.k, first_gain=kbar,
                                 first_cross=first_cross, xj=xj)
    return state, kbar, etas, phis, cross


def blf_stabilizing_functions(x, u, ref_jet, constraint_jets, model, gains):
    """Jets ``eta_1 .. eta_n`` of the barrier design.

    ``constraint_jets`` comes from :func:`satbackstep.plant.constraint_eval`
    and must have the order of ``ref_jet`` (``n + 1``).
    """
    return _blf_terms(x, u, ref_jet, constraint_jets, model, gains)[2]


def blf_error_coords(x, u, ref_jet, constraint_jets, model, gains):
    """Error coordinates plus the completed :class:`BlfState`."""
    state, kbar, etas, phis, cross = _blf_terms(x, u, ref_jet, constraint_jets, model, gains)
    err = ErrorState(
        phi=[p.derivs[0] for p in phis],
        varrho=u - etas[-1].derivs[0],
        eta_jets=etas,
        cross_term=cross,
    )
    return err, replace(state, k1_bar=kbar.derivs[0])


def blf_lyapunov_w(blf, phi, varrho, gains, r=None):
    """``(W, bound)`` where ``bound`` is the design's closed-form ``dW/dt``.

    ``bound = -k_1 zeta^(2r)/(1 - zeta^(2r)) - sum_{j>=2} k_j phi_j^2 -
    k_{n+1} varrho^2``.  The true derivative is lower by the non-negative
    amount returned from :func:`blf_gain_excess`; see :func:`blf_w_dot_exact`.

    Raises:
        BarrierViolation: if ``|zeta| >= 1``.
        InvariantViolation: if ``ln(1/(1-z)) <= z/(1-z)`` fails for
            ``z = zeta^(2r)``.
    """
    r = blf.r if r is None else r
    zeta = blf.zeta
    if abs(zeta) >= 1.0:
        raise BarrierViolation(f"zeta={zeta!r} outside the barrier")
    z2r = int_pow(zeta, 2 * r)
    ratio = z2r / (1.0 - z2r)
    w1 = -log1p(-z2r) / (2 * r)
    # a few ulps of slack: both sides round independently near zeta = 0
    if 2 * r * w1 > ratio * (1.0 + 1e-12):
        raise InvariantViolation(f"log inequality failed at zeta={zeta!r}")
    rest = phi[1:]
    w = w1 + 0.5 * sum(p * p for p in rest) + 0.5 * varrho * varrho
    w_dot = (-gains.k[0] * ratio
             - sum(kj * p * p for kj, p in zip(gains.k[1:], rest))
             - gains.k[-1] * varrho * varrho)
    return w, w_dot


def blf_gain_excess(blf, alpha_jet, beta_jet):
    """``(kbar_1 + s dbeta/beta + (1-s) dalpha/alpha) zeta^(2r)/(1-zeta^(2r))``.

    Non-negative because ``kbar_1`` dominates both rate ratios.
    """
    if blf.s:
        rate = beta_jet.derivs[1] / beta_jet.derivs[0]
    else:
        rate = alpha_jet.derivs[1] / alpha_jet.derivs[0]
    z2r = int_pow(blf.zeta, 2 * blf.r)
    return (blf.k1_bar + rate) * (z2r / (1.0 - z2r))


def blf_w_dot_exact(blf, phi, varrho, gains, alpha_jet, beta_jet):
    """Exact ``dW/dt`` along the closed loop (bound minus the gain excess)."""
    _, bound = blf_lyapunov_w(blf, phi, varrho, gains)
    return bound - blf_gain_excess(blf, alpha_jet, beta_jet)


def decay_rate(gains):
    """``min(2 r k_1, 2 k_2, ..., 2 k_{n+1})``."""
    return min([2.0 * gains.r * gains.k[0]] + [2.0 * kj for kj in gains.k[1:]])


def tracking_envelope(t, w0, alpha, beta, gains):
    """Guaranteed interval ``(lower, upper)`` for ``phi_1(t)``.

    ``alpha``/``beta`` may be jets or plain values at time ``t``.
    """
    a = alpha.derivs[0] if isinstance(alpha, Jet) else alpha
    b = beta.derivs[0] if isinstance(beta, Jet) else beta
    r = gains.r
    theta = decay_rate(gains)
    factor = (-math.expm1(-2.0 * r * w0 * math.exp(-theta * t))) ** (1.0 / (2 * r))
    return -a * factor, b * factor
