"""Strict-feedback plants, reference signals and output constraints.

A plant of order ``n`` has the cascade structure

    dx_i/dt = f_i(x_1..x_i) + g_i(x_1..x_i) * x_{i+1}     (i < n)
    dx_n/dt = f_n(x_1..x_n) + g_n(x_1..x_n) * u
    y = x_1

with every ``f_i`` and ``g_i`` given as a closed-form :class:`~satbackstep.expr.Expr`
so it can be evaluated on jets.
"""

from dataclasses import dataclass
import math

from .errors import ConfigError, InfeasibleConstraintError, NumericalFailure
from .expr import Expr, parse_expr
from .jet import Jet
from .saturation import saturation_rhs


@dataclass(frozen=True)
class PlantModel:
    f: tuple
    g: tuple
    g_lower: tuple
    g_upper: tuple
    name: str = "inline"

    def __post_init__(self):
        n = len(self.f)
        if n < 1:
            raise ConfigError("plant order must be at least 1")
        if len(self.g) != n:
            raise ConfigError(f"plant needs {n} g functions, got {len(self.g)}")
        if len(self.g_lower) != n or len(self.g_upper) != n:
            raise ConfigError("g_lower and g_upper need one entry per state")
        for i, (lo, hi) in enumerate(zip(self.g_lower, self.g_upper)):
            if not 0 < lo <= hi:
                raise ConfigError(f"need 0 < g_lower <= g_upper for g{i + 1}, got {lo}, {hi}")
        for i, (fi, gi) in enumerate(zip(self.f, self.g)):
            for label, e in (("f", fi), ("g", gi)):
                if "t" in e.names or e.max_state_index() > i + 1:
                    raise ConfigError(
                        f"{label}{i + 1} = {e.text!r} must depend only on x1..x{i + 1}")

    @property
    def order(self):
        return len(self.f)

    def env(self, x):
        return {f"x{i + 1}": xi for i, xi in enumerate(x)}


def make_plant(f, g, g_lower, g_upper, name="inline"):
    """Build a :class:`PlantModel` from expression strings."""
    n = len(f)
    names = [f"x{i + 1}" for i in range(n)]
    fs = tuple(parse_expr(e, names[: i + 1], f"plant.f[{i}]") for i, e in enumerate(f))
    gs = tuple(parse_expr(e, names[: i + 1], f"plant.g[{i}]") for i, e in enumerate(g))
    return PlantModel(fs, gs, tuple(map(float, g_lower)), tuple(map(float, g_upper)), name)


BUILTIN_PLANTS = {
    # g2 = 1 + x1^2 stays below 5 for |x1| <= 2
    "cascade2": dict(
        f=["0.1*x1^2", "0.1*x1*x2 - 0.2*x1"],
        g=["1", "1 + x1^2"],
        g_lower=[1.0, 1.0],
        g_upper=[1.0, 5.0],
    ),
}


def builtin_plant(name):
    try:
        entry = BUILTIN_PLANTS[name]
    except KeyError:
        raise ConfigError(
            f"unknown built-in plant {name!r} (known: {', '.join(BUILTIN_PLANTS)})") from None
    return make_plant(name=name, **entry)


@dataclass(frozen=True)
class ReferenceSignal:
    """Desired output ``y_d(t)`` with declared derivative bounds.

    Attributes:
        expr: closed form in ``t``.
        order: jet order produced by :func:`reference_eval` (``n + 1``).
        bound_mu: optional bounds ``mu_1..mu_{n+1}`` on ``|y_d^(i)|``.
        upsilon: optional ``(lower, upper)`` envelope declared for ``y_d``;
            recorded only, see :func:`satbackstep.sim.monitor_check`.
    """

    expr: Expr
    order: int
    bound_mu: tuple = ()
    upsilon: tuple = ()


def make_reference(text, order, bound_mu=(), upsilon=()):
    e = parse_expr(text, ["t"], "reference.expr")
    if bound_mu and len(bound_mu) != order:
        raise ConfigError(f"reference.mu needs {order} entries, got {len(bound_mu)}")
    if any(m <= 0 for m in bound_mu):
        raise ConfigError("reference.mu entries must be positive")
    return ReferenceSignal(e, order, tuple(map(float, bound_mu)), tuple(upsilon))


@dataclass(frozen=True)
class OutputConstraints:
    """Time-varying corridor ``lower(t) < y(t) < upper(t)``.

    ``psi_upper``/``psi_lower`` hold the declared constants: entry 0 bounds
    the signal itself (``upper <= psi_upper[0]``, ``lower >= psi_lower[0]``),
    entry ``i`` bounds the magnitude of the i-th derivative.
    """

    upper: Expr
    lower: Expr
    order: int
    psi_upper: tuple = ()
    psi_lower: tuple = ()


def make_constraints(upper, lower, order, psi_upper=(), psi_lower=()):
    up = parse_expr(upper, ["t"], "constraints.upper")
    lo = parse_expr(lower, ["t"], "constraints.lower")
    for label, psi in (("psi_upper", psi_upper), ("psi_lower", psi_lower)):
        if psi and len(psi) != order + 1:
            raise ConfigError(f"constraints.{label} needs {order + 1} entries, got {len(psi)}")
    return OutputConstraints(up, lo, order, tuple(map(float, psi_upper)), tuple(map(float, psi_lower)))


@dataclass(frozen=True)
class ConstraintJets:
    upper: Jet
    lower: Jet
    alpha: Jet
    beta: Jet


def _as_jet(v, order):
    return v if isinstance(v, Jet) else Jet.constant(v, order)


def plant_rhs(x, u, model):
    """State derivative of the plant for input ``u``.

    Raises:
        NumericalFailure: if any component is not finite.
    """
    n = model.order
    env = model.env(x)
    out = []
    for i in range(n):
        nxt = x[i + 1] if i + 1 < n else u
        out.append(model.f[i](env) + model.g[i](env) * nxt)
    for v in out:
        if not math.isfinite(v):
            raise NumericalFailure(f"non-finite plant derivative {out!r}")
    return out


def _state_rhs(i, xj, nxt, model):
    env = {f"x{j + 1}": xj[j] for j in range(i + 1)}
    return model.f[i](env) + model.g[i](env) * nxt


def state_jets(x, u, u_c_jet, model, params, order):
    """Jets of ``x_1..x_n`` and ``u`` along the closed-loop flow.

    Slot ``k + 1`` of each state is slot ``k`` of its right-hand side
    evaluated on the order-``k`` jets, so the derivatives are exact for the
    given command jet.

    Returns:
        list of ``n + 1`` jets of order ``order`` (states first, then ``u``).
    """
    n = model.order
    if order > n + 1:
        raise ConfigError(f"state jets are only defined up to order n+1={n + 1}")
    if u_c_jet.order < max(order - 1, 0):
        raise ConfigError("commanded-input jet order too low")
    slots = [[v] for v in x] + [[u]]
    for k in range(order):
        xj = [Jet._raw(s[: k + 1]) for s in slots]
        new = []
        for i in range(n):
            rhs = _state_rhs(i, xj, xj[i + 1], model)
            new.append(_as_jet(rhs, k).derivs[k])
        urhs = saturation_rhs(xj[n], u_c_jet.truncate(k), params)
        new.append(_as_jet(urhs, k).derivs[k])
        for s, v in zip(slots, new):
            s.append(v)
    return [Jet._raw(s) for s in slots]


def plant_jets(x, u, model):
    """Triangular state jets used by the backstepping recursion.

    ``x_i`` gets order ``n + 1 - i``; these slots only involve the value of
    ``u``, never its derivatives, so no commanded-input jet is needed.
    """
    n = model.order
    slots = [[v] for v in x]
    for k in range(n):
        xj = [Jet._raw(s[: k + 1]) for s in slots]
        for i in range(n - k):
            nxt = xj[i + 1] if i + 1 < n else Jet._raw((u,))
            rhs = _state_rhs(i, xj, nxt, model)
            slots[i].append(_as_jet(rhs, k).derivs[k])
    return [Jet._raw(s) for s in slots]


def reference_eval(t, ref, order=None):
    """Jet of the reference at time ``t`` (default order ``ref.order``)."""
    order = ref.order if order is None else order
    return _as_jet(ref.expr({"t": Jet.variable(t, order)}), order)


def constraint_eval(t, c, ref_jet):
    """Jets of the corridor bounds and of the error gaps.

    ``alpha = y_d - lower`` and ``beta = upper - y_d`` bound the tracking
    error from below and above.

    Raises:
        InfeasibleConstraintError: if ``alpha`` or ``beta`` is not positive.
    """
    order = ref_jet.order
    tj = Jet.variable(t, order)
    upper = _as_jet(c.upper({"t": tj}), order)
    lower = _as_jet(c.lower({"t": tj}), order)
    alpha = ref_jet - lower
    beta = upper - ref_jet
    if not alpha.value > 0:
        raise InfeasibleConstraintError(f"reference at or below the lower constraint at t={t!r}")
    if not beta.value > 0:
        raise InfeasibleConstraintError(f"reference at or above the upper constraint at t={t!r}")
    return ConstraintJets(upper, lower, alpha, beta)
