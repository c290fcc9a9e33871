"""Fixed-step integration of the closed loop with invariant monitors.

The augmented state is ``(x_1, ..., x_n, u)``.  Every RK4 stage re-evaluates
the controller, so the command is continuous feedback rather than held over
a step.  Grid rows are evaluated with the full set of diagnostics; the three
inner stages only need the vector field.

Both evaluations are traced once per :class:`ClosedLoop` into straight-line
Python (see :mod:`satbackstep._trace`).  When compiled code hits a guarded
branch the interpreted path is re-run so errors carry their exact message.
"""

from dataclasses import dataclass
import math

import numpy as np

from ._trace import Fallback, compile_trace
from .ctrl_blf import (
    blf_error_coords,
    blf_gain_excess,
    blf_lyapunov_w,
    decay_rate as blf_decay_rate,
    tracking_envelope,
)
from .ctrl_global import commanded_input, error_coords, lyapunov_v
from .errors import ConfigError, NumericalFailure, SatBackstepError
from .plant import constraint_eval, reference_eval
from .saturation import saturation_rhs

BOUNDEDNESS_LIMIT = 1e6
DECAY_SLACK = 1.05
ENVELOPE_SLACK = 0.05
IDENTITY_RTOL = 1e-3
IDENTITY_ATOL = 1e-8
# Resolution floors of fixed-step RK4.  The barrier design switches its cross
# term on sign(phi_1); once |phi_1| is comparable to the O(h^2) offset of the
# intermediate RK4 stages, stages land on the other branch and the local error
# drops to third order.  At h = 1e-3 this leaves |phi_1| ~ 3e-8 and a
# Lyapunov value ~ 3e-14; both floors sit well above that.
DECAY_ATOL = 1e-12
ENVELOPE_ATOL = 1e-6


@dataclass(frozen=True)
class IntegratorSettings:
    h: float = 1e-3
    T: float = 15.0
    method: str = "rk4"

    def __post_init__(self):
        if self.method != "rk4":
            raise ConfigError(f"integrator.method must be 'rk4', got {self.method!r}")
        if not (self.h > 0 and math.isfinite(self.h)):
            raise ConfigError(f"integrator.h must be positive, got {self.h}")
        if not (self.T > 0 and math.isfinite(self.T)):
            raise ConfigError(f"integrator.T must be positive, got {self.T}")
        if self.h > self.T:
            raise ConfigError(f"integrator.h={self.h} exceeds T={self.T}")
        if self.h > 0.01:
            raise ConfigError(f"integrator.h={self.h} above the stability guard 0.01")

    @property
    def steps(self):
        # tolerate T/h landing a hair below an integer
        return int(math.floor(self.T / self.h + 1e-9))


def diagnostic_names(n, blf):
    """Column names produced by :meth:`ClosedLoop.evaluate`."""
    names = [f"dx{i + 1}" for i in range(n)] + ["du", "u_c", "y_d"]
    names += [f"y_d_d{k}" for k in range(1, n + 2)]
    names += [f"phi{i + 1}" for i in range(n)] + ["varrho"]
    names += [f"eta{i + 1}" for i in range(n)] + [f"eta_dot{i + 1}" for i in range(n)]
    names += [f"g{i + 1}" for i in range(n)]
    names += ["lyap", "lyap_dot_cf", "lyap_dot_exact"]
    if blf:
        names += ["zeta", "k1_bar", "alpha", "beta"]
        names += [f"lower_d{k}" for k in range(n + 2)] + [f"upper_d{k}" for k in range(n + 2)]
    return names


class ClosedLoop:
    """Plant, saturation model and controller closed around each other.

    Args:
        scenario: a :class:`~satbackstep.scenario.ScenarioConfig` (only the
            plant, controller, gains, saturation, reference and constraints
            fields are used).
        compiled: trace the evaluations into generated code.
    """

    def __init__(self, scenario, compiled=True):
        self.model = scenario.plant
        self.params = scenario.saturation
        self.gains = scenario.gains
        self.reference = scenario.reference
        self.constraints = scenario.constraints
        self.blf = scenario.controller == "blf"
        if self.blf and self.constraints is None:
            raise ConfigError("the blf controller needs output constraints")
        self.n = self.model.order
        self.gains.check_order(self.n)
        self.names = diagnostic_names(self.n, self.blf)
        self._fast = self._full = None
        self.sources = {}
        if compiled:
            n_in = self.n + 2
            self._fast, self.sources["fast"] = compile_trace(
                lambda *a: self._values(a[0], a[1:-1], a[-1], False), n_in, "closed_loop_rhs")
            self._full, self.sources["full"] = compile_trace(
                lambda *a: self._values(a[0], a[1:-1], a[-1], True), n_in, "closed_loop_full")

    def _values(self, t, x, u, full):
        model, gains, params = self.model, self.gains, self.params
        n = self.n
        ref = reference_eval(t, self.reference, n + 1)
        if self.blf:
            cj = constraint_eval(t, self.constraints, ref)
            err, blf = blf_error_coords(x, u, ref, cj, model, gains)
        else:
            err = error_coords(x, u, ref, model, gains)
        u_c = commanded_input(err, u, gains, params)
        env = model.env(x)
        g = [model.g[i](env) for i in range(n)]
        dx = [model.f[i](env) + g[i] * (x[i + 1] if i + 1 < n else u) for i in range(n)]
        du = saturation_rhs(u, u_c, params)
        if not full:
            return tuple(dx) + (du, u_c)
        out = list(dx) + [du, u_c]
        out += list(ref.derivs)
        out += list(err.phi) + [err.varrho]
        out += [e.derivs[0] for e in err.eta_jets] + [e.derivs[1] for e in err.eta_jets]
        out += g
        if self.blf:
            w, w_dot = blf_lyapunov_w(blf, err.phi, err.varrho, gains)
            exact = w_dot - blf_gain_excess(blf, cj.alpha, cj.beta)
            out += [w, w_dot, exact]
            out += [blf.zeta, blf.k1_bar, cj.alpha.derivs[0], cj.beta.derivs[0]]
            out += list(cj.lower.derivs) + list(cj.upper.derivs)
        else:
            v, v_dot = lyapunov_v(err, gains)
            out += [v, v_dot, v_dot]
        return tuple(out)

    def _call(self, compiled, t, state, full):
        if compiled is not None:
            try:
                return compiled(t, *state)
            except (Fallback, ArithmeticError, ValueError):
                pass
        return self._values(t, tuple(state[:-1]), state[-1], full)

    def rhs(self, t, state):
        """``(d state/dt, u_c)`` at one stage."""
        vals = self._call(self._fast, t, state, False)
        return vals[:-1], vals[-1]

    def evaluate(self, t, state):
        """All diagnostics at one instant, ordered as :attr:`names`."""
        return self._call(self._full, t, state, True)

    def interpreted(self, t, state, full=True):
        return self._values(t, tuple(state[:-1]), state[-1], full)


def _check_finite(values, t, stage):
    for v in values:
        if not math.isfinite(v):
            raise NumericalFailure(f"non-finite value in RK4 stage {stage} at t={t!r}",
                                   time=t, stage=stage)


def rk4_step(state, t, h, rhs, k1=None):
    """One classical Runge-Kutta step.

    Args:
        state: sequence of floats.
        rhs: callable ``rhs(t, state) -> derivative sequence``.
        k1: derivative at ``(t, state)`` when already known.

    Raises:
        NumericalFailure: if a stage produces a non-finite value; ``stage``
            (1..4) and ``time`` identify it.
    """
    stages = []
    for stage, (c, base) in enumerate(((0.0, None), (0.5, 0), (0.5, 1), (1.0, 2)), start=1):
        if stage == 1:
            y = state
        else:
            d = stages[base]
            y = [s + c * h * di for s, di in zip(state, d)]
            _check_finite(y, t + c * h, stage)
        ts = t + c * h
        try:
            k = k1 if (stage == 1 and k1 is not None) else rhs(ts, y)
        except SatBackstepError as exc:
            if getattr(exc, "time", None) is None:
                exc.time = ts
            if isinstance(exc, NumericalFailure) and exc.stage is None:
                exc.stage = stage
            raise
        _check_finite(k, ts, stage)
        stages.append(k)
    a, b, c, d = stages
    out = [s + h / 6.0 * (ka + 2.0 * kb + 2.0 * kc + kd)
           for s, ka, kb, kc, kd in zip(state, a, b, c, d)]
    _check_finite(out, t + h, 4)
    return out


@dataclass
class Trajectory:
    """Write-once record of a run; ``data[k]`` is the row at ``t[k]``."""

    columns: list
    data: np.ndarray
    n: int
    blf: bool
    label: str = ""

    def __post_init__(self):
        self.data.setflags(write=False)
        self._index = {c: i for i, c in enumerate(self.columns)}

    def __len__(self):
        return self.data.shape[0]

    def __getitem__(self, name):
        return self.data[:, self._index[name]]

    def has(self, name):
        return name in self._index

    @property
    def t(self):
        return self["t"]


@dataclass
class SummaryStats:
    max_u: float
    min_u: float
    max_stage_u: float
    min_stage_u: float
    max_abs_u_c: float
    final_abs_phi1: float
    min_margin_lower: float = None
    min_margin_upper: float = None
    max_identity_residual: float = 0.0
    decay_violations: int = 0
    rows: int = 0
    completed: bool = True
    abort_time: float = None
    abort_reason: str = None

    def as_dict(self):
        return dict(self.__dict__)


class _StageRecorder:
    """Wraps the stage evaluation to track the extremes of ``u``."""

    def __init__(self, loop):
        self.loop = loop
        self.lo = math.inf
        self.hi = -math.inf

    def __call__(self, t, state):
        u = state[-1]
        if u < self.lo:
            self.lo = u
        if u > self.hi:
            self.hi = u
        return self.loop.rhs(t, state)[0]


def _build_trajectory(loop, times, states, diags, label):
    n = loop.n
    cols = ["t"] + [f"x{i + 1}" for i in range(n)] + ["u"] + loop.names
    data = np.column_stack([np.asarray(times, dtype=float),
                            np.asarray(states, dtype=float).reshape(len(times), n + 1),
                            np.asarray(diags, dtype=float).reshape(len(times), len(loop.names))])
    if loop.blf:
        idx = {c: i for i, c in enumerate(cols)}
        x1 = data[:, idx["x1"]]
        w0 = data[0, idx["lyap"]]
        env = np.array([tracking_envelope(t, w0, a, b, loop.gains)
                        for t, a, b in data[:, [idx["t"], idx["alpha"], idx["beta"]]]])
        extra = np.column_stack([x1 - data[:, idx["lower_d0"]], data[:, idx["upper_d0"]] - x1,
                                 env.reshape(-1, 2)])
        data = np.hstack([data, extra])
        cols = cols + ["margin_lower", "margin_upper", "env_lower", "env_upper"]
    return Trajectory(cols, data, n, loop.blf, label)


def simulate(scenario, ic=None, loop=None):
    """Integrate one initial condition of ``scenario`` over ``[0, T]``.

    Args:
        ic: an :class:`~satbackstep.scenario.InitialCondition`; defaults to
            the first one of the scenario.
        loop: a prebuilt :class:`ClosedLoop` to reuse.

    Returns:
        ``(Trajectory, SummaryStats)``.

    Raises:
        TheoremViolation, NumericalFailure: the run aborted; ``time`` holds
            the violating time and ``trajectory``/``stats`` the partial run.
    """
    ic = scenario.initial_conditions[0] if ic is None else ic
    loop = ClosedLoop(scenario) if loop is None else loop
    settings = scenario.integrator
    h = settings.h
    state = list(ic.x) + [ic.u]
    times, states, diags = [], [], []
    recorder = _StageRecorder(loop)
    n_steps = settings.steps
    t = 0.0
    try:
        for k in range(n_steps + 1):
            t = k * h
            row = loop.evaluate(t, state)
            _check_finite(row, t, 1)
            times.append(t)
            states.append(state)
            diags.append(row)
            if k == n_steps:
                break
            u = state[-1]
            recorder.lo = min(recorder.lo, u)
            recorder.hi = max(recorder.hi, u)
            state = rk4_step(state, t, h, recorder, k1=row[: loop.n + 1])
    except SatBackstepError as exc:
        if getattr(exc, "time", None) is None:
            exc.time = t
        traj = _build_trajectory(loop, times, states, diags, ic.label) if times else None
        stats = _stats(traj, recorder, scenario) if traj is not None else None
        if stats is not None:
            stats.completed = False
            stats.abort_time = exc.time
            stats.abort_reason = type(exc).__name__
        exc.trajectory = traj
        exc.stats = stats
        raise
    traj = _build_trajectory(loop, times, states, diags, ic.label)
    return traj, _stats(traj, recorder, scenario)


def _stats(traj, recorder, scenario):
    u = traj["u"]
    lo = min(recorder.lo, float(u.min()))
    hi = max(recorder.hi, float(u.max()))
    stats = SummaryStats(
        max_u=float(u.max()),
        min_u=float(u.min()),
        max_stage_u=hi,
        min_stage_u=lo,
        max_abs_u_c=float(np.abs(traj["u_c"]).max()),
        final_abs_phi1=float(abs(traj["phi1"][-1])),
        rows=len(traj),
    )
    if traj.blf:
        stats.min_margin_lower = float(traj["margin_lower"].min())
        stats.min_margin_upper = float(traj["margin_upper"].min())
    res = identity_residuals(traj, scenario.integrator.h)
    stats.max_identity_residual = float(res.max()) if res.size else 0.0
    stats.decay_violations = len(_decay_findings(traj, scenario))
    return stats


def identity_residuals(traj, h):
    """Scaled mismatch of the measured Lyapunov derivative at interior rows.

    The measurement is the central difference of the ``lyap`` column; the
    value is ``|measured - exact| / (rtol |exact| + atol)`` so anything above
    one breaks the identity tolerance.  Stencils on which ``phi_1`` changes
    sign are skipped for the barrier controller, whose derivative jumps
    there.
    """
    lyap = traj["lyap"]
    if len(lyap) < 3:
        return np.zeros(0)
    measured = (lyap[2:] - lyap[:-2]) / (2.0 * h)
    exact = traj["lyap_dot_exact"][1:-1]
    res = np.abs(measured - exact) / (IDENTITY_RTOL * np.abs(exact) + IDENTITY_ATOL)
    if traj.blf:
        sign = traj["phi1"] > 0
        keep = (sign[2:] == sign[1:-1]) & (sign[1:-1] == sign[:-2])
        res = np.where(keep, res, 0.0)
    return res


@dataclass(frozen=True)
class Violation:
    monitor: str
    row: int
    t: float
    detail: str
    kind: str = "theorem"

    def as_dict(self):
        return dict(monitor=self.monitor, row=self.row, t=self.t, detail=self.detail,
                    kind=self.kind)


def _rows(mask):
    return [int(i) for i in np.flatnonzero(mask)]


def _decay_findings(traj, scenario):
    lyap = traj["lyap"]
    t = traj.t
    if traj.blf:
        theta = blf_decay_rate(scenario.gains)
    else:
        theta = scenario.gains.decay_rate
    bound = DECAY_SLACK * lyap[0] * np.exp(-theta * t) + DECAY_ATOL
    out = []
    for i in _rows(lyap > bound):
        out.append(Violation("lyapunov_decay", i, float(t[i]),
                             f"lyap={lyap[i]:.6g} above {bound[i]:.6g} (rate {theta:g})"))
    return out


def monitor_check(traj, scenario):
    """Evaluate every runtime monitor on a completed trajectory.

    Theorem monitors: input confinement, output corridor and envelope (BLF),
    exponential decay of the Lyapunov function, the closed-form derivative
    identity and signal boundedness.  Assumption monitors (``kind`` set to
    ``"assumption"``) check the declared bounds on ``g_i``, the reference
    derivatives and the corridor derivatives.

    Returns:
        list of :class:`Violation`, one per offending row and monitor.
    """
    params = scenario.saturation
    t = traj.t
    found = []
    u = traj["u"]
    for i in _rows((u <= params.u_min) | (u >= params.u_max)):
        found.append(Violation("input_confinement", i, float(t[i]),
                               f"u={u[i]!r} outside ({params.u_min}, {params.u_max})"))
    if traj.blf:
        ml, mu = traj["margin_lower"], traj["margin_upper"]
        for i in _rows((ml <= 0) | (mu <= 0)):
            found.append(Violation("output_corridor", i, float(t[i]),
                                   f"margins lower={ml[i]:.6g}, upper={mu[i]:.6g}"))
        phi1 = traj["phi1"]
        lo = traj["env_lower"] * (1 + ENVELOPE_SLACK) - ENVELOPE_ATOL
        hi = traj["env_upper"] * (1 + ENVELOPE_SLACK) + ENVELOPE_ATOL
        for i in _rows((phi1 < lo) | (phi1 > hi)):
            found.append(Violation("tracking_envelope", i, float(t[i]),
                                   f"phi1={phi1[i]:.6g} outside [{lo[i]:.6g}, {hi[i]:.6g}]"))
    found += _decay_findings(traj, scenario)
    res = identity_residuals(traj, scenario.integrator.h)
    for j in _rows(res > 1.0):
        found.append(Violation("lyapunov_identity", j + 1, float(t[j + 1]),
                               f"scaled residual {res[j]:.3g}"))
    big = np.abs(traj.data) > BOUNDEDNESS_LIMIT
    bad_rows = big.any(axis=1) | ~np.isfinite(traj.data).all(axis=1)
    for i in _rows(bad_rows):
        found.append(Violation("boundedness", i, float(t[i]),
                               f"entry beyond {BOUNDEDNESS_LIMIT:g}"))
    found += _assumption_findings(traj, scenario)
    found.sort(key=lambda v: (v.row, v.monitor))
    return found


def _assumption_findings(traj, scenario):
    t = traj.t
    model = scenario.plant
    out = []
    for i in range(traj.n):
        g = traj[f"g{i + 1}"]
        lo, hi = model.g_lower[i], model.g_upper[i]
        for r in _rows((np.abs(g) < lo) | (np.abs(g) > hi)):
            out.append(Violation("g_bounds", r, float(t[r]),
                                 f"|g{i + 1}|={abs(g[r]):.6g} outside [{lo:g}, {hi:g}]",
                                 "assumption"))
    mu = scenario.reference.bound_mu
    for k, m in enumerate(mu, start=1):
        col = traj[f"y_d_d{k}"]
        for r in _rows(np.abs(col) > m):
            out.append(Violation("reference_bounds", r, float(t[r]),
                                 f"|y_d^({k})|={abs(col[r]):.6g} above {m:g}", "assumption"))
    c = scenario.constraints
    if traj.blf and c is not None:
        for side, psi in (("upper", c.psi_upper), ("lower", c.psi_lower)):
            for k, p in enumerate(psi):
                col = traj[f"{side}_d{k}"]
                if k == 0:
                    bad = col > p if side == "upper" else col < p
                else:
                    bad = np.abs(col) > p
                for r in _rows(bad):
                    out.append(Violation("constraint_bounds", r, float(t[r]),
                                         f"{side} derivative {k} = {col[r]:.6g} breaks {p:g}",
                                         "assumption"))
    return out
