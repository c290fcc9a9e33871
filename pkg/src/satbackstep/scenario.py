"""Scenario documents: a fixed JSON schema describing one experiment.

Example::

    {
      "name": "global-c1",
      "plant": "cascade2",
      "controller": "global",
      "gains": {"k": [2, 2, 2]},
      "saturation": {"p1": 100, "p2": 0.1, "gamma": 2, "u_min": -0.5, "u_max": 0.75},
      "reference": {"expr": "0.2 + 0.3*sin(t)"},
      "initial_conditions": [{"label": "C1", "x": [0, 0]}],
      "integrator": {"h": 0.001, "T": 15}
    }

``plant`` is either a built-in name or an object with ``f``, ``g``,
``g_lower`` and ``g_upper``.  ``constraints`` (``upper``, ``lower`` and the
optional ``psi_upper``/``psi_lower``) is required for ``"blf"``.
"""

from dataclasses import dataclass, field
import json
import math

import numpy as np

from .ctrl_global import ControllerGains
from .errors import ConfigError, InfeasibleConstraintError
from .plant import builtin_plant, constraint_eval, make_constraints, make_plant, make_reference, reference_eval
from .saturation import SaturationParams
from .sim import IntegratorSettings

_TOP_KEYS = {"name", "plant", "controller", "gains", "saturation", "reference",
             "constraints", "initial_conditions", "integrator", "outputs"}
_OUTPUT_FLAGS = ("csv", "summary", "svg")
# corridor feasibility is checked on this many points of [0, T]
_CORRIDOR_SAMPLES = 2001


@dataclass(frozen=True)
class InitialCondition:
    label: str
    x: tuple
    u: float = 0.0


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    plant: object
    controller: str
    gains: ControllerGains
    saturation: SaturationParams
    reference: object
    constraints: object
    initial_conditions: tuple
    integrator: IntegratorSettings
    outputs: dict = field(default_factory=lambda: dict.fromkeys(_OUTPUT_FLAGS, True))


def _obj(doc, key, where, required=True):
    if key not in doc:
        if required:
            raise ConfigError(f"{where}: missing field {key!r}")
        return None
    return doc[key]


def _check_keys(doc, allowed, where):
    if not isinstance(doc, dict):
        raise ConfigError(f"{where}: expected an object")
    extra = sorted(set(doc) - set(allowed))
    if extra:
        raise ConfigError(f"{where}: unknown field {extra[0]!r}")


def _number(v, where):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(f"{where}: expected a finite number, got {v!r}")
    return float(v)


def _numbers(v, where):
    if not isinstance(v, list):
        raise ConfigError(f"{where}: expected a list of numbers")
    return tuple(_number(x, f"{where}[{i}]") for i, x in enumerate(v))


def _strings(v, where):
    if not isinstance(v, list) or not v:
        raise ConfigError(f"{where}: expected a non-empty list of expressions")
    for i, s in enumerate(v):
        if not isinstance(s, (str, int, float)) or isinstance(s, bool):
            raise ConfigError(f"{where}[{i}]: expected an expression string")
    return v


def _plant(doc):
    if isinstance(doc, str):
        return builtin_plant(doc)
    _check_keys(doc, {"f", "g", "g_lower", "g_upper", "name"}, "plant")
    f = _strings(_obj(doc, "f", "plant"), "plant.f")
    g = _strings(_obj(doc, "g", "plant"), "plant.g")
    lo = _numbers(_obj(doc, "g_lower", "plant"), "plant.g_lower")
    hi = _numbers(_obj(doc, "g_upper", "plant"), "plant.g_upper")
    return make_plant(f, g, lo, hi, doc.get("name", "inline"))


def _gains(doc):
    _check_keys(doc, {"k", "delta", "r"}, "gains")
    k = _numbers(_obj(doc, "k", "gains"), "gains.k")
    delta = _number(doc.get("delta", 0.01), "gains.delta")
    r = doc.get("r", 1)
    if isinstance(r, bool) or not isinstance(r, int):
        raise ConfigError(f"gains.r: expected a positive integer, got {r!r}")
    return ControllerGains(k, delta, r)


def _saturation(doc):
    keys = ("p1", "p2", "gamma", "u_min", "u_max")
    _check_keys(doc, keys, "saturation")
    vals = {k: _obj(doc, k, "saturation") for k in keys}
    gamma = vals.pop("gamma")
    if isinstance(gamma, float) and gamma.is_integer():
        gamma = int(gamma)
    if isinstance(gamma, bool) or not isinstance(gamma, int):
        raise ConfigError(f"saturation.gamma: expected an even integer, got {gamma!r}")
    vals = {k: _number(v, f"saturation.{k}") for k, v in vals.items()}
    return SaturationParams(gamma=gamma, **vals)


def _initial_conditions(doc, n, params):
    if not isinstance(doc, list) or not doc:
        raise ConfigError("initial_conditions: expected a non-empty list")
    out = []
    for i, item in enumerate(doc):
        where = f"initial_conditions[{i}]"
        _check_keys(item, {"label", "x", "u"}, where)
        x = _numbers(_obj(item, "x", where), f"{where}.x")
        if len(x) != n:
            raise ConfigError(f"{where}.x: expected {n} states, got {len(x)}")
        u = _number(item.get("u", 0.0), f"{where}.u")
        if not params.u_min < u < params.u_max:
            raise ConfigError(f"{where}.u: u(0)={u} outside ({params.u_min}, {params.u_max})")
        label = item.get("label", f"ic{i + 1}")
        if not isinstance(label, str) or not label or not label.replace("-", "").replace("_", "").isalnum():
            raise ConfigError(f"{where}.label: expected an alphanumeric label, got {label!r}")
        out.append(InitialCondition(label, x, u))
    labels = [ic.label for ic in out]
    if len(set(labels)) != len(labels):
        raise ConfigError("initial_conditions: labels must be unique")
    return tuple(out)


def _check_corridor(ref, constraints, ics, T):
    for t in np.linspace(0.0, T, _CORRIDOR_SAMPLES):
        try:
            constraint_eval(float(t), constraints, reference_eval(float(t), ref))
        except InfeasibleConstraintError as exc:
            raise ConfigError(f"constraints: infeasible corridor, {exc}") from None
    rj = reference_eval(0.0, ref)
    cj = constraint_eval(0.0, constraints, rj)
    for ic in ics:
        y0 = ic.x[0]
        if not cj.lower.value < y0 < cj.upper.value:
            raise ConfigError(
                f"initial_conditions: {ic.label} has y(0)={y0} outside the corridor "
                f"({cj.lower.value}, {cj.upper.value})")


def scenario_from_dict(doc):
    """Validate a decoded scenario document.

    Raises:
        ConfigError: naming the offending field.
    """
    _check_keys(doc, _TOP_KEYS, "scenario")
    name = doc.get("name", "scenario")
    if not isinstance(name, str):
        raise ConfigError("name: expected a string")
    plant = _plant(_obj(doc, "plant", "scenario"))
    n = plant.order
    controller = _obj(doc, "controller", "scenario")
    if controller not in ("global", "blf"):
        raise ConfigError(f"controller: expected 'global' or 'blf', got {controller!r}")
    gains = _gains(_obj(doc, "gains", "scenario"))
    gains.check_order(n)
    if controller == "blf" and 2 * gains.r < n:
        raise ConfigError(f"gains.r: need 2r >= n for the blf controller (n={n})")
    saturation = _saturation(_obj(doc, "saturation", "scenario"))

    ref_doc = _obj(doc, "reference", "scenario")
    _check_keys(ref_doc, {"expr", "mu", "upsilon"}, "reference")
    mu = _numbers(ref_doc.get("mu", []), "reference.mu")
    upsilon = _numbers(ref_doc.get("upsilon", []), "reference.upsilon")
    reference = make_reference(_obj(ref_doc, "expr", "reference"), n + 1, mu, upsilon)

    constraints = None
    c_doc = _obj(doc, "constraints", "scenario", required=False)
    if c_doc is not None:
        _check_keys(c_doc, {"upper", "lower", "psi_upper", "psi_lower"}, "constraints")
        constraints = make_constraints(
            _obj(c_doc, "upper", "constraints"), _obj(c_doc, "lower", "constraints"), n + 1,
            _numbers(c_doc.get("psi_upper", []), "constraints.psi_upper"),
            _numbers(c_doc.get("psi_lower", []), "constraints.psi_lower"))
    elif controller == "blf":
        raise ConfigError("constraints: required for the blf controller")

    integ = doc.get("integrator", {})
    _check_keys(integ, {"h", "T", "method"}, "integrator")
    integrator = IntegratorSettings(
        _number(integ.get("h", 1e-3), "integrator.h"),
        _number(integ.get("T", 15.0), "integrator.T"),
        integ.get("method", "rk4"))

    ics = _initial_conditions(_obj(doc, "initial_conditions", "scenario"), n, saturation)
    if controller == "blf":
        _check_corridor(reference, constraints, ics, integrator.T)

    out_doc = doc.get("outputs", {})
    _check_keys(out_doc, _OUTPUT_FLAGS, "outputs")
    outputs = {}
    for key in _OUTPUT_FLAGS:
        v = out_doc.get(key, True)
        if not isinstance(v, bool):
            raise ConfigError(f"outputs.{key}: expected true or false")
        outputs[key] = v
    return ScenarioConfig(name, plant, controller, gains, saturation, reference,
                          constraints, ics, integrator, outputs)


def parse_scenario(text):
    """Parse a JSON scenario document.

    Raises:
        ConfigError: malformed JSON (with line and column) or schema errors.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return scenario_from_dict(doc)


def load_scenario(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read scenario {path}: {exc.strerror}") from None
    return parse_scenario(text)
