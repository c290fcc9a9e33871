"""Truncated Taylor jets in the time variable.

A :class:`Jet` of order ``K`` carries a scalar signal together with its first
``K`` time derivatives at one instant.  Arithmetic propagates the derivatives
with the Leibniz rule, so a controller written once in terms of jets yields the
value *and* the exact time derivatives needed by the backstepping recursion.

Entries are plain Python floats in normal use.  The element operations only
use ``+ - * /``, comparisons and the helpers :func:`sin`, :func:`cos`,
:func:`sqrt` and :func:`log`, which lets :mod:`satbackstep._trace` replay the
same code with symbolic scalars to produce straight-line Python.
"""

import math
from math import comb

from .errors import ConfigError, DivisionSingularity, JetOrderError

EPS_DIV = 1e-9

_BINOM = [[comb(k, j) for j in range(k + 1)] for k in range(16)]


def _binom(k, j):
    if k < len(_BINOM):
        return _BINOM[k][j]
    return comb(k, j)


def _is_number(v):
    return isinstance(v, (int, float))


def _scalar_fn(name, v):
    if _is_number(v):
        return getattr(math, name)(v)
    return getattr(v, name)()


class Jet:
    """Value and time derivatives ``[s, s', s'', ..., s^(K)]`` of a signal.

    Args:
        derivs: sequence of length ``K + 1``; ``derivs[k]`` is the k-th time
            derivative.  Numeric entries must be finite.
    """

    __slots__ = ("derivs",)

    def __init__(self, derivs):
        derivs = tuple(derivs)
        if not derivs:
            raise ConfigError("a jet needs at least its value (order 0)")
        for d in derivs:
            if _is_number(d) and not math.isfinite(d):
                raise ConfigError(f"non-finite jet entry in {derivs!r}")
        self.derivs = derivs

    @classmethod
    def _raw(cls, derivs):
        jet = object.__new__(cls)
        jet.derivs = tuple(derivs)
        return jet

    @classmethod
    def constant(cls, value, order):
        return cls._raw((value,) + (0.0,) * order)

    @classmethod
    def variable(cls, value, order):
        """Jet of the identity signal ``t`` evaluated at ``t = value``."""
        if order == 0:
            return cls._raw((value,))
        return cls._raw((value, 1.0) + (0.0,) * (order - 1))

    @property
    def order(self):
        return len(self.derivs) - 1

    @property
    def value(self):
        return self.derivs[0]

    def __len__(self):
        return len(self.derivs)

    def __getitem__(self, k):
        return self.derivs[k]

    def __iter__(self):
        return iter(self.derivs)

    def __repr__(self):
        return f"Jet({list(self.derivs)!r})"

    def __eq__(self, other):
        if isinstance(other, Jet):
            return self.derivs == other.derivs
        return NotImplemented

    __hash__ = None

    def truncate(self, order):
        if order > self.order:
            raise JetOrderError(f"cannot raise jet order {self.order} to {order}")
        return Jet._raw(self.derivs[: order + 1])

    def derivative(self):
        """Jet of the time derivative, one order lower."""
        if self.order == 0:
            raise JetOrderError("the derivative of an order-0 jet is unknown")
        return Jet._raw(self.derivs[1:])

    def _coerce(self, other):
        if isinstance(other, Jet):
            if other.order != self.order:
                raise JetOrderError(
                    f"order mismatch: {self.order} vs {other.order}")
            return other
        return Jet.constant(other, self.order)

    def __add__(self, other):
        if not isinstance(other, Jet):
            return Jet._raw((self.derivs[0] + other,) + self.derivs[1:])
        other = self._coerce(other)
        return Jet._raw([a + b for a, b in zip(self.derivs, other.derivs)])

    def __radd__(self, other):
        return Jet._raw((other + self.derivs[0],) + self.derivs[1:])

    def __sub__(self, other):
        if not isinstance(other, Jet):
            return Jet._raw((self.derivs[0] - other,) + self.derivs[1:])
        other = self._coerce(other)
        return Jet._raw([a - b for a, b in zip(self.derivs, other.derivs)])

    def __rsub__(self, other):
        return Jet._raw((other - self.derivs[0],) + tuple(-d for d in self.derivs[1:]))

    def __neg__(self):
        return Jet._raw([-d for d in self.derivs])

    def __pos__(self):
        return self

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet._raw([d * other for d in self.derivs])
        other = self._coerce(other)
        a, b = self.derivs, other.derivs
        out = []
        for k in range(len(a)):
            acc = a[0] * b[k]
            for j in range(1, k + 1):
                term = a[j] * b[k - j]
                c = _binom(k, j)
                acc = acc + (term if c == 1 else c * term)
            out.append(acc)
        return Jet._raw(out)

    def __rmul__(self, other):
        return Jet._raw([other * d for d in self.derivs])

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return Jet._raw([d / other for d in self.derivs])
        return _div(self, self._coerce(other))

    def __rtruediv__(self, other):
        return _div(Jet.constant(other, self.order), self)

    def __pow__(self, m):
        return int_pow(self, m)


def _div(a, b):
    b0 = b.derivs[0]
    if abs(b0) < EPS_DIV:
        raise DivisionSingularity(f"jet division by {b0!r} (|b| < {EPS_DIV})")
    a, b = a.derivs, b.derivs
    q = []
    for k in range(len(a)):
        acc = a[k]
        for j in range(1, k + 1):
            term = b[j] * q[k - j]
            c = _binom(k, j)
            acc = acc - (term if c == 1 else c * term)
        q.append(acc / b0)
    return Jet._raw(q)


def int_pow(a, m):
    """``a ** m`` for a non-negative integer ``m`` by repeated products.

    Works on jets and on scalars; repeated multiplication (rather than the
    builtin ``**``) keeps scalar and jet results bit-identical.
    """
    if not isinstance(m, int) or m < 0:
        raise ConfigError(f"integer power needs a non-negative int, got {m!r}")
    if m == 0:
        return Jet.constant(1.0, a.order) if isinstance(a, Jet) else 1.0
    out = a
    for _ in range(m - 1):
        out = out * a
    return out


def _sin_cos(a):
    d = a.derivs
    s = [_scalar_fn("sin", d[0])]
    c = [_scalar_fn("cos", d[0])]
    for k in range(1, len(d)):
        ds = None
        dc = None
        for j in range(k):
            w = _binom(k - 1, j)
            ts = c[j] * d[k - j]
            tc = s[j] * d[k - j]
            if w != 1:
                ts = w * ts
                tc = w * tc
            ds = ts if ds is None else ds + ts
            dc = tc if dc is None else dc + tc
        s.append(ds)
        c.append(-dc)
    return Jet._raw(s), Jet._raw(c)


def sin(a):
    """Sine of a jet (chained sin/cos recursion) or of a scalar."""
    if isinstance(a, Jet):
        return _sin_cos(a)[0]
    return _scalar_fn("sin", a)


def cos(a):
    if isinstance(a, Jet):
        return _sin_cos(a)[1]
    return _scalar_fn("cos", a)


def sqrt(a):
    """Square root; for jets the value slot must be positive."""
    if not isinstance(a, Jet):
        return _scalar_fn("sqrt", a)
    d = a.derivs
    y0 = _scalar_fn("sqrt", d[0])
    if abs(y0) < EPS_DIV and len(d) > 1:
        raise DivisionSingularity("jet sqrt at zero has no derivatives")
    y = [y0]
    two_y0 = 2.0 * y0
    for k in range(1, len(d)):
        acc = d[k]
        for j in range(1, k):
            term = y[j] * y[k - j]
            c = _binom(k, j)
            acc = acc - (term if c == 1 else c * term)
        y.append(acc / two_y0)
    return Jet._raw(y)


def log(a):
    if not isinstance(a, Jet):
        return _scalar_fn("log", a)
    d = a.derivs
    out = [_scalar_fn("log", d[0])]
    if len(d) > 1:
        # d/dt log(a) = a'/a
        out.extend(_div(Jet._raw(d[1:]), Jet._raw(d[:-1])).derivs)
    return Jet._raw(out)


def log1p(a):
    """``log(1 + a)`` for scalars, accurate for tiny ``a``."""
    return _scalar_fn("log1p", a)


def jet_arith(a, b, op, m=None):
    """Dispatch form of the binary jet operations.

    Args:
        a, b: jets of equal order (``b`` is ignored for ``int_pow``).
        op: one of ``"add"``, ``"sub"``, ``"mul"``, ``"div"``, ``"int_pow"``.
        m: exponent for ``int_pow``.
    """
    if op == "int_pow":
        return int_pow(a, m)
    if isinstance(a, Jet) and isinstance(b, Jet) and a.order != b.order:
        raise JetOrderError(f"order mismatch: {a.order} vs {b.order}")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ConfigError(f"unknown jet operation {op!r}")


def jet_trig(a, fn):
    if fn == "sin":
        return sin(a)
    if fn == "cos":
        return cos(a)
    raise ConfigError(f"unknown trig function {fn!r}")


def value_of(v):
    return v.derivs[0] if isinstance(v, Jet) else v
