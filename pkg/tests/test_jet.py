import math

import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from satbackstep.errors import ConfigError, DivisionSingularity, JetOrderError
from satbackstep.jet import EPS_DIV, Jet, cos, int_pow, jet_arith, jet_trig, log, sin, sqrt, value_of

T = sp.Symbol("t")


def jet_of(expr, t0, order):
    """Derivatives of a sympy expression in ``t`` at ``t0``."""
    return [float(sp.diff(expr, T, k).subs(T, t0)) for k in range(order + 1)]


def to_jet(expr, t0, order):
    return Jet(jet_of(expr, t0, order))


def close(a, b, rel=1e-12, abs_=1e-12):
    return all(math.isclose(x, y, rel_tol=rel, abs_tol=abs_) for x, y in zip(a, b))


A = 1 + T**2 + sp.sin(T)
B = 2 + sp.cos(3 * T) + T / 5


class TestConstruction:
    def test_constant_and_variable(self):
        assert Jet.constant(2.0, 3).derivs == (2.0, 0.0, 0.0, 0.0)
        assert Jet.variable(0.5, 2).derivs == (0.5, 1.0, 0.0)
        assert Jet.variable(0.5, 0).derivs == (0.5,)

    def test_rejects_empty_and_nonfinite(self):
        with pytest.raises(ConfigError):
            Jet([])
        with pytest.raises(ConfigError):
            Jet([1.0, float("nan")])

    def test_truncate_and_derivative(self):
        j = Jet([1.0, 2.0, 3.0])
        assert j.truncate(1).derivs == (1.0, 2.0)
        assert j.derivative().derivs == (2.0, 3.0)
        with pytest.raises(JetOrderError):
            j.truncate(3)
        with pytest.raises(JetOrderError):
            Jet([1.0]).derivative()

    def test_value_of(self):
        assert value_of(Jet([3.0, 1.0])) == 3.0
        assert value_of(4.0) == 4.0


class TestArithmetic:
    @pytest.mark.parametrize("t0", [0.0, 0.7, -1.3])
    @pytest.mark.parametrize("op,fn", [
        ("add", lambda a, b: a + b),
        ("sub", lambda a, b: a - b),
        ("mul", lambda a, b: a * b),
        ("div", lambda a, b: a / b),
    ])
    def test_binary_ops_match_symbolic(self, t0, op, fn):
        order = 4
        got = jet_arith(to_jet(A, t0, order), to_jet(B, t0, order), op)
        assert close(got.derivs, jet_of(fn(A, B), t0, order), rel=1e-10)

    def test_order_mismatch(self):
        with pytest.raises(JetOrderError):
            Jet([1.0, 2.0]) + Jet([1.0, 2.0, 3.0])
        with pytest.raises(JetOrderError):
            jet_arith(Jet([1.0, 2.0]), Jet([1.0]), "mul")

    def test_unknown_op(self):
        with pytest.raises(ConfigError):
            jet_arith(Jet([1.0]), Jet([1.0]), "pow")

    def test_scalar_mixing(self):
        j = Jet([1.0, 2.0, 3.0])
        assert (2 + j).derivs == (3.0, 2.0, 3.0)
        assert (2 - j).derivs == (1.0, -2.0, -3.0)
        assert (j * 2).derivs == (2.0, 4.0, 6.0)
        assert (1 / Jet([2.0, 0.0])).derivs == (0.5, 0.0)

    def test_division_singularity(self):
        with pytest.raises(DivisionSingularity):
            Jet([1.0, 1.0]) / Jet([EPS_DIV / 2, 1.0])

    @pytest.mark.parametrize("m", [0, 1, 2, 5])
    def test_int_pow(self, m):
        got = int_pow(to_jet(A, 0.4, 3), m)
        assert close(got.derivs, jet_of(A**m, 0.4, 3), rel=1e-10)
        assert (to_jet(A, 0.4, 3) ** m).derivs == got.derivs

    def test_int_pow_scalar_matches_jet_value(self):
        assert int_pow(0.3, 3) == int_pow(Jet([0.3, 1.0]), 3).value

    @pytest.mark.parametrize("m", [-1, 1.5])
    def test_int_pow_rejects(self, m):
        with pytest.raises(ConfigError):
            int_pow(Jet([1.0]), m)


class TestFunctions:
    @pytest.mark.parametrize("t0", [0.0, 0.9, 2.5])
    def test_sin_cos(self, t0):
        j = to_jet(A, t0, 5)
        assert close(sin(j).derivs, jet_of(sp.sin(A), t0, 5), rel=1e-9, abs_=1e-9)
        assert close(cos(j).derivs, jet_of(sp.cos(A), t0, 5), rel=1e-9, abs_=1e-9)
        assert jet_trig(j, "sin").derivs == sin(j).derivs
        with pytest.raises(ConfigError):
            jet_trig(j, "tan")

    @pytest.mark.parametrize("t0", [0.2, 1.1])
    def test_sqrt_and_log(self, t0):
        j = to_jet(B, t0, 4)
        assert close(sqrt(j).derivs, jet_of(sp.sqrt(B), t0, 4), rel=1e-10)
        assert close(log(j).derivs, jet_of(sp.log(B), t0, 4), rel=1e-10)

    def test_sqrt_at_zero_has_no_derivative(self):
        with pytest.raises(DivisionSingularity):
            sqrt(Jet([0.0, 1.0]))

    def test_scalars_pass_through(self):
        assert sin(0.3) == math.sin(0.3)
        assert sqrt(4.0) == 2.0


coeffs = st.lists(st.floats(-3, 3, allow_nan=False), min_size=1, max_size=4)


class TestProperties:
    @settings(max_examples=60, deadline=None)
    @given(coeffs, coeffs, st.floats(-1, 1))
    def test_polynomial_product_rule(self, ca, cb, t0):
        pa = sum(c * T**k for k, c in enumerate(ca))
        pb = sum(c * T**k for k, c in enumerate(cb))
        got = to_jet(pa, t0, 3) * to_jet(pb, t0, 3)
        assert close(got.derivs, jet_of(sp.expand(pa * pb), t0, 3), rel=1e-9, abs_=1e-9)

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.floats(-5, 5), min_size=3, max_size=3),
           st.floats(0.5, 5), st.floats(-5, 5))
    def test_division_inverts_product(self, a, b0, b1):
        ja = Jet(a)
        jb = Jet([b0, b1, 0.3])
        back = (ja * jb) / jb
        assert close(back.derivs, ja.derivs, rel=1e-9, abs_=1e-9)

    @settings(max_examples=40, deadline=None)
    @given(st.floats(-3, 3), st.floats(-2, 2))
    def test_pythagorean_identity(self, v, d):
        j = Jet([v, d, 0.5, -0.25])
        one = sin(j) * sin(j) + cos(j) * cos(j)
        assert close(one.derivs, (1.0, 0.0, 0.0, 0.0), abs_=1e-12)
