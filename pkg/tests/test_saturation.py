import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from satbackstep.errors import ConfigError, SaturationDomainError
from satbackstep.jet import Jet
from satbackstep.saturation import (
    REFERENCE_SATURATION,
    SaturationParams,
    effective_gain,
    hard_saturation,
    invariant_bounds,
    saturation_rhs,
)

P = REFERENCE_SATURATION

# Frozen from a 12-digit sympy evaluation of the bound formulas at xi = 1:
# 3/4 * sqrt(1/1.075) and -1/2 * sqrt(1/1.05).
U_TILDE_MAX_XI1 = 0.723364233256
U_TILDE_MIN_XI1 = -0.487950036474


def equilibrium(params, command):
    """Brute-force root of du/dt = 0 under a constant command (bisection)."""
    lo, hi = (0.0, params.u_max) if command > 0 else (params.u_min, 0.0)
    f = lambda v: saturation_rhs(v, command, params)  # noqa: E731
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if (f(mid) > 0) == (command > 0):
            lo, hi = (mid, hi) if command > 0 else (lo, mid)
        else:
            lo, hi = (lo, mid) if command > 0 else (mid, hi)
    return 0.5 * (lo + hi)


class TestParams:
    def test_reference_values(self):
        assert (P.p1, P.p2, P.gamma, P.u_min, P.u_max) == (100.0, 0.1, 2, -0.5, 0.75)
        assert P.leak == pytest.approx(10.0)

    @pytest.mark.parametrize("kwargs", [
        dict(p1=0.0), dict(p2=-1.0), dict(gamma=3), dict(gamma=2.0), dict(gamma=0),
        dict(u_min=0.1), dict(u_max=0.0), dict(gamma=True),
    ])
    def test_invalid(self, kwargs):
        base = dict(p1=100.0, p2=0.1, gamma=2, u_min=-0.5, u_max=0.75)
        base.update(kwargs)
        with pytest.raises(ConfigError):
            SaturationParams(**base)


class TestGain:
    @pytest.mark.parametrize("u,expected", [
        (0.0, 100.0),
        (0.375, 75.0),
        (0.75, 0.0),
        (-0.25, 75.0),
        (-0.5, 0.0),
    ])
    def test_values(self, u, expected):
        assert effective_gain(u, P) == pytest.approx(expected)

    @pytest.mark.parametrize("u", [0.7500001, -0.5000001, 3.0])
    def test_outside_domain(self, u):
        with pytest.raises(SaturationDomainError):
            effective_gain(u, P)

    def test_branch_on_jet_value(self):
        g = effective_gain(Jet([0.375, 1.0]), P)
        # d/dt p1 (1 - u^2/u_max^2) = -2 p1 u u' / u_max^2
        assert g.derivs == pytest.approx((75.0, -2 * 100 * 0.375 / 0.75**2))

    def test_rhs(self):
        assert saturation_rhs(0.0, 1.0, P) == 100.0
        assert saturation_rhs(0.375, 0.0, P) == pytest.approx(-3.75)

    def test_hard_saturation_reference(self):
        out = hard_saturation(np.array([-2.0, 0.1, 2.0]), P)
        assert out.tolist() == [-0.5, 0.1, 0.75]


class TestInvariantBounds:
    def test_frozen_values(self):
        cert = invariant_bounds(P, 1.0)
        assert cert.u_tilde_max == pytest.approx(U_TILDE_MAX_XI1, abs=1e-12)
        assert cert.u_tilde_min == pytest.approx(U_TILDE_MIN_XI1, abs=1e-12)

    def test_large_xi_approaches_limits(self):
        cert = invariant_bounds(P, 1e9)
        assert P.u_max - 1e-9 < cert.u_tilde_max < P.u_max
        assert P.u_min < cert.u_tilde_min < P.u_min + 1e-9

    @pytest.mark.parametrize("xi", [0.5, 1.0, 5.0, 20.0])
    def test_brute_force_equilibria_inside(self, xi):
        cert = invariant_bounds(P, xi)
        up = equilibrium(P, xi)
        down = equilibrium(P, -xi)
        assert up <= cert.u_tilde_max
        assert down >= cert.u_tilde_min

    def test_lower_bound_uses_magnitude(self):
        cert = invariant_bounds(P, 1.0)
        assert cert.u_tilde_min == pytest.approx(P.u_min * math.sqrt(1 / (1 + 0.1 * 0.5)))

    @pytest.mark.parametrize("xi", [0.0, -1.0])
    def test_rejects_nonpositive(self, xi):
        with pytest.raises(ConfigError):
            invariant_bounds(P, xi)

    @settings(max_examples=80, deadline=None)
    @given(st.floats(1e-3, 1e4), st.floats(0.05, 2.0), st.floats(0.05, 2.0),
           st.sampled_from([2, 4, 6]))
    def test_certificate_ordering(self, xi, umin_mag, umax, gamma):
        params = SaturationParams(p1=50.0, p2=0.2, gamma=gamma, u_min=-umin_mag, u_max=umax)
        cert = invariant_bounds(params, xi)
        assert params.u_min < cert.u_tilde_min < 0 < cert.u_tilde_max < params.u_max


class TestModelProperties:
    @settings(max_examples=80, deadline=None)
    @given(st.floats(-0.4999, 0.7499))
    def test_gain_positive_inside(self, u):
        assert effective_gain(u, P) > 0

    @settings(max_examples=80, deadline=None)
    @given(st.floats(-0.7499, 0.7499), st.floats(-20, 20))
    def test_symmetric_bounds_make_the_model_odd(self, u, uc):
        sym = SaturationParams(p1=100.0, p2=0.1, gamma=2, u_min=-0.75, u_max=0.75)
        assert saturation_rhs(-u, -uc, sym) == pytest.approx(-saturation_rhs(u, uc, sym), abs=1e-12)

    def test_half_bound_example(self):
        assert effective_gain(0.5, P) == pytest.approx(100 * (1 - (0.5 / 0.75) ** 2), abs=1e-4)
        assert effective_gain(0.5, P) == pytest.approx(55.5556, abs=1e-4)
