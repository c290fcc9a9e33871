"""Independent symbolic oracles built with sympy.

Everything here is derived from scratch with symbolic total derivatives along
the closed-loop flow; nothing is imported from the package except plain data.
"""

from functools import lru_cache

import sympy as sp

t, x1, x2, u = sp.symbols("t x1 x2 u")

P1, P2, GAMMA, U_MIN, U_MAX = 100, sp.Rational(1, 10), 2, sp.Rational(-1, 2), sp.Rational(3, 4)
F1 = sp.Rational(1, 10) * x1**2
G1 = sp.Integer(1)
F2 = sp.Rational(1, 10) * x1 * x2 - sp.Rational(1, 5) * x1
G2 = 1 + x1**2
YD = sp.Rational(1, 5) + sp.Rational(3, 10) * sp.sin(t)
K = (2, 2, 2)
DELTA = sp.Rational(1, 100)


def total_derivative(expr):
    """d/dt along the plant with input ``u`` (no u-derivative needed)."""
    return (sp.diff(expr, t) + sp.diff(expr, x1) * (F1 + G1 * x2)
            + sp.diff(expr, x2) * (F2 + G2 * u))


def gain(branch):
    bound = U_MAX if branch > 0 else U_MIN
    return P1 * (1 - (u / bound) ** GAMMA)


@lru_cache(maxsize=None)
def global_design():
    """Symbolic error coordinates, stabilizing functions and dV/dt."""
    phi1 = x1 - YD
    eta1 = (sp.diff(YD, t) - F1 - K[0] * phi1) / G1
    phi2 = x2 - eta1
    eta2 = (total_derivative(eta1) - F2 - G1 * phi1 - K[1] * phi2) / G2
    varrho = u - eta2
    eta2_dot = total_derivative(eta2)
    v = (phi1**2 + phi2**2 + varrho**2) / 2
    # dV/dt for an arbitrary command uc
    uc = sp.Symbol("uc")
    out = {}
    for branch in (1, -1):
        udot = gain(branch) * uc - P1 * P2 * u
        vdot = (sp.diff(v, t) + sp.diff(v, x1) * (F1 + G1 * x2)
                + sp.diff(v, x2) * (F2 + G2 * u) + sp.diff(v, u) * udot)
        uc_design = (P1 * P2 * u + eta2_dot - G2 * phi2 - K[2] * varrho) / gain(branch)
        out[branch] = dict(uc=uc_design, vdot=vdot.subs(uc, uc_design))
    exprs = dict(phi1=phi1, phi2=phi2, varrho=varrho, eta1=eta1, eta2=eta2,
                 eta1_dot=total_derivative(eta1), eta2_dot=eta2_dot, v=v)
    return exprs, out


def lambdify(expr):
    return sp.lambdify((t, x1, x2, u), expr, "math")


@lru_cache(maxsize=None)
def blf_design(upper, lower, s):
    """Barrier design for corridor strings ``upper``/``lower`` and branch ``s``."""
    yu = sp.sympify(upper, locals={"t": t})
    yl = sp.sympify(lower, locals={"t": t})
    alpha = YD - yl
    beta = yu - YD
    kbar = sp.sqrt((sp.diff(alpha, t) / alpha) ** 2 + (sp.diff(beta, t) / beta) ** 2 + DELTA)
    phi1 = x1 - YD
    eta1 = (sp.diff(YD, t) - F1 - (K[0] + kbar) * phi1) / G1
    phi2 = x2 - eta1
    bound = beta if s else alpha
    digamma = 1 / (bound**2 - phi1**2)
    eta2 = (total_derivative(eta1) - F2 - digamma * G1 * phi1 - K[1] * phi2) / G2
    varrho = u - eta2
    zeta = phi1 / bound
    w = -sp.log(1 - zeta**2) / 2 + phi2**2 / 2 + varrho**2 / 2
    uc = sp.Symbol("uc")
    branches = {}
    for branch in (1, -1):
        uc_design = (P1 * P2 * u + total_derivative(eta2) - G2 * phi2 - K[2] * varrho) / gain(branch)
        udot = gain(branch) * uc - P1 * P2 * u
        wdot = (sp.diff(w, t) + sp.diff(w, x1) * (F1 + G1 * x2)
                + sp.diff(w, x2) * (F2 + G2 * u) + sp.diff(w, u) * udot)
        branches[branch] = dict(uc=uc_design, wdot=wdot.subs(uc, uc_design))
    exprs = dict(alpha=alpha, beta=beta, kbar=kbar, phi1=phi1, phi2=phi2, varrho=varrho,
                 eta1=eta1, eta2=eta2, eta1_dot=total_derivative(eta1),
                 eta2_dot=total_derivative(eta2), zeta=zeta, w=w, digamma=digamma)
    return exprs, branches
