"""General solution of the first-order system in the (z, v) variables.

With ``f = c^2`` and ``dr = b dt`` the system reduces to a third-order
equation for ``f(r)``; its general solution is parameterised by

    v(z) = 2k sqrt(z) / (1 - z^2)^(1/4) - 2z 2F1(1, 1/2; 5/4; 1 - z^2),
    f(z) = sqrt((1+z)/(1-z)) exp( int dz / (v (1 - z^2)) ),

with the metric coefficients rational in (z, v, f).  Trajectories that pass
through |z| = infinity are handled in ``y = 1/z``, where

    v(y) = (1 - y^2)^(-1/4) (kappa + y 2F1(1/2, 3/4; 3/2; y^2)).

Near the asymptotic end (z or y -> 1) everything is evaluated through
``s = (1 - u)^(1/4)``, which removes both the cancellation in ``1 - u`` and the
integrable singularity of the exponent integrand.
"""

from __future__ import annotations

import math
from fractions import Fraction
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.optimize import brentq

from .hypergeometric import hyp2f1, hyp2f1_complement, hyp2f1_derivative
from .jets import integrate_autonomous
from .triad import TriadJet

# 2 sqrt(pi) Gamma(5/4) / Gamma(3/4): the y -> +-1 value of y 2F1(1/2, 3/4; 3/2; y^2)
KAPPA_BAR = 2.0 * math.sqrt(math.pi) * math.gamma(1.25) / math.gamma(0.75)

BRANCHES = ("A8", "B8", "B8minus", "B8plus", "G2limit", "singular")


class SolutionDomainError(ValueError):
    pass


class SingularTrajectoryError(ValueError):
    pass


# ---------------------------------------------------------------------------
# third-order equation for f(r)

def ode19_residual(f: float, f1: float, f2: float, f3: float) -> float:
    """2 f^2 f''' + 2 f (f' - 3) f'' - (f' + 1)(f' - 1)(f' - 3)."""
    return 2 * f * f * f3 + 2 * f * (f1 - 3) * f2 - (f1 + 1) * (f1 - 1) * (f1 - 3)


def q_factor(f: float, f1: float, f2: float) -> float:
    """Q = 2 f W' + (f' - 3) W with W = f' - 1."""
    return 2 * f * f2 + (f1 - 3) * (f1 - 1)


def a_squared_from_f(f: float, f1: float, f2: float) -> float:
    """a^2 = (f' - 1)(f' - 3) f / Q, valid when Q != 0."""
    Q = q_factor(f, f1, f2)
    if Q == 0:
        raise SolutionDomainError("Q vanishes; a must be found by integrating a' instead")
    return (f1 - 1) * (f1 - 3) * f / Q


def elementary_f(kind: str, r, ell=1):
    """(f, f', f'', f''') for the three elementary solutions."""
    if kind == "minus_r":
        return (-r, -1, 0, 0)
    if kind == "three_r":
        return (3 * r, 3, 0, 0)
    if kind == "quadratic":
        inv = Fraction(1, ell * ell) if isinstance(ell, int) else 1 / (ell * ell)
        return (r + r * r * inv / 2, 1 + r * inv, inv, 0)
    raise ValueError(f"unknown elementary solution {kind!r}")


def three_r_a_squared(r, r_star):
    """a^2 for f = 3r, from a' = (f'-2)/(2a) - (f'-1) a/(2f):  (a^2)' = 1 - 2a^2/(3r).

    Returned with the scaling constant written as a radius ``r_star`` where
    a^2 vanishes: a^2 = (3/5) r (1 - (r_star/r)^(5/3)).
    """
    return 0.6 * r * (1 - (r_star / r) ** (5.0 / 3.0))


# ---------------------------------------------------------------------------
# v(z), v(y)

def _v_z_parts(k: float, z: float, omz: float) -> Tuple[float, float]:
    """Homogeneous and particular parts of v at z (omz = 1 - z given exactly)."""
    if z <= 0:
        raise SolutionDomainError(f"v(z) needs z > 0, got {z}")
    x = omz * (1.0 + z)  # 1 - z^2
    if x == 0:
        raise SolutionDomainError("z = 1 is the degenerate locus; use a limiting expansion")
    hom = math.sqrt(z) / abs(x) ** 0.25
    if z * z < 0.5:
        F = hyp2f1_complement(1.0, 0.5, 1.25, z * z)
    else:
        F = hyp2f1(1.0, 0.5, 1.25, x)
    return hom, -2.0 * z * F


def v_of_z(k: float, z: float) -> float:
    """v on the z-branch; for 0 < z < 1 and z > 1 (with |1 - z^2|)."""
    hom, part = _v_z_parts(k, z, 1.0 - z)
    return 2.0 * k * hom + part


def dv_dz(k: float, z: float) -> float:
    """Analytic derivative of :func:`v_of_z`."""
    if z <= 0 or z == 1:
        raise SolutionDomainError(f"dv/dz undefined at z = {z}")
    x = (1.0 - z) * (1.0 + z)
    sign = 1.0 if x > 0 else -1.0
    dhom = sign / (2.0 * math.sqrt(z) * abs(x) ** 1.25)
    F = hyp2f1(1.0, 0.5, 1.25, x) if z * z >= 0.5 else hyp2f1_complement(1.0, 0.5, 1.25, z * z)
    dF = hyp2f1_derivative(1.0, 0.5, 1.25, x)
    return 2.0 * k * dhom - 2.0 * F + 4.0 * z * z * dF


def v_of_y(kappa: float, y: float) -> float:
    """v on the y = 1/z branch, |y| < 1."""
    if not -1.0 < y < 1.0:
        raise SolutionDomainError(f"v(y) needs |y| < 1, got {y}")
    x = y * y
    return (kappa + y * hyp2f1(0.5, 0.75, 1.5, x)) / ((1.0 - y) * (1.0 + y)) ** 0.25


def dv_dy(kappa: float, y: float) -> float:
    if not -1.0 < y < 1.0:
        raise SolutionDomainError(f"v(y) needs |y| < 1, got {y}")
    x = y * y
    one = (1.0 - y) * (1.0 + y)
    F = hyp2f1(0.5, 0.75, 1.5, x)
    dF = hyp2f1_derivative(0.5, 0.75, 1.5, x)
    return 0.5 * y * one ** -1.25 * (kappa + y * F) + one ** -0.25 * (F + 2.0 * x * dF)


def integrate_v(k: Optional[float], start: float, end: float, points, kappa: Optional[float] = None,
                rtol: float = 1e-13) -> np.ndarray:
    """Integrate the linear equation for v numerically from closed-form data at ``start``.

    Uses the z-form for ``k`` and the y-form for ``kappa``; returns v at ``points``.
    """
    if (k is None) == (kappa is None):
        raise ValueError("give exactly one of k or kappa")
    if k is not None:
        v0 = v_of_z(k, start)
        rhs = lambda x, v: [(v[0] + 2.0 * x) / (2.0 * x * (1.0 - x * x))]
    else:
        v0 = v_of_y(kappa, start)
        rhs = lambda x, v: [(x * v[0] + 2.0) / (2.0 * (1.0 - x * x))]
    sol = solve_ivp(rhs, (start, end), [v0], method="DOP853", rtol=rtol, atol=1e-14, t_eval=points)
    if not sol.success:
        raise SolutionDomainError(sol.message)
    return sol.y[0]


def ode27_residual_z(v: float, dv: float, z: float) -> float:
    """2 z (1 - z^2) dv/dz - (v + 2z)."""
    return 2.0 * z * (1.0 - z * z) * dv - (v + 2.0 * z)


def ode27_residual_y(v: float, dv: float, y: float) -> float:
    """The same equation in y = 1/z:  2 (1 - y^2) dv/dy - (y v + 2)."""
    return 2.0 * (1.0 - y * y) * dv - (y * v + 2.0)


def phase_field(z: float, v: float) -> Tuple[float, float]:
    """(dz/dtau, dv/dtau) of the autonomous phase-plane system."""
    return 2.0 * z * (1.0 - z * z), v + 2.0 * z


def phase_field_y(y: float, v: float) -> Tuple[float, float]:
    """Phase field in (y, v), rescaled by y^2 so that it is regular at y = 0."""
    return -2.0 * y * (y * y - 1.0), y * v + 2.0


# ---------------------------------------------------------------------------
# parameters, f(z), metric

@dataclass(frozen=True)
class SolutionParams:
    """One member of the general solution.

    Give ``k`` (z-branch, k >= 0, ``math.inf`` for the G2 limit) or ``kappa``
    (y-branch).  ``f_norm`` fixes the free multiplicative constant of f: with
    it, f ~ sqrt(2) f_norm (1 - u)^(-1/2) at the asymptotic end.  ``branch`` is
    only consulted for k = 0, where it selects A8 or B8.
    """

    k: Optional[float] = None
    kappa: Optional[float] = None
    f_norm: float = 1.0
    branch: Optional[str] = None

    def __post_init__(self):
        if (self.k is None) == (self.kappa is None):
            raise ValueError("give exactly one of k or kappa")
        if self.f_norm <= 0:
            raise ValueError("f_norm must be positive")
        if self.k is not None and self.k < 0:
            raise ValueError("k must be non-negative")
        if self.branch is not None and self.branch not in BRANCHES:
            raise ValueError(f"unknown branch {self.branch!r}")

    @property
    def coordinate(self) -> str:
        return "z" if self.k is not None else "y"


def _v_times_s(params: SolutionParams, s: float) -> float:
    """v(u) * s at u = 1 - s^4; finite as s -> 0."""
    s4 = s**4
    u = 1.0 - s4
    x = s4 * (2.0 - s4)  # 1 - u^2
    if params.k is not None:
        F = hyp2f1(1.0, 0.5, 1.25, x) if u * u >= 0.5 else hyp2f1_complement(1.0, 0.5, 1.25, u * u)
        return 2.0 * params.k * math.sqrt(u) / (2.0 - s4) ** 0.25 - 2.0 * u * s * F
    if x == 0:
        F = KAPPA_BAR
    elif u * u < 0.5:
        F = hyp2f1(0.5, 0.75, 1.5, u * u)
    else:
        F = hyp2f1_complement(0.5, 0.75, 1.5, x)
    return (params.kappa + u * F) / (2.0 - s4) ** 0.25


def v_at_s(params: SolutionParams, s: float) -> float:
    return _v_times_s(params, s) / s


def _s_of(u: float) -> float:
    if u >= 1:
        raise SolutionDomainError(f"coordinate must be < 1, got {u}")
    return (1.0 - u) ** 0.25


def _exponent(params: SolutionParams, s: float) -> float:
    """int_u^1 du / (v (1 - u^2)) written as int_0^s 4 ds / ((v s)(2 - s^4))."""
    if params.k is not None and params.k == 0:
        raise SingularTrajectoryError("k = 0 trajectories sit at z = 1; use metric_families")

    def integrand(sig):
        vs = _v_times_s(params, sig)
        if vs == 0:
            raise SingularTrajectoryError(f"v vanishes on the integration path at s = {sig}")
        return 4.0 / (vs * (2.0 - sig**4))

    total, err = quad(integrand, 0.0, s, epsabs=0.0, epsrel=1e-13, limit=200)
    # v changing sign on the path shows up as a non-integrable pole
    vs = np.array([_v_times_s(params, sig) for sig in np.linspace(0.0, s, 65)])
    if np.any(np.sign(vs) != np.sign(vs[0])):
        raise SingularTrajectoryError("v vanishes on the integration path")
    return total


def f_at_s(params: SolutionParams, s: float) -> float:
    s4 = s**4
    return params.f_norm * math.sqrt(2.0 - s4) / (s * s) * math.exp(-_exponent(params, s))


def f_of_z(params: SolutionParams, z: float) -> float:
    """f at coordinate z (or y, for kappa parameters)."""
    return f_at_s(params, _s_of(z))


@dataclass(frozen=True)
class MetricCoefficients:
    """Coefficients of du^2, R1^2 + R2^2, R3^2 and P_a^2 at one point."""

    g_uu: float
    coef_R12: float
    coef_R3: float
    coef_S4: float
    v: float
    u: float


def metric_at_s(params: SolutionParams, s: float, f: Optional[float] = None) -> MetricCoefficients:
    """Metric coefficients at u = 1 - s^4; ``f`` may be supplied instead of integrated."""
    s4 = s**4
    u = 1.0 - s4
    v = v_at_s(params, s)
    if v in (0.0, 2.0):
        raise SolutionDomainError("v = 0 or 2 is a degenerate or bolt locus")
    f = f_at_s(params, s) if f is None else f
    w = u if params.k is not None else 1.0
    one_minus_u2 = s4 * (2.0 - s4)
    g_uu = v * f / (4.0 * w * one_minus_u2 * s4 * (v - 2.0))
    r12 = 4.0 * (v - 2.0) * w * f / ((1.0 + u) * v)
    r3 = 16.0 * (v - 2.0) * w * f / ((1.0 + u) * v**3)
    return MetricCoefficients(g_uu, r12, r3, f, v, u)


def metric_from_zv(params: SolutionParams, z: float) -> MetricCoefficients:
    """Coefficients of the general local metric at z (or y)."""
    return metric_at_s(params, _s_of(z))


def triad_from_z(params: SolutionParams, z: float, order: int = 3) -> TriadJet:
    """(a, b, c) with t-derivatives at z, from the autonomous system in (u, v, f).

    du/dt = 2a(1 - u^2)/f, dv/dt = v_u du/dt, df/dt = f (v+1)/(v(1-u^2)) du/dt,
    with a^2 = (v-2) w f / ((1+u) v), b = 2a/v, c = sqrt(f) and w = z or 1.
    """
    v0 = v_of_z(params.k, z) if params.k is not None else v_of_y(params.kappa, z)
    f0 = f_of_z(params, z)
    zbranch = params.k is not None

    def a_of(u, v, f):
        w = u if zbranch else 1.0
        return ((v - 2) * w * f / ((1 + u) * v)).sqrt()

    def field(j):
        u, v, f = j
        one = 1 - u * u
        udot = a_of(u, v, f) * 2 * one / f
        if zbranch:
            vdot = (v + u * 2) / (u * one * 2) * udot
        else:
            vdot = (u * v + 2) / (one * 2) * udot
        fdot = f * (v + 1) / (v * one) * udot
        return [udot, vdot, fdot]

    u, v, f = integrate_autonomous([z, v0, f0], field, order)
    a = a_of(u, v, f)
    return TriadJet(a, a * 2 / v, f.sqrt())


def large_k_limit(z: float) -> MetricCoefficients:
    """k -> infinity with the circle rescaled by k: the G2 metric times a circle.

    coef_R3 is reported as the rescaled circle coefficient (1 for d phi^2).
    """
    one = (1.0 - z) * (1.0 + z)
    return MetricCoefficients(
        g_uu=1.0 / (4.0 * z * (1.0 - z) ** 2 * math.sqrt(one)),
        coef_R12=4.0 * z / math.sqrt(one),
        coef_R3=4.0,
        coef_S4=math.sqrt((1.0 + z) / (1.0 - z)),
        v=math.inf,
        u=z,
    )


# ---------------------------------------------------------------------------
# classification

@dataclass
class Classification:
    branch: str
    z0: Optional[float] = None
    y0: Optional[float] = None
    f0: Optional[float] = None
    bolt_relation: Optional[float] = None
    asymptotic_R3: Optional[float] = None
    diagnostics: Dict[str, object] = field(default_factory=dict)

    def as_dict(self) -> Dict[str, object]:
        out: Dict[str, object] = {"branch": self.branch}
        for key in ("z0", "y0", "f0", "bolt_relation", "asymptotic_R3"):
            val = getattr(self, key)
            if val is not None:
                out[key] = val
        if self.diagnostics:
            out["diagnostics"] = self.diagnostics
        return out


def _bracket(func, grid):
    vals = [func(x) for x in grid]
    for (x0, f0), (x1, f1) in zip(zip(grid, vals), zip(grid[1:], vals[1:])):
        if f0 < 0 <= f1:
            return x0, x1
    return None


def _root(func, grid):
    br = _bracket(func, grid)
    if br is None:
        return None
    return brentq(func, br[0], br[1], xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)


def bolt_z(k: float) -> Optional[float]:
    """z0 in (0, 1) with v(z0) = 2 for k > 0."""
    grid = list(np.geomspace(1e-30, 0.5, 400)) + list(1.0 - np.geomspace(0.5, 1e-15, 400)[1:])
    return _root(lambda z: v_of_z(k, z) - 2.0, grid)


def bolt_y(kappa: float) -> Optional[float]:
    """y0 in (-1, 1) with v(y0) = 2."""
    tail = np.geomspace(1.0, 1e-15, 400)
    grid = list(-1.0 + tail) + list(np.linspace(-0.99, 0.99, 199)[1:-1]) + list(1.0 - tail[::-1])
    grid = sorted(set(x for x in grid if -1.0 < x < 1.0))
    return _root(lambda y: v_of_y(kappa, y) - 2.0, grid)


def classify(params: SolutionParams) -> Classification:
    """Regular branch of a solution and its bolt datum."""
    if params.k is not None:
        k = params.k
        if math.isinf(k):
            return Classification("G2limit", z0=0.0, asymptotic_R3=0.0,
                                  diagnostics={"note": "circle rescaled by k; G2 metric x S^1"})
        if k == 0:
            branch = params.branch if params.branch in ("A8", "B8") else "A8"
            origin = -2.0 if branch == "A8" else 2.0
            return Classification(branch, z0=1.0, diagnostics={"v_origin": origin, "note": "z = 1 fixed"})
        z0 = bolt_z(k)
        if z0 is None:
            return Classification("singular", diagnostics={"reason": "no root of v = 2 in (0, 1)"})
        slope = dv_dz(k, z0)
        if slope <= 0:
            raise AssertionError(f"v - 2 not increasing through the bolt (slope {slope})")
        return Classification(
            "B8minus",
            z0=z0,
            f0=f_of_z(params, z0),
            bolt_relation=z0 * (1.0 - z0) * slope,
            asymptotic_R3=4.0 * params.f_norm / k**2,
        )
    kappa = params.kappa
    if kappa <= -KAPPA_BAR:
        return Classification("singular", diagnostics={"reason": "kappa <= -kappa_bar: v does not reach +infinity at y = 1"})
    y0 = bolt_y(kappa)
    if y0 is None:
        return Classification("singular", diagnostics={"reason": "no root of v = 2 in (-1, 1)"})
    slope = dv_dy(kappa, y0)
    if slope <= 0:
        raise AssertionError(f"v - 2 not increasing through the bolt (slope {slope})")
    z0 = 1.0 / y0 if y0 != 0 else math.inf
    return Classification(
        "B8plus",
        y0=y0,
        z0=z0,
        f0=f_of_z(params, y0),
        bolt_relation=z0 * (1.0 - z0) * (-y0 * y0 * slope) if y0 != 0 else None,
        asymptotic_R3=16.0 * params.f_norm / (kappa + KAPPA_BAR) ** 2,
    )
