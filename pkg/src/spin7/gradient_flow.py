"""First-order Spin(7) system, its Lagrangian and superpotential, and integration.

The metric ``dt^2 + 4a^2 (R1^2 + R2^2) + 4b^2 R3^2 + c^2 P_a^2`` has Spin(7)
holonomy when

    a' = 1 - b/(2a) - a^2/c^2,   b' = b^2/(2a^2) - b^2/c^2,   c' = a/c + b/(2c).

With ``alpha^i = log(a, b, c)`` and ``dt = a^2 b c^4 d(rho)`` the same system is
the gradient flow of ``W = b c^2 (4a^3 + 2a^2 b + 4a c^2 - b c^2)`` for the
kinetic metric ``g_ij`` below.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, List, Tuple

import numpy as np
from scipy.integrate import solve_ivp

from .jets import RadialJet, integrate_autonomous
from .triad import SingularFrameError, TriadJet

log = logging.getLogger(__name__)

# kinetic metric read off T = 2a'^2 + 12g'^2 + 4a'b' + 8b'g' + 16a'g'  (T = g_ij x'^i x'^j / 2)
KINETIC_METRIC = np.array([[4, 4, 16], [4, 0, 8], [16, 8, 24]], dtype=np.int64)
KINETIC_INVERSE = np.linalg.inv(KINETIC_METRIC.astype(float))


@dataclass(frozen=True)
class FlowState:
    t: float
    a: float
    b: float
    c: float


def flow_rhs(a, b, c):
    """Right-hand side of the first-order system; works on floats or jets."""
    if isinstance(a, (int, float)) and (a == 0 or c == 0):
        raise SingularFrameError(f"flow is singular at a={a}, c={c}")
    return (
        1 - b / (a * 2) - a * a / (c * c),
        b * b / (a * a * 2) - b * b / (c * c),
        a / c + b / (c * 2),
    )


def flow_triad(a: float, b: float, c: float, order: int = 3, rhs: Callable | None = None) -> TriadJet:
    """Triad jet of the flow solution through (a, b, c).

    Higher derivatives come from differentiating the right-hand side with jet
    arithmetic, never from finite differences.
    """
    rhs = rhs or flow_rhs
    jets = integrate_autonomous([a, b, c], lambda j: list(rhs(*j)), order)
    return TriadJet(*jets)


# ---------------------------------------------------------------------------
# Lagrangian structure

def potential(a, b, c):
    return 0.5 * b * b * c**4 * (4 * a**6 + 2 * a**4 * b * b - 24 * a**4 * c * c - 4 * a * a * c**4 + b * b * c**4)


def superpotential(a, b, c):
    return b * c * c * (4 * a**3 + 2 * a * a * b + 4 * a * c * c - b * c * c)


def _log_gradient(func, a: float, b: float, c: float) -> np.ndarray:
    """Gradient with respect to (log a, log b, log c) by forward-mode jets."""
    out = []
    for k in range(3):
        args = [RadialJet([x, 0.0]) for x in (a, b, c)]
        args[k] = RadialJet([(a, b, c)[k], (a, b, c)[k]])
        out.append(func(*args).d1)
    return np.array(out)


@dataclass(frozen=True)
class LagrangianData:
    alpha: float
    beta: float
    gamma: float
    g: np.ndarray = field(default_factory=lambda: KINETIC_METRIC.copy())

    @property
    def abc(self) -> Tuple[float, float, float]:
        return (np.exp(self.alpha), np.exp(self.beta), np.exp(self.gamma))

    @property
    def V(self) -> float:
        return float(potential(*self.abc))

    @property
    def W(self) -> float:
        return float(superpotential(*self.abc))


def superpotential_check(point: LagrangianData) -> float:
    """|V + (1/2) g^{ij} dW/dx^i dW/dx^j| at a point."""
    grad = _log_gradient(superpotential, *point.abc)
    ginv = np.linalg.inv(np.asarray(point.g, dtype=float))
    return float(abs(point.V + 0.5 * grad @ ginv @ grad))


def gradient_flow_rhs(a: float, b: float, c: float) -> Tuple[float, float, float]:
    """(a', b', c') in t from dx^i/drho = g^{ij} dW/dx^j and dt = a^2 b c^4 drho."""
    grad = _log_gradient(superpotential, a, b, c)
    xdot = KINETIC_INVERSE @ grad
    lapse = a * a * b * c**4
    return tuple(float(v * x / lapse) for v, x in zip(xdot, (a, b, c)))


def _rho_derivatives(triad: TriadJet):
    """x'^i and x''^i in rho, from t-jets of (a, b, c)."""
    a, b, c = triad.a, triad.b, triad.c
    lapse = a * a * b * c * c * c * c
    first, second = [], []
    for f in (a, b, c):
        logdot = f.derivative() / f.truncate(f.order - 1)
        xp = lapse.truncate(logdot.order) * logdot
        first.append(float(xp.value))
        second.append(float((lapse.truncate(xp.order - 1) * xp.derivative()).value))
    return np.array(first), np.array(second)


def euler_lagrange_residual(triad: TriadJet) -> float:
    """Relative residual of g_ij x''^j + dV/dx^i = 0 in the rho variable."""
    if triad.order < 3:
        raise ValueError("Euler-Lagrange residual needs second derivatives")
    _, xpp = _rho_derivatives(triad)
    dV = _log_gradient(potential, *(float(v) for v in triad.values))
    acc = KINETIC_METRIC @ xpp
    scale = max(np.max(np.abs(acc)), np.max(np.abs(dV)), 1e-300)
    return float(np.max(np.abs(acc + dV)) / scale)


def constraint_residual(triad: TriadJet) -> float:
    """Relative |T + V| / (|T| + |V|)."""
    xp, _ = _rho_derivatives(triad)
    T = 0.5 * xp @ KINETIC_METRIC @ xp
    V = float(potential(*(float(v) for v in triad.values)))
    return float(abs(T + V) / max(abs(T) + abs(V), 1e-300))


# ---------------------------------------------------------------------------
# integration

@dataclass
class FlowTrajectory:
    t: np.ndarray
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    status: str = "ok"
    message: str = ""

    def __len__(self) -> int:
        return len(self.t)

    def states(self) -> List[FlowState]:
        return [FlowState(*row) for row in zip(self.t, self.a, self.b, self.c)]

    def triads(self, order: int = 3) -> List[TriadJet]:
        return [flow_triad(a, b, c, order) for a, b, c in zip(self.a, self.b, self.c)]


def _vanishing(k: int, floor: float):
    def event(t, y):
        return abs(y[k]) - floor

    event.terminal = True
    return event


def integrate_flow(s0: FlowState, t_end: float, tol: float = 1e-10, singular_floor: float = 1e-8,
                   rhs: Callable | None = None) -> FlowTrajectory:
    """Adaptive Runge-Kutta integration; one output row per accepted step.

    Stops early (status ``"singular"``) if a, b or c shrinks below
    ``singular_floor`` times its initial size, or if the integrator fails.
    ``rhs`` replaces :func:`flow_rhs` (used for mutation checks).
    """
    rhs = rhs or flow_rhs
    if s0.a == 0 or s0.c == 0:
        raise SingularFrameError("initial state is singular")
    y0 = [s0.a, s0.b, s0.c]
    events = [_vanishing(k, singular_floor * max(abs(y0[k]), 1e-300)) for k in range(3) if y0[k] != 0]
    sol = solve_ivp(
        lambda t, y: list(rhs(*y)),
        (s0.t, t_end),
        y0,
        method="DOP853",
        rtol=tol,
        atol=tol * 1e-3,
        events=events,
    )
    traj = FlowTrajectory(sol.t, sol.y[0], sol.y[1], sol.y[2])
    if sol.status == 1:
        traj.status = "singular"
        traj.message = f"metric function vanished near t = {sol.t[-1]:.6g}"
    elif sol.status < 0:
        traj.status = "singular"
        traj.message = sol.message
    if traj.status != "ok":
        log.warning("flow stopped early: %s", traj.message)
    return traj


def trajectory_diagnostics(traj: FlowTrajectory, rhs: Callable | None = None):
    """Per-step (ricci, euler_lagrange, constraint) residual arrays."""
    from .curvature import ricci_flat_residual

    ric, el, tv = [], [], []
    for a, b, c in zip(traj.a, traj.b, traj.c):
        triad = flow_triad(a, b, c, 3, rhs)
        ric.append(ricci_flat_residual(triad))
        el.append(euler_lagrange_residual(triad))
        tv.append(constraint_residual(triad))
    return np.array(ric), np.array(el), np.array(tv)


# ---------------------------------------------------------------------------
# truncations

@dataclass(frozen=True)
class TruncationReport:
    kind: str
    consistent: bool
    reduced_rhs: Callable | None
    note: str


def _rhs_eq_b(a, c):
    return (0.5 - a * a / (c * c), 1.5 * a / c)


def _rhs_b_zero(a, c):
    return (1 - a * a / (c * c), a / c)


def _rhs_b_minus_a(a, c):
    return (0.5, 0.5 * np.sign(a * c))


def truncation_report(kind: str) -> TruncationReport:
    """Consistency of a reduction of the first-order system.

    ``a_eq_b``: a' - b' vanishes identically on a = b.
    ``b_to_zero``: b = lambda b~, lambda -> 0 leaves b constant and the G2 system for (a, c).
    ``b_eq_minus_a``: preserved only together with a^2 = c^2, the flat solution a = -b = +-c = t/2.
    ``a_eq_c``: a' - c' = -1 - b/a, so the flow leaves a = c unless b = -a.
    """
    if kind == "a_eq_b":
        return TruncationReport(kind, True, _rhs_eq_b, "a' = 1/2 - a^2/c^2, c' = 3a/(2c)")
    if kind == "b_to_zero":
        return TruncationReport(kind, True, _rhs_b_zero, "a' = 1 - a^2/c^2, c' = a/c")
    if kind == "b_eq_minus_a":
        return TruncationReport(
            kind, True, _rhs_b_minus_a, "requires a^2 = c^2; the solution is flat R^8 with a = t/2"
        )
    if kind == "a_eq_c":
        return TruncationReport(
            kind,
            False,
            None,
            "a' - c' = -1 - b/a; inconsistent unless b = -a (flat). Consistent only with the "
            "second-order equations (Taub-NUT/Bolt), not solved here",
        )
    raise ValueError(f"unknown truncation {kind!r}")


def truncation_defect(kind: str, a: float, b: float, c: float) -> float:
    """How far the full flow leaves the truncated locus at a point on it."""
    da, db, dc = flow_rhs(a, b, c)
    if kind == "a_eq_b":
        return float(da - db)
    if kind == "b_eq_minus_a":
        return float(da + db)
    if kind == "a_eq_c":
        return float(da - dc)
    if kind == "b_to_zero":
        return float(db)
    raise ValueError(f"unknown truncation {kind!r}")


# ---------------------------------------------------------------------------
# radial variable r with dr = b dt, f = c^2

def r_derivatives_of_f(triad: TriadJet) -> List[float]:
    """(f, f', f'', f''') with primes d/dr = (1/b) d/dt; needs a jet of order 4."""
    if triad.order < 4:
        raise ValueError("need third t-derivatives")
    f = triad.c * triad.c
    b = triad.b
    out = [f]
    cur = f
    for _ in range(3):
        cur = cur.derivative() / b.truncate(cur.order - 1)
        out.append(cur)
    return [float(j.value) for j in out]


def q_relation_residual(triad: TriadJet) -> Tuple[float, float]:
    """Relative residuals of the third-order equation and of f Q' - (f'+1) Q = 0."""
    from .closed_form_solutions import ode19_residual, q_factor

    f, f1, f2, f3 = r_derivatives_of_f(triad)
    res19 = ode19_residual(f, f1, f2, f3)
    Q = q_factor(f, f1, f2)
    dQ = 2 * f1 * f2 + 2 * f * f3 + f2 * (f1 - 1) + (f1 - 3) * f2
    rel = f * dQ - (f1 + 1) * Q
    scale19 = max(abs(2 * f * f * f3), abs(2 * f * (f1 - 3) * f2), abs((f1 + 1) * (f1 - 1) * (f1 - 3)), 1e-300)
    scale_q = max(abs(f * dQ), abs((f1 + 1) * Q), 1e-300)
    return abs(res19) / scale19, abs(rel) / scale_q


def scaled_solution(traj: FlowTrajectory, lam: float) -> FlowTrajectory:
    """(lam a, lam b, lam c)(lam t): the image of a solution under rescaling."""
    return FlowTrajectory(lam * traj.t, lam * traj.a, lam * traj.b, lam * traj.c, traj.status, traj.message)
