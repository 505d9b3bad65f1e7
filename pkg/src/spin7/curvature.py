"""Levi-Civita connection and curvature of the cohomogeneity-one metric.

Everything is assembled inside the invariant-form algebra.  The connection is
read off the first structure equation ``de^A = -omega^A_B ^ e^B``: the part of
``de^A`` along frame directions fixes the frame components
``omega_{AB|C}`` through the usual combination of structure functions, and the
``L_i`` terms in ``dP_a`` are absorbed into an SU(2)_L piece of ``omega_ab``.
Curvature is then ``dω + ω ^ ω``; any ``L_i`` component surviving there is a
bug and is reported rather than discarded.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np

from .invariant_forms import (
    COFRAME_DIM,
    L_CODES,
    InvariantForm,
    exterior_derivative,
    from_frame,
    to_frame,
    wedge,
)
from .jets import RadialJet
from .triad import SingularFrameError, TriadJet

N = COFRAME_DIM


@dataclass(frozen=True)
class ConnectionTable:
    """Spin connection of one triad jet.

    ``frame[A, B, C]`` is ``omega_{AB|C}`` (values only); ``forms[A][B]`` is
    the full connection 1-form in the generator basis, jets included;
    ``internal`` maps ``(a, b)`` to the constant L_i coefficients.
    """

    frame: np.ndarray
    jets: Dict[Tuple[int, int, int], RadialJet]
    forms: List[List[InvariantForm]]
    internal: Dict[Tuple[int, int], Dict[int, float]]
    triad: TriadJet


@dataclass(frozen=True)
class CurvatureTensor:
    riemann: np.ndarray
    ricci: np.ndarray
    internal_leak: float

    def bianchi_residual(self) -> float:
        R = self.riemann
        cyc = R + np.transpose(R, (0, 2, 3, 1)) + np.transpose(R, (0, 3, 1, 2))
        return float(np.max(np.abs(cyc)))


def frame_differentials(triad: TriadJet) -> List[InvariantForm]:
    """``de^A`` for each frame 1-form, in the generator basis."""
    s = triad.scalings()
    return [exterior_derivative(InvariantForm(1, {(A,): s[A]})) for A in range(N)]


def connection(triad: TriadJet) -> ConnectionTable:
    """Torsion-free metric connection for the triad (needs first derivatives)."""
    if triad.order < 2:
        raise ValueError("connection needs first derivatives of (a, b, c)")
    triad.check_regular()
    s = triad.scalings()

    # structure functions c^A_{BC} (antisymmetric in B, C) and the L_i part
    struct: Dict[Tuple[int, int, int], RadialJet] = {}
    internal: Dict[Tuple[int, int], Dict[int, object]] = {}
    for A, de in enumerate(frame_differentials(triad)):
        frame_part = InvariantForm(2, {k: v for k, v in de.terms.items() if not set(k) & set(L_CODES)})
        for (B, C), coef in to_frame(frame_part, triad).items():
            struct[A, B, C] = coef
            struct[A, C, B] = -coef
        for (X, Lc), coef in ((k, v) for k, v in de.terms.items() if set(k) & set(L_CODES)):
            if A >= 4 or X >= 4 or Lc not in L_CODES:
                raise SingularFrameError(f"unexpected internal term {(X, Lc)} in de^{A}")
            # coef X^L = -coef L^X  must equal  -omega^A_X(L part) s_X L^X
            internal.setdefault((A, X), {})[Lc] = coef / s[X]

    def c(A, B, C):
        return struct.get((A, B, C))

    jets: Dict[Tuple[int, int, int], RadialJet] = {}
    for A in range(N):
        for B in range(N):
            if A == B:
                continue
            for C in range(N):
                parts = [(1, c(A, B, C)), (-1, c(B, A, C)), (-1, c(C, A, B))]
                total = None
                for sign, term in parts:
                    if term is None:
                        continue
                    term = term if sign > 0 else -term
                    total = term if total is None else total + term
                if total is not None and not total.is_zero():
                    jets[A, B, C] = total * 0.5

    frame = np.zeros((N, N, N))
    for (A, B, C), j in jets.items():
        frame[A, B, C] = float(j.value)

    # rounding in coef/s_X scales with the log-derivatives of the frame
    rate = max(abs(float(x.d1 / x.value)) for x in s[:7]) if triad.order > 1 else 0.0
    internal_vals: Dict[Tuple[int, int], Dict[int, float]] = {}
    for key, entry in internal.items():
        internal_vals[key] = {}
        for Lc, jet in entry.items():
            if abs(float(jet.derivative().max_abs())) > 1e-12 * max(1.0, rate) * max(1.0, abs(float(jet.value))):
                raise SingularFrameError("internal connection is not constant")
            internal_vals[key][Lc] = float(jet.value)

    forms: List[List[InvariantForm]] = [[InvariantForm(1) for _ in range(N)] for _ in range(N)]
    for A in range(N):
        for B in range(N):
            comps = {(C,): jets[A, B, C] for C in range(N) if (A, B, C) in jets}
            form = from_frame(1, comps, triad, order=triad.order - 1) if comps else InvariantForm(1)
            if (A, B) in internal:
                form = form + InvariantForm(
                    1, {(Lc,): j.truncate(triad.order - 1) for Lc, j in internal[A, B].items()}
                )
            forms[A][B] = form
    return ConnectionTable(frame=frame, jets=jets, forms=forms, internal=internal_vals, triad=triad)


def torsion_residual(table: ConnectionTable) -> float:
    """max over A of |de^A + omega^A_B ^ e^B| (generator components)."""
    triad = table.triad
    s = triad.scalings()
    worst = 0.0
    for A, de in enumerate(frame_differentials(triad)):
        total = de
        for B in range(N):
            total = total + wedge(table.forms[A][B], InvariantForm(1, {(B,): s[B]}))
        worst = max(worst, total.max_abs())
    return worst


def curvature(triad: TriadJet) -> CurvatureTensor:
    """Riemann and Ricci tensors in the orthonormal frame (needs second derivatives)."""
    if triad.order < 3:
        raise ValueError("curvature needs second derivatives of (a, b, c)")
    table = connection(triad)
    om = table.forms
    riemann = np.zeros((N, N, N, N))
    leak = 0.0
    for A in range(N):
        for B in range(A + 1, N):
            two = exterior_derivative(om[A][B])
            for C in range(N):
                if om[A][C].terms and om[C][B].terms:
                    two = two + wedge(om[A][C], om[C][B])
            internal_terms = {k: v for k, v in two.terms.items() if set(k) & set(L_CODES)}
            for v in internal_terms.values():
                leak = max(leak, abs(float(v.value)))
            frame_two = InvariantForm(2, {k: v for k, v in two.terms.items() if k not in internal_terms})
            for (C, D), coef in to_frame(frame_two, triad).items():
                val = float(coef.value)
                riemann[A, B, C, D] = val
                riemann[A, B, D, C] = -val
                riemann[B, A, C, D] = -val
                riemann[B, A, D, C] = val
    ricci = np.einsum("abad->bd", riemann)
    return CurvatureTensor(riemann=riemann, ricci=ricci, internal_leak=leak)


def ricci(triad: TriadJet) -> CurvatureTensor:
    return curvature(triad)


def ricci_flat_residual(triad: TriadJet) -> float:
    """Sup norm of the Ricci tensor."""
    return float(np.max(np.abs(curvature(triad).ricci)))
