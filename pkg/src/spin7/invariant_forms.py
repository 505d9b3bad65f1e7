"""Exterior algebra over the invariant coframe of S^7 = SO(5)/SU(2)_L.

Forms live on the generators ``P0..P3, R1, R2, R3, DT`` (codes 0-7) plus the
internal ``L1, L2, L3`` (codes 8-10).  The ``L_i`` appear in ``dP_a`` but are
not part of the coframe; carrying them lets every computation verify that they
cancel in invariant quantities rather than assuming it.

Coefficients are :class:`~spin7.jets.RadialJet` values, so ``d`` acts on the
radial dependence as well: ``d(f alpha) = f' dt ^ alpha + f d(alpha)``.
"""

from __future__ import annotations

from enum import IntEnum
from fractions import Fraction
from itertools import combinations
from typing import Dict, Iterable, Mapping, Tuple

from .jets import RadialJet, as_jet

Key = Tuple[int, ...]

H = Fraction(1, 2)


class Coframe(IntEnum):
    P0 = 0
    P1 = 1
    P2 = 2
    P3 = 3
    R1 = 4
    R2 = 5
    R3 = 6
    DT = 7
    L1 = 8
    L2 = 9
    L3 = 10


COFRAME_DIM = 8
INTERNAL_DIM = 11
L_CODES = (8, 9, 10)


def _merge_sign(left: Key, right: Key):
    """Sorted union of two index tuples and the sign of the shuffle, or None."""
    if set(left) & set(right):
        return None, 0
    inversions = 0
    for x in left:
        for y in right:
            if x > y:
                inversions += 1
    return tuple(sorted(left + right)), (-1) ** inversions


def _sort_sign(indices: Iterable[int]):
    idx = list(indices)
    if len(set(idx)) != len(idx):
        return None, 0
    sign = 1
    for i in range(len(idx)):
        for j in range(len(idx) - 1 - i):
            if idx[j] > idx[j + 1]:
                idx[j], idx[j + 1] = idx[j + 1], idx[j]
                sign = -sign
    return tuple(idx), sign


class InvariantForm:
    """Homogeneous form with jet coefficients keyed by increasing index tuples."""

    __slots__ = ("grade", "terms")

    def __init__(self, grade: int, terms: Mapping[Key, RadialJet] | None = None):
        self.grade = grade
        self.terms: Dict[Key, RadialJet] = {}
        for key, coef in (terms or {}).items():
            if len(key) != grade or list(key) != sorted(set(key)):
                raise ValueError(f"bad index set {key} for grade {grade}")
            if not coef.is_zero():
                self.terms[key] = coef

    # -- construction -----------------------------------------------------
    @classmethod
    def zero(cls, grade: int) -> "InvariantForm":
        return cls(grade)

    @classmethod
    def scalar(cls, value, order: int = 3) -> "InvariantForm":
        return cls(0, {(): as_jet(value, order)})

    @classmethod
    def generator(cls, code: int, coef=1, order: int = 3) -> "InvariantForm":
        return cls(1, {(int(code),): as_jet(coef, order)})

    @classmethod
    def from_indices(cls, indices: Iterable[int], coef=1, order: int = 3) -> "InvariantForm":
        key, sign = _sort_sign(indices)
        idx = list(indices)
        if key is None:
            return cls(len(idx))
        return cls(len(key), {key: as_jet(coef, order) * sign})

    # -- algebra ----------------------------------------------------------
    def __add__(self, other: "InvariantForm") -> "InvariantForm":
        if not isinstance(other, InvariantForm):
            return NotImplemented
        if not self.terms:
            return other
        if not other.terms:
            return self
        if self.grade != other.grade:
            raise ValueError("cannot add forms of different grade")
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out[k] + v if k in out else v
        return InvariantForm(self.grade, out)

    def __neg__(self) -> "InvariantForm":
        return InvariantForm(self.grade, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other: "InvariantForm") -> "InvariantForm":
        return self + (-other)

    def scale(self, factor) -> "InvariantForm":
        return InvariantForm(self.grade, {k: v * factor for k, v in self.terms.items()})

    def __mul__(self, factor):
        if isinstance(factor, InvariantForm):
            return NotImplemented
        return self.scale(factor)

    __rmul__ = __mul__

    def __xor__(self, other: "InvariantForm") -> "InvariantForm":
        return wedge(self, other)

    def coefficient(self, indices: Iterable[int]):
        """Coefficient of the basis element with the given (unsorted) indices."""
        key, sign = _sort_sign(indices)
        if key is None or key not in self.terms:
            return None
        return self.terms[key] * sign

    def value(self, indices: Iterable[int]) -> float:
        c = self.coefficient(indices)
        return 0.0 if c is None else c.value

    def has_internal(self, tol: float = 0.0) -> bool:
        """True if any term carries an L_i generator above ``tol``."""
        return any(
            any(i in L_CODES for i in key) and abs(float(coef.value)) > tol
            for key, coef in self.terms.items()
        )

    def max_abs(self) -> float:
        return max((abs(float(c.value)) for c in self.terms.values()), default=0.0)

    def truncate(self, order: int) -> "InvariantForm":
        return InvariantForm(self.grade, {k: v.truncate(order) for k, v in self.terms.items()})

    def __repr__(self) -> str:
        names = [c.name for c in Coframe]
        parts = [
            f"{float(v.value):+.6g}*" + "^".join(names[i] for i in k) if k else f"{float(v.value):+.6g}"
            for k, v in sorted(self.terms.items())
        ]
        return f"InvariantForm[{self.grade}](" + " ".join(parts) + ")"


def wedge(alpha: InvariantForm, beta: InvariantForm) -> InvariantForm:
    """Graded-commutative product; grades beyond the algebra give the zero form."""
    grade = alpha.grade + beta.grade
    out: Dict[Key, RadialJet] = {}
    for ka, va in alpha.terms.items():
        for kb, vb in beta.terms.items():
            key, sign = _merge_sign(ka, kb)
            if key is None:
                continue
            term = va * vb
            if sign < 0:
                term = -term
            out[key] = out[key] + term if key in out else term
    return InvariantForm(grade, out)


def wedge_all(*forms: InvariantForm) -> InvariantForm:
    out = forms[0]
    for f in forms[1:]:
        out = wedge(out, f)
    return out


# ---------------------------------------------------------------------------
# structure equations

def _two(*pairs) -> Dict[Key, Fraction]:
    out: Dict[Key, Fraction] = {}
    for coef, i, j in pairs:
        key, sign = _sort_sign((i, j))
        out[key] = out.get(key, Fraction(0)) + Fraction(coef) * sign
    return {k: v for k, v in out.items() if v != 0}


P0, P1, P2, P3, R1, R2, R3, DT, L1, L2, L3 = range(11)

# d of each generator as {(i, j): coefficient} meaning sum coef * X_i ^ X_j.
# P_a and R_i follow the coset structure equations; dL_i is the SU(2)_L
# Maurer-Cartan equation with the P-curvature term, derived from dL_AB = L_AC ^ L_CB.
STRUCTURE: Dict[int, Dict[Key, Fraction]] = {
    P0: _two((1, R1, P1), (1, L1, P1), (1, R2, P2), (1, L2, P2), (1, R3, P3), (1, L3, P3)),
    P1: _two((-1, R1, P0), (-1, L1, P0), (-1, R2, P3), (1, L2, P3), (1, R3, P2), (-1, L3, P2)),
    P2: _two((1, R1, P3), (-1, L1, P3), (-1, R2, P0), (-1, L2, P0), (-1, R3, P1), (1, L3, P1)),
    P3: _two((-1, R1, P2), (1, L1, P2), (1, R2, P1), (-1, L2, P1), (-1, R3, P0), (-1, L3, P0)),
    R1: _two((-2, R2, R3), (-H, P0, P1), (-H, P2, P3)),
    R2: _two((-2, R3, R1), (-H, P0, P2), (-H, P3, P1)),
    R3: _two((-2, R1, R2), (-H, P0, P3), (-H, P1, P2)),
    DT: {},
    L1: _two((2, L2, L3), (-H, P0, P1), (H, P2, P3)),
    L2: _two((2, L3, L1), (-H, P0, P2), (H, P3, P1)),
    L3: _two((2, L1, L2), (-H, P0, P3), (H, P1, P2)),
}


def so5_structure() -> Dict[int, Dict[Key, Fraction]]:
    """Structure equations recomputed from dL_AB = L_AC ^ L_CB.

    Independent route used to check :data:`STRUCTURE`.  The so(5) generators
    are re-expressed in the (P, R, L) basis through
    ``L_0i = R_i + L_i``, ``L_jk = eps_ijk (R_i - L_i)``, ``L_a4 = P_a``.
    """
    def lab(A: int, B: int) -> Dict[int, Fraction]:
        if A == B:
            return {}
        if A > B:
            return {k: -v for k, v in lab(B, A).items()}
        if B == 4:
            return {A: Fraction(1)}
        if A == 0:
            return {R1 + B - 1: Fraction(1), L1 + B - 1: Fraction(1)}
        i = 6 - A - B  # the remaining spatial index among 1, 2, 3
        sign = 1 if (A, B, i) in ((1, 2, 3), (2, 3, 1), (3, 1, 2)) else -1
        return {R1 + i - 1: Fraction(sign), L1 + i - 1: Fraction(-sign)}

    def d_lab(A: int, B: int) -> Dict[Key, Fraction]:
        out: Dict[Key, Fraction] = {}
        for C in range(5):
            for i, ci in lab(A, C).items():
                for j, cj in lab(C, B).items():
                    key, sign = _sort_sign((i, j))
                    if key is None:
                        continue
                    out[key] = out.get(key, Fraction(0)) + ci * cj * sign
        return out

    def combo(*parts) -> Dict[Key, Fraction]:
        out: Dict[Key, Fraction] = {}
        for coef, table in parts:
            for k, v in table.items():
                out[k] = out.get(k, Fraction(0)) + coef * v
        return {k: v for k, v in out.items() if v != 0}

    table: Dict[int, Dict[Key, Fraction]] = {DT: {}}
    for a in range(4):
        table[a] = combo((1, d_lab(a, 4)))
    cyc = {1: (2, 3), 2: (3, 1), 3: (1, 2)}
    for i in (1, 2, 3):
        j, k = cyc[i]
        table[R1 + i - 1] = combo((H, d_lab(0, i)), (H, d_lab(j, k)))
        table[L1 + i - 1] = combo((H, d_lab(0, i)), (-H, d_lab(j, k)))
    return table


def _generator_derivative(code: int, coef: RadialJet) -> InvariantForm:
    terms = {k: coef * v for k, v in STRUCTURE[code].items()}
    return InvariantForm(2, terms)


def exterior_derivative(alpha: InvariantForm) -> InvariantForm:
    """Anti-derivation of degree +1 built from :data:`STRUCTURE`.

    Coefficients lose one jet order (their t-derivative is consumed).
    """
    out: Dict[Key, RadialJet] = {}

    def add(key: Key, term: RadialJet) -> None:
        out[key] = out[key] + term if key in out else term

    for key, coef in alpha.terms.items():
        if coef.order > 1:
            new_key, sign = _merge_sign((DT,), key)
            if new_key is not None:
                d1 = coef.derivative()
                add(new_key, d1 if sign > 0 else -d1)
        for pos, code in enumerate(key):
            table = STRUCTURE[code]
            if not table:
                continue
            before, after = key[:pos], key[pos + 1:]
            sgn = -1 if pos % 2 else 1
            for (i, j), c in table.items():
                k1, s1 = _merge_sign(before, (i, j))
                if k1 is None:
                    continue
                k2, s2 = _merge_sign(k1, after)
                if k2 is None:
                    continue
                term = coef * (c * sgn * s1 * s2)
                add(k2, term)
    return InvariantForm(alpha.grade + 1, out)


d = exterior_derivative


def basis_forms(grade: int, codes: Iterable[int] = range(COFRAME_DIM)):
    return [tuple(c) for c in combinations(sorted(codes), grade)]


# ---------------------------------------------------------------------------
# orthonormal frame and Hodge star

# vol = ORIENTATION * e^0 ^ e^1 ^ e^2 ^ e^3 ^ e^1^ ^ e^2^ ^ e^3^ ^ e^8; the sign is
# the one that makes the spinor-bilinear Cayley form self-dual.
ORIENTATION = -1


def to_frame(alpha: InvariantForm, triad) -> Dict[Key, RadialJet]:
    """Components of ``alpha`` in the orthonormal frame e^A."""
    if alpha.has_internal():
        raise ValueError("form has L_i components; not expressible in the frame")
    triad.check_regular()
    s = triad.scalings()
    out: Dict[Key, RadialJet] = {}
    for key, coef in alpha.terms.items():
        scale = None
        for i in key:
            scale = s[i] if scale is None else scale * s[i]
        out[key] = coef if scale is None else coef / scale
    return out


def from_frame(grade: int, components: Mapping[Key, object], triad, order: int | None = None) -> InvariantForm:
    """Build a form from frame components (numbers or jets)."""
    s = triad.scalings()
    order = triad.order if order is None else order
    terms: Dict[Key, RadialJet] = {}
    for indices, coef in components.items():
        key, sign = _sort_sign(indices)
        if key is None:
            continue
        term = as_jet(coef, order) * sign
        for i in key:
            term = term * s[i]
        terms[key] = terms[key] + term if key in terms else term
    return InvariantForm(grade, terms)


def frame_star(components: Mapping[Key, RadialJet], grade: int) -> Dict[Key, RadialJet]:
    """Flat Hodge star on frame components (Euclidean signature)."""
    out: Dict[Key, RadialJet] = {}
    full = tuple(range(COFRAME_DIM))
    for key, coef in components.items():
        comp = tuple(i for i in full if i not in key)
        _, sign = _merge_sign(key, comp)
        term = coef * (sign * ORIENTATION)
        out[comp] = out[comp] + term if comp in out else term
    return out


def hodge_star(alpha: InvariantForm, triad) -> InvariantForm:
    """Hodge dual with respect to the cohomogeneity-one metric of ``triad``."""
    if alpha.grade > COFRAME_DIM:
        return InvariantForm(0)
    comps = to_frame(alpha, triad)
    starred = frame_star(comps, alpha.grade)
    order = min((v.order for v in starred.values()), default=triad.order)
    return from_frame(COFRAME_DIM - alpha.grade, starred, triad, order=order)


def frame_norm_squared(alpha: InvariantForm, triad) -> float:
    """Sum of squared frame components (the form norm without the 1/p! factor)."""
    return sum(float(v.value) ** 2 for v in to_frame(alpha, triad).values())
