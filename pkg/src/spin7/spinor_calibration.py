"""Real Clifford algebra in eight dimensions, the parallel spinor and the Cayley form.

The eight gamma matrices are symmetric 16x16 integer matrices built as
four-fold tensor products of the real 2x2 seeds sigma_1, sigma_3 and
eps = [[0, 1], [-1, 0]].  Frame indices follow the coframe order
(0, 1, 2, 3, 1^, 2^, 3^, 8) -> 0..7.

The spin covariant derivative along frame direction C is
``D_C = e_C + (1/4) omega_{AB|C} Gamma_A Gamma_B``; for a spinor with constant
components the bracketed operator must annihilate it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Sequence, Tuple

import numpy as np
import sympy

from .curvature import connection
from .invariant_forms import COFRAME_DIM, InvariantForm, exterior_derivative, from_frame, frame_star
from .jets import RadialJet
from .triad import TriadJet

N = COFRAME_DIM
DIM = 16

_I = np.eye(2, dtype=np.int64)
_X = np.array([[0, 1], [1, 0]], dtype=np.int64)
_Z = np.array([[1, 0], [0, -1]], dtype=np.int64)
_E = np.array([[0, 1], [-1, 0]], dtype=np.int64)
_SEEDS = {"1": _I, "x": _X, "z": _Z, "e": _E}

# frame-label helpers: 8 -> 7, i^ -> 3 + i
T8 = 7
HAT = {1: 4, 2: 5, 3: 6}


class ConventionError(RuntimeError):
    """The projector kernel is not one-dimensional: index map or signs are off."""


@dataclass(frozen=True)
class CliffordBasis:
    gammas: Tuple[np.ndarray, ...]
    words: Tuple[str, ...]

    def __getitem__(self, A: int) -> np.ndarray:
        return self.gammas[A]

    def pair(self, A: int, B: int) -> np.ndarray:
        """Gamma_{AB} = Gamma_A Gamma_B for A != B."""
        return self.gammas[A] @ self.gammas[B]

    @property
    def chirality(self) -> np.ndarray:
        out = np.eye(DIM, dtype=np.int64)
        for g in self.gammas:
            out = out @ g
        return out

    def anticommutator_defect(self) -> int:
        worst = 0
        for A in range(N):
            for B in range(N):
                anti = self.gammas[A] @ self.gammas[B] + self.gammas[B] @ self.gammas[A]
                target = 2 * np.eye(DIM, dtype=np.int64) if A == B else 0
                worst = max(worst, int(np.max(np.abs(anti - target))))
        return worst


def _word_matrix(word: str) -> np.ndarray:
    out = np.array([[1]], dtype=np.int64)
    for ch in word:
        out = np.kron(out, _SEEDS[ch])
    return out


def _anticommute(u: str, v: str) -> bool:
    clashes = sum(1 for p, q in zip(u, v) if p != "1" and q != "1" and p != q)
    return clashes % 2 == 1


@lru_cache(maxsize=1)
def build_clifford() -> CliffordBasis:
    """Eight symmetric, mutually anticommuting integer matrices squaring to 1.

    Deterministic depth-first search over words in {1, x, z, e}^4 with an even
    number of e's (symmetric, square +1).
    """
    candidates = ["".join(w) for w in itertools.product("1xze", repeat=4)]
    candidates = [w for w in candidates if w.count("e") % 2 == 0 and w != "1111"]

    def extend(chosen: List[str], start: int):
        if len(chosen) == N:
            return chosen
        for i in range(start, len(candidates)):
            w = candidates[i]
            if all(_anticommute(w, u) for u in chosen):
                found = extend(chosen + [w], i + 1)
                if found:
                    return found
        return None

    words = extend([], 0)
    if words is None:
        raise ConventionError("no anticommuting set found")
    return CliffordBasis(tuple(_word_matrix(w) for w in words), tuple(words))


# ---------------------------------------------------------------------------
# projectors and the parallel spinor

def projectors(cl: CliffordBasis | None = None) -> List[np.ndarray]:
    """The three conditions defining the parallel spinor (integer matrices)."""
    cl = cl or build_clifford()
    g = cl.pair
    return [
        2 * g(0, T8) - g(1, HAT[1]) - g(2, HAT[2]),
        g(0, T8) - g(3, HAT[3]),
        2 * g(1, T8) + g(0, HAT[1]) + g(3, HAT[2]),
    ]


def projector_kernel(cl: CliffordBasis | None = None) -> List[sympy.Matrix]:
    stacked = sympy.Matrix(np.vstack(projectors(cl)).tolist())
    return stacked.nullspace()


@lru_cache(maxsize=1)
def parallel_spinor() -> np.ndarray:
    """Unit spinor spanning the joint kernel; first nonzero entry positive."""
    kernel = projector_kernel()
    if len(kernel) != 1:
        raise ConventionError(f"projector kernel has dimension {len(kernel)}, expected 1")
    vec = np.array([float(x) for x in kernel[0]])
    first = vec[np.flatnonzero(np.abs(vec) > 1e-14)[0]]
    vec = vec * np.sign(first) / np.linalg.norm(vec)
    return vec


def chirality_sign(eta: np.ndarray | None = None) -> int:
    eta = parallel_spinor() if eta is None else eta
    img = build_clifford().chirality @ eta
    if np.allclose(img, eta, atol=1e-14):
        return 1
    if np.allclose(img, -eta, atol=1e-14):
        return -1
    raise ConventionError("parallel spinor is not chiral")


# ---------------------------------------------------------------------------
# covariant derivative

def covariant_derivative_operators(triad: TriadJet) -> List[np.ndarray]:
    """Spin-connection operator (1/4) omega_{AB|C} Gamma_{AB} for each direction C."""
    cl = build_clifford()
    om = connection(triad).frame
    ops = []
    for C in range(N):
        op = np.zeros((DIM, DIM))
        for A in range(N):
            for B in range(A + 1, N):
                if om[A, B, C] != 0.0:
                    op += 0.5 * om[A, B, C] * cl.pair(A, B)
        ops.append(op)
    return ops


def internal_operators(triad: TriadJet) -> Dict[int, np.ndarray]:
    """Spinor action of the constant SU(2) part of the connection, per L_i."""
    cl = build_clifford()
    table = connection(triad).internal
    out: Dict[int, np.ndarray] = {}
    for (A, B), entry in table.items():
        if A >= B:
            continue
        for Lc, val in entry.items():
            out.setdefault(Lc, np.zeros((DIM, DIM)))
            out[Lc] += 0.5 * val * cl.pair(A, B)
    return out


def bracket_structures(cl: CliffordBasis | None = None) -> Dict[str, np.ndarray]:
    """The Gamma combinations that organise the connection once the flow holds."""
    cl = cl or build_clifford()
    g = cl.pair
    h1, h2, h3 = HAT[1], HAT[2], HAT[3]
    return {
        "e0:a": 2 * g(0, T8) - g(1, h1) - g(2, h2),
        "e0:b": g(0, T8) - g(3, h3),
        "e1:a": 2 * g(1, T8) + g(0, h1) + g(3, h2),
        "e1:b": g(1, T8) - g(2, h3),
        "e2:a": 2 * g(2, T8) + g(0, h2) - g(3, h1),
        "e2:b": g(2, T8) + g(1, h3),
        "e3:a": 2 * g(3, T8) - g(1, h2) + g(2, h1),
        "e3:b": g(3, T8) + g(0, h3),
        # along e^i^ the base rotations carry unhatted indices
        "e1^:a": 2 * g(h1, T8) - g(0, 1) - g(2, 3),
        "e1^:b": g(h1, T8) + g(h2, h3),
        "e2^:a": 2 * g(h2, T8) - g(0, 2) - g(3, 1),
        "e2^:b": g(h2, T8) + g(h3, h1),
        "e3^:a": g(h3, T8) + g(h1, h2),
        "e3^:b": 2 * g(h3, T8) - g(0, 3) - g(1, 2),
        "e3^:c": 2 * g(h1, h2) + g(0, 3) + g(1, 2),
    }


def annihilation_residuals(triad: TriadJet, eta: np.ndarray | None = None) -> np.ndarray:
    """|D_C eta|_inf for each frame direction."""
    eta = parallel_spinor() if eta is None else eta
    return np.array([np.max(np.abs(op @ eta)) for op in covariant_derivative_operators(triad)])


# ---------------------------------------------------------------------------
# Cayley form

def _bilinear(eta: np.ndarray, cl: CliffordBasis) -> Dict[Tuple[int, ...], float]:
    out = {}
    for key in itertools.combinations(range(N), 4):
        M = cl[key[0]] @ cl[key[1]] @ cl[key[2]] @ cl[key[3]]
        val = float(eta @ M @ eta)
        if abs(val) > 1e-12:
            out[key] = val
    return out


@lru_cache(maxsize=1)
def cayley_components() -> Dict[Tuple[int, ...], float]:
    """Frame components of the Cayley form, sorted keys, from the spinor bilinear.

    Normalised so that the e^8 ^ e^1^ ^ e^2^ ^ e^3^ coefficient is -1, i.e. the
    sorted component (1^, 2^, 3^, 8) is +1.
    """
    comps = _bilinear(parallel_spinor(), build_clifford())
    ref = comps[(HAT[1], HAT[2], HAT[3], T8)]
    return {k: round(v / ref, 12) for k, v in comps.items()}


def cayley_form(triad: TriadJet, order: int | None = None) -> InvariantForm:
    """The Cayley form in the generator basis, dressed with the triad."""
    return from_frame(4, cayley_components(), triad, order=order)


def self_duality_defect(comps: Dict[Tuple[int, ...], float] | None = None) -> float:
    comps = cayley_components() if comps is None else comps
    starred = frame_star({k: RadialJet([v]) for k, v in comps.items()}, 4)
    keys = set(comps) | set(starred)
    return max(abs(comps.get(k, 0.0) - float(starred[k].value if k in starred else 0.0)) for k in keys)


def cayley_full_tensor(comps: Dict[Tuple[int, ...], float] | None = None) -> np.ndarray:
    comps = cayley_components() if comps is None else comps
    T = np.zeros((N,) * 4)
    for key, val in comps.items():
        for perm in itertools.permutations(range(4)):
            sign = _perm_sign(perm)
            T[tuple(key[p] for p in perm)] = sign * val
    return T


def _perm_sign(perm: Sequence[int]) -> int:
    sign, p = 1, list(perm)
    for i in range(len(p)):
        while p[i] != i:
            j = p[i]
            p[i], p[j] = p[j], p[i]
            sign = -sign
    return sign


def j_structure_terms() -> Dict[Tuple[int, ...], float]:
    """Cayley components with two indices on S^4 and two in {1^, 2^, 3^, 8}."""
    comps = dict(cayley_components())
    comps.pop((0, 1, 2, 3), None)
    comps.pop((HAT[1], HAT[2], HAT[3], T8), None)
    return comps


def j_coupling_matrix() -> np.ndarray:
    """Coefficients X_i^(pair) with Phi - pure terms = sum_i X_i ^ Jhat^i.

    Jhat^i = e^0 ^ e^i + (1/2) eps_ijk e^j ^ e^k in the frame; X_i is expanded
    on the six 2-forms of the fibre-plus-radial block {1^, 2^, 3^, 8}.  A
    least-squares fit whose residual is reported alongside.
    """
    block = [HAT[1], HAT[2], HAT[3], T8]
    pairs = list(itertools.combinations(block, 2))
    jhat = []
    for i in (1, 2, 3):
        j, k = [x for x in (1, 2, 3) if x != i]
        jhat.append({(0, i): 1.0, (j, k): 1.0 if i != 2 else -1.0})
    cols = []
    for i in range(3):
        for p in pairs:
            col = {}
            for q, v in jhat[i].items():
                key = tuple(sorted(q + p))
                sign = _perm_sign([sorted(q + p).index(x) for x in q + p])
                col[key] = col.get(key, 0.0) + sign * v
            cols.append(col)
    keys = sorted(itertools.combinations(range(N), 4))
    A = np.array([[col.get(k, 0.0) for col in cols] for k in keys])
    rest = j_structure_terms()
    y = np.array([rest.get(k, 0.0) for k in keys])
    x, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = float(np.max(np.abs(A @ x - y)))
    return x.reshape(3, len(pairs)), resid


def closure_residual(triad: TriadJet) -> float:
    """max |dPhi| in the generator basis; L_i leakage counts as a defect."""
    phi = cayley_form(triad, order=2)
    return exterior_derivative(phi).max_abs()


def flow_from_closure(a: float, b: float, c: float) -> Tuple[np.ndarray, int]:
    """Solve dPhi = 0 for (a', b', c') at the point; returns the solution and rank."""
    def dphi(rates):
        triad = TriadJet(*(RadialJet([v, r]) for v, r in zip((a, b, c), rates)))
        form = exterior_derivative(cayley_form(triad, order=2))
        return form

    base = dphi((0.0, 0.0, 0.0))
    cols = [dphi(tuple(1.0 if i == j else 0.0 for i in range(3))) for j in range(3)]
    keys = sorted(set(base.terms) | set().union(*(col.terms for col in cols)))
    b0 = np.array([base.value(k) for k in keys])
    M = np.array([[col.value(k) - base.value(k) for col in cols] for k in keys])
    rank = int(np.linalg.matrix_rank(M))
    sol, *_ = np.linalg.lstsq(M, -b0, rcond=None)
    resid = float(np.max(np.abs(M @ sol + b0))) if len(keys) else 0.0
    if resid > 1e-9 * max(1.0, float(np.max(np.abs(b0)))):
        raise ConventionError(f"closure equations inconsistent (residual {resid})")
    return sol, rank


# ---------------------------------------------------------------------------
# calibration

def _orthonormal(plane: np.ndarray) -> np.ndarray:
    q, r = np.linalg.qr(np.asarray(plane, dtype=float).T)
    if np.min(np.abs(np.diag(r))) < 1e-12:
        raise ValueError("degenerate plane")
    return q.T


def calibration_check(plane: np.ndarray, tensor: np.ndarray | None = None) -> float:
    """|Phi(X1, X2, X3, X4)| for the orthonormalised span of four frame vectors."""
    T = cayley_full_tensor() if tensor is None else tensor
    X = _orthonormal(plane)
    return float(abs(np.einsum("abcd,a,b,c,d->", T, X[0], X[1], X[2], X[3])))


def calibration_sweep(n: int = 100_000, seed: int = 0, chunk: int = 5000) -> np.ndarray:
    """Values of |Phi| on n random orthonormal 4-planes (vectorised)."""
    rng = np.random.default_rng(seed)
    T = cayley_full_tensor()
    out = np.empty(n)
    for start in range(0, n, chunk):
        m = min(chunk, n - start)
        G = rng.standard_normal((m, N, 4))
        Q, _ = np.linalg.qr(G)
        X = np.transpose(Q, (0, 2, 1))
        t = np.einsum("abcd,nd->nabc", T, X[:, 3])
        t = np.einsum("nabc,nc->nab", t, X[:, 2])
        t = np.einsum("nab,nb->na", t, X[:, 1])
        out[start:start + m] = np.abs(np.einsum("na,na->n", t, X[:, 0]))
    return out


# ---------------------------------------------------------------------------
# stabiliser of the spinor

def stabilizer_algebra() -> np.ndarray:
    """Basis (k x 28) of antisymmetric generators w with (1/4) w_AB Gamma_AB eta = 0."""
    cl = build_clifford()
    eta = parallel_spinor()
    pairs = list(itertools.combinations(range(N), 2))
    M = np.array([cl.pair(A, B) @ eta for A, B in pairs]).T
    _, s, vt = np.linalg.svd(M)
    rank = int(np.sum(s > 1e-10))
    return vt[rank:]


def rotation_defect(generator: np.ndarray) -> float:
    """Change of the Cayley tensor under the so(8) rotation with these pair coefficients."""
    pairs = list(itertools.combinations(range(N), 2))
    w = np.zeros((N, N))
    for coef, (A, B) in zip(generator, pairs):
        w[A, B] = coef
        w[B, A] = -coef
    T = cayley_full_tensor()
    delta = (
        np.einsum("ae,ebcd->abcd", w, T)
        + np.einsum("be,aecd->abcd", w, T)
        + np.einsum("ce,abed->abcd", w, T)
        + np.einsum("de,abce->abcd", w, T)
    )
    return float(np.max(np.abs(delta)))
