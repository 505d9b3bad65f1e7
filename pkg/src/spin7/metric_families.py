"""Explicit complete metrics and their short- and long-distance structure.

Each family is written in terms of the offset ``x = r - r_bolt`` so that all
factors vanishing at the bolt are exact products; this keeps evaluation
accurate arbitrarily close to the bolt without switching to a series.

Families (scale parameter in brackets):

* ``A8`` (l):  g_rr = (r+l)^2/((r+3l)(r-l)), R12: (r+3l)(r-l),
  R3: 4l^2 (r+3l)(r-l)/(r+l)^2, S4: (r^2 - l^2)/2;  b < 0.
* ``B8`` (l):  the same with l -> -l, r >= 3l;  b > 0.
* ``BryantSalamon`` (r0):  g_rr = 1/D, R12 = R3 = (9/25) r^2 D, S4 = (9/20) r^2,
  D = 1 - (r0/r)^(10/3);  b = a.
* ``G2xS1`` (l):  the G2 metric on the R^3 bundle over S^4 times a circle of
  fixed radius: g_rr = 1/E, R12 = r^2 E, S4 = r^2/2, E = 1 - l^4/r^4.

Coefficients multiply ``dr^2``, ``R1^2 + R2^2``, ``R3^2`` and ``P_a^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
from scipy.integrate import quad

from .jets import RadialJet, as_jet, integrate_autonomous
from .triad import TriadJet

FAMILIES = ("BryantSalamon", "G2xS1", "A8", "B8")


class FamilyDomainError(ValueError):
    pass


@dataclass(frozen=True)
class MetricFamily:
    """A closed-form family at a given scale.

    ``circle`` is the (signed) constant b used for the G2 x S^1 product; it
    is ignored by the other families.
    """

    family: str
    scale: float = 1.0
    circle: float = 1e-9

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if not self.scale > 0:
            raise ValueError("scale must be positive")

    @property
    def r_bolt(self) -> float:
        return 3.0 * self.scale if self.family == "B8" else self.scale

    # --- coefficient functions of x (numbers or jets) -------------------

    def _bs_D(self, x):
        r0 = self.scale
        if isinstance(x, RadialJet):
            jet = 1 - ((x + r0) / r0) ** (-10.0 / 3.0)
            entries = list(jet.c)
            entries[0] = self._bs_D(float(x.value))
            return RadialJet(entries)
        return -math.expm1(-(10.0 / 3.0) * math.log1p(x / self.scale))

    def _g2_E(self, x):
        l = self.scale
        r = x + l
        return x * (x + 2 * l) * (r * r + l * l) / (r * r * r * r)

    def coefficients(self, x) -> Dict[str, object]:
        """(g_rr, coef_R12, coef_R3, coef_S4) as a dict; g_rr omitted at x = 0."""
        l = self.scale
        out: Dict[str, object] = {}
        if self.family in ("A8", "B8"):
            P = x * (x + 4 * l)
            q = x + 2 * l
            out["coef_R12"] = P
            out["coef_R3"] = 4 * l * l * P / (q * q)
            out["coef_S4"] = (x * q if self.family == "A8" else q * (x + 4 * l)) * 0.5
            if not _is_zero(x):
                out["g_rr"] = q * q / P
        elif self.family == "BryantSalamon":
            r = x + l
            D = self._bs_D(x)
            out["coef_R12"] = r * r * D * 0.36
            out["coef_R3"] = out["coef_R12"]
            out["coef_S4"] = r * r * 0.45
            if not _is_zero(x):
                out["g_rr"] = 1 / D
        else:
            r = x + l
            E = self._g2_E(x)
            out["coef_R12"] = r * r * E
            out["coef_R3"] = 4 * self.circle**2 + 0 * x
            out["coef_S4"] = r * r * 0.5
            if not _is_zero(x):
                out["g_rr"] = 1 / E
        return out

    def triad_of_x(self, x):
        """Signed (a, b, c) as functions of x (numbers or jets)."""
        l = self.scale
        if self.family in ("A8", "B8"):
            P = x * (x + 4 * l)
            q = x + 2 * l
            a = _sqrt(P) * 0.5
            b = _sqrt(P) * l / q
            b = -b if self.family == "A8" else b
            S4 = x * q if self.family == "A8" else q * (x + 4 * l)
            c = _sqrt(S4 * 0.5)
            return a, b, c
        r = x + l
        if self.family == "BryantSalamon":
            a = r * _sqrt(self._bs_D(x)) * 0.3
            return a, a, r * math.sqrt(0.45)
        a = r * _sqrt(self._g2_E(x)) * 0.5
        return a, self.circle + 0 * x, r * math.sqrt(0.5)

    def rdot(self, x):
        """dr/dt = 1/sqrt(g_rr)."""
        l = self.scale
        if self.family in ("A8", "B8"):
            return _sqrt(x * (x + 4 * l)) / (x + 2 * l)
        if self.family == "BryantSalamon":
            return _sqrt(self._bs_D(x))
        return _sqrt(self._g2_E(x))

    def offset(self, r: float) -> float:
        x = r - self.r_bolt
        if x < 0:
            raise FamilyDomainError(f"r = {r} is below the bolt at r = {self.r_bolt}")
        return x

    def t_of_x(self, x: float) -> float:
        """Proper distance from the bolt."""
        if x < 0:
            raise FamilyDomainError("negative offset")
        if self.family in ("A8", "B8"):
            return math.sqrt(x * (x + 4 * self.scale))
        # substitute x = w^2 to remove the 1/sqrt(x) endpoint singularity
        def integrand(w):
            if w == 0:
                return 2.0 / math.sqrt(self._slope_at_bolt())
            return 2.0 * w / self.rdot(w * w)

        val, _ = quad(integrand, 0.0, math.sqrt(x), epsabs=0.0, epsrel=1e-13, limit=200)
        return val

    def _slope_at_bolt(self) -> float:
        """d(1/g_rr)/dx at x = 0."""
        if self.family == "BryantSalamon":
            return 10.0 / (3.0 * self.scale)
        return 4.0 / self.scale


def _is_zero(x) -> bool:
    return float(x.value if isinstance(x, RadialJet) else x) == 0.0


def _sqrt(x):
    return x.sqrt() if isinstance(x, RadialJet) else math.sqrt(x)


@dataclass(frozen=True)
class MetricSample:
    r: float
    g_rr: float
    coef_R12: float
    coef_R3: float
    coef_S4: float
    triad: Optional[TriadJet]

    def as_dict(self) -> Dict[str, float]:
        return {k: getattr(self, k) for k in ("r", "g_rr", "coef_R12", "coef_R3", "coef_S4")}


def radial_jets(fam: MetricFamily, x: float, order: int = 3):
    """Jet of the offset x(t) and the triad jet at r = r_bolt + x."""
    if x <= 0:
        raise FamilyDomainError("the frame degenerates at the bolt")
    (xj,) = integrate_autonomous([x], lambda j: [fam.rdot(j[0])], order)
    a, b, c = fam.triad_of_x(xj)
    return xj, TriadJet(as_jet(a, order), as_jet(b, order), as_jet(c, order))


def triad_at_offset(fam: MetricFamily, x: float, order: int = 3) -> TriadJet:
    """Triad with t-derivatives, via the jet of r(t) through r = r_bolt + x."""
    return radial_jets(fam, x, order)[1]


def sample(fam: MetricFamily, r: float, order: int = 3, x: Optional[float] = None) -> MetricSample:
    """Closed-form coefficients at r (or at offset ``x`` from the bolt, exactly)."""
    x = fam.offset(r) if x is None else x
    if x < 0:
        raise FamilyDomainError("negative offset")
    r = fam.r_bolt + x if r is None else r
    co = fam.coefficients(x)
    triad = triad_at_offset(fam, x, order) if x > 0 else None
    return MetricSample(
        r=r,
        g_rr=float(co.get("g_rr", math.inf)),
        coef_R12=float(co["coef_R12"]),
        coef_R3=float(co["coef_R3"]),
        coef_S4=float(co["coef_S4"]),
        triad=triad,
    )


# ---------------------------------------------------------------------------
# bolts and asymptotics

@dataclass
class CollapseFit:
    name: str
    exponent: float
    prefactor: float


@dataclass
class BoltReport:
    family: str
    collapsing: List[CollapseFit]
    surviving: Dict[str, float]

    def max_deviation(self) -> float:
        return max(max(abs(f.exponent - 1), abs(f.prefactor - 1)) for f in self.collapsing)

    def as_dict(self):
        return {
            "family": self.family,
            "collapsing": [vars(f) for f in self.collapsing],
            "surviving": self.surviving,
        }


def _fit(rho: np.ndarray, radius: np.ndarray):
    slope, intercept = np.polyfit(np.log(rho), np.log(radius), 1)
    return float(slope), float(math.exp(intercept))


def _collapsing_radii(fam: MetricFamily) -> Dict[str, Callable[[float], float]]:
    """Radii normalised so that a smooth bolt has radius = proper distance.

    The unit S^3 (or S^7, with the S^4 part weighted by 1/4) is the reference.
    """
    radii = {
        "R12": lambda x: math.sqrt(fam.coefficients(x)["coef_R12"]),
        "R3": lambda x: math.sqrt(fam.coefficients(x)["coef_R3"]),
    }
    if fam.family == "A8":
        radii["S4"] = lambda x: 2.0 * math.sqrt(fam.coefficients(x)["coef_S4"])
    if fam.family == "G2xS1":
        # R1^2 + R2^2 is a quarter of the round unit S^2
        del radii["R3"]
        radii["R12"] = lambda x: 0.5 * math.sqrt(fam.coefficients(x)["coef_R12"])
    return radii


def bolt_expansion(fam: MetricFamily, offsets: Sequence[float] | None = None) -> BoltReport:
    """Fitted power laws radius ~ prefactor * rho^exponent near the bolt.

    A smooth bolt has every collapsing radius with exponent 1 and prefactor 1
    (no conical deficit).
    """
    offsets = np.geomspace(1e-9, 1e-7, 9) * fam.scale if offsets is None else np.asarray(offsets)
    rho = np.array([fam.t_of_x(x) for x in offsets])
    fits = []
    for name, radius in _collapsing_radii(fam).items():
        vals = np.array([radius(x) for x in offsets])
        e, p = _fit(rho, vals)
        fits.append(CollapseFit(name, e, p))
    co0 = fam.coefficients(0.0)
    surviving = {k: float(v) for k, v in co0.items() if k != "g_rr" and float(v) != 0.0}
    return BoltReport(fam.family, fits, surviving)


def interpolation_report(fam: MetricFamily, r_far: Sequence[float] = (1e4, 1e5, 1e6)) -> Dict[str, object]:
    """Short-distance summary plus large-r growth exponents and limits."""
    xs = np.asarray(r_far, dtype=float) - fam.r_bolt
    co = [fam.coefficients(x) for x in xs]
    r = np.asarray(r_far, dtype=float)

    def exponent(key, root=True):
        vals = np.array([float(c[key]) for c in co])
        vals = np.sqrt(vals) if root else vals
        return float(np.polyfit(np.log(r), np.log(vals), 1)[0])

    last = co[-1]
    bolt = bolt_expansion(fam)
    short = {
        "A8": "R^8 (S^7 shrinks to a point)",
        "B8": "R^4 x S^4 (S^3 collapses over S^4)",
        "BryantSalamon": "R^4 x S^4 (S^3 collapses over S^4)",
        "G2xS1": "R^3 x S^4 x S^1 (S^2 collapses over S^4)",
    }[fam.family]
    return {
        "family": fam.family,
        "scale": fam.scale,
        "short_distance": short,
        "bolt": bolt.as_dict(),
        "growth_exponent_R12": exponent("coef_R12"),
        "growth_exponent_S4": exponent("coef_S4"),
        "growth_exponent_R3": exponent("coef_R3", root=False),
        "circle_coefficient_far": float(last["coef_R3"]),
        "ratio_S4_over_R12_far": float(last["coef_S4"]) / float(last["coef_R12"]),
        "asymptotics": "ALC" if fam.family in ("A8", "B8") else ("AC" if fam.family == "BryantSalamon" else "product"),
    }
