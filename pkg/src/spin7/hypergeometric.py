"""Gauss hypergeometric function 2F1(a, b; c; x) for real x < 1.

Direct Gauss series for |x| <= 1/2, the Pfaff transformation for x < 0, and
the 1 - x connection formula for 1/2 < x < 1 (c - a - b must not be an
integer there).
"""

from __future__ import annotations

import math


class HypergeometricDomainError(ValueError):
    pass


_MAX_TERMS = 2000
_EPS = 1e-17


def _series(a: float, b: float, c: float, x: float) -> float:
    term = 1.0
    total = 1.0
    for n in range(_MAX_TERMS):
        term *= (a + n) * (b + n) / ((c + n) * (n + 1)) * x
        total += term
        if abs(term) <= _EPS * abs(total):
            return total
    raise ArithmeticError(f"2F1 series did not converge at x={x}")


def _nonpositive_integer(v: float) -> bool:
    return v <= 0 and float(v).is_integer()


def _rgamma(v: float) -> float:
    return 0.0 if _nonpositive_integer(v) else 1.0 / math.gamma(v)


def hyp2f1(a: float, b: float, c: float, x: float) -> float:
    """Real 2F1 on x < 1."""
    if _nonpositive_integer(c):
        raise HypergeometricDomainError("c is a non-positive integer")
    if not x < 1:
        raise HypergeometricDomainError(f"2F1 evaluated only for x < 1, got {x}")
    if x == 0:
        return 1.0
    if x < 0:
        # Pfaff: 2F1(a,b;c;x) = (1-x)^(-a) 2F1(a, c-b; c; x/(x-1)); 1 - x/(x-1) = 1/(1-x)
        w = x / (x - 1.0)
        pref = (1.0 - x) ** (-a)
        if w <= 0.5:
            return pref * _series(a, c - b, c, w)
        return pref * _near_one(a, c - b, c, 1.0 / (1.0 - x))
    if x <= 0.5:
        return _series(a, b, c, x)
    return _near_one(a, b, c, 1.0 - x)


def hyp2f1_complement(a: float, b: float, c: float, y: float) -> float:
    """2F1(a, b; c; 1 - y) for y > 0, without forming 1 - y when y is small."""
    if not y > 0:
        raise HypergeometricDomainError(f"complement argument must be positive, got {y}")
    if y < 0.5:
        return _near_one(a, b, c, y)
    return hyp2f1(a, b, c, 1.0 - y)


def _near_one(a: float, b: float, c: float, y: float) -> float:
    s = c - a - b
    if float(s).is_integer():
        return _series(a, b, c, 1.0 - y)
    g, rg = math.gamma, _rgamma
    first = g(c) * g(s) * rg(c - a) * rg(c - b) * _series(a, b, 1.0 - s, y)
    second = y**s * g(c) * g(-s) * rg(a) * rg(b) * _series(c - a, c - b, 1.0 + s, y)
    return first + second


def hyp2f1_derivative(a: float, b: float, c: float, x: float) -> float:
    """d/dx 2F1(a, b; c; x) = (ab/c) 2F1(a+1, b+1; c+1; x)."""
    return a * b / c * hyp2f1(a + 1, b + 1, c + 1, x)
