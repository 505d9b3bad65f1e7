"""Truncated Taylor jets in the radial coordinate.

A :class:`RadialJet` stores ``(X, dX/dt, d2X/dt2, ...)`` at a single point and
propagates derivatives through arithmetic, so every coefficient built from the
metric functions carries its own t-derivatives.  Entries may be floats or
:class:`fractions.Fraction` (exact mode); exact mode supports the field
operations only.
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Number
from typing import Callable, Sequence


def _binom(n: int, k: int) -> int:
    return math.comb(n, k)


class RadialJet:
    """Value of a function of t together with its first derivatives."""

    __slots__ = ("c",)

    def __init__(self, entries: Sequence):
        if len(entries) == 0:
            raise ValueError("a jet needs at least a value")
        self.c = tuple(entries)

    # -- constructors -----------------------------------------------------
    @classmethod
    def constant(cls, value, order: int) -> "RadialJet":
        zero = Fraction(0) if isinstance(value, Fraction) else 0.0
        return cls((value,) + (zero,) * (order - 1))

    @classmethod
    def variable(cls, value, rate=1.0, order: int = 3) -> "RadialJet":
        """Jet of ``value + rate * (t - t0)``."""
        zero = Fraction(0) if isinstance(value, Fraction) else 0.0
        entries = [value, rate] + [zero] * (order - 2)
        return cls(entries[:order])

    # -- accessors --------------------------------------------------------
    @property
    def value(self):
        return self.c[0]

    @property
    def d1(self):
        return self.c[1] if len(self.c) > 1 else None

    @property
    def d2(self):
        return self.c[2] if len(self.c) > 2 else None

    @property
    def order(self) -> int:
        return len(self.c)

    def derivative(self) -> "RadialJet":
        if len(self.c) < 2:
            raise ValueError("jet too short to differentiate")
        return RadialJet(self.c[1:])

    def truncate(self, order: int) -> "RadialJet":
        return RadialJet(self.c[:order])

    def is_zero(self) -> bool:
        return all(x == 0 for x in self.c)

    def max_abs(self) -> float:
        return max(abs(float(x)) for x in self.c)

    # -- arithmetic -------------------------------------------------------
    def _coerce(self, other) -> "RadialJet":
        if isinstance(other, RadialJet):
            return other
        if isinstance(other, Number):
            return RadialJet.constant(other, len(self.c))
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        n = min(len(self.c), len(other.c))
        return RadialJet([self.c[i] + other.c[i] for i in range(n)])

    __radd__ = __add__

    def __neg__(self):
        return RadialJet([-x for x in self.c])

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Number):
            return RadialJet([x * other for x in self.c])
        if not isinstance(other, RadialJet):
            return NotImplemented
        f, g = self.c, other.c
        n = min(len(f), len(g))
        return RadialJet(
            [sum(_binom(m, k) * f[k] * g[m - k] for k in range(m + 1)) for m in range(n)]
        )

    __rmul__ = __mul__

    def reciprocal(self) -> "RadialJet":
        g = self.c
        if g[0] == 0:
            raise ZeroDivisionError("reciprocal of a jet with zero value")
        h = [1 / g[0]]
        for m in range(1, len(g)):
            s = sum(_binom(m, k) * g[k] * h[m - k] for k in range(1, m + 1))
            h.append(-s / g[0])
        return RadialJet(h)

    def __truediv__(self, other):
        if isinstance(other, Number):
            return RadialJet([x / other for x in self.c])
        if not isinstance(other, RadialJet):
            return NotImplemented
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, p):
        if isinstance(p, int) and p >= 0:
            out = RadialJet.constant(
                Fraction(1) if isinstance(self.c[0], Fraction) else 1.0, len(self.c)
            )
            for _ in range(p):
                out = out * self
            return out
        if isinstance(p, int):
            return (self ** (-p)).reciprocal()
        return self.power(p)

    def power(self, p: float) -> "RadialJet":
        """Real power, from the recursion f h' = p f' h for h = f**p."""
        f = self.c
        if f[0] <= 0:
            raise ValueError("real power of a non-positive jet")
        h = [f[0] ** p]
        for m in range(1, len(f)):
            n = m - 1
            acc = p * sum(_binom(n, k) * f[k + 1] * h[n - k] for k in range(n + 1))
            acc -= sum(_binom(n, k) * f[k] * h[m - k] for k in range(1, n + 1))
            h.append(acc / f[0])
        return RadialJet(h)

    def sqrt(self) -> "RadialJet":
        return self.power(0.5)

    def __repr__(self) -> str:
        return f"RadialJet({list(self.c)!r})"


def as_jet(x, order: int) -> RadialJet:
    return x if isinstance(x, RadialJet) else RadialJet.constant(x, order)


def integrate_autonomous(state: Sequence[float], field: Callable, order: int):
    """Taylor jets of a solution of ``dX/dt = field(X)`` through ``state``.

    ``field`` maps a list of jets to a list of jets (the right-hand side
    evaluated with jet arithmetic).  Each pass gains one order, so the
    returned jets have length ``order``.
    """
    jets = [RadialJet([x]) for x in state]
    for k in range(1, order):
        rates = [as_jet(rate, k) for rate in field(jets)]
        jets = [RadialJet((x,) + rate.c[:k]) for x, rate in zip(state, rates)]
    return jets
