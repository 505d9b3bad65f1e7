"""Metric functions (a, b, c) at a point, and the orthonormal frame they define.

The frame is ``e^a = c P_a``, ``e^1^ = 2a R_1``, ``e^2^ = 2a R_2``,
``e^3^ = 2b R_3``, ``e^8 = dt``, indexed 0-7 in that order.  ``b`` is signed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence, Tuple

from .jets import RadialJet


class SingularFrameError(ValueError):
    """Raised when a metric function vanishes and the frame degenerates."""


FRAME_LABELS = ("0", "1", "2", "3", "1^", "2^", "3^", "8")


@dataclass(frozen=True)
class TriadJet:
    a: RadialJet
    b: RadialJet
    c: RadialJet

    @classmethod
    def from_values(
        cls,
        abc: Sequence[float],
        first: Sequence[float] | None = None,
        second: Sequence[float] | None = None,
    ) -> "TriadJet":
        cols: List[List[float]] = [[x] for x in abc]
        if first is not None:
            for col, x in zip(cols, first):
                col.append(x)
        if second is not None:
            if first is None:
                raise ValueError("second derivatives need first derivatives")
            for col, x in zip(cols, second):
                col.append(x)
        return cls(*(RadialJet(col) for col in cols))

    @property
    def order(self) -> int:
        return min(self.a.order, self.b.order, self.c.order)

    @property
    def values(self) -> Tuple[float, float, float]:
        return (self.a.value, self.b.value, self.c.value)

    @property
    def first(self) -> Tuple[float, float, float]:
        return (self.a.d1, self.b.d1, self.c.d1)

    def check_regular(self) -> None:
        if any(x == 0 for x in self.values):
            raise SingularFrameError(f"degenerate frame: (a, b, c) = {self.values}")

    def scalings(self) -> List[RadialJet]:
        """Coefficients s_A with e^A = s_A X_A for the generators X_A."""
        a, b, c = self.a, self.b, self.c
        one = RadialJet.constant(a.value ** 0, self.order)
        return [c, c, c, c, a * 2, a * 2, b * 2, one]
