"""Composition calculus for the three index maps of a weight family.

Words are strings of digits read like function composition: ``"23"``
applies map 3 first, then map 2.  Every map satisfies I_j(n) >= n, so
every composed word is monotone; a configurable cap aborts runaway
compositions.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import IndexCapError
from .weights import WeightFamily

__all__ = ["IndexCalculus"]


@dataclass
class IndexCalculus:
    family: WeightFamily
    cap: int = 10 ** 6

    def apply(self, j: int, n: int) -> int:
        out = self.family.index(j, n)
        if out > self.cap:
            raise IndexCapError(f"index I_{j}({n}) = {out} exceeds cap {self.cap}")
        return out

    def word(self, word: str, n: int) -> int:
        out = n
        for digit in reversed(word):
            out = self.apply(int(digit), out)
        return out

    def repeat(self, j: int, times: int, n: int) -> int:
        out = n
        for _ in range(times):
            out = self.apply(j, out)
        return out

    def quad_weight_index(self, n: int, dimension: int) -> int:
        """Index p of the weight appearing in the domination integral."""
        return self.word("11", self.repeat(3, dimension, self.word("11", n)))

    def functional_bound_index(self, p: int, dimension: int, m: int) -> int:
        """Index q of the seminorm dominating the pointwise functional."""
        inner = self.word("11112", p)
        return self.word("1111", self.repeat(3, dimension * (m + 2), inner))
