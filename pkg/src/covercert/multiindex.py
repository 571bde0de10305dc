"""Multi-index enumeration and combinatorics for partial derivatives."""

from __future__ import annotations

import math
from itertools import product

__all__ = [
    "indices_up_to_order",
    "indices_below",
    "multi_binom",
    "multi_factorial",
]


def indices_up_to_order(dimension: int, max_order: int) -> list[tuple[int, ...]]:
    """All multi-indices alpha with |alpha| <= max_order, lexicographic."""
    out = [alpha for alpha in product(range(max_order + 1), repeat=dimension)
           if sum(alpha) <= max_order]
    return sorted(out)


def indices_below(alpha: tuple[int, ...]) -> list[tuple[int, ...]]:
    """All multi-indices gamma with gamma <= alpha componentwise."""
    return [g for g in product(*(range(a + 1) for a in alpha))]


def multi_binom(alpha: tuple[int, ...], gamma: tuple[int, ...]) -> int:
    out = 1
    for a, g in zip(alpha, gamma):
        out *= math.comb(a, g)
    return out


def multi_factorial(alpha: tuple[int, ...]) -> int:
    out = 1
    for a in alpha:
        out *= math.factorial(a)
    return out
