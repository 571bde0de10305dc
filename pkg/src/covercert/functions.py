"""Smooth test functions with closed-form partial derivatives.

All shipped functions are tensor products of one-dimensional factors whose
derivatives are available exactly: polynomial-times-Gaussian factors via
the recurrence (P e^{-t^2})' = (P' - 2 t P) e^{-t^2}, and compact spline
factors reusing the plateau profiles.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly

from .bumps import BumpProfile, build_profile
from .errors import SmoothnessOrderError

__all__ = ["TestFunction", "gaussian", "coord_gaussian", "spline_bump",
           "shipped_suite"]

_MAX_ORDER = 16


class _GaussFactor:
    """t -> P(t) exp(-t^2) with exact derivatives of every order."""

    def __init__(self, poly_coeffs):
        self._polys = [np.asarray(poly_coeffs, dtype=float)]
        for _ in range(_MAX_ORDER):
            p = self._polys[-1]
            dp = npoly.polyder(p) if len(p) > 1 else np.zeros(1)
            shifted = np.concatenate([[0.0], -2.0 * p])
            size = max(len(dp), len(shifted))
            nxt = np.zeros(size)
            nxt[:len(dp)] += dp
            nxt[:len(shifted)] += shifted
            self._polys.append(nxt)

    def __call__(self, t, order: int = 0):
        if order >= len(self._polys):
            raise SmoothnessOrderError(f"factor derivatives cached up to {_MAX_ORDER}")
        t = np.asarray(t, dtype=float)
        return npoly.polyval(t, self._polys[order]) * np.exp(-t * t)


class _ProfileFactor:
    def __init__(self, profile: BumpProfile):
        self.profile = profile

    def __call__(self, t, order: int = 0):
        return self.profile.eval(t, order=order)


@dataclass(frozen=True)
class TestFunction:
    """Tensor product of one-dimensional factors."""

    name: str
    factors: tuple

    @property
    def dimension(self) -> int:
        return len(self.factors)

    def value(self, x):
        return self.partial(x, (0,) * self.dimension)

    def partial(self, x, alpha):
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 1
        pts = x[None, :] if scalar else x
        out = np.ones(len(pts))
        for i, (factor, a_i) in enumerate(zip(self.factors, alpha)):
            out = out * factor(pts[:, i], order=int(a_i))
        return float(out[0]) if scalar else out

    def scaled(self, scale: float) -> "TestFunction":
        first = _ScaledFactor(self.factors[0], scale)
        return TestFunction(name=f"{scale}*{self.name}",
                            factors=(first,) + self.factors[1:])


class _ScaledFactor:
    def __init__(self, inner, scale: float):
        self.inner = inner
        self.scale = float(scale)

    def __call__(self, t, order: int = 0):
        return self.scale * self.inner(t, order=order)


def gaussian(dimension: int) -> TestFunction:
    """exp(-|x|^2)."""
    return TestFunction(name="gaussian",
                        factors=tuple(_GaussFactor([1.0])
                                      for _ in range(dimension)))


def coord_gaussian(dimension: int) -> TestFunction:
    """x_1 exp(-|x|^2)."""
    first = _GaussFactor([0.0, 1.0])
    rest = tuple(_GaussFactor([1.0]) for _ in range(dimension - 1))
    return TestFunction(name="coord_gaussian", factors=(first,) + rest)


def spline_bump(dimension: int, radius: float = 0.8,
                order: int = 8) -> TestFunction:
    """Compactly supported plateau spline, exact partials up to order - 1."""
    profile = build_profile(radius, order)
    return TestFunction(name="spline_bump",
                        factors=tuple(_ProfileFactor(profile)
                                      for _ in range(dimension)))


def shipped_suite(dimension: int) -> list[TestFunction]:
    return [gaussian(dimension), coord_gaussian(dimension),
            spline_bump(dimension)]
