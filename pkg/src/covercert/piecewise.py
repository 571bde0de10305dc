"""Exact one-dimensional piecewise polynomials under box smoothing.

A ``PiecewisePoly`` stores per-interval coefficients in local coordinates
``t = x - left_knot`` (ascending powers, Horner evaluation) and is zero
outside its knot span.  Convolution with a unit-mass box of width ``w``
maps the antiderivative ``F`` to ``(F(x + w/2) - F(x - w/2)) / w``; since
the new knot set contains every shifted knot, each new interval meets a
single polynomial piece of ``F`` on either side and the result is again an
exact piecewise polynomial, one degree higher and ``C^0`` smoother.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly

__all__ = ["PiecewisePoly", "indicator"]

_MERGE_TOL = 1e-13


def _shift_poly(coeffs: np.ndarray, h: float) -> np.ndarray:
    """Coefficients of p(t + h) from ascending coefficients of p(s)."""
    c = np.array(coeffs, dtype=float)
    n = len(c)
    for i in range(n - 1):
        for j in range(n - 2, i - 1, -1):
            c[j] += h * c[j + 1]
    return c


@dataclass(frozen=True)
class PiecewisePoly:
    knots: np.ndarray      # (K + 1,) strictly increasing
    coeffs: np.ndarray     # (K, D + 1) ascending powers in t = x - knots[i]

    def __post_init__(self):
        if len(self.knots) < 2:
            raise ValueError("need at least one interval")
        if not np.all(np.diff(self.knots) > 0):
            raise ValueError("knots must be strictly increasing")
        if self.coeffs.shape[0] != len(self.knots) - 1:
            raise ValueError("one coefficient row per interval required")

    @property
    def degree(self) -> int:
        return self.coeffs.shape[1] - 1

    @property
    def support(self) -> tuple[float, float]:
        return float(self.knots[0]), float(self.knots[-1])

    def __call__(self, x) -> np.ndarray | float:
        scalar = np.ndim(x) == 0
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.zeros_like(x)
        inside = (x >= self.knots[0]) & (x <= self.knots[-1])
        idx = np.searchsorted(self.knots, x, side="right") - 1
        idx = np.clip(idx, 0, len(self.knots) - 2)
        for piece in np.unique(idx[inside]):
            mask = inside & (idx == piece)
            t = x[mask] - self.knots[piece]
            out[mask] = npoly.polyval(t, self.coeffs[piece])
        return float(out[0]) if scalar else out

    def derivative(self) -> "PiecewisePoly":
        if self.degree == 0:
            c = np.zeros((self.coeffs.shape[0], 1))
        else:
            powers = np.arange(1, self.degree + 1)
            c = self.coeffs[:, 1:] * powers[None, :]
        return PiecewisePoly(self.knots, c)

    def antiderivative(self) -> "PiecewisePoly":
        """Cumulative integral, zero at the left end of the span."""
        powers = np.arange(1, self.degree + 2)
        c = np.zeros((self.coeffs.shape[0], self.degree + 2))
        c[:, 1:] = self.coeffs / powers[None, :]
        acc = 0.0
        widths = np.diff(self.knots)
        for i in range(c.shape[0]):
            c[i, 0] = acc
            acc = npoly.polyval(widths[i], c[i])
        return PiecewisePoly(self.knots, c)

    def mass(self) -> float:
        anti = self.antiderivative()
        return float(npoly.polyval(self.knots[-1] - self.knots[-2],
                                   anti.coeffs[-1]))

    def convolve_unit_box(self, width: float) -> "PiecewisePoly":
        if width <= 0:
            raise ValueError("box width must be positive")
        half = width / 2.0
        anti = self.antiderivative()
        total = float(npoly.polyval(self.knots[-1] - self.knots[-2],
                                    anti.coeffs[-1]))

        raw = np.concatenate([self.knots - half, self.knots + half])
        raw = np.unique(raw)
        keep = [raw[0]]
        for v in raw[1:]:
            if v - keep[-1] > _MERGE_TOL * max(1.0, abs(v)):
                keep.append(v)
        new_knots = np.asarray(keep)

        deg = self.degree + 1
        new_coeffs = np.zeros((len(new_knots) - 1, deg + 1))
        for i in range(len(new_knots) - 1):
            a, b = new_knots[i], new_knots[i + 1]
            mid = 0.5 * (a + b)
            upper = self._anti_piece(anti, total, mid + half, a + half)
            lower = self._anti_piece(anti, total, mid - half, a - half)
            c = np.zeros(deg + 1)
            c[:len(upper)] += upper
            c[:len(lower)] -= lower
            new_coeffs[i] = c / width
        return PiecewisePoly(new_knots, new_coeffs)

    def _anti_piece(self, anti: "PiecewisePoly", total: float,
                    probe: float, left_value: float) -> np.ndarray:
        """Coefficients of x -> F(x + shift) on a new interval, in t = x - a.

        ``probe`` picks the piece of F; ``left_value`` is the argument of F
        at t = 0, so the local shift is ``left_value - piece_knot``.
        """
        if probe <= anti.knots[0]:
            return np.zeros(1)
        if probe >= anti.knots[-1]:
            return np.array([total])
        piece = int(np.searchsorted(anti.knots, probe, side="right") - 1)
        piece = min(max(piece, 0), anti.coeffs.shape[0] - 1)
        return _shift_poly(anti.coeffs[piece], left_value - anti.knots[piece])

    def max_abs(self) -> float:
        """Exact maximum of |p| over the span, via endpoints and critical points."""
        best = 0.0
        widths = np.diff(self.knots)
        for i in range(self.coeffs.shape[0]):
            c = self.coeffs[i]
            w = widths[i]
            candidates = [0.0, w]
            eff = np.trim_zeros(c, "b")
            if len(eff) > 2:
                dcoeffs = eff[1:] * np.arange(1, len(eff))
                roots = np.roots(dcoeffs[::-1])
                for r in roots:
                    if abs(r.imag) < 1e-10 and 0.0 < r.real < w:
                        candidates.append(float(r.real))
            vals = npoly.polyval(np.asarray(candidates), c)
            best = max(best, float(np.abs(vals).max()))
        return best


def indicator(half_width: float) -> PiecewisePoly:
    """Indicator of [-a, a] as a degree-zero piecewise polynomial."""
    if half_width <= 0:
        raise ValueError("half_width must be positive")
    return PiecewisePoly(np.array([-half_width, half_width]),
                         np.array([[1.0]]))
