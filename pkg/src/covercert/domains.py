"""Domains, exhausting families, and sup-norm geometric queries.

A domain is an open set together with an increasing family of nonempty
sets (its "rings") whose union is the whole domain.  All distances here
are taken in the sup norm, with the convention that the distance to an
empty boundary is infinite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .errors import DomainMembershipError

__all__ = [
    "Box",
    "Region",
    "FullSpace",
    "BoxRegion",
    "DistanceRegion",
    "ExhaustionDomain",
    "full_space",
    "expanding_boxes",
    "shrinking_boxes",
    "constant_exhaustion",
    "dist_inf_boundary",
    "ring_distance",
    "exhaustion_gap",
    "GapEstimate",
    "grid_points",
]

INF = math.inf


def _as_points(x, dim: int) -> np.ndarray:
    pts = np.asarray(x, dtype=float)
    if pts.ndim == 1:
        if pts.shape[0] != dim:
            raise ValueError(f"point has dimension {pts.shape[0]}, expected {dim}")
        return pts[None, :]
    if pts.ndim != 2 or pts.shape[1] != dim:
        raise ValueError(f"expected points of shape (N, {dim}), got {pts.shape}")
    return pts


@dataclass(frozen=True)
class Box:
    """Axis-aligned box, possibly unbounded on some axes."""

    lower: tuple[float, ...]
    upper: tuple[float, ...]

    def __post_init__(self):
        if len(self.lower) != len(self.upper):
            raise ValueError("lower/upper dimension mismatch")
        for lo, hi in zip(self.lower, self.upper):
            if not lo < hi:
                raise ValueError(f"degenerate box axis [{lo}, {hi}]")

    @property
    def dimension(self) -> int:
        return len(self.lower)

    @property
    def is_bounded(self) -> bool:
        return all(math.isfinite(lo) and math.isfinite(hi)
                   for lo, hi in zip(self.lower, self.upper))

    def contains(self, x, closed: bool = False) -> np.ndarray:
        pts = _as_points(x, self.dimension)
        lo = np.asarray(self.lower)
        hi = np.asarray(self.upper)
        if closed:
            ok = (pts >= lo) & (pts <= hi)
        else:
            ok = (pts > lo) & (pts < hi)
        return ok.all(axis=1)

    def intersect(self, other: "Box") -> "Box":
        lo = tuple(max(a, b) for a, b in zip(self.lower, other.lower))
        hi = tuple(min(a, b) for a, b in zip(self.upper, other.upper))
        return Box(lo, hi)

    def corners(self) -> np.ndarray:
        axes = [(lo, hi) for lo, hi in zip(self.lower, self.upper)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def widths(self) -> tuple[float, ...]:
        return tuple(hi - lo for lo, hi in zip(self.lower, self.upper))


def grid_points(box: Box, resolution: float) -> np.ndarray:
    """Lattice ``lower + i * resolution`` per axis, in lexicographic order.

    Endpoints are included when they land on the lattice; membership in an
    open region is filtered by the caller.
    """
    if resolution <= 0.0:
        raise ValueError("resolution must be positive")
    if not box.is_bounded:
        raise ValueError("grid_points requires a bounded box (supply a truncation box)")
    axes = []
    for lo, hi in zip(box.lower, box.upper):
        count = int(math.floor((hi - lo) / resolution + 1e-12)) + 1
        axes.append(lo + resolution * np.arange(count))
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


class Region:
    """Base interface: membership, bounding box, and sup-norm boundary distance."""

    dimension: int

    def contains(self, x) -> np.ndarray:
        raise NotImplementedError

    @property
    def bounding_box(self) -> Box:
        raise NotImplementedError

    @property
    def has_boundary(self) -> bool:
        raise NotImplementedError

    @property
    def is_closed(self) -> bool:
        return False

    @property
    def is_bounded(self) -> bool:
        return self.bounding_box.is_bounded

    def boundary_distance(self, x, norm: str = "inf") -> np.ndarray:
        raise NotImplementedError


class FullSpace(Region):
    """All of d-dimensional space; the boundary is empty."""

    def __init__(self, dimension: int):
        if dimension < 1:
            raise ValueError("dimension must be a positive integer")
        self.dimension = dimension

    def contains(self, x) -> np.ndarray:
        pts = _as_points(x, self.dimension)
        return np.ones(len(pts), dtype=bool)

    @property
    def bounding_box(self) -> Box:
        d = self.dimension
        return Box((-INF,) * d, (INF,) * d)

    @property
    def has_boundary(self) -> bool:
        return False

    @property
    def is_closed(self) -> bool:
        return True

    def boundary_distance(self, x, norm: str = "inf") -> np.ndarray:
        pts = _as_points(x, self.dimension)
        return np.full(len(pts), INF)

    def __repr__(self):
        return f"FullSpace(d={self.dimension})"


class BoxRegion(Region):
    """An open (or closed) axis box; slabs arise from infinite bounds."""

    def __init__(self, box: Box, closed: bool = False):
        self.box = box
        self.closed = closed
        self.dimension = box.dimension

    def contains(self, x) -> np.ndarray:
        return self.box.contains(x, closed=self.closed)

    @property
    def bounding_box(self) -> Box:
        return self.box

    @property
    def has_boundary(self) -> bool:
        return any(math.isfinite(lo) or math.isfinite(hi)
                   for lo, hi in zip(self.box.lower, self.box.upper))

    @property
    def is_closed(self) -> bool:
        return self.closed

    def closure(self) -> "BoxRegion":
        return BoxRegion(self.box, closed=True)

    def boundary_distance(self, x, norm: str = "inf") -> np.ndarray:
        # Sup-norm distance from an interior point to the boundary of an axis
        # box is the smallest per-axis distance to a finite face; from an
        # exterior point it is the largest per-axis excursion beyond the box.
        # The Euclidean variant differs only for exterior points, which do not
        # occur under the membership preconditions, so both norms share this
        # formula on the inside.
        if norm not in ("inf", "euclidean"):
            raise ValueError(f"unsupported norm {norm!r}")
        pts = _as_points(x, self.dimension)
        lo = np.asarray(self.box.lower)
        hi = np.asarray(self.box.upper)
        below = lo - pts
        above = pts - hi
        outside = np.maximum(np.maximum(below, above), 0.0)
        if not self.has_boundary:
            return np.full(len(pts), INF)
        if norm == "inf":
            out_dist = outside.max(axis=1)
        else:
            out_dist = np.sqrt((outside ** 2).sum(axis=1))
        per_axis = np.minimum(pts - lo, hi - pts)
        in_dist = per_axis.min(axis=1)
        is_outside = (outside > 0).any(axis=1)
        return np.where(is_outside, out_dist, in_dist)

    def __repr__(self):
        kind = "closed" if self.closed else "open"
        return f"BoxRegion({self.box.lower}, {self.box.upper}, {kind})"


class DistanceRegion(Region):
    """Bounded open set given by a membership predicate and a distance
    function to its boundary, with a bounding box.

    The escape hatch for regions that are not axis boxes; the distance
    function is trusted as supplied.
    """

    def __init__(self, dimension: int, member, distance, bounding_box: Box):
        self.dimension = dimension
        self._member = member
        self._distance = distance
        self._box = bounding_box

    def contains(self, x) -> np.ndarray:
        pts = _as_points(x, self.dimension)
        return np.asarray(self._member(pts), dtype=bool)

    @property
    def bounding_box(self) -> Box:
        return self._box

    @property
    def has_boundary(self) -> bool:
        return True

    def boundary_distance(self, x, norm: str = "inf") -> np.ndarray:
        pts = _as_points(x, self.dimension)
        return np.asarray(self._distance(pts), dtype=float)


@dataclass(frozen=True)
class ExhaustionDomain:
    """An open set with an increasing family of rings exhausting it."""

    omega: Region
    ring_fn: Callable[[int], Region] = field(repr=False)
    kind: str = "custom"
    closed_rings: bool = False
    name: str = ""

    @property
    def dimension(self) -> int:
        return self.omega.dimension

    def ring(self, n: int) -> Region:
        if n < 1:
            raise ValueError("ring index must be >= 1")
        region = self.ring_fn(n)
        if self.closed_rings and isinstance(region, BoxRegion) and not region.closed:
            region = region.closure()
        return region

    def require_in_omega(self, x) -> np.ndarray:
        pts = _as_points(x, self.dimension)
        ok = self.omega.contains(pts)
        if not ok.all():
            bad = pts[~ok][0]
            raise DomainMembershipError(f"point {bad.tolist()} is not in the domain")
        return pts

    def require_in_ring(self, n: int, x) -> np.ndarray:
        pts = _as_points(x, self.dimension)
        ok = self.ring(n).contains(pts)
        if not ok.all():
            bad = pts[~ok][0]
            raise DomainMembershipError(
                f"point {bad.tolist()} is not in ring {n}")
        return pts

    def sample_ring(self, n: int, resolution: float, box: Box) -> np.ndarray:
        """Lattice points of the truncation box that lie in ring n (lex order)."""
        pts = grid_points(box, resolution)
        return pts[self.ring(n).contains(pts)]


def full_space(dimension: int) -> ExhaustionDomain:
    """The whole space exhausted by itself."""
    omega = FullSpace(dimension)
    return ExhaustionDomain(omega, lambda n: omega, kind="full_space",
                            name=f"full_space_d{dimension}")


def expanding_boxes(dimension: int,
                    extent: Callable[[int], float] = float,
                    axes: tuple[int, ...] | None = None,
                    closed: bool = False) -> ExhaustionDomain:
    """Rings ``{x : |x_i| < extent(n)}`` on the given axes (all axes by default).

    With a strict subset of axes the rings are slabs and the union is the
    whole space; with all axes it is the whole space as well, exhausted by
    bounded boxes.
    """
    if axes is None:
        axes = tuple(range(dimension))
    if not axes:
        raise ValueError("at least one constrained axis is required")

    def make(n: int) -> Region:
        e = float(extent(n))
        lo = tuple(-e if i in axes else -INF for i in range(dimension))
        hi = tuple(e if i in axes else INF for i in range(dimension))
        return BoxRegion(Box(lo, hi))

    omega = FullSpace(dimension)
    kind = "slab_truncation" if len(axes) < dimension else "open_box"
    return ExhaustionDomain(omega, make, kind=kind, closed_rings=closed,
                            name=f"expanding_boxes_d{dimension}")


def shrinking_boxes(lower, upper,
                    margin: Callable[[int], float] = lambda n: 1.0 / (n + 2),
                    closed: bool = False) -> ExhaustionDomain:
    """A bounded open box exhausted by boxes shrunk inward by ``margin(n)``.

    ``margin`` must be positive, strictly decreasing, and tend to zero.
    """
    outer = Box(tuple(map(float, lower)), tuple(map(float, upper)))
    if not outer.is_bounded:
        raise ValueError("shrinking_boxes requires a bounded outer box")

    def make(n: int) -> Region:
        m = float(margin(n))
        lo = tuple(a + m for a in outer.lower)
        hi = tuple(b - m for b in outer.upper)
        return BoxRegion(Box(lo, hi))

    omega = BoxRegion(outer)
    return ExhaustionDomain(omega, make, kind="compact_exhaustion_interiors",
                            closed_rings=closed,
                            name="shrinking_boxes")


def constant_exhaustion(region: Region, name: str = "") -> ExhaustionDomain:
    """Every ring equals the domain itself."""
    return ExhaustionDomain(region, lambda n: region,
                            kind="bounded_open_set_with_distance_fn",
                            name=name or "constant_exhaustion")


def dist_inf_boundary(domain: ExhaustionDomain, x, norm: str = "inf") -> np.ndarray | float:
    """Sup-norm distance from a domain point to the domain boundary."""
    pts = domain.require_in_omega(x)
    out = domain.omega.boundary_distance(pts, norm=norm)
    return float(out[0]) if np.ndim(x) == 1 else out


def ring_distance(domain: ExhaustionDomain, n: int, x) -> np.ndarray | float:
    """Distance from a point of ring n to the boundary of ring n + 1."""
    pts = domain.require_in_ring(n, x)
    out = domain.ring(n + 1).boundary_distance(pts)
    return float(out[0]) if np.ndim(x) == 1 else out


class GapEstimate(NamedTuple):
    value: float
    exact: bool
    resolution: float | None
    note: str = ""


def exhaustion_gap(domain: ExhaustionDomain, n: int,
                   sample_resolution: float | None = None,
                   box: Box | None = None) -> GapEstimate:
    """Smallest sup-norm distance between ring n and the boundary of ring n + 1.

    Box and slab rings are resolved analytically from their faces.  Anything
    else is estimated from a sampled lower bound, with the resolution recorded.
    """
    inner = domain.ring(n)
    outer = domain.ring(n + 1)
    if not outer.has_boundary:
        return GapEstimate(INF, True, None, "full-space")
    if isinstance(inner, BoxRegion) and isinstance(outer, BoxRegion):
        gaps = []
        for lo_i, hi_i, lo_o, hi_o in zip(inner.box.lower, inner.box.upper,
                                          outer.box.lower, outer.box.upper):
            if math.isfinite(lo_o):
                gaps.append(lo_i - lo_o)
            if math.isfinite(hi_o):
                gaps.append(hi_o - hi_i)
        value = min(gaps) if gaps else INF
        return GapEstimate(max(value, 0.0), True, None)
    if sample_resolution is None:
        raise ValueError("sample_resolution required for non-box rings")
    box = box or inner.bounding_box
    pts = domain.sample_ring(n, sample_resolution, box)
    if len(pts) == 0:
        raise ValueError(f"ring {n} produced no sample points in the box")
    dist = outer.boundary_distance(pts)
    # The sampled minimum overestimates the infimum by at most one lattice
    # step, since the distance is 1-Lipschitz in the sup norm.
    value = max(float(dist.min()) - sample_resolution, 0.0)
    return GapEstimate(value, False, sample_resolution)
