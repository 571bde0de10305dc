"""Maximal separated center packings and their covering certificates.

Centers are selected greedily from a lattice in lexicographic order; a
candidate is accepted when it keeps sup-norm distance at least half the
depth-1 radius of both endpoints to every accepted center.  Maximality is
relative to the candidate lattice and the lattice resolution is carried on
the result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .domains import Box, ExhaustionDomain
from .errors import RefinementRequiredError
from .radii import CLOSED_FORM, GRID_ORACLE, RadiusOracle
from .report import FAIL, PASS, Certificate
from .weights import WeightFamily

__all__ = ["BucketIndex", "Cover", "build_cover", "verify_covering",
           "overlap_profile", "neighbor_sets", "without_center",
           "with_extra_center"]


class BucketIndex:
    """Uniform bucket grid over points for fixed-radius sup-norm queries."""

    def __init__(self, origin, cell: float, dimension: int):
        if cell <= 0:
            raise ValueError("cell size must be positive")
        self.origin = tuple(float(v) for v in origin)
        self.cell = float(cell)
        self.dimension = dimension
        self.points: list[tuple[float, ...]] = []
        self.buckets: dict[tuple[int, ...], list[int]] = {}

    def key(self, p) -> tuple[int, ...]:
        return tuple(int(math.floor((p[i] - self.origin[i]) / self.cell))
                     for i in range(self.dimension))

    def insert(self, p) -> int:
        idx = len(self.points)
        self.points.append(tuple(float(v) for v in p))
        self.buckets.setdefault(self.key(p), []).append(idx)
        return idx

    def near(self, p, radius: float):
        """Indices of stored points in buckets touching the query box."""
        reach = int(math.ceil(radius / self.cell + 1e-12))
        center = self.key(p)
        if self.dimension == 1:
            (c0,) = center
            for i in range(c0 - reach, c0 + reach + 1):
                yield from self.buckets.get((i,), ())
        elif self.dimension == 2:
            c0, c1 = center
            for i in range(c0 - reach, c0 + reach + 1):
                for j in range(c1 - reach, c1 + reach + 1):
                    yield from self.buckets.get((i, j), ())
        else:
            ranges = [range(c - reach, c + reach + 1) for c in center]
            stack = [()]
            for rng in ranges:
                stack = [pre + (i,) for pre in stack for i in rng]
            for cell in stack:
                yield from self.buckets.get(cell, ())


@dataclass
class Cover:
    """Accepted centers with their ball radii and the spatial index."""

    level: int
    centers: np.ndarray                 # (K, d)
    rho: np.ndarray                     # r_n(z_k)
    r1: np.ndarray                      # depth-1 radius at z_k (sampled)
    resolution: float                   # candidate lattice resolution
    box: Box
    family: WeightFamily = field(repr=False)
    domain: ExhaustionDomain = field(repr=False)
    oracle: RadiusOracle = field(repr=False)
    tampered: str = ""
    neighbors: list[np.ndarray] | None = field(default=None, repr=False)
    _index: BucketIndex | None = field(default=None, repr=False)

    @property
    def size(self) -> int:
        return len(self.centers)

    @property
    def dimension(self) -> int:
        return self.centers.shape[1]

    @property
    def core_halfwidths(self) -> np.ndarray:
        """Half-widths of the core boxes used for the rescaling argument."""
        return self.r1 / 8.0

    @property
    def index(self) -> BucketIndex:
        if self._index is None:
            cell = float(self.rho.min()) / 2.0
            idx = BucketIndex(self.box.lower, cell, self.dimension)
            for z in self.centers:
                idx.insert(z)
            self._index = idx
        return self._index

    def balls_containing(self, x, inner: bool = False) -> list[int]:
        """Indices k with x in the (inner or outer) ball of center k."""
        x = np.asarray(x, dtype=float).reshape(-1)
        scale = 0.5 if inner else 1.0
        reach = scale * float(self.rho.max())
        hits = []
        for k in sorted(set(self.index.near(x, reach))):
            if np.abs(x - self.centers[k]).max() < scale * self.rho[k]:
                hits.append(k)
        return hits

    def locate_core(self, zeta) -> int | None:
        """The unique k whose core box contains zeta, if any."""
        zeta = np.asarray(zeta, dtype=float).reshape(-1)
        reach = float(self.r1.max()) / 8.0
        for k in self.index.near(zeta, reach):
            if np.abs(zeta - self.centers[k]).max() < self.r1[k] / 8.0:
                return k
        return None

    def csv_rows(self):
        """Rows (k, center coords..., rho_k, r1_k) for figure export."""
        for k in range(self.size):
            yield (k, *self.centers[k].tolist(),
                   float(self.rho[k]), float(self.r1[k]))


def _greedy_bucket(candidates: np.ndarray, r1: np.ndarray, box: Box) -> list[int]:
    min_sep = float(r1.min()) / 2.0
    max_sep = float(r1.max()) / 2.0
    index = BucketIndex(box.lower, min_sep, candidates.shape[1])
    accepted: list[int] = []
    acc_r1: list[float] = []
    pts = [tuple(row) for row in candidates]
    r1_list = [float(v) for v in r1]
    dim = candidates.shape[1]
    for i, p in enumerate(pts):
        ri = r1_list[i]
        ok = True
        for j in index.near(p, max_sep):
            q = index.points[j]
            dist = abs(p[0] - q[0])
            for t in range(1, dim):
                dt = abs(p[t] - q[t])
                if dt > dist:
                    dist = dt
            rj = acc_r1[j]
            threshold = (ri if ri > rj else rj) / 2.0
            if dist < threshold:
                ok = False
                break
        if ok:
            index.insert(p)
            accepted.append(i)
            acc_r1.append(ri)
    return accepted


def _greedy_naive(candidates: np.ndarray, r1: np.ndarray) -> list[int]:
    accepted: list[int] = []
    acc_pts = np.empty((0, candidates.shape[1]))
    acc_r1 = np.empty((0,))
    for i in range(len(candidates)):
        p = candidates[i]
        if len(accepted):
            dist = np.abs(acc_pts - p).max(axis=1)
            threshold = np.maximum(acc_r1, r1[i]) / 2.0
            if bool((dist < threshold).any()):
                continue
        accepted.append(i)
        acc_pts = np.vstack([acc_pts, p[None, :]])
        acc_r1 = np.append(acc_r1, r1[i])
    return accepted


def build_cover(family: WeightFamily, domain: ExhaustionDomain, n: int,
                candidate_resolution: float, box: Box | None = None,
                oracle: RadiusOracle | None = None,
                use_index: bool = True) -> Cover:
    """Greedy maximal packing of the ring lattice at the given resolution.

    The depth-1 radii come from the shared oracle (sampled upper bounds of
    the true infima); since they enter the packing as required minimum
    distances, overestimating them only thins the packing and never breaks
    the separation property.
    """
    oracle = oracle or RadiusOracle(family, domain, n, candidate_resolution,
                                    box=box)
    if oracle.strategy == CLOSED_FORM:
        ring_box = domain.ring(n).bounding_box
        if box is None:
            if not ring_box.is_bounded:
                raise ValueError("a truncation box is required for an unbounded ring")
            box = ring_box
        elif ring_box.is_bounded:
            box = box.intersect(ring_box)
        candidates = domain.sample_ring(n, candidate_resolution, box)
        if len(candidates) == 0:
            raise ValueError("the candidate lattice contains no ring points")
        r1 = np.full(len(candidates), oracle.value(1, candidates[0]))
    else:
        box = oracle.box
        candidates = oracle.lattice_points()
        r1 = oracle.lattice_values(1)

    min_r1 = float(r1.min())
    if min_r1 <= 0.0:
        raise RefinementRequiredError("depth-1 radii are not positive on the lattice")
    if not candidate_resolution < min_r1 / 4.0:
        raise RefinementRequiredError(
            f"candidate resolution {candidate_resolution} must be below a "
            f"quarter of the smallest depth-1 radius {min_r1}")

    if use_index:
        chosen = _greedy_bucket(candidates, r1, box)
    else:
        chosen = _greedy_naive(candidates, r1)

    centers = candidates[chosen]
    rho = np.asarray(family.radius(n, centers), dtype=float)
    return Cover(level=n, centers=centers, rho=rho, r1=r1[chosen],
                 resolution=candidate_resolution, box=box,
                 family=family, domain=domain, oracle=oracle)


def verify_covering(cover: Cover, grid: np.ndarray) -> Certificate:
    """Every grid point must lie in some inner ball, and every outer ball
    must sit inside the next ring (checked at its corner points)."""
    grid = cover.domain.require_in_ring(cover.level, grid)
    uncovered = None
    for x in grid:
        if not cover.balls_containing(x, inner=True):
            uncovered = x.tolist()
            break

    outer_ring = cover.domain.ring(cover.level + 1)
    escape = None
    for k in range(cover.size):
        lo = cover.centers[k] - cover.rho[k]
        hi = cover.centers[k] + cover.rho[k]
        corners = Box(tuple(lo), tuple(hi)).corners()
        if not outer_ring.contains(corners).all():
            escape = {"center": int(k), "corner_outside": True}
            break

    passed = uncovered is None and escape is None
    details: dict = {"centers": cover.size, "grid_points": int(len(grid))}
    if uncovered is not None:
        details["witness_uncovered_point"] = uncovered
    if escape is not None:
        details["witness_ball_escape"] = escape
    if cover.tampered:
        details["tampered"] = cover.tampered
    return Certificate(
        name=f"covering[{cover.family.name},n={cover.level}]",
        claim="cover.covering",
        verdict=PASS if passed else FAIL,
        measured=0.0 if passed else 1.0,
        resolutions={"candidate_resolution": cover.resolution,
                     "check_points": int(len(grid))},
        details=details,
    )


def overlap_profile(cover: Cover, grid: np.ndarray,
                    oracle: RadiusOracle | None = None) -> Certificate:
    """Measured outer-ball multiplicity against the depth-2 radius bound.

    The bound uses the sampled depth-2 radius in the denominator, which can
    only tighten the claim relative to the true infimum.
    """
    oracle = oracle or cover.oracle
    grid = cover.domain.require_in_ring(cover.level, grid)
    d = cover.dimension
    worst_slack = math.inf
    worst = None
    max_count = 0
    for x in grid:
        count = len(cover.balls_containing(x, inner=False))
        max_count = max(max_count, count)
        bound = (8.0 / oracle.value(2, x)) ** d
        slack = bound - count
        if slack < worst_slack:
            worst_slack = slack
            worst = (x.tolist(), count, bound)
    passed = worst_slack >= 0.0
    x_w, count_w, bound_w = worst
    return Certificate(
        name=f"overlap[{cover.family.name},n={cover.level}]",
        claim="cover.overlap_bound",
        verdict=PASS if passed else FAIL,
        measured=float(count_w),
        bound=float(bound_w),
        slack=float(worst_slack),
        resolutions={"check_points": int(len(grid))},
        details={"max_count": int(max_count), "tightest_point": x_w,
                 "radius_direction": "sampled upper bound in denominator "
                                     "(conservative)"},
    )


def neighbor_sets(cover: Cover, oracle: RadiusOracle | None = None) -> Certificate:
    """Exact intersection neighborhoods and the depth-3 cardinality bound."""
    oracle = oracle or cover.oracle
    d = cover.dimension
    rho_max = float(cover.rho.max())
    neighbors: list[np.ndarray] = []
    worst_slack = math.inf
    worst = None
    for k in range(cover.size):
        zk = cover.centers[k]
        hits = []
        for m in sorted(set(cover.index.near(zk, cover.rho[k] + rho_max))):
            if np.abs(cover.centers[m] - zk).max() < cover.rho[m] + cover.rho[k]:
                hits.append(m)
        hits = np.asarray(hits, dtype=int)
        neighbors.append(hits)
        bound = (8.0 / oracle.value(3, zk)) ** d
        slack = bound - len(hits)
        if slack < worst_slack:
            worst_slack = slack
            worst = (k, len(hits), bound)
    cover.neighbors = neighbors
    k_w, size_w, bound_w = worst
    passed = worst_slack >= 0.0
    return Certificate(
        name=f"neighbors[{cover.family.name},n={cover.level}]",
        claim="cover.neighbor_bound",
        verdict=PASS if passed else FAIL,
        measured=float(size_w),
        bound=float(bound_w),
        slack=float(worst_slack),
        details={"tightest_center": int(k_w),
                 "max_neighbors": int(max(len(h) for h in neighbors))},
    )


def chain_certificate(cover: Cover, oracle: RadiusOracle | None = None,
                      samples_per_pair: int = 3) -> Certificate:
    """Radius chain on overlapping balls: for sampled x in B_m and B_k,
    r(z_m) >= depth1(x) >= depth2(z_k) >= depth3(z_k).

    Sampled depth values are upper bounds of the true infima, so an apparent
    violation may be a sampling artifact; the check refines the resolution
    once and re-examines the violating triples before failing.
    """
    oracle = oracle or cover.oracle
    if cover.neighbors is None:
        neighbor_sets(cover, oracle)
    ring = cover.domain.ring(cover.level)

    def collect(orc: RadiusOracle):
        bad = []
        worst = math.inf
        for k in range(cover.size):
            zk = cover.centers[k]
            r2 = orc.value(2, zk)
            r3 = orc.value(3, zk)
            worst = min(worst, r2 - r3)
            if r2 < r3:
                bad.append({"kind": "depth2_vs_depth3", "center": int(k),
                            "r2": r2, "r3": r3})
            for m in cover.neighbors[k]:
                if m == k:
                    continue
                lo = np.maximum(cover.centers[m] - cover.rho[m], zk - cover.rho[k])
                hi = np.minimum(cover.centers[m] + cover.rho[m], zk + cover.rho[k])
                if not (lo < hi).all():
                    continue
                axes = [np.linspace(lo[i], hi[i], samples_per_pair + 2)[1:-1]
                        for i in range(cover.dimension)]
                mesh = np.meshgrid(*axes, indexing="ij")
                pts = np.stack([v.ravel() for v in mesh], axis=1)
                if orc.strategy == GRID_ORACLE:
                    # snap to the oracle lattice (exact-index fast path),
                    # keeping only points still inside both balls
                    snapped = []
                    for x in pts:
                        s = orc.snap(x)
                        if s is None:
                            continue
                        if np.abs(s - cover.centers[m]).max() < cover.rho[m] \
                                and np.abs(s - zk).max() < cover.rho[k]:
                            snapped.append(s)
                    pts = (np.asarray(snapped).reshape(-1, cover.dimension)
                           if snapped else np.empty((0, cover.dimension)))
                pts = pts[ring.contains(pts)] if len(pts) else pts
                rm = float(cover.family.radius(cover.level,
                                               cover.centers[m][None, :])[0])
                for x in pts:
                    r1x = orc.value(1, x)
                    worst = min(worst, rm - r1x, r1x - r2)
                    if rm < r1x or r1x < r2:
                        bad.append({"kind": "pair", "m": int(m), "k": int(k),
                                    "x": x.tolist(), "r_m": rm, "r1_x": r1x,
                                    "r2_zk": r2})
        return bad, worst

    violations, worst = collect(oracle)
    refined = False
    if violations and oracle.strategy == GRID_ORACLE:
        refined = True
        finer = RadiusOracle(cover.family, cover.domain, cover.level,
                             oracle.resolution / 2.0, box=oracle.box)
        violations, worst = collect(finer)

    return Certificate(
        name=f"radius_chain[{cover.family.name},n={cover.level}]",
        claim="radii.chain_on_overlaps",
        verdict=PASS if not violations else FAIL,
        measured=worst,
        bound=0.0,
        resolutions={"resolution": oracle.resolution, "refined": refined,
                     "samples_per_pair": samples_per_pair ** cover.dimension},
        details={"violations": violations[:5]} if violations else {},
    )


def separation_holds(cover: Cover) -> tuple[bool, tuple[int, int] | None]:
    """All-pairs check of the two-sided separation the greedy enforced."""
    for k in range(cover.size):
        for j in range(k + 1, cover.size):
            dist = float(np.abs(cover.centers[k] - cover.centers[j]).max())
            if dist < max(cover.r1[k], cover.r1[j]) / 2.0:
                return False, (k, j)
    return True, None


def without_center(cover: Cover, k: int) -> Cover:
    """Negative control: drop one accepted center."""
    keep = [i for i in range(cover.size) if i != k]
    return Cover(level=cover.level, centers=cover.centers[keep],
                 rho=cover.rho[keep], r1=cover.r1[keep],
                 resolution=cover.resolution, box=cover.box,
                 family=cover.family, domain=cover.domain,
                 oracle=cover.oracle, tampered=f"dropped center {k}")


def with_extra_center(cover: Cover, z) -> Cover:
    """Negative control: inject a center without separation screening."""
    z = np.asarray(z, dtype=float).reshape(1, -1)
    centers = np.vstack([cover.centers, z])
    rho = np.append(cover.rho, float(cover.family.radius(cover.level, z)[0]))
    r1 = np.append(cover.r1, cover.oracle.value(1, z[0]))
    return Cover(level=cover.level, centers=centers, rho=rho, r1=r1,
                 resolution=cover.resolution, box=cover.box,
                 family=cover.family, domain=cover.domain,
                 oracle=cover.oracle, tampered="injected center")
