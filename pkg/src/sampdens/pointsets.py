"""Discrete point sets: separation, sparseness counts, and generators.

Separation is measured through the induced distance: two points are
r-separated when their distance disks of radius r are disjoint, and the
separation constant of a set is the largest such r over all pairs.  On the
plane this is half the Euclidean gap; on the unit disk it is found by
bisecting on the radius of the Euclidean realizations.

All analysis operates on windowed truncations of (conceptually infinite)
configurations; ``Window`` is the explicit truncation contract.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.spatial import cKDTree

from .errors import (
    DegenerateInputError,
    DomainError,
    RadiusRangeError,
    UnsupportedSurfaceError,
)
from .geometry import (
    DISK,
    PLANE,
    EuclideanDisk,
    SurfaceModel,
    disk_realize,
    mobius,
    rho_many,
)

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class Window:
    """A finite truncation window: plane square, plane ball, or disk ball.

    ``extent`` is the half side, Euclidean radius, or distance radius
    respectively; membership is closed (boundary included).
    """

    PLANE_SQUARE = "plane_square"
    PLANE_BALL = "plane_ball"
    DISK_BALL = "disk_ball"

    kind: str
    extent: float
    anchor: complex = 0j

    def __post_init__(self):
        if self.kind not in (self.PLANE_SQUARE, self.PLANE_BALL, self.DISK_BALL):
            raise ValueError(f"unknown window kind {self.kind!r}")
        if not self.extent > 0.0:
            raise ValueError("window extent must be positive")
        if self.kind == self.DISK_BALL:
            if not self.extent < 1.0:
                raise ValueError("disk window radius must be below 1")
            if not abs(self.anchor) < 1.0:
                raise ValueError("disk window anchor must lie in the unit disk")

    @classmethod
    def plane_square(cls, half_side: float, anchor: complex = 0j):
        return cls(cls.PLANE_SQUARE, half_side, anchor)

    @classmethod
    def plane_ball(cls, radius: float, anchor: complex = 0j):
        return cls(cls.PLANE_BALL, radius, anchor)

    @classmethod
    def disk_ball(cls, rho_radius: float, anchor: complex = 0j):
        return cls(cls.DISK_BALL, rho_radius, anchor)

    @property
    def surface_kind(self) -> str:
        return DISK if self.kind == self.DISK_BALL else PLANE

    def contains(self, z):
        z = np.asarray(z, dtype=complex)
        if self.kind == self.PLANE_SQUARE:
            d = z - self.anchor
            return (np.abs(d.real) <= self.extent) & (np.abs(d.imag) <= self.extent)
        if self.kind == self.PLANE_BALL:
            return np.abs(z - self.anchor) <= self.extent
        return rho_many(SurfaceModel.unit_disk(), self.anchor, z) <= self.extent


@dataclass
class PointSet:
    """An ordered set of pairwise-distinct points on a surface."""

    surface: SurfaceModel
    coords: np.ndarray
    cached_separation: Optional[float] = field(default=None)

    def __init__(self, surface, points, cached_separation=None):
        self.surface = surface
        coords = np.asarray(points, dtype=complex).ravel()
        if coords.size and not surface.contains(coords):
            raise DomainError("point set leaves the surface domain")
        if len(np.unique(coords)) != coords.size:
            raise DegenerateInputError("points must be pairwise distinct")
        self.coords = coords
        self.cached_separation = cached_separation

    def __len__(self):
        return int(self.coords.size)

    def __iter__(self):
        return iter(self.coords)


def pair_separation(surface: SurfaceModel, g1: complex, g2: complex) -> float:
    """Largest r with disjoint distance disks of radius r about g1 and g2.

    Plane closed form: |g1 - g2| / 2.  Disk: bisection on r against
    Euclidean disjointness of the disk realizations.
    """
    surface.require_inside(g1, g2)
    if g1 == g2:
        raise DegenerateInputError("pair separation of coincident points")
    if not surface.is_disk:
        return 0.5 * abs(g1 - g2)

    def disjoint(r):
        d1 = disk_realize(surface, g1, r)
        d2 = disk_realize(surface, g2, r)
        return abs(d1.center - d2.center) >= d1.radius + d2.radius

    lo, hi = 1e-15, 1.0 - 1e-15
    if not disjoint(lo):
        return lo
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if disjoint(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def separation_constant(pointset: PointSet) -> float:
    """Minimum pair separation over the set, cached on the point set.

    A spatial tree limits the scan to near neighbors: the minimizing pair
    in both geometries is the pair of minimal induced distance, and any
    pair at induced distance d is within Euclidean distance 2 d.  Sets
    with fewer than two points are vacuously separated at r_max.
    """
    if pointset.cached_separation is not None:
        return pointset.cached_separation
    if len(pointset) < 2:
        return pointset.surface.r_max
    pts = pointset.coords
    surface = pointset.surface
    xy = np.column_stack([pts.real, pts.imag])
    tree = cKDTree(xy)
    _d, idx = tree.query(xy, k=2)
    neighbor = pts[idx[:, 1]]
    rho_nn = float(np.min(rho_many_pairwise(surface, pts, neighbor)))
    if surface.is_disk:
        pairs = tree.query_pairs(r=2.0 * rho_nn + 1e-15, output_type="ndarray")
        if pairs.size:
            rho_nn = min(
                rho_nn,
                float(
                    np.min(rho_many_pairwise(surface, pts[pairs[:, 0]], pts[pairs[:, 1]]))
                ),
            )
    i, j = _argmin_pair(surface, pts, tree, rho_nn)
    sep = pair_separation(surface, complex(pts[i]), complex(pts[j]))
    pointset.cached_separation = sep
    return sep


def rho_many_pairwise(surface, a, b):
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if surface.is_disk:
        return np.abs(a - b) / np.abs(1.0 - np.conj(a) * b)
    return np.abs(a - b)


def _argmin_pair(surface, pts, tree, rho_min):
    pairs = tree.query_pairs(r=2.0 * rho_min + 1e-12, output_type="ndarray")
    dists = rho_many_pairwise(surface, pts[pairs[:, 0]], pts[pairs[:, 1]])
    k = int(np.argmin(dists))
    return pairs[k, 0], pairs[k, 1]


def minimum_rho_over_disk(surface: SurfaceModel, gamma: complex, disk: EuclideanDisk) -> float:
    """Minimize rho_gamma over a closed Euclidean disk.

    Plane: max(|gamma - center| - radius, 0).  Disk geometry: the minimum
    sits on the boundary circle when gamma is outside, so a coarse angular
    sweep brackets it and golden-section refinement finishes; a dense
    sweep is retained as the fallback if the bracket ever disagrees.
    """
    if not surface.is_disk:
        return max(abs(gamma - disk.center) - disk.radius, 0.0)
    if bool(disk.contains(gamma)) or gamma == disk.center:
        return 0.0

    def at(theta):
        return float(rho_many(surface, gamma, disk.boundary(theta)))

    n_coarse = 128
    theta = 2.0 * np.pi * np.arange(n_coarse) / n_coarse
    vals = rho_many(surface, gamma, disk.boundary(theta))
    k = int(np.argmin(vals))
    lo = theta[k] - 2.0 * np.pi / n_coarse
    hi = theta[k] + 2.0 * np.pi / n_coarse
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = at(c), at(d)
    for _ in range(80):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = at(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = at(d)
    best = min(fc, fd, float(vals[k]))
    if best > float(np.min(vals)) + 1e-9:
        dense = rho_many(surface, gamma, disk.boundary(2.0 * np.pi * np.arange(4096) / 4096))
        best = min(best, float(np.min(dense)))
    return best


def sparseness_count(pointset: PointSet, r: float, eps: float, z: complex) -> int:
    """Number of set points within distance r of the eps-disk about z.

    A point gamma counts when its radius-r disk meets the radius-eps disk
    about z, i.e. when the minimum of rho_gamma over the Euclidean
    realization of that disk is below r.
    """
    surface = pointset.surface
    surface.require_inside(z)
    surface.require_radius(r)
    surface.require_radius(eps)
    region = disk_realize(surface, z, eps)
    count = 0
    for gamma in pointset.coords:
        if minimum_rho_over_disk(surface, complex(gamma), region) < r:
            count += 1
    return count


def generate_square_lattice(spacing: float, window: Window) -> PointSet:
    """The square lattice of the given spacing clipped to a plane window."""
    if window.surface_kind != PLANE:
        raise UnsupportedSurfaceError("square lattices live on the plane")
    if not spacing > 0.0:
        raise RadiusRangeError("spacing must be positive")
    extent = window.extent
    n_max = int(math.floor(extent / spacing)) + 1
    m = np.arange(-n_max, n_max + 1)
    re, im = np.meshgrid(m, m)
    pts = window.anchor + spacing * (re + 1j * im).ravel()
    pts = pts[window.contains(pts)]
    order = np.lexsort((pts.imag, pts.real))
    cached = spacing / 2.0 if pts.size >= 2 else None
    return PointSet(SurfaceModel.plane(), pts[order], cached_separation=cached)


def _halton(index, base):
    index = np.asarray(index, dtype=np.int64)
    out = np.zeros(index.shape, dtype=float)
    f = 1.0 / base
    i = index.copy()
    while np.any(i > 0):
        out += f * (i % base)
        i //= base
        f /= base
    return out


def generate_hyperbolic_net(
    delta: float, window: Window, seed: int, trials: int = 60000
) -> PointSet:
    """Greedy maximal delta-separated net in a disk window.

    Candidates come from a Halton (2, 3) stream with a seeded
    Cranley-Patterson rotation, radius distributed by hyperbolic area so
    the rim is proposed as densely as the center.  Candidates are
    consumed in stream order; each is accepted iff its induced distance
    to all accepted points is at least delta.  The full trial budget is
    always consumed, so the output is deterministic in (seed, trials).
    """
    if not (0.0 < delta < 1.0):
        raise RadiusRangeError("net delta must lie in (0, 1)")
    if window.surface_kind != DISK:
        raise UnsupportedSurfaceError("hyperbolic nets live on the unit disk")
    rng = np.random.default_rng(seed)
    shift = rng.random(2)

    idx = np.arange(1, trials + 1)
    u1 = (_halton(idx, 2) + shift[0]) % 1.0
    u2 = (_halton(idx, 3) + shift[1]) % 1.0
    rmax = window.extent
    v = u1 * (rmax * rmax / (1.0 - rmax * rmax))
    radii = np.sqrt(v / (1.0 + v))
    cand = radii * np.exp(2j * np.pi * u2)
    if window.anchor != 0:
        cand = mobius(window.anchor, cand)

    surface = SurfaceModel.unit_disk()
    accepted: list[complex] = []
    acc_arr = np.empty(0, dtype=complex)
    chunk = 1024
    for start in range(0, trials, chunk):
        block = cand[start : start + chunk]
        if acc_arr.size:
            dmin = np.min(
                np.abs(block[:, None] - acc_arr[None, :])
                / np.abs(1.0 - np.conj(block[:, None]) * acc_arr[None, :]),
                axis=1,
            )
            block = block[dmin >= delta]
        for c in block:
            if acc_arr.size:
                d = np.abs(c - acc_arr) / np.abs(1.0 - np.conj(c) * acc_arr)
                if np.min(d) < delta:
                    continue
            accepted.append(complex(c))
            acc_arr = np.asarray(accepted, dtype=complex)
    ps = PointSet(surface, acc_arr)
    separation_constant(ps)
    return ps


# ---------------------------------------------------------------------------
# serialization: "re im" per line under a surface header, 17 significant
# digits, exact round trip
# ---------------------------------------------------------------------------


def save_points(pointset: PointSet, path) -> None:
    lines = [f"surface={pointset.surface.kind}"]
    for z in pointset.coords:
        lines.append(f"{z.real:.17g} {z.imag:.17g}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_points(path) -> PointSet:
    with open(path) as fh:
        raw = [line.strip() for line in fh if line.strip()]
    if not raw or not raw[0].startswith("surface="):
        raise ValueError(f"{path}: missing surface header")
    kind = raw[0].split("=", 1)[1]
    if kind not in (PLANE, DISK):
        raise ValueError(f"{path}: unknown surface {kind!r}")
    pts = []
    for line in raw[1:]:
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"{path}: malformed point line {line!r}")
        pts.append(complex(float(parts[0]), float(parts[1])))
    return PointSet(SurfaceModel(kind), np.asarray(pts, dtype=complex))
