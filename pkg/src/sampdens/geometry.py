"""Closed-form potential theory for the two model geometries.

The parabolic model is the Euclidean plane, whose extremal fundamental
solution is log|z - w|.  The hyperbolic model is the unit disk, whose
Green's function is the log of the Mobius quotient |z - w| / |1 - conj(z) w|.
Everything downstream (distances, disks, the conformal factor, smoothed
means, induced area forms) is derived from these two kernels.

Measure conventions, made explicit once and relied on everywhere:

* ``weighted_mean`` integrates h against the probability kernel
  xi_r(z, .) e^{-2 nu} with respect to plane Lebesgue measure dm, i.e. it
  equals (1/c_r) * int_0^r t f(t) (int_0^{2pi} h(circle(t, theta)) dtheta) dt.
  With that normalization the mean of h == 1 is exactly 1 and harmonic h
  reproduce their center value.
* ``area_gamma`` integrates |d rho_gamma|^2 against dm; over a full
  distance disk of radius eps it equals pi * eps^2 in both geometries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .errors import (
    DomainError,
    GeometryError,
    RadiusRangeError,
    SingularEvaluationError,
)
from .quadrature import (
    DEFAULT_SPEC,
    QuadratureSpec,
    integrate_over_disk,
    panel_rule,
    refine,
)

PLANE = "plane"
DISK = "disk"


@dataclass(frozen=True)
class SurfaceModel:
    """One of the two model geometries.

    ``r_max`` is the supremum of admissible distance-disk radii: infinity
    for the plane, 1 for the unit disk.
    """

    kind: str

    def __post_init__(self):
        if self.kind not in (PLANE, DISK):
            raise ValueError(f"unknown surface kind {self.kind!r}")

    @classmethod
    def plane(cls) -> "SurfaceModel":
        return cls(PLANE)

    @classmethod
    def unit_disk(cls) -> "SurfaceModel":
        return cls(DISK)

    @property
    def r_max(self) -> float:
        return 1.0 if self.kind == DISK else math.inf

    @property
    def is_disk(self) -> bool:
        return self.kind == DISK

    def contains(self, z) -> bool:
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        if not (np.all(np.isfinite(z.real)) and np.all(np.isfinite(z.imag))):
            return False
        if self.kind == DISK:
            return bool(np.all(np.abs(z) < 1.0))
        return True

    def require_inside(self, *points):
        for z in points:
            if not self.contains(z):
                raise DomainError(f"point {z} outside {self.kind} domain")

    def require_radius(self, r: float):
        if not (0.0 < r < self.r_max):
            raise RadiusRangeError(
                f"radius {r} outside (0, {self.r_max}) for {self.kind}"
            )


@dataclass(frozen=True)
class EuclideanDisk:
    """A Euclidean disk, the computable realization of the distance disks."""

    center: complex
    radius: float

    def __post_init__(self):
        if not self.radius > 0.0:
            raise ValueError("radius must be positive")

    def contains(self, z, pad: float = 0.0):
        return np.abs(np.asarray(z, dtype=complex) - self.center) < self.radius - pad

    def boundary(self, theta):
        return self.center + self.radius * np.exp(1j * np.asarray(theta))


class MetricWeights(NamedTuple):
    nu: float
    e2nu: float
    drho_sq: float


def mobius(a: complex, w):
    """The standard disk involution (a - w) / (1 - conj(a) w)."""
    w = np.asarray(w, dtype=complex) if np.ndim(w) else w
    return (a - w) / (1.0 - np.conj(a) * w)


def rho_many(surface: SurfaceModel, z: complex, points):
    """Distance rho_z over an array of points (no domain checks)."""
    points = np.asarray(points, dtype=complex)
    if surface.is_disk:
        return np.abs(z - points) / np.abs(1.0 - np.conj(z) * points)
    return np.abs(z - points)


def evans_green(surface: SurfaceModel, z: complex, zeta: complex) -> float:
    """The extremal fundamental solution E(z, zeta).

    Plane: log|z - zeta|.  Disk: log of the Mobius quotient, which is
    negative throughout.  Symmetric in its two arguments.
    """
    surface.require_inside(z, zeta)
    if z == zeta:
        raise SingularEvaluationError("E(z, zeta) is singular at coincidence")
    if surface.is_disk:
        return math.log(abs(z - zeta)) - math.log(abs(1.0 - np.conj(z) * zeta))
    return math.log(abs(z - zeta))


def rho(surface: SurfaceModel, z: complex, zeta: complex) -> float:
    """Induced distance rho_z(zeta) = exp(E(z, zeta)); 0 at coincidence."""
    surface.require_inside(z, zeta)
    return float(rho_many(surface, z, zeta))


def disk_realize(surface: SurfaceModel, z: complex, r: float) -> EuclideanDisk:
    """Realize the distance disk {rho_z < r} as a Euclidean disk.

    On the plane the realization is the disk itself; on the unit disk the
    well-known pseudo-hyperbolic center/radius formulas apply.
    """
    surface.require_inside(z)
    surface.require_radius(r)
    if surface.is_disk:
        denom = 1.0 - (r * abs(z)) ** 2
        center = z * (1.0 - r * r) / denom
        radius = r * (1.0 - abs(z) ** 2) / denom
        return EuclideanDisk(center, radius)
    return EuclideanDisk(complex(z), float(r))


def metric_weights(surface: SurfaceModel, z: complex, zeta: complex) -> MetricWeights:
    """Conformal data at zeta: nu(zeta), e^{2 nu(zeta)}, |d rho_z(zeta)|^2.

    Plane: (log 2, 4, 1).  Disk: nu = log 2 + log(1 - |zeta|^2) and
    |d rho_z(zeta)|^2 = (1 - rho^2)^2 / (1 - |zeta|^2)^2.
    """
    surface.require_inside(z, zeta)
    if surface.is_disk:
        one_m = 1.0 - abs(zeta) ** 2
        r2 = float(rho_many(surface, z, zeta)) ** 2
        return MetricWeights(
            nu=math.log(2.0) + math.log(one_m),
            e2nu=4.0 * one_m * one_m,
            drho_sq=(1.0 - r2) ** 2 / (one_m * one_m),
        )
    return MetricWeights(nu=math.log(2.0), e2nu=4.0, drho_sq=1.0)


def circle_points(surface: SurfaceModel, z: complex, t, theta):
    """Points at distance t from z along the distance circles.

    ``t`` and ``theta`` broadcast; on the disk the circle is the Mobius
    image of the round circle of radius t about the origin.
    """
    u = np.asarray(t) * np.exp(1j * np.asarray(theta))
    if surface.is_disk:
        return mobius(z, u)
    return z + u


def weighted_mean(
    surface: SurfaceModel,
    h: Callable,
    z: complex,
    r: float,
    f,
    q: QuadratureSpec = DEFAULT_SPEC,
) -> float:
    """Kernel-smoothed mean of h over the distance disk of radius r about z.

    Returns (1/c_r) int_0^r t f(t) (int_0^{2pi} h(point(t, theta)) dtheta) dt,
    the mean of h against xi_r(z, .) e^{-2 nu} dm.  For h == 1 this is 1 for
    every admissible kernel; for harmonic h it reproduces h(z); for
    subharmonic h it dominates h(z).

    ``h`` must accept numpy arrays of complex points.  ``f`` is a
    DensityKernel (duck-typed: values/moment/breakpoints are used).
    """
    surface.require_inside(z)
    surface.require_radius(r)
    c_r = f.moment(r)

    cuts = [b for b in f.breakpoints() if 0.0 < b < r]
    base_edges = np.unique(np.concatenate(([0.0], cuts, [r])))

    def value(level):
        n_theta = 32 << level
        theta = np.arange(n_theta) * (2.0 * np.pi / n_theta)
        pieces = [np.array([0.0])]
        for lo, hi in zip(base_edges[:-1], base_edges[1:]):
            pieces.append(np.linspace(lo, hi, (1 << level) + 1)[1:])
        edges = np.concatenate(pieces)
        t_nodes, t_weights = panel_rule(edges, 12)
        pts = circle_points(surface, z, t_nodes[:, None], theta[None, :])
        hv = np.broadcast_to(np.asarray(h(pts), dtype=float), pts.shape)
        angular = hv.sum(axis=1) * (2.0 * np.pi / n_theta)
        fv = f.values(t_nodes)
        return float(np.sum(t_weights * t_nodes * fv * angular) / c_r)

    return refine(value, q, what="weighted_mean")


def area_gamma(
    surface: SurfaceModel,
    gamma: complex,
    region: EuclideanDisk,
    q: QuadratureSpec = DEFAULT_SPEC,
) -> float:
    """Area of a Euclidean region in the form d rho_gamma wedge *d rho_gamma.

    Equals int_region |d rho_gamma|^2 dm.  Over the full realization of a
    distance disk of radius eps about gamma this is pi eps^2 exactly,
    independent of the geometry.
    """
    surface.require_inside(gamma)
    if surface.is_disk:
        if abs(region.center) + region.radius >= 1.0:
            raise GeometryError("region exits the unit disk")

        def integrand(pts):
            rr = rho_many(surface, gamma, pts) ** 2
            return ((1.0 - rr) / (1.0 - np.abs(pts) ** 2)) ** 2

        return integrate_over_disk(
            integrand, region.center, region.radius, q, what="area_gamma"
        )

    def one(pts):
        return np.ones(pts.shape, dtype=float)

    return integrate_over_disk(one, region.center, region.radius, q, what="area_gamma")
