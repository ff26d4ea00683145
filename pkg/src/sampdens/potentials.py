"""Singular weights with poles or bumps along a point set.

The smoothed kernel I(zeta, z) replaces the fundamental solution E(., z)
by its kernel mean about zeta.  Inside the smoothing radius it has the
radial closed form

    I = (2 pi / c_r) ( log(rho) int_0^rho t f dt + int_rho^r t f log t dt ),

continuous across rho = r where it rejoins E, and it dominates E
everywhere.  Summing E - I over a point set gives the pole weight v_r
(nonpositive, log poles on the set); averaging E - I over small distance
disks against the induced area form gives the bounded bump weight
v_{r, eps}.  The local corrector supplies, near each set point, the
holomorphic completion of the harmonic extension of the weight from a
surrounding circle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .densities import DensityKernel, WeightModel
from .errors import AccuracyError, DomainError, GeometryError, RadiusRangeError
from .geometry import (
    SurfaceModel,
    disk_realize,
    mobius,
    rho_many,
)
from .pointsets import PointSet, separation_constant
from .quadrature import (
    DEFAULT_SPEC,
    QuadratureSpec,
    graded_unit_edges,
    panel_rule,
    refine,
    _ray_lengths,
)

POLE = "pole"
BUMP = "bump"


@dataclass(frozen=True)
class SingularWeight:
    """A base weight with a pole or bump correction along a point set."""

    base: WeightModel
    points: PointSet
    kernel: DensityKernel
    r: float
    mode: str
    eps: Optional[float] = None
    t: Optional[float] = None

    def __post_init__(self):
        self.points.surface.require_radius(self.r)
        if self.mode == POLE:
            return
        if self.mode != BUMP:
            raise ValueError(f"unknown singular weight mode {self.mode!r}")
        if self.t is None or not (0.0 < self.t < 1.0):
            raise ValueError("bump strength t must lie in (0, 1)")
        sep = separation_constant(self.points)
        if self.eps is None or not (0.0 < self.eps <= sep):
            raise RadiusRangeError(
                f"bump radius must lie in (0, separation constant {sep:.6g}]"
            )


def pole_weight(base, points, kernel, r) -> SingularWeight:
    return SingularWeight(base, points, kernel, r, POLE)


def bump_weight(base, points, kernel, r, eps, t=0.9) -> SingularWeight:
    return SingularWeight(base, points, kernel, r, BUMP, eps=eps, t=t)


class WeightValue(NamedTuple):
    """A sampled weight value with an explicit pole flag.

    ``value`` is -inf exactly when ``at_pole`` is set; consumers branch on
    the flag instead of comparing against infinities.
    """

    value: float
    at_pole: bool


def _i_radial(kernel: DensityKernel, r: float, dist):
    """The smoothed kernel as a function of the distance, vectorized."""
    dist = np.atleast_1d(np.asarray(dist, dtype=float))
    c_r = kernel.moment(r)
    out = np.empty_like(dist)
    far = dist >= r
    out[far] = np.log(dist[far])
    near = ~far
    if np.any(near):
        dn = dist[near]
        inner = kernel.moment_partial(dn)
        tail = kernel.log_moment_partial(r) - kernel.log_moment_partial(dn)
        safe = np.where(dn > 0.0, dn, 1.0)
        head = np.where(dn > 0.0, np.log(safe) * inner, 0.0)
        out[near] = (2.0 * math.pi / c_r) * (head + tail)
    return out


def i_smoothed(
    surface: SurfaceModel,
    f: DensityKernel,
    r: float,
    zeta: complex,
    z: complex,
) -> float:
    """Kernel mean of E(., z) about zeta; equals E outside radius r."""
    surface.require_inside(zeta, z)
    surface.require_radius(r)
    dist = float(rho_many(surface, z, zeta))
    return float(_i_radial(f, r, dist)[0])


def v_r(sw: SingularWeight, z: complex) -> WeightValue:
    """The pole weight: sum of E(gamma, z) - I(gamma, z) over the set.

    Only points within distance r of z contribute; the value is always
    nonpositive, with a logarithmic pole at each set point.
    """
    if sw.mode != POLE:
        raise ValueError("v_r requires a pole-mode singular weight")
    surface = sw.points.surface
    surface.require_inside(z)
    pts = sw.points.coords
    dist = rho_many(surface, z, pts)
    if np.any(dist == 0.0):
        return WeightValue(-math.inf, True)
    near = dist < sw.r
    if not np.any(near):
        return WeightValue(0.0, False)
    dn = dist[near]
    total = float(np.sum(np.log(dn) - _i_radial(sw.kernel, sw.r, dn)))
    return WeightValue(total, False)


def _mobius_addition(a: float, b: float) -> float:
    return (a + b) / (1.0 + a * b)


def _bump_contributors(surface, sw, z):
    """Set points whose eps-disk meets the region where E != I(., z)."""
    pts = sw.points.coords
    dist = rho_many(surface, z, pts)
    if surface.is_disk:
        reach = _mobius_addition(sw.r, sw.eps)
    else:
        reach = sw.r + sw.eps
    return pts[dist < reach]


def _e_minus_i_mean(surface, kernel, r, gamma, eps, z, spec, e_only=False):
    """(pi eps^2)^{-1} int over the eps-disk about gamma of (E - I)(., z),
    against the induced area form d rho_gamma wedge * d rho_gamma.

    Computed in normal coordinates u about gamma (u = z - gamma on the
    plane, the Mobius involution otherwise), where the area form becomes
    plane Lebesgue measure and the integrand is radial about the image of
    z.  Polar coordinates about that image point absorb the log
    singularity.
    """
    if surface.is_disk:
        z_u = mobius(gamma, z)
    else:
        z_u = z - gamma
    inside = abs(z_u) < eps
    origin = z_u if inside else 0j

    def integrand(u):
        d = np.abs(u - z_u)
        if surface.is_disk:
            d = d / np.abs(1.0 - np.conj(z_u) * u)
        d = np.maximum(d, 1e-300)
        vals = np.log(d)
        if not e_only:
            vals = vals - _i_radial(kernel, r, d).reshape(d.shape)
        return vals

    def value(level):
        n_theta = 64 << level
        theta = np.arange(n_theta) * (2.0 * np.pi / n_theta)
        tmax = (
            _ray_lengths(0j, eps, origin, theta)
            if inside
            else np.full(n_theta, eps)
        )
        unit_edges = graded_unit_edges(12 + 2 * level, 1 + level)
        u_nodes, u_weights = panel_rule(unit_edges, 12)
        t = tmax[:, None] * u_nodes[None, :]
        wt = tmax[:, None] * u_weights[None, :]
        pts = origin + t * np.exp(1j * theta[:, None])
        vals = integrand(pts)
        return float(np.sum(vals * t * wt) * (2.0 * np.pi / n_theta))

    total = refine(value, spec, what="bump integral")
    return total / (math.pi * eps * eps)


def v_r_eps(sw: SingularWeight, z: complex, q: QuadratureSpec = DEFAULT_SPEC) -> float:
    """The bump weight: t times the sum of eps-disk means of E - I.

    Finite everywhere, including on the set itself, and nonpositive.
    """
    if sw.mode != BUMP:
        raise ValueError("v_r_eps requires a bump-mode singular weight")
    surface = sw.points.surface
    surface.require_inside(z)
    total = 0.0
    for gamma in _bump_contributors(surface, sw, z):
        total += _e_minus_i_mean(
            surface, sw.kernel, sw.r, complex(gamma), sw.eps, z, q
        )
    return sw.t * total


def e_mean_bound(
    surface: SurfaceModel,
    gamma: complex,
    eps: float,
    z: complex,
    q: QuadratureSpec = DEFAULT_SPEC,
) -> float:
    """Mean of E(z, .) over the eps-disk about gamma, area form induced.

    Defined for z inside that disk; the mean never exceeds
    log(1/eps) + 1/2.
    """
    surface.require_inside(gamma, z)
    surface.require_radius(eps)
    if not float(rho_many(surface, gamma, z)) < eps:
        raise DomainError("z must lie in the eps-disk about gamma")
    kernel = DensityKernel.constant()
    val = _e_minus_i_mean(surface, kernel, eps, gamma, eps, z, q, e_only=True)
    slack = max(q.abs_tolerance, q.rel_tolerance * abs(val)) * 10.0
    bound = math.log(1.0 / eps) + 0.5
    if val > bound + slack:
        raise AccuracyError(
            f"mean of E exceeds its bound: {val:.12g} > {bound:.12g}",
            best_estimate=val,
        )
    return val


def save_weight_samples(
    path,
    sw: SingularWeight,
    points,
    q: QuadratureSpec = DEFAULT_SPEC,
) -> None:
    """Write sampled weight values to CSV for plotting.

    Columns: z_re, z_im, value, at_pole.  Pole-mode weights record -inf
    rows with the at_pole flag set; bump-mode weights are finite
    everywhere.
    """
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["z_re", "z_im", "value", "at_pole"])
        for z in np.asarray(points, dtype=complex).ravel():
            if sw.mode == POLE:
                res = v_r(sw, complex(z))
                value, at_pole = res.value, res.at_pole
            else:
                value, at_pole = v_r_eps(sw, complex(z), q), False
            writer.writerow(
                [
                    format(z.real, ".17g"),
                    format(z.imag, ".17g"),
                    format(value, ".17g"),
                    int(at_pole),
                ]
            )


def local_corrector(
    surface: SurfaceModel,
    w: WeightModel,
    gamma: complex,
    sigma: float,
    z: complex,
    q: QuadratureSpec = DEFAULT_SPEC,
) -> complex:
    """Holomorphic corrector F at z, vanishing at gamma.

    F = H - H(gamma) where H is the holomorphic function whose real part
    is the harmonic extension of the weight restricted to the boundary of
    the (Euclidean realization of the) 2 sigma disk about gamma, computed
    by the Schwarz boundary integral with dyadic node doubling.
    """
    surface.require_inside(gamma, z)
    surface.require_radius(sigma)
    if not float(rho_many(surface, gamma, z)) < sigma:
        raise DomainError("z must lie in the sigma-disk about gamma")
    if 2.0 * sigma >= surface.r_max:
        raise GeometryError("the 2 sigma disk exits the surface domain")
    disk = disk_realize(surface, gamma, 2.0 * sigma)
    if surface.is_disk and abs(disk.center) + disk.radius >= 1.0:
        raise GeometryError("the 2 sigma disk exits the unit disk")

    def schwarz(level):
        n = 16 << level
        theta = np.arange(n) * (2.0 * np.pi / n)
        bnd = disk.boundary(theta)
        data = np.asarray(w.phi(bnd), dtype=float)
        ws = bnd - disk.center

        def h_at(p):
            d = p - disk.center
            return complex(np.mean((ws + d) / (ws - d) * data))

        return h_at(z) - h_at(gamma)

    return complex(refine(schwarz, q, what="local corrector"))
