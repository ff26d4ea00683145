"""Kernel family, weight/metric models, and the density classification.

The density of a point set against a radial kernel f at scale r is the sum
over set points gamma of

    (pi/2) xi_r(gamma, z) / denom(z),

where xi_r(gamma, z) = f(rho_gamma(z)) e^{2 nu(z)} |d rho_gamma(z)|^2 / c_r
inside the distance disk of radius r about gamma (zero outside), and the
denominator is the curvature e^{2 nu} lap(phi) of the weight, augmented by
the metric term tau_psi for the upper density.  Closed forms:

* plane, phi = |z|^2 / 2:  per-point term f(|z - gamma|) / (2 int_0^r t f),
* disk, phi = -log(1 - |z|^2) / 2, lower side:
  per-point term f(rho) (1 - rho^2)^2 / (2 int_0^r t f).

Sufficiency thresholds sit at 1: a tail of sup values below 1 - guard is
evidence for interpolation, a tail of inf values above 1 + guard for
sampling.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import exp1

from .errors import (
    DegenerateKernelError,
    DomainError,
    HypothesisViolationError,
    RadiusRangeError,
)
from .geometry import SurfaceModel, metric_weights, mobius, rho_many
from .pointsets import PointSet, Window

EULER_GAMMA = float(np.euler_gamma)

CONSTANT = "constant"
EXPONENTIAL = "exponential"
INDICATOR = "indicator"
DISK_LOG = "disk_log"
TABULATED = "tabulated"

UPPER = "upper"
LOWER = "lower"

INTERPOLATION_SUFFICIENT = "InterpolationSufficient"
SAMPLING_SUFFICIENT = "SamplingSufficient"
INCONCLUSIVE = "Inconclusive"


class DensityKernel:
    """A nonnegative, locally integrable radial kernel f on [0, R).

    Variants: the constant kernel, exp(-t), the indicator of [0, a], the
    disk kernel (-log t) / (1 - t^2)^2 on [1/2, 1), and nonnegative
    piecewise-linear tables.  Moments int_0^t s f(s) ds and the
    log-weighted moments int s f(s) log(s) ds are evaluated in closed form
    for every variant (tables exactly per segment), so the kernel can sit
    inside adaptive quadrature without nested refinement.
    """

    def __init__(self, kind, a=None, knots=None, values=None):
        if kind not in (CONSTANT, EXPONENTIAL, INDICATOR, DISK_LOG, TABULATED):
            raise ValueError(f"unknown kernel kind {kind!r}")
        self.kind = kind
        self.a = a
        if kind == INDICATOR:
            if not (a is not None and a > 0.0):
                raise ValueError("indicator kernel needs a > 0")
        if kind == TABULATED:
            knots = np.asarray(knots, dtype=float)
            values = np.asarray(values, dtype=float)
            if knots.ndim != 1 or knots.size < 2 or values.shape != knots.shape:
                raise ValueError("tabulated kernel needs matching knot/value arrays")
            if np.any(np.diff(knots) <= 0.0) or knots[0] < 0.0:
                raise ValueError("knots must be increasing and nonnegative")
            if np.any(values < 0.0):
                raise ValueError("tabulated kernel must be nonnegative")
        self.knots = knots
        self.knot_values = values

    @classmethod
    def constant(cls):
        return cls(CONSTANT)

    @classmethod
    def exponential(cls):
        return cls(EXPONENTIAL)

    @classmethod
    def indicator(cls, a: float):
        return cls(INDICATOR, a=a)

    @classmethod
    def disk_log(cls):
        return cls(DISK_LOG)

    @classmethod
    def tabulated(cls, knots, values):
        return cls(TABULATED, knots=knots, values=values)

    def __repr__(self):
        if self.kind == INDICATOR:
            return f"DensityKernel(indicator, a={self.a})"
        if self.kind == TABULATED:
            return f"DensityKernel(tabulated, {len(self.knots)} knots)"
        return f"DensityKernel({self.kind})"

    # -- pointwise values ------------------------------------------------

    def values(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == CONSTANT:
            return np.ones_like(t)
        if self.kind == EXPONENTIAL:
            return np.exp(-t)
        if self.kind == INDICATOR:
            return np.where(t <= self.a, 1.0, 0.0)
        if self.kind == DISK_LOG:
            out = np.zeros_like(t)
            mask = (t >= 0.5) & (t < 1.0)
            tm = t[mask]
            out[mask] = -np.log(tm) / (1.0 - tm * tm) ** 2
            return out
        out = np.interp(t, self.knots, self.knot_values, left=0.0, right=0.0)
        return out

    def breakpoints(self):
        """Radii where f is not smooth; quadrature panels split here."""
        if self.kind == INDICATOR:
            return [float(self.a)]
        if self.kind == DISK_LOG:
            return [0.5]
        if self.kind == TABULATED:
            return [float(k) for k in self.knots]
        return []

    # -- moments ----------------------------------------------------------

    def moment_partial(self, t):
        """int_0^t s f(s) ds, vectorized over t >= 0."""
        t = np.asarray(t, dtype=float)
        if self.kind == CONSTANT:
            return 0.5 * t * t
        if self.kind == EXPONENTIAL:
            return 1.0 - (1.0 + t) * np.exp(-t)
        if self.kind == INDICATOR:
            u = np.minimum(t, self.a)
            return 0.5 * u * u
        if self.kind == DISK_LOG:
            u = np.clip(t, 0.5, 1.0 - 1e-15)

            def prim(s):
                return -0.5 * (s * s * np.log(s) / (1.0 - s * s)
                               + 0.5 * np.log(1.0 - s * s))

            return np.where(t <= 0.5, 0.0, prim(u) - prim(0.5))
        return self._table_partial(t, with_log=False)

    def log_moment_partial(self, t):
        """int_0^t s f(s) log(s) ds, vectorized over t >= 0."""
        t = np.asarray(t, dtype=float)
        if self.kind == CONSTANT:
            return _x2_log_primitive(t)
        if self.kind == EXPONENTIAL:
            tt = np.where(t > 0.0, t, 1.0)
            val = (1.0 - EULER_GAMMA - (1.0 + tt) * np.exp(-tt) * np.log(tt)
                   - exp1(tt) - np.exp(-tt))
            return np.where(t > 0.0, val, 0.0)
        if self.kind == INDICATOR:
            return _x2_log_primitive(np.minimum(t, self.a))
        if self.kind == DISK_LOG:
            return self._disk_log_log_moment(t)
        return self._table_partial(t, with_log=True)

    def moment(self, r: float) -> float:
        """The normalizing moment c_r = 2 pi int_0^r t f(t) dt.

        Raises DegenerateKernelError when the kernel has no mass below r.
        """
        if not r > 0.0:
            raise RadiusRangeError("moment radius must be positive")
        if self.kind == DISK_LOG and r >= 1.0:
            raise RadiusRangeError("disk_log kernel lives on [1/2, 1)")
        c = 2.0 * math.pi * float(self.moment_partial(r))
        if c <= 0.0:
            raise DegenerateKernelError(
                f"kernel {self!r} carries no mass on [0, {r}]"
            )
        return c

    # -- variant helpers ---------------------------------------------------

    def _table_partial(self, t, with_log):
        scalar = np.ndim(t) == 0
        t = np.atleast_1d(np.asarray(t, dtype=float))
        knots, vals = self.knots, self.knot_values
        slopes = np.diff(vals) / np.diff(knots)
        inter = vals[:-1] - slopes * knots[:-1]
        if with_log:
            seg = _seg_log_integral
        else:
            seg = _seg_plain_integral
        full = seg(inter, slopes, knots[:-1], knots[1:])
        cum = np.concatenate(([0.0], np.cumsum(full)))
        idx = np.clip(np.searchsorted(knots, t, side="right") - 1, 0, len(knots) - 2)
        lo = knots[idx]
        hi = np.clip(t, knots[0], knots[-1])
        partial = seg(inter[idx], slopes[idx], lo, np.maximum(hi, lo))
        out = cum[idx] + partial
        out = np.where(t <= knots[0], 0.0, out)
        out = np.where(t >= knots[-1], cum[-1], out)
        return float(out[0]) if scalar else out

    def _disk_log_log_moment(self, t):
        scalar = np.ndim(t) == 0
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.zeros_like(t)
        mask = t > 0.5
        if np.any(mask):
            hi = np.clip(t[mask], 0.5, 1.0 - 1e-12)
            out[mask] = _panel_integral(
                lambda s: -s * np.log(s) ** 2 / (1.0 - s * s) ** 2, 0.5, hi
            )
        return float(out[0]) if scalar else out


def _x2_log_primitive(t):
    t = np.asarray(t, dtype=float)
    safe = np.where(t > 0.0, t, 1.0)
    return np.where(t > 0.0, 0.5 * safe * safe * np.log(safe) - 0.25 * safe * safe, 0.0)


def _seg_plain_integral(inter, slope, lo, hi):
    def prim(s):
        return inter * s * s / 2.0 + slope * s ** 3 / 3.0

    return prim(hi) - prim(lo)


def _seg_log_integral(inter, slope, lo, hi):
    def prim(s):
        s = np.asarray(s, dtype=float)
        safe = np.where(s > 0.0, s, 1.0)
        a_part = inter * (safe * safe / 2.0 * np.log(safe) - safe * safe / 4.0)
        b_part = slope * (safe ** 3 / 3.0 * np.log(safe) - safe ** 3 / 9.0)
        return np.where(s > 0.0, a_part + b_part, 0.0)

    return prim(hi) - prim(lo)


def _panel_integral(g, lo, hi, order=24, panels=16):
    """Fixed composite Gauss-Legendre of g over [lo, hi_i] for an array hi."""
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(0.0, 1.0, panels + 1)
    a = lo + (hi[:, None] - lo) * edges[None, :-1]
    b = lo + (hi[:, None] - lo) * edges[None, 1:]
    half = 0.5 * (b - a)
    nodes = a[:, :, None] + half[:, :, None] * (x[None, None, :] + 1.0)
    vals = g(nodes)
    return np.sum(vals * half[:, :, None] * w[None, None, :], axis=(1, 2))


# ---------------------------------------------------------------------------
# weights and metrics
# ---------------------------------------------------------------------------

CLASSICAL_FOCK = "classical_fock"
CLASSICAL_BERGMAN = "classical_bergman"
CUSTOM_RADIAL = "custom_radial"


class WeightModel:
    """A subharmonic weight phi with its complex Laplacian lap(phi).

    The Laplacian convention is lap = d^2/dz dzbar, one quarter of the
    divergence-form operator.  Custom weights are validated against a
    finite-difference Laplacian on a probe grid at construction.
    """

    def __init__(self, kind, phi, lap_phi, probe=None):
        self.kind = kind
        self.phi = phi
        self.lap_phi = lap_phi
        if kind == CUSTOM_RADIAL:
            if probe is None:
                raise ValueError("custom weights require a probe grid")
            self._validate_laplacian(np.asarray(probe, dtype=complex))

    @classmethod
    def classical_fock(cls):
        return cls(
            CLASSICAL_FOCK,
            phi=lambda z: 0.5 * np.abs(z) ** 2,
            lap_phi=lambda z: np.full(np.shape(z), 0.5),
        )

    @classmethod
    def classical_bergman(cls):
        return cls(
            CLASSICAL_BERGMAN,
            phi=lambda z: -0.5 * np.log1p(-np.abs(z) ** 2),
            lap_phi=lambda z: 0.5 / (1.0 - np.abs(z) ** 2) ** 2,
        )

    @classmethod
    def custom_radial(cls, phi, lap_phi, probe):
        return cls(CUSTOM_RADIAL, phi=phi, lap_phi=lap_phi, probe=probe)

    def _validate_laplacian(self, probe, step=1e-4, rel_tol=1e-4):
        fd = _fd_laplacian(self.phi, probe, step)
        stated = np.asarray(self.lap_phi(probe), dtype=float)
        scale = np.maximum(np.abs(stated), 1e-8)
        worst = float(np.max(np.abs(fd - stated) / scale))
        if worst > rel_tol:
            raise HypothesisViolationError(
                f"stated Laplacian disagrees with finite differences "
                f"(relative error {worst:.2e})"
            )

    def curvature(self, surface: SurfaceModel, z):
        """e^{2 nu(z)} lap(phi)(z), the density denominator's base term."""
        z = np.asarray(z, dtype=complex)
        lap = np.asarray(self.lap_phi(z), dtype=float)
        if surface.is_disk:
            return 4.0 * (1.0 - np.abs(z) ** 2) ** 2 * lap
        return 4.0 * lap

    def check_hypothesis(self, surface: SurfaceModel, probe):
        """Verify 1/C <= e^{2 nu} lap(phi) <= C on a probe set."""
        vals = self.curvature(surface, np.asarray(probe, dtype=complex))
        lo, hi = float(np.min(vals)), float(np.max(vals))
        if not (lo > 1e-12 and np.isfinite(hi)):
            raise HypothesisViolationError(
                f"curvature e^{{2nu}} lap(phi) not bounded in (0, inf): "
                f"range [{lo:.3e}, {hi:.3e}]"
            )
        return lo, hi


def _fd_laplacian(func, pts, step):
    pts = np.asarray(pts, dtype=complex)
    h = step
    acc = (
        np.asarray(func(pts + h), dtype=float)
        + np.asarray(func(pts - h), dtype=float)
        + np.asarray(func(pts + 1j * h), dtype=float)
        + np.asarray(func(pts - 1j * h), dtype=float)
        - 4.0 * np.asarray(func(pts), dtype=float)
    )
    return acc / (4.0 * h * h)


FUNDAMENTAL_PLANE = "fundamental_plane"
BERGMAN_DISK = "bergman_disk"
CUSTOM_METRIC = "custom"

TAU_DERIVED = "derived"
TAU_INLINE = "inline"


class MetricModel:
    """Conformal metric data entering the upper density denominator.

    Carries u_psi = psi - nu, the correction tau_psi, and the gradient
    term e^{2 nu} |del u_psi|^2.  On the plane the only admissible choice
    is the fundamental metric itself (u_psi == 0).  On the disk the
    default is u_psi = -log(1 - |z|^2)/2 with the display-consistent
    tau_psi = 2 (1 - |z|^2); ``tau_form="inline"`` switches to the
    alternative normalization 1 / (2 (1 - |z|^2)).

    Construction certifies the differential inequality
    lap(-e^{-2 u_psi}) >= 0 by finite differences on a probe grid.
    """

    def __init__(self, kind, u_psi, tau_psi, grad_u_sq, probe=None, tau_form=None):
        self.kind = kind
        self.u_psi = u_psi
        self.tau_psi = tau_psi
        self.grad_u_sq = grad_u_sq
        self.tau_form = tau_form
        if probe is not None:
            self.certify_diff_ineq(probe)

    @classmethod
    def fundamental_plane(cls):
        zero = lambda z: np.zeros(np.shape(z))
        return cls(FUNDAMENTAL_PLANE, u_psi=zero, tau_psi=zero, grad_u_sq=zero)

    @classmethod
    def bergman_disk(cls, tau_form: str = TAU_DERIVED):
        if tau_form not in (TAU_DERIVED, TAU_INLINE):
            raise ValueError(f"unknown tau_form {tau_form!r}")
        if tau_form == TAU_DERIVED:
            tau = lambda z: 2.0 * (1.0 - np.abs(z) ** 2)
        else:
            tau = lambda z: 0.5 / (1.0 - np.abs(z) ** 2)
        probe = disk_grid(50, 50, 0.95)
        return cls(
            BERGMAN_DISK,
            u_psi=lambda z: -0.5 * np.log1p(-np.abs(z) ** 2),
            tau_psi=tau,
            grad_u_sq=lambda z: np.abs(z) ** 2,
            probe=probe,
            tau_form=tau_form,
        )

    @classmethod
    def custom(cls, u_psi, tau_psi, grad_u_sq, probe):
        return cls(CUSTOM_METRIC, u_psi, tau_psi, grad_u_sq, probe=probe)

    def certify_diff_ineq(self, probe, step=1e-4, floor=-1e-8):
        """Finite-difference check that lap(-exp(-2 u_psi)) >= floor."""
        probe = np.asarray(probe, dtype=complex)
        neg_exp = lambda z: -np.exp(-2.0 * np.asarray(self.u_psi(z), dtype=float))
        fd = _fd_laplacian(neg_exp, probe, step)
        worst = float(np.min(fd))
        if worst < floor:
            raise HypothesisViolationError(
                f"differential inequality fails: min FD Laplacian {worst:.3e}"
            )
        return worst


# ---------------------------------------------------------------------------
# grids
# ---------------------------------------------------------------------------


def plane_grid(n: int, half_extent: float, anchor: complex = 0j):
    """Uniform n x n grid on the square of the given half side about anchor."""
    side = np.linspace(-half_extent, half_extent, n)
    re, im = np.meshgrid(side, side)
    return (anchor + re + 1j * im).ravel()


def disk_grid(n_rho: int, n_theta: int, rho_max: float, anchor: complex = 0j):
    """Grid uniform in distance radius and angle about anchor, plus anchor."""
    radii = rho_max * (np.arange(1, n_rho + 1)) / n_rho
    theta = 2.0 * np.pi * np.arange(n_theta) / n_theta
    u = (radii[:, None] * np.exp(1j * theta[None, :])).ravel()
    pts = mobius(anchor, u) if anchor != 0 else u
    return np.concatenate(([complex(anchor)], pts))


# ---------------------------------------------------------------------------
# density operations
# ---------------------------------------------------------------------------


def kernel_moment(f: DensityKernel, r: float) -> float:
    """c_r = 2 pi int_0^r t f(t) dt."""
    return f.moment(r)


def xi_r(surface: SurfaceModel, f: DensityKernel, r: float, z: complex, zeta: complex) -> float:
    """The smoothing kernel xi_r(z, zeta); zero outside the radius-r disk."""
    surface.require_inside(z, zeta)
    surface.require_radius(r)
    c_r = f.moment(r)
    dist = float(rho_many(surface, z, zeta))
    if dist >= r:
        return 0.0
    mw = metric_weights(surface, z, zeta)
    return float(f.values(dist)) * mw.e2nu * mw.drho_sq / c_r


def _xi_terms(surface, f, r, c_r, points, z):
    """Vector of xi_r(gamma, z) over gamma in points (xi centered at gamma)."""
    dist = rho_many(surface, z, points)
    inside = dist < r
    fv = f.values(dist) * inside
    if surface.is_disk:
        one_m = 1.0 - abs(z) ** 2
        e2nu = 4.0 * one_m * one_m
        drho = (1.0 - dist * dist) ** 2 / (one_m * one_m)
    else:
        e2nu = 4.0
        drho = np.ones_like(dist)
    return fv * e2nu * drho / c_r


def _denominator(weight, metric, surface, z, side):
    base = float(weight.curvature(surface, z))
    if side == UPPER:
        base = base + float(np.asarray(metric.tau_psi(z), dtype=float))
    if base < 1e-12:
        raise HypothesisViolationError(
            f"density denominator {base:.3e} below 1e-12 at z={z}"
        )
    return base


def density_sum(
    pointset: PointSet,
    weight: WeightModel,
    metric: MetricModel,
    f: DensityKernel,
    r: float,
    z: complex,
    side: str = LOWER,
) -> float:
    """Finite-r density of the point set at z.

    Upper side divides by e^{2 nu} lap(phi) + tau_psi, lower side by
    e^{2 nu} lap(phi) alone.
    """
    if side not in (UPPER, LOWER):
        raise ValueError(f"side must be '{UPPER}' or '{LOWER}'")
    surface = pointset.surface
    surface.require_inside(z)
    surface.require_radius(r)
    c_r = f.moment(r)
    denom = _denominator(weight, metric, surface, z, side)
    terms = _xi_terms(surface, f, r, c_r, pointset.coords, z)
    return float((math.pi / 2.0) * terms.sum() / denom)


@dataclass
class DensityReport:
    """Density values over an (r, z) grid plus the classification verdict."""

    surface_kind: str
    r_schedule: np.ndarray
    grid: np.ndarray
    upper: np.ndarray
    lower: np.ndarray
    edge_contaminated: np.ndarray
    sup_curve: np.ndarray
    inf_curve: np.ndarray
    verdict: str = INCONCLUSIVE
    margin: float = math.nan
    margin_guard: float = 0.02
    tail: int = 1
    meta: dict = field(default_factory=dict)

    SCHEMA_VERSION = 1

    def to_json_dict(self):
        return {
            "schema_version": self.SCHEMA_VERSION,
            "surface": self.surface_kind,
            "r_schedule": list(map(float, self.r_schedule)),
            "grid_re": [float(z.real) for z in self.grid],
            "grid_im": [float(z.imag) for z in self.grid],
            "upper": [[float(v) for v in row] for row in self.upper],
            "lower": [[float(v) for v in row] for row in self.lower],
            "edge_contaminated": [
                [bool(v) for v in row] for row in self.edge_contaminated
            ],
            "sup_curve": [float(v) for v in self.sup_curve],
            "inf_curve": [float(v) for v in self.inf_curve],
            "verdict": self.verdict,
            "margin": float(self.margin),
            "margin_guard": float(self.margin_guard),
            "tail": int(self.tail),
            "meta": self.meta,
        }

    @classmethod
    def from_json_dict(cls, data):
        grid = np.array(data["grid_re"], dtype=float) + 1j * np.array(
            data["grid_im"], dtype=float
        )
        return cls(
            surface_kind=data["surface"],
            r_schedule=np.asarray(data["r_schedule"], dtype=float),
            grid=grid,
            upper=np.asarray(data["upper"], dtype=float),
            lower=np.asarray(data["lower"], dtype=float),
            edge_contaminated=np.asarray(data["edge_contaminated"], dtype=bool),
            sup_curve=np.asarray(data["sup_curve"], dtype=float),
            inf_curve=np.asarray(data["inf_curve"], dtype=float),
            verdict=data["verdict"],
            margin=float(data["margin"]),
            margin_guard=float(data["margin_guard"]),
            tail=int(data["tail"]),
            meta=dict(data.get("meta", {})),
        )

    def save_json(self, path):
        from .serialize import dump_json

        dump_json(self.to_json_dict(), path)

    def save_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["r", "z_re", "z_im", "upper", "lower", "edge_contaminated"]
            )
            for i, r in enumerate(self.r_schedule):
                for j, z in enumerate(self.grid):
                    writer.writerow(
                        [
                            format(float(r), ".17g"),
                            format(z.real, ".17g"),
                            format(z.imag, ".17g"),
                            format(float(self.upper[i, j]), ".17g"),
                            format(float(self.lower[i, j]), ".17g"),
                            int(self.edge_contaminated[i, j]),
                        ]
                    )


def _edge_contaminated(surface, window, z, r):
    """True when the distance disk of radius r about z exits the window."""
    if window is None:
        return False
    a = window.anchor
    if window.kind == Window.PLANE_BALL:
        return abs(z - a) + r > window.extent
    if window.kind == Window.PLANE_SQUARE:
        return (
            abs((z - a).real) + r > window.extent
            or abs((z - a).imag) + r > window.extent
        )
    d = float(rho_many(surface, a, z))
    return (d + r) / (1.0 + d * r) > window.extent


def density_profile(
    pointset: PointSet,
    weight: WeightModel,
    metric: MetricModel,
    f: DensityKernel,
    grid,
    r_schedule,
    window: Optional[Window] = None,
    margin_guard: float = 0.02,
    tail: int = 1,
) -> DensityReport:
    """Fill the (r, z) density matrices and classify the configuration.

    Grid points whose radius-r disk exits the window are flagged as
    edge-contaminated and excluded from the sup/inf extremes, since set
    points outside the window would otherwise be missing from their sums.
    """
    grid = np.asarray(grid, dtype=complex)
    r_schedule = np.asarray(r_schedule, dtype=float)
    if grid.size == 0 or r_schedule.size == 0:
        raise ValueError("grid and r_schedule must be nonempty")
    surface = pointset.surface
    for r in r_schedule:
        surface.require_radius(float(r))
    if not surface.contains(grid):
        raise DomainError("grid point outside surface domain")
    weight.check_hypothesis(surface, grid)

    pts = pointset.coords
    n_r, n_z = len(r_schedule), len(grid)
    upper = np.zeros((n_r, n_z))
    lower = np.zeros((n_r, n_z))
    edge = np.zeros((n_r, n_z), dtype=bool)

    for j, z in enumerate(grid):
        z = complex(z)
        denom_lower = _denominator(weight, metric, surface, z, LOWER)
        denom_upper = _denominator(weight, metric, surface, z, UPPER)
        dist = rho_many(surface, z, pts)
        if surface.is_disk:
            one_m = 1.0 - abs(z) ** 2
            e2nu = 4.0 * one_m * one_m
            drho = (1.0 - dist * dist) ** 2 / (one_m * one_m)
        else:
            e2nu = 4.0
            drho = np.ones_like(dist)
        for i, r in enumerate(r_schedule):
            r = float(r)
            c_r = f.moment(r)
            inside = dist < r
            total = float(np.sum(f.values(dist) * inside * e2nu * drho)) / c_r
            upper[i, j] = (math.pi / 2.0) * total / denom_upper
            lower[i, j] = (math.pi / 2.0) * total / denom_lower
            edge[i, j] = _edge_contaminated(surface, window, z, r)

    sup_curve = np.full(n_r, math.nan)
    inf_curve = np.full(n_r, math.nan)
    for i in range(n_r):
        keep = ~edge[i]
        if not np.any(keep):
            raise ValueError(
                f"every grid point is edge-contaminated at r={r_schedule[i]}; "
                "enlarge the window or shrink the grid"
            )
        sup_curve[i] = float(np.max(upper[i, keep]))
        inf_curve[i] = float(np.min(lower[i, keep]))

    report = DensityReport(
        surface_kind=surface.kind,
        r_schedule=r_schedule,
        grid=grid,
        upper=upper,
        lower=lower,
        edge_contaminated=edge,
        sup_curve=sup_curve,
        inf_curve=inf_curve,
        margin_guard=margin_guard,
        tail=tail,
    )
    report.verdict, report.margin = _classify_curves(
        sup_curve, inf_curve, tail, margin_guard
    )
    return report


def _classify_curves(sup_curve, inf_curve, tail, margin_guard):
    if not (1 <= tail <= len(sup_curve)):
        raise ValueError("tail must be between 1 and the schedule length")
    sup_tail = sup_curve[-tail:]
    inf_tail = inf_curve[-tail:]
    interp_margin = float(1.0 - np.max(sup_tail))
    sampling_margin = float(np.min(inf_tail) - 1.0)
    interp_ok = bool(np.all(sup_tail < 1.0 - margin_guard))
    sampling_ok = bool(np.all(inf_tail > 1.0 + margin_guard))
    if interp_ok and sampling_ok:
        raise ValueError("malformed report: sup tail below and inf tail above 1")
    if interp_ok:
        return INTERPOLATION_SUFFICIENT, interp_margin
    if sampling_ok:
        return SAMPLING_SUFFICIENT, sampling_margin
    return INCONCLUSIVE, max(interp_margin, sampling_margin)


def classify(report: DensityReport, tail: int, margin_guard: Optional[float] = None):
    """Apply the threshold rule to the last ``tail`` entries of the curves."""
    guard = report.margin_guard if margin_guard is None else margin_guard
    verdict, _margin = _classify_curves(
        report.sup_curve, report.inf_curve, tail, guard
    )
    return verdict
