"""Frame bounds and min-norm interpolation in truncated model spaces.

Ground truth for the density classifications at desk scale: in the span of
the first N + 1 monomials of the classical Fock or Bergman space, the
sampling operator of a weighted point configuration is the Hermitian
matrix

    M_{mn} = sum_gamma w_gamma conj(e_m(gamma)) e_n(gamma),
    w_gamma = e^{-2 phi(gamma)} A(D_sigma(gamma)),

whose extreme eigenvalues are the truncated frame bounds.  Interpolation
behavior is probed by the normalized kernel Gram and by solving the
kernel-Gram system for minimum-norm interpolants.  All linear algebra is
dense, deterministic LAPACK; every Fock quantity is assembled from
exp-regularized basis values so nothing overflows at useful window radii.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg
import scipy.special

from .densities import WeightModel
from .errors import DomainError, HypothesisViolationError
from .geometry import SurfaceModel, disk_realize
from .pointsets import PointSet, separation_constant
from .quadrature import DEFAULT_SPEC, QuadratureSpec, integrate_over_disk

FOCK = "fock"
BERGMAN = "bergman"

_verified_probes: set = set()


@dataclass(frozen=True)
class TruncatedSpace:
    """Span of the monomials z^n, n <= degree, in a classical model space.

    Monomial norms: ||z^n||^2 = pi n! (Fock, weight e^{-|z|^2} against
    Lebesgue measure) and pi / (n + 1) (Bergman, unweighted area measure).
    Orthonormality of the first basis functions is verified by quadrature
    once per (kind, probe degree).
    """

    kind: str
    degree: int

    def __post_init__(self):
        if self.kind not in (FOCK, BERGMAN):
            raise ValueError(f"unknown space kind {self.kind!r}")
        if self.degree < 0:
            raise ValueError("degree must be nonnegative")
        probe = min(self.degree, 8)
        key = (self.kind, probe)
        if key not in _verified_probes:
            _verify_orthonormal(self, probe)
            _verified_probes.add(key)

    @property
    def surface(self) -> SurfaceModel:
        return SurfaceModel.unit_disk() if self.kind == BERGMAN else SurfaceModel.plane()

    @property
    def dim(self) -> int:
        return self.degree + 1

    @property
    def weight(self) -> WeightModel:
        if self.kind == FOCK:
            return WeightModel.classical_fock()
        return WeightModel.classical_bergman()

    def log_norm_sq(self, n):
        n = np.asarray(n, dtype=float)
        if self.kind == FOCK:
            return math.log(math.pi) + scipy.special.gammaln(n + 1.0)
        return math.log(math.pi) - np.log(n + 1.0)

    def phi(self, z):
        z = np.asarray(z, dtype=complex)
        if self.kind == FOCK:
            return 0.5 * np.abs(z) ** 2
        return -0.5 * np.log1p(-np.abs(z) ** 2)

    def scaled_basis(self, points):
        """Matrix of e_n(gamma) e^{-phi(gamma)}, rows points, columns n.

        Computed in log space so Fock values at large |gamma| never
        overflow; all entries are bounded by order one.
        """
        pts = np.asarray(points, dtype=complex).ravel()
        if self.kind == BERGMAN and np.any(np.abs(pts) >= 1.0):
            raise DomainError("Bergman evaluation outside the unit disk")
        n = np.arange(self.degree + 1)
        mag = np.abs(pts)
        safe = np.where(mag > 0.0, mag, 1.0)
        logmag = np.where(mag > 0.0, np.log(safe), -np.inf)
        phi = np.asarray(self.phi(pts), dtype=float)
        with np.errstate(invalid="ignore"):
            log_abs = (
                n[None, :] * logmag[:, None]
                - 0.5 * self.log_norm_sq(n)[None, :]
                - phi[:, None]
            )
        at_origin = (mag[:, None] == 0.0) & (n[None, :] == 0)
        log_abs = np.where(
            at_origin,
            -0.5 * self.log_norm_sq(n)[None, :] - phi[:, None],
            log_abs,
        )
        phase = np.where(mag > 0.0, pts / safe, 1.0)
        return np.exp(log_abs) * phase[:, None] ** n[None, :]

    def kernel_diag_scaled(self, points):
        """K_N(gamma, gamma) e^{-2 phi(gamma)} for each point."""
        b = self.scaled_basis(points)
        return np.sum(np.abs(b) ** 2, axis=1)


def _verify_orthonormal(space, probe_degree, tol=1e-8):
    """Quadrature check that the first basis functions are orthonormal."""
    if space.kind == FOCK:
        r_hi = 14.0
        weight = lambda r: np.exp(-r * r)
    else:
        r_hi = 1.0 - 1e-12
        weight = lambda r: np.ones_like(r)
    x, w = np.polynomial.legendre.leggauss(120)
    r = 0.5 * r_hi * (x + 1.0)
    wr = 0.5 * r_hi * w
    n_theta = 4 * probe_degree + 8
    theta = 2.0 * np.pi * np.arange(n_theta) / n_theta
    pts = r[:, None] * np.exp(1j * theta[None, :])
    n = np.arange(probe_degree + 1)
    mono = pts[..., None] ** n
    norms = np.exp(0.5 * space.log_norm_sq(n))
    basis = mono / norms
    wgt_r = weight(r) * r * wr * (2.0 * np.pi / n_theta)
    gram = np.einsum("r,rtm,rtn->mn", wgt_r, np.conj(basis), basis)
    err = float(np.max(np.abs(gram - np.eye(probe_degree + 1))))
    if err > tol:
        raise HypothesisViolationError(
            f"basis orthonormality check failed at {err:.3e}"
        )


def kernel_eval(space: TruncatedSpace, z: complex, w: complex) -> complex:
    """Reproducing kernel of the full model space.

    Fock: exp(z conj(w)) / pi.  Bergman: 1 / (pi (1 - z conj(w))^2).
    """
    if space.kind == BERGMAN:
        if abs(z) >= 1.0 or abs(w) >= 1.0:
            raise DomainError("Bergman kernel needs points inside the disk")
        return 1.0 / (math.pi * (1.0 - z * np.conj(w)) ** 2)
    return complex(np.exp(z * np.conj(w)) / math.pi)


@dataclass
class SamplingExperiment:
    """A truncated-space frame experiment for a weighted configuration.

    ``weights`` holds w_gamma = e^{-2 phi(gamma)} A(D_sigma(gamma)); the
    plane area factor pi sigma^2 is constant and folded into a single
    global constant (taken as 1), while disk areas are computed by
    quadrature once per point against the measure dm / (1 - |z|^2).
    """

    space: TruncatedSpace
    points: PointSet
    weights: np.ndarray
    sigma: Optional[float] = None
    results: Optional[tuple] = None

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float).ravel()
        if self.weights.shape != (len(self.points),):
            raise ValueError("one weight per point required")
        if np.any(self.weights <= 0.0) or not np.all(np.isfinite(self.weights)):
            raise ValueError("weights must be positive and finite")


def build_sampling_experiment(
    space: TruncatedSpace,
    points: PointSet,
    sigma: Optional[float] = None,
    q: QuadratureSpec = DEFAULT_SPEC,
) -> SamplingExperiment:
    """Assemble the experiment with its canonical weights."""
    if points.surface.kind != space.surface.kind:
        raise DomainError("point set surface does not match the space")
    pts = points.coords
    phi = space.phi(pts)
    if space.kind == FOCK:
        area = np.ones(pts.size)
    else:
        if sigma is None:
            sep = separation_constant(points)
            sigma = min(sep, 0.5)
        area = np.empty(pts.size)
        surface = SurfaceModel.unit_disk()
        for k, gamma in enumerate(pts):
            region = disk_realize(surface, complex(gamma), sigma)
            area[k] = integrate_over_disk(
                lambda u: 1.0 / (1.0 - np.abs(u) ** 2),
                region.center,
                region.radius,
                q,
                what="A_g(D_sigma)",
            )
    weights = np.exp(-2.0 * np.asarray(phi, dtype=float)) * area
    return SamplingExperiment(space, points, weights, sigma=sigma)


def frame_bounds(exp: SamplingExperiment):
    """Extreme eigenvalues of the sampling matrix of the experiment.

    The quadratic form of the returned matrix on coefficient vectors c is
    sum_gamma w_gamma |F(gamma)|^2 e^{-2 phi(gamma)} for F = sum c_n e_n,
    assembled from scaled basis rows; an experiment with fewer points
    than the dimension is reported with lower bound 0, not an error.
    """
    scaled = exp.space.scaled_basis(exp.points.coords)
    phi = np.asarray(exp.space.phi(exp.points.coords), dtype=float)
    # weights already contain e^{-2 phi}; the scaled rows do too, so strip one copy
    row_scale = np.sqrt(exp.weights * np.exp(2.0 * phi))
    b = scaled * row_scale[:, None]
    m = b.conj().T @ b
    eigvals = scipy.linalg.eigvalsh(m)
    lam_min, lam_max = float(eigvals[0]), float(eigvals[-1])
    if lam_min < -1e-10 * max(lam_max, 1.0):
        raise HypothesisViolationError(
            f"sampling matrix not numerically PSD: lambda_min {lam_min:.3e}"
        )
    lam_min = max(lam_min, 0.0)
    if len(exp.points) < exp.space.dim:
        lam_min = 0.0
    exp.results = (lam_min, lam_max)
    return lam_min, lam_max


def riesz_lower_bound(space: TruncatedSpace, points: PointSet) -> float:
    """Least eigenvalue of the normalized full-kernel Gram, in [0, 1]."""
    pts = points.coords
    if pts.size == 0:
        raise ValueError("at least one point required")
    if space.kind == FOCK:
        diff = pts[:, None] - pts[None, :]
        cross = pts[:, None] * np.conj(pts[None, :])
        gram = np.exp(-0.5 * np.abs(diff) ** 2 + 1j * np.imag(cross))
    else:
        if np.any(np.abs(pts) >= 1.0):
            raise DomainError("Bergman Gram needs points inside the disk")
        one_m = 1.0 - np.abs(pts) ** 2
        gram = (one_m[:, None] * one_m[None, :]) / (
            1.0 - pts[:, None] * np.conj(pts[None, :])
        ) ** 2
    lam = float(scipy.linalg.eigvalsh(gram)[0])
    return min(max(lam, 0.0), 1.0 + 1e-10)


@dataclass
class InterpolationResult:
    coefficients: np.ndarray
    residual: float
    norm: float
    condition: float
    lstsq_fallback: bool = False


def min_norm_interpolate(
    space: TruncatedSpace,
    points: PointSet,
    values,
    ridge: float = 0.0,
) -> InterpolationResult:
    """Solve the kernel-Gram system for the min-norm interpolant.

    The interpolant is F = sum_j c_j K_N(., gamma_j) in the truncated
    space; the system is solved in exp-scaled variables (Gram entries
    K_N(g_j, g_k) e^{-phi_j - phi_k}) for conditioning, and the residual
    max_gamma |F(gamma) - s_gamma| is recomputed from the solution.  A
    numerically singular Gram falls back to least squares and sets the
    fallback flag; ``ridge`` optionally regularizes the diagonal.
    """
    pts = points.coords
    values = np.asarray(values, dtype=complex).ravel()
    if values.shape != (pts.size,):
        raise ValueError("one target value per point required")
    scaled = space.scaled_basis(pts)
    gram = scaled @ scaled.conj().T
    phi = np.asarray(space.phi(pts), dtype=float)
    rhs = values * np.exp(-phi)
    if ridge:
        gram = gram + ridge * np.eye(gram.shape[0])
    sing = scipy.linalg.svdvals(gram)
    s_max = float(sing[0])
    s_min = float(sing[-1])
    condition = math.inf if s_min == 0.0 else s_max / s_min
    fallback = s_min <= s_max * gram.shape[0] * np.finfo(float).eps
    if not fallback:
        try:
            coef_scaled = scipy.linalg.solve(gram, rhs, assume_a="pos")
        except scipy.linalg.LinAlgError:
            fallback = True
    if fallback:
        coef_scaled, *_ = scipy.linalg.lstsq(gram, rhs)
    resid_scaled = gram @ coef_scaled - rhs
    residual = float(np.max(np.abs(resid_scaled * np.exp(phi)))) if pts.size else 0.0
    norm_sq = float(np.real(np.vdot(coef_scaled, gram @ coef_scaled)))
    coefficients = coef_scaled * np.exp(-phi)
    return InterpolationResult(
        coefficients=coefficients,
        residual=residual,
        norm=math.sqrt(max(norm_sq, 0.0)),
        condition=condition,
        lstsq_fallback=bool(fallback),
    )
