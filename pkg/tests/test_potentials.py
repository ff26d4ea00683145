import math

import numpy as np
import pytest

from sampdens import (
    DensityKernel,
    DomainError,
    GeometryError,
    PointSet,
    QuadratureSpec,
    WeightModel,
    bump_weight,
    e_mean_bound,
    evans_green,
    i_smoothed,
    local_corrector,
    pole_weight,
    rho,
    v_r,
    v_r_eps,
    xi_r,
)
from sampdens.geometry import disk_realize
from conftest import random_disk_points, random_plane_points

FOCK = WeightModel.classical_fock()
BERGMAN = WeightModel.classical_bergman()
CONST = DensityKernel.constant()
LOOSE = QuadratureSpec(rel_tolerance=1e-7, abs_tolerance=1e-9, max_refinements=8)


def i_constant_kernel_closed(rho_val, r):
    # log r - 1/2 + rho^2 / (2 r^2) inside the smoothing radius
    if rho_val >= r:
        return math.log(rho_val)
    return math.log(r) - 0.5 + rho_val**2 / (2 * r * r)


class TestISmoothed:
    def test_center_value(self, plane):
        assert i_smoothed(plane, CONST, 1.0, 0j, 0j) == pytest.approx(-0.5, abs=1e-14)

    def test_constant_kernel_closed_form(self, plane, rng):
        for _ in range(20):
            zeta, z = random_plane_points(rng, 2)
            r = rng.uniform(0.5, 3.0)
            got = i_smoothed(plane, CONST, r, zeta, z)
            assert got == pytest.approx(
                i_constant_kernel_closed(abs(z - zeta), r), abs=1e-12
            )

    def test_continuity_at_radius(self, plane, disk):
        r = 1.0
        for kernel in (CONST, DensityKernel.exponential()):
            below = i_smoothed(plane, kernel, r, 0j, r - 1e-11)
            above = i_smoothed(plane, kernel, r, 0j, r + 1e-11)
            assert abs(below - above) < 1e-10
        rd = 0.6
        below = i_smoothed(disk, CONST, rd, 0j, rd - 1e-11)
        above = i_smoothed(disk, CONST, rd, 0j, rd + 1e-11)
        assert abs(below - above) < 1e-10

    def test_equals_green_outside(self, plane, disk, rng):
        for _ in range(10):
            zeta, z = random_plane_points(rng, 2)
            r = abs(z - zeta) / 2.0
            if r <= 0:
                continue
            assert i_smoothed(plane, CONST, r, zeta, z) == pytest.approx(
                evans_green(plane, zeta, z), abs=1e-13
            )
        for _ in range(10):
            zeta, z = random_disk_points(rng, 2, rmax=0.9)
            d = rho(disk, zeta, z)
            if d < 0.05:
                continue
            assert i_smoothed(disk, CONST, d / 2, zeta, z) == pytest.approx(
                evans_green(disk, zeta, z), abs=1e-13
            )

    def test_dominates_green(self, plane, disk, rng):
        for kernel in (CONST, DensityKernel.exponential()):
            for _ in range(30):
                zeta, z = random_plane_points(rng, 2)
                r = rng.uniform(0.3, 2.5)
                if zeta == z:
                    continue
                assert i_smoothed(plane, kernel, r, zeta, z) >= evans_green(
                    plane, zeta, z
                ) - 1e-12
        for _ in range(30):
            zeta, z = random_disk_points(rng, 2, rmax=0.9)
            if zeta == z:
                continue
            assert i_smoothed(disk, CONST, 0.5, zeta, z) >= evans_green(
                disk, zeta, z
            ) - 1e-12

    def test_against_direct_integral_oracle(self, plane, disk):
        # I is the kernel mean of E(., z) about zeta: integrate the defining
        # expression xi_r(zeta, .) E(., z) e^{-2 nu} dm in polar coordinates
        # about the singular point
        from sampdens.quadrature import integrate_over_disk

        r = 1.0
        zeta, z = 0.2 + 0.1j, 0.5 - 0.2j
        c_r = CONST.moment(r)

        def integrand_plane(w):
            return np.log(np.maximum(np.abs(w - z), 1e-300)) / c_r

        region = disk_realize(plane, zeta, r)
        want = integrate_over_disk(
            integrand_plane, region.center, region.radius, LOOSE,
            polar_center=z, singular=True,
        )
        assert i_smoothed(plane, CONST, r, zeta, z) == pytest.approx(want, abs=1e-7)

        zeta_d, z_d = 0.1j, 0.3 + 0.2j
        rd = 0.7
        c_rd = CONST.moment(rd)
        region_d = disk_realize(disk, zeta_d, rd)

        def integrand_disk(w):
            dist2 = (np.abs(zeta_d - w) / np.abs(1 - np.conj(zeta_d) * w)) ** 2
            drho_sq = (1.0 - dist2) ** 2 / (1.0 - np.abs(w) ** 2) ** 2
            e_val = np.log(
                np.maximum(np.abs(w - z_d) / np.abs(1 - np.conj(z_d) * w), 1e-300)
            )
            return e_val * drho_sq / c_rd

        want_d = integrate_over_disk(
            integrand_disk, region_d.center, region_d.radius, LOOSE,
            polar_center=z_d, singular=True,
        )
        assert i_smoothed(disk, CONST, rd, zeta_d, z_d) == pytest.approx(
            want_d, abs=1e-7
        )

    def test_laplacian_matches_xi(self, plane):
        # e^{2 nu} lap_z I(zeta, z) = (pi/2) xi_r(zeta, z)
        zeta, r = 0j, 1.5
        z = 0.4 + 0.3j
        h = 1e-4
        stencil = [z + h, z - h, z + 1j * h, z - 1j * h]
        vals = [i_smoothed(plane, CONST, r, zeta, q) for q in stencil]
        lap = (sum(vals) - 4 * i_smoothed(plane, CONST, r, zeta, z)) / (4 * h * h)
        want = (math.pi / 2) * xi_r(plane, CONST, r, zeta, z)
        assert 4.0 * lap == pytest.approx(want, abs=1e-3)


class TestVr:
    def _weight(self, plane, pts, r=1.0, kernel=CONST):
        return pole_weight(FOCK, PointSet(plane, pts), kernel, r)

    def test_single_point_example(self, plane):
        sw = self._weight(plane, [0j])
        got = v_r(sw, 0.5)
        want = math.log(0.5) - (math.log(1.0) - 0.5 + 0.125)
        assert not got.at_pole
        assert got.value == pytest.approx(want, abs=1e-12)
        assert got.value == pytest.approx(-0.3181471805599453, abs=1e-10)

    def test_empty_sum(self, plane):
        sw = self._weight(plane, [0j])
        assert v_r(sw, 5.0).value == 0.0

    def test_pole_flag(self, plane):
        sw = self._weight(plane, [0j, 1.0])
        res = v_r(sw, 1.0)
        assert res.at_pole and res.value == -math.inf

    def test_nonpositive_everywhere(self, plane, disk, rng):
        pts = np.unique(random_plane_points(rng, 12, box=2.0))
        sw = self._weight(plane, pts, r=1.2)
        for z in random_plane_points(rng, 500, box=3.0):
            res = v_r(sw, z)
            if not res.at_pole:
                assert res.value <= 1e-14
        net = np.unique(random_disk_points(rng, 10, rmax=0.7))
        swd = pole_weight(BERGMAN, PointSet(disk, net), CONST, 0.6)
        for z in random_disk_points(rng, 500, rmax=0.95):
            res = v_r(swd, z)
            if not res.at_pole:
                assert res.value <= 1e-14

    def test_pole_structure(self, plane, rng):
        # |v_r - log rho_gamma| stays bounded as z -> gamma
        pts = np.array([0j, 2.0, -1.5j])
        sw = self._weight(plane, pts, r=1.0)
        consts = []
        for expo in range(1, 10):
            d = 10.0 ** (-expo / 2.5)
            if d >= 0.9:
                continue
            z = d * np.exp(1j * rng.random() * 2 * np.pi)
            res = v_r(sw, z)
            consts.append(abs(res.value - math.log(abs(z))))
        assert max(consts) < 1.0
        assert max(consts) - min(consts) < 0.6

    def test_distributional_laplacian(self, plane, rng):
        # away from the set, e^{2nu} lap v_r = -(pi/2) sum xi_r(gamma, .)
        pts = np.array([0j, 1.0 + 0.5j, -0.8j])
        sw = self._weight(plane, pts, r=2.0)
        z0 = 0.6 - 0.4j
        h = 1e-4
        stencil = [z0 + h, z0 - h, z0 + 1j * h, z0 - 1j * h]
        vals = [v_r(sw, q).value for q in stencil]
        lap = (sum(vals) - 4 * v_r(sw, z0).value) / (4 * h * h)
        want = -(math.pi / 2) * sum(
            xi_r(plane, CONST, 2.0, complex(g), z0) for g in pts
        )
        assert 4.0 * lap == pytest.approx(want, abs=1e-3)


class TestVrEps:
    def test_empty_set(self, plane):
        sw = bump_weight(FOCK, PointSet(plane, []), CONST, 1.0, eps=0.1, t=0.9)
        assert v_r_eps(sw, 0.3) == 0.0

    def test_far_from_set(self, plane):
        sw = bump_weight(FOCK, PointSet(plane, [0j]), CONST, 1.0, eps=0.1, t=0.9)
        assert v_r_eps(sw, 2.0 + 0j) == 0.0

    def test_center_closed_form(self, plane):
        # at the set point: t * (mean of E - mean of I)
        #   = t * (log eps - 1/2 - (log r - 1/2 + eps^2 / (4 r^2)))
        eps, t_bump, r = 0.1, 0.9, 1.0
        sw = bump_weight(FOCK, PointSet(plane, [0j]), CONST, r, eps=eps, t=t_bump)
        want = t_bump * (math.log(eps) - eps * eps / 4.0)
        assert v_r_eps(sw, 0j, LOOSE) == pytest.approx(want, abs=1e-7)

    def test_bounded_and_nonpositive(self, plane, rng):
        pts = np.unique(random_plane_points(rng, 6, box=1.5))
        ps = PointSet(plane, pts)
        sw = bump_weight(FOCK, ps, CONST, 1.0, eps=0.05, t=0.9)
        vals = []
        for z in random_plane_points(rng, 40, box=2.0):
            vals.append(v_r_eps(sw, z, LOOSE))
        vals = np.asarray(vals)
        assert np.all(vals <= 1e-7)
        assert np.all(np.isfinite(vals))
        assert vals.min() > -20.0  # recorded C_{r, eps}

    def test_finite_on_the_set(self, plane):
        sw = bump_weight(FOCK, PointSet(plane, [0.5]), CONST, 1.0, eps=0.1, t=0.9)
        val = v_r_eps(sw, 0.5, LOOSE)
        assert np.isfinite(val) and val < 0.0

    def test_near_mean_of_green(self, plane):
        # within C of t (pi eps^2)^{-1} int E near each set point
        eps, t_bump = 0.1, 0.9
        sw = bump_weight(FOCK, PointSet(plane, [0j]), CONST, 1.0, eps=eps, t=t_bump)
        for z in (0j, 0.05, 0.05j):
            got = v_r_eps(sw, z, LOOSE)
            mean_e = e_mean_bound(plane, 0j, eps, z, LOOSE)
            assert abs(got - t_bump * mean_e) < 1.0

    def test_disk_geometry(self, disk, rng):
        pts = np.unique(random_disk_points(rng, 4, rmax=0.5))
        ps = PointSet(disk, pts)
        sw = bump_weight(BERGMAN, ps, CONST, 0.5, eps=0.05, t=0.9)
        for z in random_disk_points(rng, 10, rmax=0.6):
            val = v_r_eps(sw, z, LOOSE)
            assert np.isfinite(val) and val <= 1e-7

    def test_bump_validation(self, plane):
        ps = PointSet(plane, [0j, 1.0])
        with pytest.raises(Exception):
            bump_weight(FOCK, ps, CONST, 1.0, eps=0.8, t=0.9)  # eps > separation
        with pytest.raises(ValueError):
            bump_weight(FOCK, ps, CONST, 1.0, eps=0.1, t=1.5)


class TestWeightSampleSerialization:
    def test_pole_csv(self, tmp_path, plane, rng):
        from sampdens.potentials import save_weight_samples

        sw = pole_weight(FOCK, PointSet(plane, [0j, 1.5]), CONST, 1.0)
        grid = [0.5 + 0j, 0j, 3.0 + 0j]
        path = tmp_path / "w.csv"
        save_weight_samples(path, sw, grid)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "z_re,z_im,value,at_pole"
        assert len(lines) == 4
        row = lines[2].split(",")
        assert row[3] == "1" and row[2] == "-inf"

    def test_bump_csv_finite(self, tmp_path, plane):
        from sampdens.potentials import save_weight_samples

        sw = bump_weight(FOCK, PointSet(plane, [0j]), CONST, 1.0, eps=0.1, t=0.9)
        path = tmp_path / "w.csv"
        save_weight_samples(path, sw, [0j, 0.2 + 0j], LOOSE)
        lines = path.read_text().strip().splitlines()
        vals = [float(line.split(",")[2]) for line in lines[1:]]
        assert all(np.isfinite(v) and v <= 0 for v in vals)


class TestEMeanBound:
    def test_plane_center_scaling(self, plane):
        for eps in (0.05, 0.1, 0.2):
            got = e_mean_bound(plane, 0j, eps, 0j)
            assert got == pytest.approx(math.log(eps) - 0.5, abs=1e-8)

    def test_plane_offcenter_closed_form(self, plane, rng):
        # mean of log|u - a| over the eps-disk: log eps - (1 - |a|^2/eps^2)/2
        eps = 0.2
        for _ in range(10):
            a = eps * 0.9 * math.sqrt(rng.random()) * np.exp(2j * np.pi * rng.random())
            got = e_mean_bound(plane, 1j, eps, 1j + a)
            want = math.log(eps) - 0.5 * (1 - abs(a) ** 2 / eps**2)
            assert got == pytest.approx(want, abs=1e-8)

    def test_bound_random_trials(self, plane, disk, rng):
        for _ in range(50):
            g = random_plane_points(rng, 1)[0]
            eps = rng.uniform(0.05, 0.5)
            z = g + eps * 0.95 * math.sqrt(rng.random()) * np.exp(
                2j * np.pi * rng.random()
            )
            val = e_mean_bound(plane, g, eps, z, LOOSE)
            assert val <= math.log(1 / eps) + 0.5 + 1e-6
        for _ in range(50):
            g = random_disk_points(rng, 1, rmax=0.6)[0]
            eps = rng.uniform(0.05, 0.3)
            region = disk_realize(disk, g, eps * 0.95)
            z = region.center + region.radius * math.sqrt(rng.random()) * np.exp(
                2j * np.pi * rng.random()
            )
            val = e_mean_bound(disk, g, eps, z, LOOSE)
            assert val <= math.log(1 / eps) + 0.5 + 1e-6

    def test_precondition(self, plane):
        with pytest.raises(DomainError):
            e_mean_bound(plane, 0j, 0.1, 1.0)


class TestLocalCorrector:
    def test_fock_at_origin_vanishes(self, plane):
        val = local_corrector(plane, FOCK, 0j, 0.5, 0.2 + 0.1j)
        assert abs(val) < 1e-10

    def test_fock_closed_form(self, plane, rng):
        # F_gamma(z) = conj(gamma) (z - gamma)
        for _ in range(25):
            g = random_plane_points(rng, 1, box=2.0)[0]
            sigma = rng.uniform(0.2, 0.8)
            z = g + sigma * 0.9 * math.sqrt(rng.random()) * np.exp(
                2j * np.pi * rng.random()
            )
            got = local_corrector(plane, FOCK, g, sigma, z)
            assert got == pytest.approx(np.conj(g) * (z - g), abs=1e-8)

    def test_vanishes_at_gamma(self, plane, disk):
        assert local_corrector(plane, FOCK, 1 + 1j, 0.3, 1 + 1j) == 0
        assert local_corrector(disk, BERGMAN, 0.2j, 0.2, 0.2j) == 0

    def test_cauchy_riemann_residual(self, plane):
        g = 0.7 - 0.3j
        h = 1e-5

        def f(z):
            return local_corrector(plane, FOCK, g, 0.5, z)

        z = g + 0.2
        fx = (f(z + h) - f(z - h)) / (2 * h)
        fy = (f(z + 1j * h) - f(z - 1j * h)) / (2 * h)
        # holomorphy: d/dx = -i d/dy
        assert abs(fx - (-1j) * fy) < 1e-6

    def test_weight_comparison_bounded(self, plane, rng):
        # 2 phi(gamma) - 2 phi(z) + 2 Re F(z) bounded on the sigma-disk
        g = 1.5 + 0.5j
        sigma = 0.5
        worst = 0.0
        for _ in range(200):
            z = g + sigma * math.sqrt(rng.random()) * np.exp(
                2j * np.pi * rng.random()
            )
            F = local_corrector(plane, FOCK, g, sigma, z)
            phi = lambda w: 0.5 * abs(w) ** 2
            q = 2 * phi(g) - 2 * phi(z) + 2 * F.real
            worst = max(worst, abs(q))
        assert worst <= sigma * sigma + 1e-8  # recorded C for the Fock weight

    def test_disk_weight_corrector(self, disk):
        g = 0.3 + 0.1j
        val = local_corrector(disk, BERGMAN, g, 0.15, g + 0.05)
        assert np.isfinite(val.real) and np.isfinite(val.imag)

    def test_geometry_error(self, disk):
        with pytest.raises(GeometryError):
            local_corrector(disk, BERGMAN, 0.9, 0.6, 0.9)

    def test_precondition(self, plane):
        with pytest.raises(DomainError):
            local_corrector(plane, FOCK, 0j, 0.2, 1.0)
