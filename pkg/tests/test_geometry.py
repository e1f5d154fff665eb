import math

import numpy as np
import pytest

from hpoincare.geometry import (SpaceParams, ball_volume,
                                hyperbolic_distance_from_origin,
                                laplacian_volume_coord,
                                radial_laplacian_geodesic, radius_for_volume,
                                sphere_area_of_radius, surface_measure,
                                surface_measure_slope, unit_ball_volume)
from hpoincare.numerics import DomainError, integrate
from hpoincare.profiles import PowerSegment, RadialProfile


class TestSpaceParams:
    def test_omega_values(self):
        assert SpaceParams(2).omega_n == pytest.approx(math.pi, rel=1e-15)
        assert SpaceParams(3).omega_n == pytest.approx(4 * math.pi / 3, rel=1e-15)

    def test_bad_dimension(self):
        with pytest.raises(DomainError):
            SpaceParams(1)

    def test_unit_ball_volume_recursion(self):
        # omega_n = omega_{n-2} * 2 pi / n
        for n in range(4, 12):
            assert unit_ball_volume(n) == pytest.approx(
                unit_ball_volume(n - 2) * 2 * math.pi / n, rel=1e-13)


class TestBallVolume:
    def test_zero(self):
        assert ball_volume(0.0, SpaceParams(3)) == 0.0

    def test_closed_form_n2(self):
        sp = SpaceParams(2)
        rho = np.linspace(0.01, 10.0, 50)
        want = 2 * math.pi * (np.cosh(rho) - 1)
        assert np.allclose(ball_volume(rho, sp), want, rtol=1e-10)

    def test_closed_form_n3(self):
        sp = SpaceParams(3)
        rho = np.linspace(0.01, 10.0, 50)
        want = math.pi * (np.sinh(2 * rho) - 2 * rho)
        assert np.allclose(ball_volume(rho, sp), want, rtol=1e-10)

    def test_against_quadrature(self):
        for n in (2, 3, 4, 5):
            sp = SpaceParams(n)
            for rho in (0.3, 1.0, 4.0):
                direct = integrate(lambda r: np.sinh(r) ** (n - 1), 0.0, rho)
                assert ball_volume(rho, sp) == pytest.approx(
                    sp.sphere_area * direct, rel=1e-10)

    def test_negative_rejected(self):
        with pytest.raises(DomainError):
            ball_volume(-1.0, SpaceParams(3))

    def test_strictly_increasing(self):
        sp = SpaceParams(4)
        rho = np.geomspace(1e-6, 50.0, 200)
        assert np.all(np.diff(ball_volume(rho, sp)) > 0)


class TestRadiusForVolume:
    def test_zero(self):
        assert radius_for_volume(0.0, SpaceParams(3)) == 0.0

    def test_inverts_closed_form_n2(self):
        s = 2 * math.pi * (math.cosh(1.0) - 1)
        assert radius_for_volume(s, SpaceParams(2)) == pytest.approx(1.0, rel=1e-12)

    def test_round_trip_all_dims(self):
        for n in range(2, 7):
            sp = SpaceParams(n)
            s = np.geomspace(1e-3, 1e6, 60)
            resid = np.abs(ball_volume(radius_for_volume(s, sp), sp) - s)
            assert np.all(resid <= np.maximum(1e-10 * s, 1e-14))

    def test_asymptotic_offset_converges(self):
        sp = SpaceParams(3)
        n = sp.n
        offs = [radius_for_volume(s, sp) - math.log(s) / (n - 1)
                for s in (1e6, 1e9)]
        # limit: -ln(n omega_n / ((n-1) 2^{n-1})) / (n-1)
        want = -math.log(sp.sphere_area / ((n - 1) * 2.0 ** (n - 1))) / (n - 1)
        # the subleading term decays like ln(s)/s, so the offset at s = 1e6
        # still carries a ~2e-5 correction
        assert offs[0] == pytest.approx(want, abs=1e-4)
        assert offs[1] == pytest.approx(want, abs=1e-7)

    def test_negative_rejected(self):
        with pytest.raises(DomainError):
            radius_for_volume(-1.0, SpaceParams(3))


class TestSurfaceMeasure:
    def test_n2_closed_form(self):
        sp = SpaceParams(2)
        s = ball_volume(1.0, sp)
        assert surface_measure(s, sp) == pytest.approx(2 * math.pi * math.sinh(1.0),
                                                       rel=1e-12)

    def test_lower_bound_strict(self):
        for n in (2, 3, 5):
            sp = SpaceParams(n)
            s = np.geomspace(1e-6, 1e9, 120)
            assert np.all(surface_measure(s, sp) > (n - 1) * s)

    def test_ratio_decreasing_to_one(self):
        sp = SpaceParams(3)
        s = np.geomspace(ball_volume(1.0, sp), 1e9, 80)
        ratio = surface_measure(s, sp) / ((sp.n - 1) * s)
        assert np.all(np.diff(ratio) < 0)
        assert 1.0 < ratio[-1] < 1.01

    def test_ratio_at_1e6(self):
        sp = SpaceParams(3)
        r = surface_measure(1e6, sp) / (2 * 1e6)
        assert 1.0 < r < 1.01

    def test_slope_matches_fd(self):
        sp = SpaceParams(3)
        s = np.array([0.5, 5.0, 500.0])
        h = 1e-6 * s
        fd = (surface_measure(s + h, sp) - surface_measure(s - h, sp)) / (2 * h)
        assert np.allclose(surface_measure_slope(s, sp), fd, rtol=1e-6)


class TestDistance:
    def test_origin(self):
        assert hyperbolic_distance_from_origin(0.0) == 0.0

    def test_closed_form_points(self):
        assert hyperbolic_distance_from_origin((math.e - 1) / (math.e + 1)) == \
            pytest.approx(1.0, rel=1e-14)
        assert hyperbolic_distance_from_origin(0.5) == pytest.approx(math.log(3.0),
                                                                     rel=1e-14)

    def test_domain(self):
        with pytest.raises(DomainError):
            hyperbolic_distance_from_origin(1.0)
        with pytest.raises(DomainError):
            hyperbolic_distance_from_origin(-0.1)


class _Quadratic:
    def __call__(self, rho):
        return np.asarray(rho, dtype=float) ** 2

    def d1(self, rho):
        return 2.0 * np.asarray(rho, dtype=float)

    def d2(self, rho):
        return 2.0 * np.ones_like(np.asarray(rho, dtype=float))


class _Constant:
    def d1(self, rho):
        return np.zeros_like(np.asarray(rho, dtype=float))

    d2 = d1


class TestRadialLaplacian:
    def test_constant_harmonic(self):
        assert radial_laplacian_geodesic(_Constant(), 1.3, SpaceParams(3)) == 0.0

    def test_quadratic_closed_form(self):
        # Laplacian of rho^2 is 2 + 2(n-1) rho coth(rho)
        val = radial_laplacian_geodesic(_Quadratic(), 1.0, SpaceParams(2))
        assert val == pytest.approx(2 + 2 / math.tanh(1.0), rel=1e-12)

    def test_origin_limit(self):
        val = radial_laplacian_geodesic(_Quadratic(), 0.0, SpaceParams(3))
        assert val == pytest.approx(3 * 2.0, rel=1e-14)

    def test_negative_rejected(self):
        with pytest.raises(DomainError):
            radial_laplacian_geodesic(_Quadratic(), -0.5, SpaceParams(3))


class TestLaplacianVolumeCoord:
    def test_constant_zero(self):
        v = RadialProfile([PowerSegment(0.0, np.inf, [(3.0, 0.0)])])
        assert laplacian_volume_coord(v, 2.0, SpaceParams(3)) == 0.0

    def test_linear_profile(self):
        # (A^2 v')' = (A^2)' slope = 2 A A' slope
        sp = SpaceParams(3)
        v = RadialProfile([PowerSegment(0.0, np.inf, [(0.5, 1.0)])])
        s = 4.0
        want = 2 * surface_measure(s, sp) * surface_measure_slope(s, sp) * 0.5
        assert laplacian_volume_coord(v, s, sp) == pytest.approx(want, rel=1e-10)

    def test_agrees_with_geodesic_form(self):
        # v(s) = u(F(s)) with u = rho^2: both forms give the same Laplacian
        sp = SpaceParams(3)
        u = _Quadratic()
        rho = np.array([0.5, 1.0, 2.5])
        s = ball_volume(rho, sp)

        class VolProfile:
            breakpoints = ()

            def derivative(self, sv):
                r = radius_for_volume(sv, sp)
                return u.d1(r) / sphere_area_of_radius(r, sp)

            def second_derivative(self, sv):
                h = 1e-5 * sv
                return (self.derivative(sv + h) - self.derivative(sv - h)) / (2 * h)

        lhs = laplacian_volume_coord(VolProfile(), s, sp)
        rhs = radial_laplacian_geodesic(u, rho, sp)
        assert np.allclose(lhs, rhs, rtol=1e-6)

    def test_breakpoint_warns(self):
        v = RadialProfile([PowerSegment(0.0, 1.0, [(1.0, 0.0)]),
                           PowerSegment(1.0, np.inf, [(1.0, -1.0)])])
        with pytest.warns(RuntimeWarning):
            laplacian_volume_coord(v, 1.0, SpaceParams(3))
