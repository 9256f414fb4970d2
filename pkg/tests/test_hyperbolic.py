import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from basket_sabr.hyperbolic import (HPoint, UncorrParams, density_uncorr_bound,
                                    log_density_uncorr_bound,
                                    density_uncorr_leading, drift_functional,
                                    geodesic_distance, geodesic_distance_xyz,
                                    heat_kernel_h3, log_density_uncorr_leading,
                                    log_heat_kernel_h3, log_sinhc_ratio)

coord = st.floats(min_value=-5.0, max_value=5.0, allow_nan=False)
level = st.floats(min_value=0.05, max_value=20.0, allow_nan=False)


def hpoints(draw=None):
    return st.builds(HPoint, coord, coord, level)


class TestGeodesic:
    def test_coincident_points(self):
        p = HPoint(0.0, 0.0, 1.0)
        assert geodesic_distance(p, p) == 0.0

    def test_vertical_geodesic(self):
        # distance along the fiber is |log a - log a0|
        d = geodesic_distance(HPoint(0, 0, 1.0), HPoint(0, 0, math.e))
        assert d == pytest.approx(1.0, abs=1e-14)

    def test_unit_horizontal_offset(self):
        # frozen: acosh(3/2) to 16 digits (mpmath)
        d = geodesic_distance(HPoint(0, 0, 1.0), HPoint(1, 0, 1.0))
        assert d == pytest.approx(0.9624236501192069, abs=1e-15)

    def test_rejects_nonpositive_level(self):
        with pytest.raises(ValueError):
            HPoint(0.0, 0.0, 0.0)
        with pytest.raises(ValueError):
            HPoint(0.0, 0.0, -1.0)

    @given(hpoints(), hpoints())
    def test_symmetry_and_positivity(self, p, q):
        d_pq = geodesic_distance(p, q)
        d_qp = geodesic_distance(q, p)
        assert d_pq == pytest.approx(d_qp, rel=1e-14, abs=1e-14)
        assert d_pq >= 0.0
        sep = max(abs(p.x - q.x), abs(p.y - q.y), abs(p.a - q.a))
        if sep > 1e-100:  # below that, squared separations underflow float64
            assert d_pq > 0.0

    def test_triangle_inequality_random_triples(self):
        rng = np.random.default_rng(7)
        for _ in range(1000):
            pts = [HPoint(*rng.uniform(-3, 3, 2), rng.uniform(0.1, 5.0))
                   for _ in range(3)]
            d01 = geodesic_distance(pts[0], pts[1])
            d12 = geodesic_distance(pts[1], pts[2])
            d02 = geodesic_distance(pts[0], pts[2])
            assert d02 <= d01 + d12 + 1e-12

    @given(coord, coord, coord, coord, level, level, coord, coord)
    def test_translation_invariance(self, x0, y0, x, y, a0, a, tx, ty):
        d0 = geodesic_distance_xyz(x0, y0, a0, x, y, a)
        d1 = geodesic_distance_xyz(x0 + tx, y0 + ty, a0, x + tx, y + ty, a)
        assert d1 == pytest.approx(d0, rel=1e-12, abs=1e-12)

    def test_monotone_in_level_around_fiber_minimum(self):
        # distance to (x, y, .) falls until a* = sqrt(a0^2 + x^2 + y^2), then rises
        x, y, a0 = 0.8, -0.4, 1.3
        a_star = math.sqrt(a0**2 + x**2 + y**2)
        grid_lo = np.linspace(0.05, a_star, 60)
        grid_hi = np.linspace(a_star, 8.0, 60)
        d_lo = geodesic_distance_xyz(0, 0, a0, x, y, grid_lo)
        d_hi = geodesic_distance_xyz(0, 0, a0, x, y, grid_hi)
        assert np.all(np.diff(d_lo) < 0)
        assert np.all(np.diff(d_hi) > 0)


class TestHeatKernel:
    def test_zero_distance_limit(self):
        want = (2 * math.pi) ** -1.5 * math.exp(-0.5)
        assert heat_kernel_h3(0.0, 1.0) == pytest.approx(want, rel=1e-14)

    def test_frozen_value(self):
        # frozen: (2 pi)^{-3/2} e^{-1} / sinh 1 (mpmath, 16 digits)
        assert heat_kernel_h3(1.0, 1.0) == pytest.approx(0.019875748452065723, rel=1e-13)

    def test_decreasing_in_distance(self):
        rho = np.linspace(0.0, 6.0, 200)
        vals = heat_kernel_h3(rho, 0.7)
        assert np.all(np.diff(vals) < 0)

    def test_no_overflow_at_large_distance(self):
        v = log_heat_kernel_h3(500.0, 0.01)
        assert np.isfinite(v)
        assert heat_kernel_h3(500.0, 0.01) == 0.0  # underflows cleanly

    def test_sinhc_branches_match_frozen_values(self):
        # mpmath references spanning the series/log branch point at 1e-4
        frozen = {1e-5: -1.6666666666611111e-11,
                  9.9e-5: -1.6334999994663356e-09,
                  1.1e-4: -2.0166666658532778e-09,
                  1e-3: -1.6666666111111146e-07,
                  0.5: -0.041324854612918109,
                  3.0: -1.2057587014029855}
        for rho, want in frozen.items():
            assert float(log_sinhc_ratio(rho)) == pytest.approx(want, abs=5e-14)

    @pytest.mark.parametrize("t", [0.25, 0.5, 1.0])
    def test_normalizes_against_hyperbolic_volume(self, t):
        # cylindrical reduction of the volume integral, measure a^{-3} dx dy da
        from scipy.special import roots_legendre
        un, wn = roots_legendre(400)
        r_hi = 12.0 * math.sqrt(t) + 3.0 * t + 2.0
        r = 0.5 * r_hi * (un + 1.0)
        wr = 0.5 * r_hi * wn
        u_hw = r_hi  # log a window, same scale
        u = u_hw * un
        wu = u_hw * wn
        A = np.exp(u)
        R, Au = np.meshgrid(r, A, indexing="ij")
        rho = np.log1p(((R**2 + (Au - 1) ** 2) / (2 * Au))
                       + np.sqrt(((R**2 + (Au - 1) ** 2) / (2 * Au))
                                 * (2 + (R**2 + (Au - 1) ** 2) / (2 * Au))))
        vals = heat_kernel_h3(rho, t) / Au**3 * 2 * math.pi * R
        jac = Au  # da = e^u du
        total = float(np.einsum("i,j,ij->", wr, wu, vals * jac))
        assert total == pytest.approx(1.0, abs=1e-4)


class TestDriftFunctional:
    def test_coincident(self):
        p = HPoint(0.3, -0.2, 2.0)
        assert drift_functional(p, p) == 0.0

    def test_known_value(self):
        got = drift_functional(HPoint(0, 0, 1.0), HPoint(1, 1, math.e))
        assert got == pytest.approx(-0.5, abs=1e-15)

    @given(hpoints(), hpoints())
    def test_antisymmetry(self, p, q):
        assert drift_functional(p, q) == pytest.approx(-drift_functional(q, p),
                                                       rel=1e-12, abs=1e-12)


class TestLeadingDensity:
    def test_at_start_point(self):
        prm = UncorrParams(a0=1.3)
        t = 0.04
        want = prm.a0**-3 * (2 * math.pi * t) ** -1.5
        got = density_uncorr_leading(0.0, 0.0, prm.a0, t, prm)
        assert got == pytest.approx(want, rel=1e-13)

    @given(coord, coord, level, st.floats(min_value=1e-3, max_value=2.0))
    def test_log_density_finite(self, x, y, a, t):
        # the linear value may underflow; the log form is the wide-range contract
        assert np.isfinite(log_density_uncorr_leading(x, y, a, t, UncorrParams(1.0)))

    @given(st.floats(min_value=-1.5, max_value=1.5),
           st.floats(min_value=-1.5, max_value=1.5),
           st.floats(min_value=0.3, max_value=3.0),
           st.floats(min_value=0.05, max_value=2.0))
    def test_positive_in_representable_range(self, x, y, a, t):
        assert density_uncorr_leading(x, y, a, t, UncorrParams(1.0)) > 0.0

    def test_recomposition_from_parts(self):
        # sqrt(g) e^A times the kernel without its e^{-t/2} factor
        prm = UncorrParams(a0=1.0)
        x, y, a, t = 0.1, -0.1, 1.2, 0.02
        rho = geodesic_distance(HPoint(0, 0, prm.a0), HPoint(x, y, a))
        composed = (a**-3 * math.exp(drift_functional(HPoint(0, 0, prm.a0),
                                                      HPoint(x, y, a)))
                    * heat_kernel_h3(rho, t) * math.exp(t / 2.0))
        assert density_uncorr_leading(x, y, a, t, prm) == pytest.approx(
            composed, rel=1e-12)


class TestDensityBound:
    @given(coord, coord, level, st.floats(min_value=1e-3, max_value=2.0))
    @settings(max_examples=50)
    def test_ratio_is_exact_exponential(self, x, y, a, t):
        prm = UncorrParams(1.0)
        lead = log_density_uncorr_leading(x, y, a, t, prm)
        bound = log_density_uncorr_bound(x, y, a, t, prm)
        # machine precision relative to the exponent magnitudes involved
        tol = 1e-12 + 1e-15 * abs(float(lead))
        assert float(bound - lead) == pytest.approx(-t / 8.0, abs=tol)

    def test_ratio_tends_to_one(self):
        prm = UncorrParams(1.0)
        ratios = [density_uncorr_bound(0.2, 0.1, 1.1, t, prm)
                  / density_uncorr_leading(0.2, 0.1, 1.1, t, prm)
                  for t in (0.1, 0.01, 0.001)]
        assert ratios[-1] == pytest.approx(1.0, abs=2e-4)
        assert ratios == sorted(ratios)

    def test_known_point(self):
        prm = UncorrParams(1.0)
        want = math.exp(-0.1) * density_uncorr_leading(0, 0, 1.0, 0.8, prm)
        assert density_uncorr_bound(0, 0, 1.0, 0.8, prm) == pytest.approx(
            want, rel=1e-14)
