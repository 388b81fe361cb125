import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from autocov_spectra.experiments import ks_statistic
from autocov_spectra.limit_law import Gamma0Law, write_cdf_csv


class TestG:
    def test_zero_at_left_endpoint(self):
        assert Gamma0Law(1.0).g(0.0) == 0.0

    def test_direct_arithmetic(self):
        assert Gamma0Law(1.0).g(1.0) == pytest.approx(2.0)
        assert Gamma0Law(2.0).g(1.0) == pytest.approx(0.5)

    def test_right_endpoint_identity(self):
        for g0 in np.linspace(0.1, 4.0, 40):
            law = Gamma0Law(g0)
            assert abs(law.g(g0) - g0 * (g0 + 1.0)) <= 1e-12 * g0 * (g0 + 1.0)

    def test_domain_enforced(self):
        with pytest.raises(ValueError):
            Gamma0Law(2.0).g(0.5)
        with pytest.raises(ValueError):
            Gamma0Law(1.0).g(1.5)

    @settings(max_examples=50, deadline=None)
    @given(st.floats(0.2, 3.0), st.floats(0.0, 1.0), st.floats(1e-6, 0.5))
    def test_strictly_increasing(self, g0, frac, step_frac):
        law = Gamma0Law(g0)
        lo, hi = law.domain
        x = lo + frac * (hi - lo)
        h = step_frac * (hi - x)
        if h > 1e-12:
            assert law.g(x + h) > law.g(x)


class TestGInverse:
    @pytest.mark.parametrize("g0", [0.5, 1.0, 2.0])
    def test_round_trip(self, g0):
        law = Gamma0Law(g0)
        lo, hi = law.domain
        for x in np.linspace(lo, hi, 25):
            assert law.g_inverse(law.g(x)) == pytest.approx(x, abs=1e-10)

    def test_endpoint(self):
        assert Gamma0Law(1.0).g_inverse(2.0) == pytest.approx(1.0)

    def test_bisection_oracle(self):
        # Bisect the monotone formula directly.
        law = Gamma0Law(2.0)
        lo, hi = law.domain
        target = 0.5
        for _ in range(80):
            mid = (lo + hi) / 2
            if law.g(mid) < target:
                lo = mid
            else:
                hi = mid
        assert law.g_inverse(0.5) == pytest.approx((lo + hi) / 2, abs=1e-10)
        assert law.g_inverse(0.5) == pytest.approx(1.0, abs=1e-10)

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            Gamma0Law(1.0).g_inverse(3.0)


class TestRadialCdf:
    def test_beyond_support(self):
        assert Gamma0Law(1.0).radial_cdf(np.sqrt(2.0) + 1e-9) == 1.0

    def test_atom_value(self):
        assert Gamma0Law(2.0).radial_cdf(0.0) == pytest.approx(0.5)

    def test_branch_point_continuity(self):
        law = Gamma0Law(2.0)
        r_star = law.inner_radius
        assert r_star == pytest.approx(1 / np.sqrt(2.0))
        below = law.radial_cdf(r_star - 1e-12)
        above = law.radial_cdf(r_star + 1e-12)
        assert abs(above - below) <= 1e-10
        assert below == pytest.approx(0.5, abs=1e-10)

    def test_nondecreasing(self):
        for g0 in (0.5, 1.0, 1.7, 2.5):
            law = Gamma0Law(g0)
            grid = np.linspace(0, law.support_radius * 1.1, 200)
            vals = law.radial_cdf(grid)
            assert np.all(np.diff(vals) >= -1e-12)


class TestQuantile:
    def test_p_one_hits_support_radius(self):
        for g0 in (0.5, 1.0, 2.0):
            law = Gamma0Law(g0)
            assert law.radial_quantile(1.0) == pytest.approx(law.support_radius, abs=1e-9)

    def test_inside_atom(self):
        assert Gamma0Law(2.0).radial_quantile(0.25) == 0.0

    def test_round_trip(self):
        for g0 in (0.5, 1.0, 2.0):
            law = Gamma0Law(g0)
            for p in np.linspace(0.01, 0.99, 21):
                r = law.radial_quantile(p)
                c = law.radial_cdf(r)
                assert c >= p - 1e-9
                if r > law.inner_radius:
                    assert c == pytest.approx(p, abs=1e-9)

    def test_invalid_p(self):
        with pytest.raises(ValueError):
            Gamma0Law(1.0).radial_quantile(1.5)


class TestSampler:
    def test_determinism(self):
        law = Gamma0Law(1.3)
        assert np.array_equal(law.sample(100, seed=5), law.sample(100, seed=5))

    def test_radial_ks(self):
        law = Gamma0Law(1.0)
        pts = law.sample(100_000, seed=6)
        assert ks_statistic(np.abs(pts), law.radial_cdf) <= 0.01

    def test_angle_uniformity_chi_square(self):
        from scipy.stats import chisquare

        law = Gamma0Law(0.8)
        pts = law.sample(100_000, seed=7)
        angles = np.mod(np.angle(pts[np.abs(pts) > 0]), 2 * np.pi)
        counts, _ = np.histogram(angles, bins=16, range=(0, 2 * np.pi))
        assert chisquare(counts).pvalue > 0.001

    def test_atom_fraction(self):
        pts = Gamma0Law(2.0).sample(100_000, seed=8)
        frac = np.mean(np.abs(pts) == 0.0)
        assert frac == pytest.approx(0.5, abs=0.01)


def test_cdf_csv_export(tmp_path):
    law = Gamma0Law(1.0)
    path = tmp_path / "cdf.csv"
    write_cdf_csv(path, law, np.linspace(0, law.support_radius, 10))
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "r,cdf"
    assert len(lines) == 11
    assert float(lines[-1].split(",")[1]) == pytest.approx(1.0)
