import math

import numpy as np
import pytest
from scipy.special import gamma, jv

from randclt import sphere
from randclt.errors import ParameterError
from randclt.quadrature import integrate
from randclt.streams import master_rng


def bessel_jn(n, s):
    """Closed Bessel form of the first-coordinate characteristic function."""
    s = abs(s)
    if s < 1e-12:
        return 1.0
    nu = (n - 2) / 2.0
    return gamma(n / 2.0) * (2.0 / s) ** nu * jv(nu, s)


class TestDensityCdf:
    def test_density_examples(self):
        assert sphere.theta1_density(3, 0.4) == pytest.approx(0.5, abs=1e-12)
        assert sphere.theta1_density(2, 0.0) == pytest.approx(1 / math.pi, abs=1e-12)
        assert sphere.theta1_density(4, 0.0) == pytest.approx(2 / math.pi, abs=1e-12)

    def test_density_outside_support(self):
        assert sphere.theta1_density(5, 1.2) == 0.0
        assert sphere.theta1_density(5, -3.0) == 0.0

    @pytest.mark.parametrize("n", range(2, 65))
    def test_density_normalization(self, n):
        # n = 2 has an integrable endpoint singularity; integrate through the
        # x = sin(v) substitution which is smooth for every n >= 2
        def f(v):
            if n == 2:
                return np.ones_like(v)
            return np.exp((n - 2) * np.log(np.cos(v)))

        val = 2 * math.exp(sphere.log_normalizer(n)) * integrate(f, 0, math.pi / 2, tol=1e-13)
        assert val == pytest.approx(1.0, abs=1e-10)

    def test_density_even(self):
        x = np.linspace(-0.99, 0.99, 41)
        assert np.allclose(sphere.theta1_density(7, x), sphere.theta1_density(7, -x))

    def test_cdf_examples(self):
        for n in (2, 3, 10, 50):
            assert sphere.theta1_cdf(n, 0.0) == pytest.approx(0.5, abs=1e-14)
        assert sphere.theta1_cdf(3, 0.5) == pytest.approx(0.75, abs=1e-14)
        assert sphere.theta1_cdf(4, -1.5) == 0.0
        assert sphere.theta1_cdf(4, 1.0) == 1.0

    def test_cdf_against_quadrature(self):
        oracle = 0.5 + integrate(lambda t: sphere.theta1_density(6, t), 0.0, 0.3, tol=1e-13)
        assert sphere.theta1_cdf(6, 0.3) == pytest.approx(oracle, abs=1e-10)

    def test_cdf_monotone(self):
        x = np.linspace(-1, 1, 201)
        vals = sphere.theta1_cdf(9, x)
        assert np.all(np.diff(vals) >= -1e-15)

    def test_quantile_roundtrip(self):
        u = np.linspace(0.01, 0.99, 21)
        x = sphere.theta1_quantile(12, u)
        assert np.allclose(sphere.theta1_cdf(12, x), u, atol=1e-12)

    def test_sphere_law_dataclass(self):
        law = sphere.SphereLaw.for_dimension(4)
        assert law.normalizer == pytest.approx(2 / math.pi, abs=1e-14)
        assert law.cdf(0.0) == pytest.approx(0.5)


class TestSampler:
    def test_unit_norm(self):
        rng = master_rng(0)
        v = sphere.sample_unit_sphere(2, rng)
        assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-12)

    def test_determinism(self):
        a = sphere.sample_unit_sphere(10, master_rng(123))
        b = sphere.sample_unit_sphere(10, master_rng(123))
        assert np.array_equal(a, b)

    def test_invalid_dimension(self):
        with pytest.raises(ParameterError):
            sphere.sample_unit_sphere(1, master_rng(0))

    def test_first_coordinate_second_moment(self):
        # E theta_1^2 = 1/n by isotropy; 1e5 samples within 4 stderr
        n, N = 5, 10**5
        batch = sphere.sample_unit_sphere_batch(n, N, master_rng(7))
        sq = batch[:, 0] ** 2
        se = sq.std(ddof=1) / math.sqrt(N)
        assert abs(sq.mean() - 1.0 / n) < 4 * se

    def test_marginal_law(self):
        n, N = 6, 20000
        batch = sphere.sample_unit_sphere_batch(n, N, master_rng(11))
        xs = np.sort(batch[:, 0])
        emp = np.arange(1, N + 1) / N
        gap = np.max(np.abs(emp - sphere.theta1_cdf(n, xs)))
        assert gap < 1.63 / math.sqrt(N) * 1.5  # KS 99% band with slack


class TestCharacteristicFunction:
    def test_uniform_case_closed_form(self):
        for s in np.arange(0.1, 10.01, 0.1):
            assert abs(sphere.jn(3, s) - math.sin(s) / s) < 1e-10

    def test_at_zero(self):
        for n in (2, 5, 17):
            assert sphere.jn(n, 0.0) == pytest.approx(1.0, abs=1e-12)

    def test_n5_closed_form(self):
        expected = 3 * (math.sin(1) - math.cos(1))
        assert sphere.jn(5, 1.0) == pytest.approx(expected, abs=1e-12)

    @pytest.mark.parametrize("n", [2, 4, 9, 25, 60])
    def test_against_bessel(self, n):
        for s in (0.3, 2.7, 11.0, 40.0):
            assert sphere.jn(n, s) == pytest.approx(bessel_jn(n, s), abs=1e-11)

    def test_bounded_even(self):
        s = np.linspace(-25, 25, 101)
        vals = sphere.jn_many(8, s)
        assert np.all(np.abs(vals) <= 1 + 1e-12)
        assert np.allclose(vals, sphere.jn_many(8, -s))

    def test_cutoff_returns_zero(self):
        assert sphere.jn(9, 1e3 * math.sqrt(9) + 1.0) == 0.0

    def test_subgaussian_envelope(self):
        ts = np.linspace(0.0, 10.0, 401)
        for n in (5, 10, 20, 50):
            lhs = np.abs(sphere.jn_many(n, ts * math.sqrt(n)))
            rhs = 5 * np.exp(-0.5 * ts**2) + 4 * math.exp(-n / 12)
            assert np.all(lhs <= rhs)

    def test_first_order_rate_constant_stable(self):
        ts = np.linspace(0.05, 6.0, 120)
        fitted = []
        for n in (25, 50, 100, 200):
            gap = np.abs(sphere.jn_many(n, ts * math.sqrt(n)) - np.exp(-0.5 * ts**2))
            fitted.append(np.max(gap * n / np.minimum(1.0, ts**2)))
        assert max(fitted) / min(fitted) < 2.0


class TestEdgeworth:
    def test_values(self):
        assert sphere.jn_edgeworth(7, 0.0) == 1.0
        expected = (1 - 1 / 400) * math.exp(-0.5)
        assert sphere.jn_edgeworth(100, 1.0) == pytest.approx(expected, abs=1e-14)

    def test_second_order_rate(self):
        ts = np.linspace(0.0, 3.0, 301)

        def sup_gap(n):
            return np.max(np.abs(sphere.jn_many(n, ts * math.sqrt(n)) - sphere.jn_edgeworth(n, ts)))

        e50, e100 = sup_gap(50), sup_gap(100)
        assert 0.15 < e100 / e50 < 0.40


class TestAbsMoments:
    @pytest.mark.parametrize("n", [2, 5, 12])
    def test_second_moment_exact(self, n):
        assert sphere.theta1_abs_moment(n, 2) == pytest.approx(1.0 / n, abs=1e-12)

    def test_uniform_first_moment(self):
        assert sphere.theta1_abs_moment(3, 1) == pytest.approx(0.5, abs=1e-12)

    def test_fourth_moment_beta_form(self):
        assert sphere.theta1_abs_moment(10, 4) == pytest.approx(0.025, abs=1e-12)
        assert sphere.theta1_abs_moment_exact(10, 4) == pytest.approx(3 / (10 * 12), abs=1e-14)

    @pytest.mark.parametrize("n", [2, 5, 10, 50])
    def test_subgaussian_moment_bound(self, n):
        for p in np.arange(0.5, 8.1, 0.5):
            val = sphere.theta1_abs_moment(n, p)
            assert val <= 2.0 * (p / n) ** (p / 2) + 1e-12
            assert val == pytest.approx(sphere.theta1_abs_moment_exact(n, p), abs=1e-10)

    def test_bad_order(self):
        with pytest.raises(ParameterError):
            sphere.theta1_abs_moment(5, 0.0)


class TestDistanceHelpers:
    def test_mean_abs_around_oracle(self):
        n, scale = 9, 3.0
        for a in (-4.0, -1.1, 0.0, 0.4, 2.9, 3.5):
            oracle = integrate(
                lambda z: np.abs(a - z) * sphere.theta1_density(n, z / scale) / scale,
                -scale, scale, tol=1e-12, points=(min(max(a, -scale), scale),),
            )
            assert sphere.mean_abs_around(n, scale, a) == pytest.approx(oracle, abs=1e-10)

    def test_mean_abs_gap_consistency(self):
        # E|Z - Z'| = int E|z - Z'| g(z) dz couples the two helpers
        n, scale = 10, math.sqrt(10)
        oracle = integrate(
            lambda z: sphere.mean_abs_around(n, scale, z) * sphere.theta1_density(n, z / scale) / scale,
            -scale, scale, tol=1e-12,
        )
        assert sphere.mean_abs_gap(n, scale) == pytest.approx(oracle, abs=1e-10)
