import math

import numpy as np
import pytest

from randclt import expansions as E
from randclt import moments as M
from randclt import sphere
from randclt.errors import ParameterError, UnsupportedModeError
from randclt.quadrature import integrate
from randclt.streams import master_rng
from randclt.systems import make_system

WALSH3 = make_system("walsh", d=3)
WALSH4 = make_system("walsh", d=4)
EMP = make_system("empirical", 5)
GAUSS_CF = lambda t: np.exp(-0.5 * np.square(np.asarray(t, dtype=float)))


class TestPsiR:
    def test_point_values(self):
        assert E.psi_r(1.0, 0.37) == pytest.approx(-0.37, abs=1e-14)
        assert E.psi_r(4.0, 0.0) == pytest.approx(-1.0, abs=1e-14)
        assert E.psi_r(0.25, 0.1) == pytest.approx(-0.3, abs=1e-14)
        assert E.psi_r(0.0, 0.0) == 1.0

    def test_negative_alpha_rejected(self):
        with pytest.raises(ParameterError):
            E.psi_r(-0.5, 0.0)

    def test_quadrature_agreement_grid(self):
        for alpha in np.linspace(0.1, 2.0, 8):
            for r in np.linspace(-0.2, 0.2, 5):
                assert abs(E.psi_r(alpha, r) - E.psi_r_quadrature(alpha, r)) < 1e-8


class TestRStatistic:
    def test_zero_convention(self):
        assert E.r_statistic(np.zeros(4), np.zeros(4)) == 0.0

    def test_same_atom_on_sphere(self):
        n = 4
        x = np.ones(n)  # |x|^2 = n
        assert E.r_statistic(x, x) == pytest.approx(math.sqrt(2) * (1 + 1 / (8 * n)), abs=1e-14)

    def test_orthogonal_pair_on_sphere(self):
        n = 4
        x = math.sqrt(n) * np.eye(n)[0]
        y = math.sqrt(n) * np.eye(n)[1]
        expect = -math.sqrt(2) / (8 * n)
        assert E.r_statistic(x, y) == pytest.approx(expect, abs=1e-14)

    def test_pointwise_bound(self):
        rng = master_rng(3)
        for _ in range(20):
            x = rng.normal(size=6)
            y = rng.normal(size=6)
            for variant in ("simple", "full"):
                R = E.r_statistic(x, y, variant=variant)
                assert abs(R) <= 3 * (np.linalg.norm(x) + np.linalg.norm(y)) / math.sqrt(6)

    def test_length_mismatch(self):
        with pytest.raises(ParameterError):
            E.r_statistic(np.zeros(3), np.zeros(4))


class TestPredictions:
    def test_cor51_empirical_closed_form(self):
        n = 5
        pred = E.cor51_prediction(EMP, M.xi_functionals(EMP))
        expect = ((1 + 1 / (4 * n)) / n - 1 / (8 * n)) / math.sqrt(math.pi)
        assert pred.main_value == pytest.approx(expect, abs=1e-14)
        assert pred.error_scale == pytest.approx(2 / n**2)

    def test_cor51_zero_xi_flagged(self):
        xi = M.XiMoments(0.0, 0.0, 0.0, 0.0, one_minus_sqrt=0.0, mode="exact")
        pred = E.cor51_prediction(WALSH3, xi)
        assert pred.main_value == pytest.approx(-1 / (8 * 7 * math.sqrt(math.pi)), abs=1e-14)
        assert "below the error floor" in pred.note

    def test_cor51_needs_fixed_norm(self):
        with pytest.raises(UnsupportedModeError):
            E.cor51_prediction(make_system("cosine", 8),
                               M.XiMoments(0, 0, 0, 0, one_minus_sqrt=0.1, mode="exact"))

    def test_prop42_matches_cor51_on_sphere(self):
        # on |X|^2 = n the two expressions are algebraically identical
        for system in (EMP, WALSH3, WALSH4):
            p42 = E.prop42_prediction(system)
            c51 = E.cor51_prediction(system, M.xi_functionals(system))
            assert p42.main_value == pytest.approx(c51.main_value, abs=1e-12)

    def test_thm11_walsh_value(self):
        rep = M.moment_report(WALSH3, M.EXACT)
        pred = E.thm11_prediction(WALSH3, rep)
        assert pred.kind == "thm11"
        assert pred.main_value == pytest.approx(42 / 343 / (16 * math.sqrt(math.pi)), abs=1e-12)
        assert pred.main_value == pytest.approx(4.318e-3, abs=2e-6)

    def test_thm11_empirical_falls_back_to_remark53(self):
        rep = M.moment_report(EMP, M.EXACT)
        pred = E.thm11_prediction(EMP, rep)
        assert pred.kind == "remark53"
        leading = 1 / (2 * math.sqrt(math.pi) * 5)
        assert pred.main_value == pytest.approx(leading, rel=0.2)

    def test_thm11_inapplicable_off_sphere(self):
        sys = make_system("cosine", 8)
        rep = M.moment_report(sys, 5000, seed=3)
        pred = E.thm11_prediction(sys, rep)
        assert not pred.applicable


class TestThm12:
    def test_empirical_closed_form(self):
        n = 5
        bound = E.thm12_lower_bound(EMP, M.EXACT)
        assert bound.value == pytest.approx(E.THM12_C1_DEFAULT / n - 1.0 / n**2, abs=1e-12)

    def test_fixed_norm_penalty(self):
        bound = E.thm12_lower_bound(WALSH3, M.EXACT, c1=1.0, c2=2.0)
        assert bound.params["sigma4_sq"] == 0.0
        assert bound.value == pytest.approx(1.0 * 0.125 - 2.0 / 49, abs=1e-12)

    def test_trig_positivity_reported(self):
        bound = E.thm12_lower_bound(make_system("trig", 16), 4 * 10**4, seed=1)
        assert bound.params["closeness"] > 0
        # the positivity threshold is reported, not asserted
        assert "closeness_stderr" in bound.params


class TestSmoothing:
    def test_equal_cfs(self):
        T = 30.0
        val = E.smoothing_functional(GAUSS_CF, GAUSS_CF, T)
        assert val == pytest.approx(math.sqrt(math.pi / 2) / T, abs=1e-9)

    def test_gaussian_tail_term(self):
        for T in (20.0, 50.0):
            val = E.smoothing_functional(GAUSS_CF, GAUSS_CF, T)
            assert val == pytest.approx(math.sqrt(math.pi / 2) / T, rel=1e-6)

    def test_rate_halves_per_doubling(self):
        vals = {}
        for n in (20, 40, 80):
            cf = lambda t: sphere.jn_many(n, np.asarray(t, dtype=float) * math.sqrt(n))
            vals[n] = E.smoothing_functional(cf, GAUSS_CF, 4.0 * n)
        assert 0.35 <= vals[40] / vals[20] <= 0.65
        assert 0.35 <= vals[80] / vals[40] <= 0.65


class TestRhoLower:
    def test_gaussian_gives_zero(self):
        assert E.rho_lower_functional(GAUSS_CF, 1.0) == pytest.approx(0.0, abs=1e-13)

    def test_point_mass_quadrature_oracle(self):
        cf_one = lambda t: np.ones_like(np.asarray(t, dtype=float))
        direct = integrate(lambda t: (1 - np.exp(-0.5 * t**2)) * (1 - t), 0, 1, tol=1e-13) / 3
        assert E.rho_lower_functional(cf_one, 1.0) == pytest.approx(direct, abs=1e-12)
        assert direct > 0

    def test_order_one_over_n_band(self):
        vals = {}
        for n in (20, 40, 80, 160):
            cf = lambda t: sphere.jn_many(n, np.asarray(t, dtype=float) * math.sqrt(n))
            vals[n] = n * E.rho_lower_functional(cf, 1.0)
        assert max(vals.values()) / min(vals.values()) <= 2.0


class TestDeltaN:
    def test_zero_at_origin(self):
        assert E.delta_n(WALSH3, 0.0).value == pytest.approx(0.0, abs=1e-12)

    def test_empirical_two_atom_formula(self):
        n, t = 16, 0.9
        sys = make_system("empirical", n)
        j2n = sphere.jn(n, t * math.sqrt(2 * n))
        jn_ = sphere.jn(n, t * math.sqrt(n))
        expect = (1 / n) * (1 - j2n) + j2n - jn_**2
        assert E.delta_n(sys, t).value == pytest.approx(expect, abs=1e-10)

    def test_walsh_nonnegative_small_t(self):
        for t in (0.2, 0.5, 0.9):
            assert E.delta_n(WALSH3, t).value >= -1e-12

    def test_needs_fixed_norm(self):
        with pytest.raises(UnsupportedModeError):
            E.delta_n(make_system("cosine", 8), 0.5)

    def test_mc_matches_exact_on_walsh(self):
        exact = E.delta_n(WALSH3, 0.7).value
        mc = E.delta_n(WALSH3, 0.7, budget=4 * 10**4, seed=5)
        assert abs(mc.value - exact) < 4 * mc.stderr + 1e-12


class TestIdentity36:
    @pytest.mark.parametrize("eta", [0.1, 1.0, 7.0])
    def test_equals_four_eta(self, eta):
        assert abs(E.identity_3_6(eta) - 4 * eta) < 1e-8


class TestSqrtSandwich:
    def test_dense_grid(self):
        eps = np.linspace(-1.0, 1.0, 10001)
        w = 1 - np.sqrt(1 - eps)
        assert np.all(E.sqrt_expansion_lower(eps) <= w + 1e-12)
        assert np.all(w <= E.sqrt_expansion_upper(eps) + 1e-12)
