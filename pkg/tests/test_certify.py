"""Certificate formulas, admissibility boundaries, neighborhood suprema."""

import numpy as np
import pytest

from shadowlab import (Ball, Box, DichotomyKind, GrowthSpec, HalfLine,
                       HypothesisViolatedError, NormKind, NotApplicableError,
                       OdeSystem, Route, SimplexGamma, StructureError,
                       certify_ball, certify_gen_perturb, certify_lognorm,
                       certify_t1, certify_t2, estimate_lipschitz, estimate_m,
                       estimate_m_detail, registry)
from dataclasses import replace


class TestCertifyT1:
    def test_no_nonlinearity(self):
        c = certify_t1(1.0, 1.0, 0.0, 1.0)
        assert c.kappa == pytest.approx(2.0)
        assert c.eps0 == pytest.approx(0.5)

    def test_worked_values(self):
        c = certify_t1(1.0, 1.0, 0.25, 0.4)
        assert c.kappa == pytest.approx(4.0)
        assert c.eps0 == pytest.approx(0.1)

    def test_smallness_boundary_rejected(self):
        with pytest.raises(NotApplicableError) as info:
            certify_t1(1.0, 1.0, 0.5, 1.0)
        assert "lambda/(2N)" in str(info.value)

    def test_fixed_point_relation(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            N = float(rng.uniform(0.5, 3.0))
            lam = float(rng.uniform(0.2, 2.0))
            L = float(rng.uniform(0.0, 0.99)) * lam / (2 * N)
            c = certify_t1(N, lam, L, 1.0)
            assert abs((2 * N / lam) * (L * c.kappa + 1) - c.kappa) <= 1e-12

    def test_monotone_and_divergent_in_L(self):
        kappas = [certify_t1(1.0, 1.0, L, 1.0).kappa
                  for L in (0.1, 0.3, 0.499999)]
        assert kappas[0] < kappas[1] < kappas[2]
        assert kappas[2] > 1e5

    def test_eps0_kappa_product_is_delta(self):
        c = certify_t1(1.0, 1.0, 0.25, 0.4)
        assert c.eps0 * c.kappa == pytest.approx(0.4, abs=1e-15)


class TestCertifyT2:
    def test_no_nonlinearity(self):
        c = certify_t2(1.0, 1.0, 0.0, 1.0)
        assert c.kappa == pytest.approx(1.0)

    def test_weakened_condition_accepts_larger_L(self):
        # L = 0.6 is rejected by the dichotomy route but fine here
        with pytest.raises(NotApplicableError):
            certify_t1(1.0, 1.0, 0.6, 1.0)
        c = certify_t2(1.0, 1.0, 0.6, 1.0)
        assert c.kappa == pytest.approx(2.5)
        assert c.eps0 == pytest.approx(0.4)

    def test_boundary_excluded(self):
        with pytest.raises(NotApplicableError):
            certify_t2(2.0, 1.0, 0.5, 1.0)

    def test_fixed_point_relation(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            N = float(rng.uniform(0.5, 3.0))
            lam = float(rng.uniform(0.2, 2.0))
            L = float(rng.uniform(0.0, 0.99)) * lam / N
            c = certify_t2(N, lam, L, 1.0,
                           DichotomyKind.EXPANSION)
            assert abs((N / lam) * (L * c.kappa + 1) - c.kappa) <= 1e-12

    def test_rejects_general_dichotomy_kind(self):
        with pytest.raises(ValueError):
            certify_t2(1.0, 1.0, 0.1, 1.0, DichotomyKind.DICHOTOMY)


class TestCertifyGenPerturb:
    def test_exm_admissibility_boundary(self):
        growth = GrowthSpec([0.0, 2.0])
        c = certify_gen_perturb(1.0, 1.0, growth, 0.49,
                                DichotomyKind.CONTRACTION)
        assert c.route is Route.GEN_PERTURB
        for rho in (0.5, 0.51):
            with pytest.raises(NotApplicableError):
                certify_gen_perturb(1.0, 1.0, growth, rho,
                                    DichotomyKind.CONTRACTION)

    def test_constant_growth_never_applicable_when_large(self):
        with pytest.raises(NotApplicableError) as info:
            certify_gen_perturb(1.0, 1.0, GrowthSpec([0.6]), 5.0,
                                DichotomyKind.DICHOTOMY)
        assert "every rho" in info.value.binding

    def test_cubic_growth_admissible(self):
        c = certify_gen_perturb(1.0, 1.0, GrowthSpec([0.1, 0.0, 1.0]), 0.5,
                                DichotomyKind.DICHOTOMY)
        assert c.route is Route.POLY_PERTURB
        # growth at rho: 0.1 + 0.25 = 0.35 < 0.5 threshold
        assert c.assumptions["L"] < 0.5

    def test_delegated_constants_consistent(self):
        c = certify_gen_perturb(1.0, 1.0, GrowthSpec([0.0, 2.0]), 0.3,
                                DichotomyKind.CONTRACTION)
        L, delta = c.assumptions["L"], c.assumptions["delta"]
        assert L == pytest.approx(2.0 * (0.3 + delta), abs=1e-12)
        assert c.kappa == pytest.approx(1.0 / (1.0 - L), abs=1e-10)
        assert c.eps0 * c.kappa == pytest.approx(delta, abs=1e-15)

    def test_rejects_nonpositive_rho(self):
        with pytest.raises(ValueError):
            certify_gen_perturb(1.0, 1.0, GrowthSpec([0.0, 2.0]), 0.0,
                                DichotomyKind.CONTRACTION)


class TestCertifyLognorm:
    def test_unit_values(self):
        c = certify_lognorm(1.0, 1.0)
        assert c.eps0 == 1.0 and c.kappa == 1.0

    def test_halfline_worked_values(self):
        rho, delta = 0.3, 0.1
        m = 2.0 * (-rho - delta + 0.5)
        c = certify_lognorm(m, delta)
        assert c.eps0 == pytest.approx(0.02)
        assert c.kappa == pytest.approx(5.0)
        assert c.eps0 * c.kappa == pytest.approx(delta, abs=1e-15)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            certify_lognorm(0.0, 0.1)
        with pytest.raises(ValueError):
            certify_lognorm(0.1, -1.0)


class TestCertifyBall:
    def test_routes(self):
        c = certify_ball(1.0, 1.0, 0.2, 0.5, rho=1.0)
        assert c.route is Route.BALL
        assert c.assumptions["rho"] == 1.0
        c = certify_ball(1.0, 1.0, 0.6, 0.5, rho=1.0,
                         kind=DichotomyKind.CONTRACTION)
        assert c.kappa == pytest.approx(2.5)


class TestGrowthSpec:
    def test_validation(self):
        with pytest.raises(ValueError):
            GrowthSpec([])
        with pytest.raises(ValueError):
            GrowthSpec([0.1, -0.2])

    def test_evaluation(self):
        p = GrowthSpec([0.1, 0.0, 1.0])
        assert p(0.5) == pytest.approx(0.35)


class TestEstimateLipschitz:
    def test_exm_ball_exact(self):
        # |f_x| = 2|x| on the inflated ball of radius 0.4
        L = estimate_lipschitz(registry("exm"), Ball([0.0], 0.3), 0.1)
        assert L == pytest.approx(0.8, abs=1e-12)

    def test_linear_f_constant_jacobian(self):
        sys = registry("linear_poly", A=[[-1.0]], coeffs=[[(0.5, (1,))]])
        L = estimate_lipschitz(sys, Ball([0.0], 2.0), 0.5, samples=200)
        assert L == pytest.approx(0.5, abs=1e-12)

    def test_zero_f(self):
        sys = registry("linear_poly", A=[[-1.0]], coeffs=[[]])
        assert estimate_lipschitz(sys, Ball([0.0], 1.0), 0.1) == 0.0

    def test_needs_split(self):
        bare = OdeSystem(1, lambda t, x: -x, lambda t, x: [[-1.0]])
        with pytest.raises(StructureError):
            estimate_lipschitz(bare, Ball([0.0], 1.0), 0.1)


class TestEstimateM:
    def test_si_exact_on_simplex(self):
        assert estimate_m(registry("si"), SimplexGamma(0.2), 0.0) == \
            pytest.approx(0.2, abs=1e-15)

    def test_si_exact_with_margin(self):
        assert estimate_m(registry("si"), SimplexGamma(0.2), 0.025) == \
            pytest.approx(0.15, abs=1e-15)

    def test_exm_halfline_exact(self):
        m = estimate_m(registry("exm"), HalfLine(-0.3, 1), 0.1)
        assert m == pytest.approx(0.2, abs=1e-15)

    def test_gamma_zero_violates(self):
        with pytest.raises(HypothesisViolatedError) as info:
            estimate_m(registry("si"), SimplexGamma(0.0), 0.0)
        witness = np.asarray(info.value.witness)
        assert witness.sum() == pytest.approx(1.0, abs=1e-12)

    def test_sampled_estimate_approaches_exact(self):
        sys = replace(registry("si"), mu_sup_exact=None)
        H = SimplexGamma(0.2)
        exact = 0.15
        small = estimate_m_detail(sys, H, 0.025, samples=300, seed=0)
        big = estimate_m_detail(sys, H, 0.025, samples=20000, seed=0)
        assert not big.exact
        # sampling can only miss the supremum, overestimating m
        assert big.m >= exact - 1e-12
        assert abs(big.m - exact) <= abs(small.m - exact) + 1e-12
        assert abs(big.m - exact) <= 0.05

    def test_logistic_interval_hook(self):
        sys = registry("logistic", a=-1.0, b=1.0)
        # gx = -2x + 1 on [0.8 - delta, inf): sup at the left endpoint
        m = estimate_m(sys, HalfLine(0.8, 1), 0.05)
        assert m == pytest.approx(2 * 0.75 - 1.0, abs=1e-15)


class TestCertificateSerialization:
    def test_json_fields(self, tmp_path):
        c = certify_lognorm(0.2, 0.1)
        path = tmp_path / "cert.json"
        c.to_json(path)
        import json
        data = json.loads(path.read_text())
        assert data["route"] == "lognorm"
        assert data["eps0"] == c.eps0
        assert data["kappa"] == c.kappa
        assert data["exact"] is True
        assert "assumptions" in data
