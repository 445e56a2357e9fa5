"""Transition matrices, dichotomy grid verification, growth bounds."""

import numpy as np
import pytest

from shadowlab import (DichotomyData, DichotomyKind, LinearSystem, NormKind,
                       constant_dichotomy, coppel_bound, mat_norm, mu_closed,
                       transition, verify_dichotomy)


class TestTransition:
    def test_scalar_decay(self):
        sys = LinearSystem.constant([[-1.0]])
        for (t, s) in [(3.0, 1.0), (0.5, 0.0), (2.0, 2.0)]:
            assert transition(sys, t, s)[0, 0] == pytest.approx(
                np.exp(-(t - s)), abs=1e-12)

    def test_identity_at_equal_times(self):
        sys = LinearSystem(2, lambda t: np.array([[0.0, t], [-t, 0.0]]))
        assert np.array_equal(transition(sys, 1.5, 1.5), np.eye(2))

    def test_cocycle_property(self):
        sys = LinearSystem(2, lambda t: np.diag([-1.0, np.sin(t)]))
        rng = np.random.default_rng(0)
        for _ in range(5):
            r, s, t = np.sort(rng.uniform(0.0, 4.0, 3))
            two_leg = transition(sys, t, s, 1e-12) @ transition(sys, s, r, 1e-12)
            one_leg = transition(sys, t, r, 1e-12)
            assert np.max(np.abs(two_leg - one_leg)) <= 1e-8

    def test_backward_inverts_forward(self):
        sys = LinearSystem.constant([[0.0, 1.0], [-2.0, -0.3]])
        F = transition(sys, 2.0, 0.5)
        B = transition(sys, 0.5, 2.0)
        assert np.max(np.abs(F @ B - np.eye(2))) <= 1e-10


class TestVerifyDichotomy:
    def test_saddle_passes(self):
        sys = LinearSystem.constant(np.diag([-1.0, 1.0]))
        d = DichotomyData.with_projection(np.diag([1.0, 0.0]), 1.0, 1.0)
        report = verify_dichotomy(sys, d, np.linspace(0.0, 5.0, 11))
        assert report.passed, report.summary()

    def test_scalar_contraction_passes(self):
        sys = LinearSystem.constant([[-1.0]])
        d = DichotomyData.contraction(1, 1.0, 1.0)
        report = verify_dichotomy(sys, d, np.linspace(0.0, 4.0, 9))
        assert report.passed
        # P = I makes the backward condition vacuous; it must pass trivially
        assert report.condition("backward decay (ed2)").passed

    def test_too_small_N_fails_at_equal_times(self):
        sys = LinearSystem.constant(np.diag([-1.0, 1.0]))
        d = DichotomyData.with_projection(np.diag([1.0, 0.0]), 0.5, 1.0)
        report = verify_dichotomy(sys, d, np.linspace(0.0, 3.0, 7))
        cond = report.condition("forward decay (ed1)")
        assert not cond.passed
        assert cond.worst_pair[0] == cond.worst_pair[1]  # |P| = 1 > N at t = s
        assert not report.passed

    def test_summary_mentions_grid_sampling(self):
        sys = LinearSystem.constant([[-1.0]])
        d = DichotomyData.contraction(1, 1.0, 1.0)
        report = verify_dichotomy(sys, d, np.linspace(0.0, 2.0, 5))
        assert "sampled grid" in report.summary()

    def test_rejects_bad_grid(self):
        sys = LinearSystem.constant([[-1.0]])
        d = DichotomyData.contraction(1, 1.0, 1.0)
        with pytest.raises(ValueError):
            verify_dichotomy(sys, d, np.array([]))
        with pytest.raises(ValueError):
            verify_dichotomy(sys, d, np.array([1.0, 0.5]))


class TestCoppelBound:
    def test_scalar_equality(self):
        sys = LinearSystem.constant([[-0.7]])
        for (s, t) in [(0.0, 2.0), (1.0, 4.5)]:
            bound = coppel_bound(sys, s, t, NormKind.INF)
            exact = abs(transition(sys, t, s)[0, 0])
            assert bound == pytest.approx(exact, abs=1e-10)

    def test_constant_symmetric_two_norm_equality(self):
        rng = np.random.default_rng(5)
        B = rng.uniform(-1.0, 1.0, (3, 3))
        A = 0.5 * (B + B.T)
        sys = LinearSystem.constant(A)
        bound = coppel_bound(sys, 0.0, 1.5, NormKind.TWO)
        T = transition(sys, 1.5, 0.0)
        assert mat_norm(T, NormKind.TWO) == pytest.approx(bound, rel=1e-9)

    @pytest.mark.parametrize("k", [NormKind.INF, NormKind.ONE, NormKind.TWO])
    def test_time_varying_inequality(self, k):
        rng = np.random.default_rng(11)
        B0 = rng.uniform(-1.0, 1.0, (3, 3))
        B1 = rng.uniform(-1.0, 1.0, (3, 3))
        sys = LinearSystem(3, lambda t: B0 + np.sin(t) * B1)
        for _ in range(10):
            s, t = np.sort(rng.uniform(0.0, 3.0, 2))
            T = transition(sys, t, s, 1e-12)
            assert mat_norm(T, k) <= coppel_bound(sys, s, t, k) + 1e-6

    def test_rejects_reversed_times(self):
        sys = LinearSystem.constant([[-1.0]])
        with pytest.raises(ValueError):
            coppel_bound(sys, 2.0, 1.0, NormKind.INF)


class TestConstantDichotomy:
    def test_scalar_contraction(self):
        d = constant_dichotomy([[-1.0]])
        assert d.kind is DichotomyKind.CONTRACTION
        assert d.N == pytest.approx(1.0)
        assert d.lam == pytest.approx(1.0)

    def test_saddle_projection(self):
        d = constant_dichotomy(np.diag([-1.0, 2.0]))
        assert d.kind is DichotomyKind.DICHOTOMY
        assert np.allclose(d.P(0.0), np.diag([1.0, 0.0]))
        assert d.lam == pytest.approx(1.0)
        sys = LinearSystem.constant(np.diag([-1.0, 2.0]))
        assert verify_dichotomy(sys, d, np.linspace(0.0, 3.0, 7)).passed

    def test_expansion(self):
        d = constant_dichotomy(np.diag([0.5, 2.0]))
        assert d.kind is DichotomyKind.EXPANSION

    def test_rejects_imaginary_axis(self):
        with pytest.raises(ValueError):
            constant_dichotomy(np.array([[0.0, 1.0], [-1.0, 0.0]]))

    def test_nonnormal_conditioning_verifies(self):
        A = np.array([[-1.0, 5.0], [0.0, 1.0]])
        d = constant_dichotomy(A)
        sys = LinearSystem.constant(A)
        report = verify_dichotomy(sys, d, np.linspace(0.0, 3.0, 7),
                                  k=NormKind.TWO)
        assert report.passed, report.summary()


class TestDichotomyData:
    def test_kind_forces_projection(self):
        d = DichotomyData.contraction(2, 1.0, 1.0)
        assert np.array_equal(d.P(3.0), np.eye(2))
        d = DichotomyData.expansion(2, 1.0, 1.0)
        assert np.array_equal(d.P(3.0), np.zeros((2, 2)))

    def test_requires_positive_constants(self):
        with pytest.raises(ValueError):
            DichotomyData.contraction(1, 0.0, 1.0)
        with pytest.raises(ValueError):
            DichotomyData.contraction(1, 1.0, -2.0)

    def test_projection_required_for_general_kind(self):
        with pytest.raises(ValueError):
            DichotomyData(2, 1.0, 1.0, DichotomyKind.DICHOTOMY)
