"""Pseudosolution generators and the error-function measurement."""

import numpy as np
import pytest

from shadowlab import (Ball, ContainmentError, DataError, HalfLine,
                       SimplexGamma, exm_exact, exm_pseudosolution, measure,
                       perturbed_orbit, registry, si_equilibrium_pseudosolution,
                       wiggle_pseudosolution)


class TestMeasure:
    def test_exact_solution_has_zero_error(self):
        sys = registry("exm")
        grid = np.linspace(0.0, 3.0, 61)
        y = exm_exact(0.25, grid)[:, None]
        dy = np.stack([sys.rhs(t, y[i]) for i, t in enumerate(grid)])
        ps = measure(sys, grid, y, dy)
        assert ps.sigma == 0.0

    def test_finite_difference_fallback(self):
        sys = registry("exm")
        grid = np.linspace(0.0, 2.0, 2001)
        y = exm_exact(0.25, grid)[:, None]
        ps = measure(sys, grid, y)      # no derivative samples
        assert ps.sigma <= 1e-5

    def test_too_coarse_for_differences(self):
        sys = registry("exm")
        with pytest.raises(DataError):
            measure(sys, np.array([0.0, 1.0]), np.zeros((2, 1)))

    def test_constant_offset_error(self):
        # y = -0.5 + 0.1: residual |0 - g(y)| = 0.01 at every node
        sys = registry("exm")
        grid = np.linspace(0.0, 1.0, 11)
        y = np.full((11, 1), -0.4)
        ps = measure(sys, grid, y, np.zeros((11, 1)))
        assert ps.sigma == pytest.approx(0.01, abs=1e-15)


class TestExmPseudosolution:
    @pytest.mark.parametrize("delta", [0.1, 0.05, 0.01])
    def test_sigma_is_delta_squared(self, delta):
        ps = exm_pseudosolution(delta, np.linspace(0.0, 20.0, 2001))
        assert abs(ps.sigma - delta ** 2) <= 1e-12
        assert np.max(np.abs(ps.err - delta ** 2)) <= 1e-12

    def test_initial_value_and_limit(self):
        delta = 0.05
        ps = exm_pseudosolution(delta, np.linspace(0.0, 400.0, 4001))
        assert ps.y[0, 0] == pytest.approx(-0.5, abs=1e-15)
        assert ps.y[-1, 0] == pytest.approx(-0.5 + delta, abs=1e-8)

    def test_range_bounds(self):
        delta = 0.3
        ps = exm_pseudosolution(delta, np.linspace(0.0, 100.0, 1001))
        assert np.all(ps.y[:, 0] >= -0.5 - 1e-15)
        assert np.all(ps.y[:, 0] <= -0.5 + delta + 1e-15)
        assert -0.5 + delta < 0.5

    def test_rejects_bad_delta(self):
        grid = np.linspace(0.0, 1.0, 11)
        for bad in (0.0, 1.0, -0.2, 1.5):
            with pytest.raises(ValueError):
                exm_pseudosolution(bad, grid)

    def test_dense_evaluation(self):
        ps = exm_pseudosolution(0.1, np.linspace(0.0, 5.0, 51))
        yq, dyq = ps.at([1.25])
        assert yq[0, 0] == pytest.approx(
            -0.5 + 0.1 * np.tanh(0.1 * 1.25), abs=1e-14)
        assert dyq[0, 0] == pytest.approx(
            -(yq[0, 0] + 0.5) ** 2 + 0.01, abs=1e-14)


class TestSiEquilibriumPseudosolution:
    def test_sigma_exactly_epsilon(self):
        eps = 1e-4
        ps = si_equilibrium_pseudosolution(eps, np.linspace(0.0, 10.0, 101))
        assert abs(ps.sigma - eps) <= 1e-18
        assert SimplexGamma(0.0).contains(ps.y[0])

    def test_point_formula(self):
        ps = si_equilibrium_pseudosolution(0.04, np.linspace(0.0, 1.0, 11))
        assert np.allclose(ps.y[0], [0.8, 0.2])

    def test_rejects_bad_epsilon(self):
        with pytest.raises(ValueError):
            si_equilibrium_pseudosolution(0.0, np.linspace(0.0, 1.0, 11))


class TestPerturbedOrbit:
    def test_zero_amplitude_is_exact(self):
        sys = registry("exm")
        ps = perturbed_orbit(sys, [0.0], 2.0, 0.0, seed=1)
        assert ps.sigma == 0.0

    def test_si_contained_run(self):
        sys = registry("si")
        H = SimplexGamma(0.2)
        ps = perturbed_orbit(sys, [0.15, 0.10], 1.0, 1e-3, seed=2, H=H,
                             dt=0.0025)
        assert ps.sigma <= 1e-3
        assert all(H.contains(ps.y[i]) for i in range(ps.t.size))

    def test_si_exit_raises(self):
        # (S+I)' = 1 - (S+I) forces exit of Gamma_0.2 at t = ln(0.3/0.2)
        sys = registry("si")
        with pytest.raises(ContainmentError) as info:
            perturbed_orbit(sys, [0.5, 0.2], 20.0, 1e-3, seed=3,
                            H=SimplexGamma(0.2))
        assert info.value.exit_time == pytest.approx(np.log(1.5), abs=0.05)

    def test_exm_halfline_containment(self):
        sys = registry("exm")
        H = HalfLine(-0.3, 1)
        ps = perturbed_orbit(sys, [0.0], 2.0, 0.01, seed=4, H=H)
        assert ps.sigma <= 0.01
        assert all(H.contains(ps.y[i]) for i in range(ps.t.size))

    def test_seed_reproducibility(self):
        sys = registry("si")
        a = perturbed_orbit(sys, [0.2, 0.1], 1.0, 1e-3, seed=77)
        b = perturbed_orbit(sys, [0.2, 0.1], 1.0, 1e-3, seed=77)
        assert np.array_equal(a.y, b.y)
        assert np.array_equal(a.dy, b.dy)
        assert a.sigma == b.sigma
        c = perturbed_orbit(sys, [0.2, 0.1], 1.0, 1e-3, seed=78)
        assert not np.array_equal(a.y, c.y)

    def test_amplitude_bounds_sigma(self):
        sys = registry("exm")
        for amp in (1e-4, 1e-2):
            ps = perturbed_orbit(sys, [0.0], 1.5, amp, seed=5)
            assert ps.sigma <= amp

    def test_rejects_negative_amplitude(self):
        with pytest.raises(ValueError):
            perturbed_orbit(registry("exm"), [0.0], 1.0, -0.1, seed=0)


class TestWigglePseudosolution:
    def test_bounded_and_measured(self):
        sys = registry("exm")
        ps = wiggle_pseudosolution(sys, 10.0, 0.02, seed=6, center=[-0.5])
        assert np.max(np.abs(ps.y + 0.5)) <= 0.02 + 1e-12
        # near the equilibrium the residual is O(scale * (1 + frequency))
        assert ps.sigma <= 0.02 * (1.0 + 1.5) + 1e-6

    def test_derivative_is_exact(self):
        sys = registry("exm")
        ps = wiggle_pseudosolution(sys, 5.0, 0.05, seed=8)
        tq = np.linspace(0.1, 4.9, 7)
        yq, dyq = ps.at(tq)
        h = 1e-7
        yp, _ = ps.at(tq + h)
        ym, _ = ps.at(tq - h)
        assert np.max(np.abs((yp - ym) / (2 * h) - dyq)) <= 1e-6


class TestExport:
    def test_csv_and_sidecar(self, tmp_path):
        ps = perturbed_orbit(registry("si"), [0.2, 0.1], 0.5, 1e-3, seed=9)
        csv = tmp_path / "ps.csv"
        ps.to_csv(csv)
        assert csv.read_text().splitlines()[0] == "t,y1,y2,e"
        data = np.loadtxt(csv, delimiter=",", skiprows=1)
        assert np.array_equal(data[:, 1:3], ps.y)
        side = tmp_path / "ps.json"
        ps.to_json(side)
        import json
        meta = json.loads(side.read_text())
        assert meta["sigma"] == ps.sigma
        assert meta["seed"] == 9
        assert meta["amplitude"] == 1e-3
