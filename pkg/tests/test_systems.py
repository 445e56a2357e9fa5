"""System registry, exact solutions, integration, regions, export."""

import numpy as np
import pytest

from shadowlab import (Ball, Box, DomainError, HalfLine, PolynomialMap,
                       RegistryError, SimplexGamma, exm_exact, integrate,
                       jacobian_fd, registry)


class TestRegistry:
    def test_exm_values(self):
        sys = registry("exm")
        assert sys.rhs(0.0, np.array([0.0]))[0] == pytest.approx(-0.25)
        assert sys.rhs(0.0, np.array([-0.5]))[0] == 0.0
        assert sys.jac(0.0, np.array([0.3]))[0, 0] == pytest.approx(-1.6)

    def test_si_jacobian_display(self):
        sys = registry("si")
        J = sys.jac(0.0, np.array([0.5, 0.3]))
        assert np.allclose(J, [[-1.3, -0.5], [0.3, -0.5]])

    def test_logistic_equilibrium(self):
        sys = registry("logistic", a=-1.0, b=1.0)
        assert sys.rhs(0.0, np.array([1.0]))[0] == pytest.approx(0.0)

    def test_unknown_name(self):
        with pytest.raises(RegistryError):
            registry("lorenz")

    def test_logistic_needs_parameters(self):
        with pytest.raises(RegistryError):
            registry("logistic")
        with pytest.raises(RegistryError):
            registry("logistic", a=0.0, b=1.0)

    @pytest.mark.parametrize("name,params", [
        ("exm", {}), ("si", {}), ("logistic", {"a": -1.0, "b": 1.0}),
    ])
    def test_jacobian_consistency(self, name, params):
        sys = registry(name, **params)
        rng = np.random.default_rng(9)
        for _ in range(100):
            x = rng.uniform(-1.0, 1.0, sys.n)
            t = float(rng.uniform(0.0, 5.0))
            J = sys.jac(t, x)
            Jfd = jacobian_fd(sys, t, x)
            scale = max(1.0, np.max(np.abs(J)))
            assert np.max(np.abs(J - Jfd)) / scale <= 1e-5

    @pytest.mark.parametrize("name,params", [
        ("exm", {}), ("si", {}), ("logistic", {"a": -1.0, "b": 1.0}),
    ])
    def test_split_consistency(self, name, params):
        sys = registry(name, **params)
        sys.validate_split(np.random.default_rng(3))

    def test_vectorized_rows_match_pointwise(self):
        for name in ("exm", "si"):
            sys = registry(name)
            rng = np.random.default_rng(1)
            Y = rng.uniform(-1.0, 1.0, (7, sys.n))
            t = np.linspace(0.0, 1.0, 7)
            rows = sys.rhs_rows(t, Y)
            for i in range(7):
                assert np.allclose(rows[i], sys.rhs(t[i], Y[i]))


class TestLinearPoly:
    def test_build_and_evaluate(self):
        # x' = -x + 0.1 x^2 in one dimension
        sys = registry("linear_poly", A=[[-1.0]],
                       coeffs=[[(0.1, (2,))]])
        assert sys.rhs(0.0, np.array([2.0]))[0] == pytest.approx(-2.0 + 0.4)
        assert sys.jac(0.0, np.array([2.0]))[0, 0] == pytest.approx(-1.0 + 0.4)
        sys.validate_split(np.random.default_rng(0))

    def test_polynomial_jacobian_matches_fd(self):
        poly = PolynomialMap(2, [
            [(1.0, (2, 1)), (-0.5, (0, 0))],
            [(2.0, (0, 3)), (1.5, (1, 1))],
        ])
        rng = np.random.default_rng(4)
        for _ in range(20):
            x = rng.uniform(-1.0, 1.0, 2)
            J = poly.jacobian(x)
            h = 1e-6
            for j in range(2):
                e = np.zeros(2)
                e[j] = h
                col = (poly(x + e) - poly(x - e)) / (2 * h)
                assert np.allclose(J[:, j], col, atol=1e-6)

    def test_bad_terms_rejected(self):
        with pytest.raises(RegistryError):
            PolynomialMap(2, [[(1.0, (1,))], []])   # wrong exponent arity
        with pytest.raises(RegistryError):
            registry("linear_poly", A=[[1.0, 0.0]], coeffs=[[]])


class TestExmExact:
    def test_equilibrium_branch(self):
        assert exm_exact(-0.5, 3.0) == -0.5
        assert exm_exact(-0.5, 1e6) == -0.5

    def test_explicit_value(self):
        assert exm_exact(0.5, 1.0) == pytest.approx(0.0, abs=1e-15)

    def test_long_time_limit(self):
        assert exm_exact(0.5, 1e8) == pytest.approx(-0.5, abs=1e-7)

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            exm_exact(0.5, -3.0)      # gamma = 1: blow-up backward at t = -1
        with pytest.raises(DomainError):
            exm_exact(-1.0, 2.5)      # gamma = -1/2: forward blow-up at t = 2

    def test_vectorized_times(self):
        t = np.array([0.0, 1.0, 2.0])
        vals = exm_exact(0.5, t)
        assert vals.shape == (3,)
        assert vals[0] == pytest.approx(0.5)


class TestIntegrate:
    def test_exm_equilibrium_constant(self):
        traj = integrate(registry("exm"), [-0.5], 5.0, tol=1e-12)
        assert not traj.blew_up
        assert np.max(np.abs(traj.states + 0.5)) <= 1e-10

    def test_exm_blowup_near_two(self):
        traj = integrate(registry("exm"), [-1.0], 5.0, tol=1e-10)
        assert traj.blew_up
        assert traj.blowup_time == pytest.approx(2.0, abs=1e-2)

    def test_si_equilibrium(self):
        traj = integrate(registry("si"), [1.0, 0.0], 10.0, tol=1e-12)
        assert not traj.blew_up
        assert np.max(np.abs(traj.states - np.array([1.0, 0.0]))) <= 1e-10

    def test_matches_exact_solution(self):
        tol = 1e-10
        grid = np.linspace(0.0, 5.0, 51)
        traj = integrate(registry("exm"), [0.25], 5.0, tol=tol, t_eval=grid)
        exact = exm_exact(0.25, grid)
        assert np.max(np.abs(traj.states[:, 0] - exact)) <= 10 * tol

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            integrate(registry("exm"), [0.0], -1.0)
        with pytest.raises(ValueError):
            integrate(registry("exm"), [0.0], 1.0, tol=0.0)


class TestRegions:
    def test_simplex_membership(self):
        G = SimplexGamma(0.2)
        assert G.contains([0.3, 0.3])
        assert G.contains([0.0, 0.8])           # boundary S + I = 1 - c
        assert not G.contains([0.5, 0.5])       # sum too large
        assert not G.contains([-0.01, 0.2])     # negative coordinate
        assert G.contains([0.85, 0.0], delta=0.05)
        assert not G.contains([0.9, 0.0], delta=0.05)

    def test_simplex_distance(self):
        G = SimplexGamma(0.0)
        assert G.dist([0.5, 0.3]) == 0.0
        assert G.dist([-0.1, 0.5]) == pytest.approx(0.1, abs=1e-10)
        # beyond the diagonal edge: both coordinates must shrink by d
        assert G.dist([0.7, 0.7]) == pytest.approx(0.2, abs=1e-10)

    def test_simplex_sampler(self):
        G = SimplexGamma(0.3)
        pts = G.sample(np.random.default_rng(0), 500)
        assert all(G.contains(p) for p in pts)

    def test_ball_and_box(self):
        B = Ball([0.0], 0.3)
        assert B.contains([0.3]) and not B.contains([0.31])
        assert B.dist([0.5]) == pytest.approx(0.2)
        box = Box([-1.0, 0.0], [1.0, np.inf])
        assert box.contains([0.0, 100.0])
        assert box.dist([2.0, -0.5]) == pytest.approx(1.0)

    def test_halfline(self):
        H = HalfLine(-0.3, 1)
        assert H.contains([5.0]) and not H.contains([-0.31])
        assert H.dist([-1.3]) == pytest.approx(1.0)
        pts = H.sample(np.random.default_rng(1), 200)
        assert np.all(pts >= -0.3)

    def test_nbhd_sampling(self):
        B = Ball([0.0, 0.0], 1.0)
        pts = B.sample_nbhd(np.random.default_rng(2), 300, 0.5)
        assert all(B.dist(p) <= 0.5 + 1e-9 for p in pts)


class TestTrajectoryExport:
    def test_csv_roundtrip(self, tmp_path):
        traj = integrate(registry("si"), [0.5, 0.2], 1.0, tol=1e-10,
                         t_eval=np.linspace(0.0, 1.0, 11))
        path = tmp_path / "traj.csv"
        traj.to_csv(path)
        header = path.read_text().splitlines()[0]
        assert header == "t,x1,x2"
        data = np.loadtxt(path, delimiter=",", skiprows=1)
        assert np.array_equal(data[:, 0], traj.t)
        assert np.array_equal(data[:, 1:], traj.states)  # 17 digits round-trip
