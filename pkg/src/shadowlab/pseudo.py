"""Pseudosolutions: grid functions with derivative samples and their errors.

A pseudosolution is a C^1 function y whose residual y' - g(t, y) has finite
sup norm sigma.  The generators here produce admissible pseudo-orbits: the
closed-form one for the quadratic-decay example (residual identically
delta^2), the constant equilibrium of the perturbed SI system (residual
epsilon), and smoothly forced integrations whose residual is the forcing
itself.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ContainmentError, DataError, EvaluationError
from .lognorm import NormKind, as_norm, vec_norm
from .systems import OdeSystem, Region, integrate, registry


@dataclass
class PseudoSolution:
    """Grid samples (t, y, y'), pointwise error e and maximum error sigma."""

    t: np.ndarray
    y: np.ndarray
    dy: np.ndarray
    err: np.ndarray
    sigma: float
    norm: NormKind = NormKind.INF
    horizon: float = np.nan
    seed: Optional[int] = None
    amplitude: Optional[float] = None
    dense_y: Optional[Callable[[float], np.ndarray]] = None
    dense_dy: Optional[Callable[[float], np.ndarray]] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.y = np.atleast_2d(np.asarray(self.y, dtype=float))
        self.dy = np.atleast_2d(np.asarray(self.dy, dtype=float))
        self.err = np.asarray(self.err, dtype=float)
        if self.y.shape != self.dy.shape or self.y.shape[0] != self.t.size:
            raise ValueError("y and dy must both carry one row per grid time")
        if np.isnan(self.horizon):
            self.horizon = float(self.t[-1])
        if not np.isfinite(self.sigma):
            raise ValueError("sigma must be finite")

    @property
    def n(self) -> int:
        return self.y.shape[1]

    def at(self, tq) -> tuple[np.ndarray, np.ndarray]:
        """Evaluate (y, y') at arbitrary times.

        Uses the generator's dense form when available, else the cubic
        Hermite interpolant of the stored samples.
        """
        tq = np.atleast_1d(np.asarray(tq, dtype=float))
        if self.dense_y is not None and self.dense_dy is not None:
            yv = np.stack([np.atleast_1d(self.dense_y(s)) for s in tq])
            dv = np.stack([np.atleast_1d(self.dense_dy(s)) for s in tq])
            return yv, dv
        from scipy.interpolate import CubicHermiteSpline
        spline = CubicHermiteSpline(self.t, self.y, self.dy, axis=0)
        return spline(tq), spline.derivative()(tq)

    def to_csv(self, path) -> None:
        header = ("t," + ",".join(f"y{i + 1}" for i in range(self.n)) + ",e")
        data = np.column_stack([self.t, self.y, self.err])
        np.savetxt(path, data, delimiter=",", header=header, comments="",
                   fmt="%.17g")

    def sidecar(self) -> dict:
        return {
            "sigma": self.sigma,
            "seed": self.seed,
            "amplitude": self.amplitude,
            "norm": self.norm.value,
            "points": int(self.t.size),
            "t_end": float(self.t[-1]),
        }

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.sidecar(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def measure(sys: OdeSystem, t, y, dy=None, norm=NormKind.INF,
            **kwargs) -> PseudoSolution:
    """Fill the error function e(t_i) = |y'(t_i) - g(t_i, y(t_i))| and sigma.

    Derivative samples may be omitted, in which case second-order finite
    differences of y are used (ends one-sided); that path needs at least
    three grid points.
    """
    t = np.asarray(t, dtype=float)
    y = np.atleast_2d(np.asarray(y, dtype=float))
    if y.shape[0] != t.size:
        raise ValueError("y must carry one row per grid time")
    if t.size == 0:
        raise DataError("empty grid")
    norm = as_norm(norm)
    if dy is None:
        if t.size < 3:
            raise DataError("need derivative samples or at least three grid "
                            "points for finite differences")
        dy = np.gradient(y, t, axis=0, edge_order=2)
    dy = np.atleast_2d(np.asarray(dy, dtype=float))
    resid = dy - sys.rhs_rows(t, y)
    if not np.all(np.isfinite(resid)):
        raise EvaluationError("non-finite residual while measuring")
    err = np.array([vec_norm(r, norm) for r in resid])
    return PseudoSolution(t, y, dy, err, float(np.max(err)), norm=norm, **kwargs)


def exm_pseudosolution(delta: float, grid) -> PseudoSolution:
    """The closed-form pseudosolution of x' = -(x + 1/2)^2 with error delta^2.

    y(t) = -1/2 + delta*(1 - exp(-2 delta t))/(1 + exp(-2 delta t)) solves
    y' = -(y + 1/2)^2 + delta^2 with y(0) = -1/2, so the residual against
    the unperturbed equation is exactly delta^2 and y increases from -1/2
    toward -1/2 + delta.
    """
    delta = float(delta)
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    grid = np.asarray(grid, dtype=float)

    def yfun(t):
        e = np.exp(-2.0 * delta * np.asarray(t, dtype=float))
        return np.atleast_1d(-0.5 + delta * (1.0 - e) / (1.0 + e))

    def dyfun(t):
        yv = yfun(t)
        return np.atleast_1d(-(yv + 0.5) ** 2 + delta ** 2)

    y = np.stack([yfun(ti) for ti in grid])
    dy = np.stack([dyfun(ti) for ti in grid])
    ps = measure(registry("exm"), grid, y, dy, norm=NormKind.INF,
                 horizon=np.inf, dense_y=lambda s: yfun(s),
                 dense_dy=lambda s: dyfun(s))
    ps.meta["delta"] = delta
    return ps


def si_equilibrium_pseudosolution(epsilon: float, grid) -> PseudoSolution:
    """Constant pseudosolution (1 - sqrt(eps), sqrt(eps)) of the SI system.

    The point is an exact equilibrium of the epsilon-perturbed system, so as
    a constant function it is a pseudosolution of the unperturbed one with
    maximum error exactly epsilon (residual (eps, -eps) in sup norm).
    """
    epsilon = float(epsilon)
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    grid = np.asarray(grid, dtype=float)
    s = np.sqrt(epsilon)
    point = np.array([1.0 - s, s])
    y = np.tile(point, (grid.size, 1))
    dy = np.zeros_like(y)
    ps = measure(registry("si"), grid, y, dy, norm=NormKind.INF,
                 horizon=np.inf, dense_y=lambda t: point.copy(),
                 dense_dy=lambda t: np.zeros(2))
    ps.meta["epsilon"] = epsilon
    ps.meta["point"] = point.tolist()
    return ps


class _SinusoidBundle:
    """Sum of random-frequency sinusoids with |eta(t)|_norm <= amplitude."""

    def __init__(self, rng: np.random.Generator, n: int, amplitude: float,
                 norm: NormKind, n_modes: int = 5, freq_range=(0.25, 1.5)):
        coeff = rng.uniform(-1.0, 1.0, (n, n_modes))
        self.freq = rng.uniform(freq_range[0], freq_range[1], (n, n_modes))
        self.phase = rng.uniform(0.0, 2.0 * np.pi, (n, n_modes))
        bound = np.sum(np.abs(coeff), axis=1)   # per-component sup bound
        total = vec_norm(bound, norm)
        scale = 0.0 if amplitude == 0.0 or total == 0.0 else amplitude / total
        self.coeff = coeff * scale

    def __call__(self, t: float) -> np.ndarray:
        return np.sum(self.coeff * np.sin(self.freq * t + self.phase), axis=1)

    def derivative(self, t: float) -> np.ndarray:
        return np.sum(self.coeff * self.freq
                      * np.cos(self.freq * t + self.phase), axis=1)


def _smooth_forcing(rng, n, amplitude, norm, n_modes=5, freq_range=(0.25, 1.5)):
    return _SinusoidBundle(rng, n, amplitude, norm, n_modes, freq_range)


def wiggle_pseudosolution(sys: OdeSystem, T: float, scale: float, seed: int,
                          center=None, dt: float = 0.005,
                          norm=NormKind.INF, n_modes: int = 5,
                          freq_range=(0.25, 1.5)) -> PseudoSolution:
    """Bounded analytic pseudosolution: small sinusoids around a point.

    y(t) = center + p(t) with p a seed-deterministic sinusoid bundle of sup
    norm <= scale and exact analytic derivative, so sigma is whatever
    ``measure`` reports (roughly scale * (1 + max frequency) near an
    equilibrium).  Unlike ``perturbed_orbit`` this needs no integration and
    stays bounded on systems with expanding directions.
    """
    norm = as_norm(norm)
    rng = np.random.default_rng(seed)
    center = np.zeros(sys.n) if center is None else \
        np.atleast_1d(np.asarray(center, dtype=float))
    eta = _smooth_forcing(rng, sys.n, scale, norm, n_modes, freq_range)
    grid = np.linspace(0.0, T, int(round(T / dt)) + 1)
    y = np.stack([center + eta(ti) for ti in grid])
    dy = np.stack([eta.derivative(ti) for ti in grid])
    ps = measure(sys, grid, y, dy, norm=norm, seed=seed, amplitude=None,
                 dense_y=lambda s: center + eta(s),
                 dense_dy=lambda s: eta.derivative(s))
    ps.meta["scale"] = scale
    return ps


def perturbed_orbit(sys: OdeSystem, x0, T: float, amplitude: float,
                    seed: int, H: Optional[Region] = None,
                    dt: float = 0.01, norm=NormKind.INF,
                    tol: float = 1e-12, n_modes: int = 5,
                    freq_range=(0.25, 1.5)) -> PseudoSolution:
    """Integrate y' = g(t, y) + eta(t) with smooth random forcing.

    eta is a seed-deterministic sum of at most ``n_modes`` sinusoids with
    sup norm at most ``amplitude``, so the residual of y against the
    unforced system equals |eta| pointwise and sigma <= amplitude by
    construction.  Containment in H is enforced at the grid points (the
    uniform step dt also caps the solver step, bounding excursions between
    them); leaving H raises ContainmentError with the exit time.
    """
    if amplitude < 0:
        raise ValueError("amplitude must be nonnegative")
    norm = as_norm(norm)
    rng = np.random.default_rng(seed)
    eta = _smooth_forcing(rng, sys.n, amplitude, norm, n_modes, freq_range)

    forced = OdeSystem(sys.n,
                       lambda t, x: sys.rhs(t, x) + eta(t),
                       sys.gx, name=f"{sys.name}+forcing")
    grid = np.linspace(0.0, T, int(round(T / dt)) + 1)
    traj = integrate(forced, x0, T, tol=tol, t_eval=grid,
                     max_step=min(dt, T))
    if traj.blew_up:
        raise ContainmentError(
            f"forced orbit blew up at t={traj.blowup_time:g} before T={T:g}",
            exit_time=traj.blowup_time)

    y = traj.states
    # y' of the dense numerical solution at the nodes equals the forced
    # right-hand side there, so this residual is the forcing exactly
    dy = np.stack([sys.rhs(grid[i], y[i]) + eta(grid[i])
                   for i in range(grid.size)])
    if H is not None:
        for i in range(grid.size):
            if not H.contains(y[i]):
                raise ContainmentError(
                    f"orbit left {H.describe()} at t={grid[i]:g} "
                    f"(distance {H.dist(y[i]):.3e})", exit_time=float(grid[i]))

    dense = traj.dense
    ps = measure(sys, grid, y, dy, norm=norm, seed=seed, amplitude=amplitude,
                 dense_y=(lambda s: dense(s)) if dense is not None else None,
                 dense_dy=(lambda s: sys.rhs(s, dense(s)) + eta(s))
                 if dense is not None else None)
    if ps.sigma > amplitude + 1e-12:
        raise AssertionError("forcing bound violated; normalization bug")
    ps.meta["forcing_modes"] = n_modes
    return ps
