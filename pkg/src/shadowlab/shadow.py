"""Shadowing constructions: build the true solution near a pseudosolution.

Three constructions:

* ``shadow_dichotomy``: Picard iteration on the variation-of-constants
  operator whose kernel splits along the dichotomy projections; the fixed
  point z gives the solution x = y + z with sup |z| <= kappa * sigma.
* ``shadow_lognorm``: under a uniformly negative logarithmic norm the
  solution through y(0) itself shadows; it is integrated directly and the
  strict interior bound |z(t)| < sigma/m is verified.
* ``relocate``: damped fixed-point iteration for a pseudosolution inside
  the ball B_rho(0) with the same error function as y (existence is by a
  compactness theorem, so nonconvergence is a legal, reported outcome).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .certify import Certificate, DICHOTOMY_ROUTES, Route
from .errors import (AdmissibilityError, HypothesisViolatedError,
                     NonconvergenceError, NotApplicableError, StructureError)
from .linear_dynamics import DichotomyData, DichotomyKind, transition
from .lognorm import NormKind, as_norm, vec_norm
from .pseudo import PseudoSolution, measure
from .systems import Ball, OdeSystem, Region, Trajectory, integrate


@dataclass
class ShadowResult:
    """Outcome of a shadowing run.

    ``passed`` is the bound certificate sup_dist <= bound + tolerance;
    ``residual`` is the max grid residual |x' - g(t, x)| of the returned
    solution measured by high-order finite differences on a refined grid.
    """

    solution: Trajectory
    y_values: np.ndarray
    sup_dist: float
    bound: float
    iterations: int
    residual: float
    passed: bool
    tolerance: float
    route: Route
    norm: NormKind
    ratio_max: float = 0.0
    strict_interior: Optional[bool] = None
    tail_error: float = 0.0
    meta: dict = field(default_factory=dict)

    def distances(self) -> np.ndarray:
        return np.array([vec_norm(self.solution.states[i] - self.y_values[i],
                                  self.norm)
                         for i in range(self.solution.t.size)])

    def to_csv(self, path) -> None:
        n = self.solution.n
        header = ("t,"
                  + ",".join(f"y{i + 1}" for i in range(n)) + ","
                  + ",".join(f"x{i + 1}" for i in range(n)) + ",dist")
        data = np.column_stack([self.solution.t, self.y_values,
                                self.solution.states, self.distances()])
        np.savetxt(path, data, delimiter=",", header=header, comments="",
                   fmt="%.17g")

    def summary(self) -> dict:
        out = {
            "route": self.route.value,
            "norm": self.norm.value,
            "sup_dist": self.sup_dist,
            "bound": self.bound,
            "tolerance": self.tolerance,
            "iterations": self.iterations,
            "residual": self.residual,
            "ratio_max": self.ratio_max,
            "tail_error": self.tail_error,
            "passed": self.passed,
        }
        if self.strict_interior is not None:
            out["strict_interior"] = self.strict_interior
        return out

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.summary(), fh, indent=2, sort_keys=True)
            fh.write("\n")


# ---------------------------------------------------------------------------
# discrete variation-of-constants operator

class _DichotomyKernel:
    """Trapezoid discretization of the split integral operator on a grid.

    apply(w)(t_i) = int_0^{t_i} T(t_i,s) P(s) w(s) ds
                    - int_{t_i}^{T} T(t_i,s) (I - P(s)) w(s) ds,
    evaluated by telescoped composite trapezoid: per-interval transition
    matrices propagate the running integrals, which keeps the forward sweep
    in the stable bundle and the backward sweep in the unstable one.
    """

    def __init__(self, A_lin, d: DichotomyData, t: np.ndarray,
                 transition_tol: float = 1e-12):
        self.t = np.asarray(t, dtype=float)
        self.dt = np.diff(self.t)
        if np.any(self.dt <= 0):
            raise ValueError("grid must increase strictly")
        n = d.n
        self.n = n
        K = self.t.size
        self.kind = d.kind
        if d.kind is DichotomyKind.CONTRACTION:
            self.P = np.broadcast_to(np.eye(n), (K, n, n))
        elif d.kind is DichotomyKind.EXPANSION:
            self.P = np.broadcast_to(np.zeros((n, n)), (K, n, n))
        else:
            self.P = np.stack([d.P(ti) for ti in self.t])
        self.Q = np.eye(n)[None, :, :] - self.P

        uniform = np.allclose(self.dt, self.dt[0], rtol=1e-12, atol=1e-15)
        if A_lin.is_constant and uniform:
            S = transition(A_lin, self.t[1], self.t[0], transition_tol)
            Sinv = transition(A_lin, self.t[0], self.t[1], transition_tol)
            self.S = np.broadcast_to(S, (K - 1, n, n))
            self.Sinv = np.broadcast_to(Sinv, (K - 1, n, n))
        else:
            self.S = np.stack([transition(A_lin, self.t[i + 1], self.t[i],
                                          transition_tol)
                               for i in range(K - 1)])
            self.Sinv = np.linalg.inv(self.S)

    def apply(self, w: np.ndarray) -> np.ndarray:
        K, n = self.t.size, self.n
        z = np.zeros((K, n))
        half = 0.5 * self.dt[:, None]
        if self.kind is not DichotomyKind.EXPANSION:
            Pw = np.einsum("kij,kj->ki", self.P, w)
            SPw = np.einsum("kij,kj->ki", self.S, Pw[:-1])
            incr = half * (SPw + Pw[1:])
            F = np.zeros(n)
            for i in range(K - 1):
                F = self.S[i] @ F + incr[i]
                z[i + 1] += F
        if self.kind is not DichotomyKind.CONTRACTION:
            Qw = np.einsum("kij,kj->ki", self.Q, w)
            B = np.zeros(n)
            for i in range(K - 2, -1, -1):
                B = self.Sinv[i] @ (B + half[i] * Qw[i + 1]) + half[i] * Qw[i]
                z[i] -= B
        return z


def _sup(z: np.ndarray, norm: NormKind) -> float:
    return max((vec_norm(row, norm) for row in z), default=0.0)


def _fd4_interior(t: np.ndarray, x: np.ndarray):
    """Fourth-order central differences; returns (interior indices, x')."""
    h = t[1] - t[0]
    idx = np.arange(2, t.size - 2)
    xp = (x[idx - 2] - 8.0 * x[idx - 1] + 8.0 * x[idx + 1] - x[idx + 2]) / (12.0 * h)
    return idx, xp


def _fd_residual(sys: OdeSystem, t: np.ndarray, x: np.ndarray,
                 norm: NormKind) -> float:
    if t.size < 5:
        return float("nan")
    idx, xp = _fd4_interior(t, x)
    g = sys.rhs_rows(t[idx], x[idx])
    return _sup(xp - g, norm)


def _refine_grid(t: np.ndarray, factor: int) -> np.ndarray:
    parts = [np.linspace(t[i], t[i + 1], factor + 1)[:-1]
             for i in range(t.size - 1)]
    return np.append(np.concatenate(parts), t[-1])


def _picard(kernel: _DichotomyKernel, split, t, y, dy, tol, max_iter,
            norm: NormKind):
    """Iterate z -> K(f(., y+z) - f(., y) + h_y) from z = 0."""
    fy = split.f_rows(t, y)
    h = split.A_rows(t, y) + fy - dy
    z = np.zeros_like(y)
    deltas = []
    for it in range(1, max_iter + 1):
        w = split.f_rows(t, y + z) - fy + h
        z_new = kernel.apply(w)
        step = _sup(z_new - z, norm)
        deltas.append(step)
        z = z_new
        if step <= tol:
            return z, w, h, fy, it, deltas
    ratios = _ratios(deltas, tol)
    raise NonconvergenceError(
        f"Picard iteration did not reach tol={tol:g} in {max_iter} steps "
        f"(last step {deltas[-1]:.3e})",
        last_ratio=ratios[-1] if ratios else None, iterations=max_iter)


def _ratios(deltas, tol):
    """Contraction ratios of successive steps, excluding the noise floor."""
    out = []
    for a, b in zip(deltas, deltas[1:]):
        if a > 10.0 * tol:
            out.append(b / a)
    return out


def shadow_dichotomy(sys: OdeSystem, d: DichotomyData, y: PseudoSolution,
                     cert: Certificate, tol: float = 1e-9,
                     max_iter: int = 300, pass_tol: float = 1e-6,
                     max_refine: int = 2,
                     refine_tol: Optional[float] = None) -> ShadowResult:
    """Shadow an admissible pseudosolution through the dichotomy operator.

    The working grid is the pseudosolution's, refined x2 until the fixed
    point moves less than ``refine_tol`` between levels.  The residual is
    measured non-circularly: one extra operator application on a x4 grid,
    then fourth-order finite differences against g.
    """
    if sys.split is None:
        raise StructureError("shadow_dichotomy needs a semilinear split")
    if cert.route not in DICHOTOMY_ROUTES:
        raise AdmissibilityError(f"certificate route '{cert.route.value}' does "
                                 "not belong to the dichotomy family")
    if y.sigma > cert.eps0:
        raise AdmissibilityError(f"sigma = {y.sigma:g} exceeds eps0 = "
                                 f"{cert.eps0:g}; pseudosolution inadmissible")
    norm = y.norm
    split = sys.split
    A_lin = split.A
    refine_tol = tol if refine_tol is None else refine_tol

    t = y.t
    yv, dyv = y.y, y.dy
    z = w = None
    iters_total = 0
    deltas_all = []
    prev = None
    for level in range(max_refine + 1):
        kernel = _DichotomyKernel(A_lin, d, t)
        z, w, h, fy, iters, deltas = _picard(kernel, split, t, yv, dyv,
                                             tol, max_iter, norm)
        iters_total += iters
        deltas_all += deltas
        if prev is not None:
            move = _sup(z[::2] - prev, norm)
            if move <= refine_tol:
                break
        if level == max_refine:
            break
        prev = z
        t = _refine_grid(t, 2)
        yv, dyv = y.at(t)

    # residual check on a x4 grid: interpolate the iterate, apply the
    # operator once on the fine grid, then differentiate that output
    t4 = _refine_grid(t, 4)
    y4, dy4 = y.at(t4)
    dz = split.A_rows(t, z) + w
    z4_guess = CubicHermiteSpline(t, z, dz, axis=0)(t4)
    fy4 = split.f_rows(t4, y4)
    h4 = split.A_rows(t4, y4) + fy4 - dy4
    w4 = split.f_rows(t4, y4 + z4_guess) - fy4 + h4
    z4 = _DichotomyKernel(A_lin, d, t4).apply(w4)
    residual = _fd_residual(sys, t4, y4 + z4, norm)

    sup_dist = _sup(z, norm)
    bound = cert.kappa * y.sigma
    ratios = _ratios(deltas_all, tol)
    tail = 0.0
    if np.isinf(y.horizon):
        # grid truncation of the backward integral; worst at the last node
        N, lam = d.N, d.lam
        L = cert.assumptions.get("L", 0.0)
        tail = N / lam * (L * cert.kappa + 1.0) * y.sigma
    x_traj = Trajectory(t, yv + z, horizon=y.horizon)
    return ShadowResult(
        solution=x_traj, y_values=yv, sup_dist=sup_dist, bound=bound,
        iterations=iters_total, residual=residual,
        passed=bool(sup_dist <= bound + pass_tol), tolerance=pass_tol,
        route=cert.route, norm=norm,
        ratio_max=max(ratios) if ratios else 0.0, tail_error=tail,
        meta={"levels": int(np.log2(t.size // y.t.size) if t.size > y.t.size
                            else 0) + 1,
              "grid_points": int(t.size),
              "contraction_q": cert.assumptions.get("q")})


def shadow_lognorm(sys: OdeSystem, y: PseudoSolution, cert: Certificate,
                   H: Region, tol: float = 1e-10,
                   pass_tol: float = 1e-6) -> ShadowResult:
    """Shadow through the solution with the same initial value.

    Under the negative-log-norm certificate the noncontinuable solution x
    with x(0) = y(0) satisfies |x(t) - y(t)| < sigma/m strictly; blow-up
    before the horizon would refute that conclusion and raises.
    """
    if cert.route is not Route.LOGNORM:
        raise AdmissibilityError(f"certificate route '{cert.route.value}' is "
                                 "not the log-norm route")
    if y.sigma > cert.eps0:
        raise AdmissibilityError(f"sigma = {y.sigma:g} exceeds eps0 = "
                                 f"{cert.eps0:g}; pseudosolution inadmissible")
    for i in range(y.t.size):
        if not H.contains(y.y[i]):
            raise AdmissibilityError(
                f"pseudosolution leaves {H.describe()} at t={y.t[i]:g}")
    if y.t[0] != 0.0:
        raise ValueError("pseudosolution grid must start at t = 0")

    T = float(y.t[-1])
    traj = integrate(sys, y.y[0], T, tol=tol, t_eval=y.t)
    if traj.blew_up:
        raise HypothesisViolatedError(
            f"solution through y(0) blew up at t={traj.blowup_time:g} < {T:g}; "
            "this contradicts the certified conclusion, so the supplied "
            "(m, delta) hypothesis fails", witness=y.y[0])

    dist = np.array([vec_norm(traj.states[i] - y.y[i], y.norm)
                     for i in range(y.t.size)])
    sup_dist = float(np.max(dist))
    bound = cert.kappa * y.sigma
    if y.sigma > 0:
        strict = bool(np.all(dist < bound))
    else:
        strict = bool(np.all(dist <= 10.0 * tol))

    if traj.dense is not None and y.t.size >= 2:
        t4 = _refine_grid(y.t, 4)
        x4 = np.stack([np.atleast_1d(traj.dense(ti)) for ti in t4])
        residual = _fd_residual(sys, t4, x4, y.norm)
    else:
        residual = float("nan")

    return ShadowResult(
        solution=Trajectory(y.t, traj.states, horizon=y.horizon),
        y_values=y.y, sup_dist=sup_dist, bound=bound, iterations=0,
        residual=residual, passed=bool(sup_dist <= bound + pass_tol),
        tolerance=pass_tol, route=cert.route, norm=y.norm,
        strict_interior=strict,
        meta={"m": cert.assumptions.get("m"),
              "delta": cert.assumptions.get("delta")})


def relocate(sys: OdeSystem, d: DichotomyData, y: PseudoSolution, rho: float,
             tol: float = 1e-8, max_iter: int = 400, samples: int = 2000,
             seed: int = 0, omega: float = 0.5) -> PseudoSolution:
    """Find a pseudosolution in B_rho(0) with the same error function as y.

    Damped fixed-point iteration z <- (1-omega) z + omega K(f(., z) - h_y).
    Existence is guaranteed by a compactness fixed-point theorem, which is
    not constructive; if the damped iteration stalls, NonconvergenceError
    reports that honestly.  Preconditions: |f(t, x)| <= L|x| on B_rho(0)
    with L < lambda/(2N) (L estimated by sampling), and sigma_y <= eps =
    (lambda/(2N) - L) rho.
    """
    if sys.split is None:
        raise StructureError("relocate needs a semilinear split")
    if rho <= 0:
        raise ValueError("rho must be positive")
    norm = y.norm
    f = sys.split.f
    A_lin = sys.split.A

    rng = np.random.default_rng(seed)
    ball = Ball(np.zeros(sys.n), rho, norm=norm)
    pts = ball.sample(rng, samples)
    ex = ball.extreme_points()
    if ex is not None:
        pts = np.vstack([pts, ex])
    ts = np.zeros(1) if sys.autonomous else np.linspace(0.0, float(y.t[-1]), 17)
    L = 0.0
    for tq in ts:
        origin = vec_norm(np.atleast_1d(f(tq, np.zeros(sys.n))), norm)
        if origin > 1e-12:
            raise NotApplicableError(
                f"|f(t, 0)| = {origin:g} != 0: the sublinear bound "
                "|f| <= L|x| cannot hold on any ball around 0")
        for x in pts:
            r = vec_norm(x, norm)
            if r > 1e-9:
                L = max(L, vec_norm(np.atleast_1d(f(tq, x)), norm) / r)
    limit = d.lam / (2.0 * d.N)
    if L >= limit:
        raise NotApplicableError(
            f"sampled sublinear constant L = {L:g} violates L < lambda/(2N) "
            f"= {limit:g}", binding="L < lambda/(2N)")
    eps = (limit - L) * rho
    if y.sigma > eps:
        raise AdmissibilityError(
            f"sigma = {y.sigma:g} exceeds eps = (lambda/(2N) - L) rho = "
            f"{eps:g}; pseudosolution inadmissible for relocation")

    split = sys.split
    t = y.t
    fy = split.f_rows(t, y.y)
    h = split.A_rows(t, y.y) + fy - y.dy
    kernel = _DichotomyKernel(A_lin, d, t)

    z = np.zeros_like(y.y)
    defect = np.inf
    for it in range(1, max_iter + 1):
        w = split.f_rows(t, z) - h
        img = kernel.apply(w)
        defect = _sup(img - z, norm)
        if defect <= tol:
            dz = split.A_rows(t, img) + w
            ps = measure(sys, t, img, dz, norm=norm)
            ps.meta.update({
                "defect": defect, "iterations": it, "L": L, "eps": eps,
                "rho": rho, "sup": _sup(img, norm),
                "in_ball": bool(_sup(img, norm) <= rho + 10.0 * tol),
            })
            return ps
        z = (1.0 - omega) * z + omega * img
    raise NonconvergenceError(
        f"relocation iteration did not converge in {max_iter} steps "
        f"(last defect {defect:.3e}); existence is guaranteed by a "
        "nonconstructive fixed-point theorem, so this is a reportable "
        "outcome, not a refutation", iterations=max_iter)
