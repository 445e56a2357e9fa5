"""Conditional-shadowing certificates (eps0, kappa) from sufficient conditions.

Two families: dichotomy-route certificates built from (N, lambda, L) with
kappa solving (2N/lambda)(L kappa + 1) = kappa (or N/lambda for pure
contractions/expansions), and logarithmic-norm certificates eps0 = m*delta,
kappa = 1/m.  In both families eps0 * kappa = delta.

Suprema over neighborhoods (Lipschitz constants, log-norm bounds) are exact
for registry systems with closed-form hooks, otherwise sampled and labelled
as evidence.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .errors import HypothesisViolatedError, NotApplicableError, StructureError
from .lognorm import NormKind, as_norm, mat_norm, mu_closed
from .linear_dynamics import DichotomyKind
from .systems import OdeSystem, Region


class Route(str, Enum):
    T1 = "t1"                    # dichotomy + small Lipschitz constant
    T2 = "t2"                    # contraction/expansion, weakened smallness
    BALL = "ball"                # ball neighborhood corollary
    GEN_PERTURB = "gen_perturb"  # linear Jacobian growth on a ball
    POLY_PERTURB = "poly_perturb"  # polynomial Jacobian growth
    LOGNORM = "lognorm"          # uniformly negative logarithmic norm

DICHOTOMY_ROUTES = (Route.T1, Route.T2, Route.BALL,
                    Route.GEN_PERTURB, Route.POLY_PERTURB)


@dataclass
class Certificate:
    """Shadowing constants with the route and assumptions producing them."""

    eps0: float
    kappa: float
    route: Route
    assumptions: dict = field(default_factory=dict)
    exact: bool = True
    samples: Optional[int] = None
    seed: Optional[int] = None

    def __post_init__(self):
        self.route = Route(self.route)
        if not (np.isfinite(self.eps0) and self.eps0 > 0):
            raise ValueError("eps0 must be positive and finite")
        if not (np.isfinite(self.kappa) and self.kappa > 0):
            raise ValueError("kappa must be positive and finite")

    def as_dict(self) -> dict:
        return {
            "eps0": self.eps0,
            "kappa": self.kappa,
            "route": self.route.value,
            "assumptions": self.assumptions,
            "exact": self.exact,
            "samples": self.samples,
            "seed": self.seed,
        }

    def to_json(self, path=None) -> str:
        text = json.dumps(self.as_dict(), indent=2, sort_keys=True) + "\n"
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text


@dataclass
class GrowthSpec:
    """Jacobian-norm growth polynomial |f_x| <= sum_j coeffs[j] |x|^j."""

    coeffs: list

    def __post_init__(self):
        self.coeffs = [float(c) for c in self.coeffs]
        if not self.coeffs:
            raise ValueError("need at least one growth coefficient")
        if any(c < 0 for c in self.coeffs):
            raise ValueError("growth coefficients must be nonnegative")

    def __call__(self, r: float) -> float:
        return float(np.polyval(list(reversed(self.coeffs)), r))

    @property
    def is_constant(self) -> bool:
        return all(c == 0 for c in self.coeffs[1:])


def certify_t1(N: float, lam: float, L: float, delta: float) -> Certificate:
    """Dichotomy route: requires L < lambda/(2N).

    kappa = 2N/(lambda - 2NL) solves (2N/lambda)(L kappa + 1) = kappa and
    eps0 = delta/kappa.
    """
    _check_positive(N=N, lam=lam, delta=delta)
    if L < 0:
        raise ValueError("L must be nonnegative")
    if L >= lam / (2.0 * N):
        raise NotApplicableError(
            f"L = {L:g} violates L < lambda/(2N) = {lam / (2 * N):g}",
            binding="L < lambda/(2N)")
    kappa = 2.0 * N / (lam - 2.0 * N * L)
    return Certificate(delta / kappa, kappa, Route.T1, assumptions={
        "N": N, "lambda": lam, "L": L, "delta": delta,
        "q": 2.0 * N * L / lam, "kind": DichotomyKind.DICHOTOMY.value,
    })


def certify_t2(N: float, lam: float, L: float, delta: float,
               kind=DichotomyKind.CONTRACTION) -> Certificate:
    """Contraction/expansion route with the weakened condition L < lambda/N.

    kappa = N/(lambda - NL) solves (N/lambda)(L kappa + 1) = kappa.
    """
    _check_positive(N=N, lam=lam, delta=delta)
    if L < 0:
        raise ValueError("L must be nonnegative")
    kind = DichotomyKind(kind)
    if kind is DichotomyKind.DICHOTOMY:
        raise ValueError("this route needs kind contraction or expansion")
    if L >= lam / N:
        raise NotApplicableError(
            f"L = {L:g} violates L < lambda/N = {lam / N:g}",
            binding="L < lambda/N")
    kappa = N / (lam - N * L)
    return Certificate(delta / kappa, kappa, Route.T2, assumptions={
        "N": N, "lambda": lam, "L": L, "delta": delta,
        "q": N * L / lam, "kind": kind.value,
    })


def certify_ball(N: float, lam: float, L: float, delta: float, rho: float,
                 kind=DichotomyKind.DICHOTOMY) -> Certificate:
    """Ball corollary: Lipschitz constant valid on B_{rho+delta}(0)."""
    kind = DichotomyKind(kind)
    if kind is DichotomyKind.DICHOTOMY:
        base = certify_t1(N, lam, L, delta)
    else:
        base = certify_t2(N, lam, L, delta, kind)
    base.route = Route.BALL
    base.assumptions["rho"] = float(rho)
    return base


def certify_gen_perturb(N: float, lam: float, growth: GrowthSpec, rho: float,
                        kind=DichotomyKind.DICHOTOMY) -> Certificate:
    """Growth-polynomial route on the ball B_rho(0).

    Admissible iff p(rho) < theta with theta = lambda/(2N) for a general
    dichotomy and lambda/N for a contraction/expansion.  The neighborhood
    margin delta > 0 is chosen so p(rho + delta) lands at the midpoint of
    [p(rho), theta], then the result delegates to the matching base route
    with L = p(rho + delta).
    """
    _check_positive(N=N, lam=lam)
    if rho <= 0:
        raise ValueError("rho must be positive")
    if not isinstance(growth, GrowthSpec):
        growth = GrowthSpec(growth)
    kind = DichotomyKind(kind)
    theta = lam / (2.0 * N) if kind is DichotomyKind.DICHOTOMY else lam / N
    p_rho = growth(rho)
    if p_rho >= theta:
        raise NotApplicableError(
            f"growth p(rho) = {p_rho:g} at rho = {rho:g} is not below the "
            f"threshold {theta:g}", binding=_rho_bound_text(growth, theta))

    if growth.is_constant:
        delta = 1.0   # any margin works when the growth has no x-dependence
    else:
        target = 0.5 * (p_rho + theta)
        hi = rho
        while growth(rho + hi) < target:
            hi *= 2.0
        lo = 0.0
        for _ in range(100):
            mid = 0.5 * (lo + hi)
            if growth(rho + mid) < target:
                lo = mid
            else:
                hi = mid
        delta = 0.5 * (lo + hi)
    L = growth(rho + delta)

    if kind is DichotomyKind.DICHOTOMY:
        base = certify_t1(N, lam, L, delta)
    else:
        base = certify_t2(N, lam, L, delta, kind)
    base.route = Route.GEN_PERTURB if len(growth.coeffs) <= 2 else Route.POLY_PERTURB
    base.assumptions.update({
        "rho": rho, "growth_coeffs": list(growth.coeffs), "threshold": theta,
    })
    return base


def certify_lognorm(m: float, delta: float) -> Certificate:
    """Logarithmic-norm route: eps0 = m*delta and kappa = 1/m."""
    if m <= 0 or delta <= 0:
        raise ValueError("m and delta must be positive")
    return Certificate(m * delta, 1.0 / m, Route.LOGNORM, assumptions={
        "m": m, "delta": delta,
    })


def _rho_bound_text(growth: GrowthSpec, theta: float) -> str:
    if growth.coeffs[0] >= theta:
        return (f"L1 = {growth.coeffs[0]:g} >= threshold {theta:g}: "
                "not applicable for every rho")
    if len(growth.coeffs) == 2 and growth.coeffs[1] > 0:
        rho_max = (theta - growth.coeffs[0]) / growth.coeffs[1]
        return f"admissible iff rho < {rho_max:g}"
    return f"admissible iff growth(rho) < {theta:g}"


def _check_positive(**vals):
    for name, v in vals.items():
        if v <= 0:
            raise ValueError(f"{name} must be positive, got {v}")


# ---------------------------------------------------------------------------
# neighborhood suprema

def _sample_hull_nbhd(H: Region, delta: float, rng: np.random.Generator,
                      count: int, norm: NormKind) -> np.ndarray:
    """Samples of conv(N_delta(H)).

    For balls/boxes/half-lines the neighborhood is already convex; other
    shapes use random convex combinations of neighborhood point pairs.
    """
    from .systems import Ball, Box  # local to avoid cycle at import time
    pts = H.sample_nbhd(rng, count, delta, norm)
    if isinstance(H, (Ball, Box)):
        extra = H.extreme_points()
        if extra is not None and delta == 0:
            pts = np.vstack([pts, extra])
        return pts
    mates = H.sample_nbhd(rng, count, delta, norm)
    lam = rng.random(count)[:, None]
    return np.vstack([pts, lam * pts + (1.0 - lam) * mates])


def _time_grid(sys: OdeSystem, t_max: float, points: int = 33) -> np.ndarray:
    if sys.autonomous:
        return np.zeros(1)
    return np.linspace(0.0, t_max, points)


def estimate_lipschitz(sys: OdeSystem, H: Region, delta: float,
                       k=NormKind.INF, samples: int = 2000, seed: int = 0,
                       t_max: float = 100.0) -> float:
    """Sup of |f_x(t, x)|_k over conv(N_delta(H)), sampled.

    Returns the closed-form supremum when the system ships one; otherwise a
    sampled lower bound (finite extreme points of the region are always
    included in the sample).
    """
    if sys.split is None:
        raise StructureError("estimate_lipschitz needs a semilinear split")
    k = as_norm(k)
    if sys.fx_sup_exact is not None:
        hit = sys.fx_sup_exact(H, delta, k)
        if hit is not None:
            return float(hit[0])
    rng = np.random.default_rng(seed)
    pts = _sample_hull_nbhd(H, delta, rng, samples, k)
    ex = H.extreme_points()
    if ex is not None:
        pts = np.vstack([pts, ex])
    best = 0.0
    for t in _time_grid(sys, t_max):
        for x in pts:
            best = max(best, mat_norm(sys.split.fx(t, x), k))
    return best


@dataclass
class MuSupEstimate:
    """Detail record for a log-norm supremum over N_delta(H)."""

    m: float                # -sup mu(gx); positive means hypothesis holds
    sup_mu: float
    exact: bool
    witness: np.ndarray
    samples: int = 0


def estimate_m_detail(sys: OdeSystem, H: Region, delta: float,
                      k=NormKind.INF, samples: int = 4000, seed: int = 0,
                      t_max: float = 100.0) -> MuSupEstimate:
    """m = -sup of mu_k(g_x(t, x)) over the delta-neighborhood of H.

    Exact for registry systems with closed-form hooks; otherwise the sampled
    sup is evidence only (a lower bound on the true sup, so the returned m
    is an upper bound on the certifiable constant).
    """
    k = as_norm(k)
    if sys.mu_sup_exact is not None:
        hit = sys.mu_sup_exact(H, delta, k)
        if hit is not None:
            sup, witness = hit
            return MuSupEstimate(-float(sup), float(sup), True,
                                 np.atleast_1d(witness))
    rng = np.random.default_rng(seed)
    pts = H.sample_nbhd(rng, samples, delta, k)
    ex = H.extreme_points()
    if ex is not None:
        pts = np.vstack([pts, ex])
    sup = -np.inf
    witness = pts[0]
    for t in _time_grid(sys, t_max):
        for x in pts:
            v = mu_closed(sys.jac(t, x), k)
            if v > sup:
                sup, witness = v, x
    return MuSupEstimate(-float(sup), float(sup), False, np.atleast_1d(witness),
                         samples=len(pts))


def estimate_m(sys: OdeSystem, H: Region, delta: float, k=NormKind.INF,
               samples: int = 4000, seed: int = 0,
               t_max: float = 100.0) -> float:
    """Negative-log-norm margin m; raises when the hypothesis fails.

    A nonpositive estimate means the uniform bound mu(g_x) <= -m < 0 cannot
    hold on N_delta(H); the error carries a witnessing point.
    """
    est = estimate_m_detail(sys, H, delta, k, samples, seed, t_max)
    if est.m <= 0:
        raise HypothesisViolatedError(
            f"sup of mu(g_x) over the {delta:g}-neighborhood of "
            f"{H.describe()} is {est.sup_mu:g} >= 0 "
            f"(witness x = {np.asarray(est.witness).tolist()})",
            witness=est.witness)
    return est.m
