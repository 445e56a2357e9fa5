"""ODE systems x' = g(t, x), regions, trajectory integration, named examples.

The registry holds the systems used throughout: the scalar quadratic-decay
equation x' = -(x + 1/2)^2 ("exm"), the logistic equation x' = x(a x + b),
the planar SI epidemic system, and declarative linear-plus-polynomial
systems built from coefficient tensors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.integrate import solve_ivp

from .errors import DomainError, EvaluationError, RegistryError
from .lognorm import NormKind, as_norm, vec_norm
from .linear_dynamics import LinearSystem

BLOWUP_THRESHOLD = 1e8
DEFAULT_TOL = 1e-10


# ---------------------------------------------------------------------------
# regions

class Region:
    """A prescribed set H with membership, distance and sampling.

    ``delta`` is the containment slack: ``contains`` accepts points within
    distance delta of H (delta = 0 means membership in H itself).
    """

    delta: float = 0.0

    def dist(self, x) -> float:
        raise NotImplementedError

    def contains(self, x, delta: Optional[float] = None, slack: float = 1e-12) -> bool:
        d = self.delta if delta is None else delta
        return self.dist(x) <= d + slack

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """Points of H itself, shape (count, n)."""
        raise NotImplementedError

    def sample_nbhd(self, rng: np.random.Generator, count: int, delta: float,
                    norm=NormKind.INF) -> np.ndarray:
        """Points of the closed delta-neighborhood of H."""
        base = self.sample(rng, count)
        if delta == 0:
            return base
        n = base.shape[1]
        direc = rng.standard_normal(base.shape)
        scale = np.array([vec_norm(v, norm) for v in direc])
        scale[scale == 0] = 1.0
        radius = delta * rng.random(count) ** (1.0 / n)
        return base + direc * (radius / scale)[:, None]

    def extreme_points(self) -> Optional[np.ndarray]:
        """Finite extreme points, when the shape has them; else None."""
        return None

    def describe(self) -> str:
        return type(self).__name__


class Ball(Region):
    """Closed ball of radius rho around a center, in the given norm."""

    def __init__(self, center, rho: float, norm=NormKind.INF, delta: float = 0.0):
        self.center = np.atleast_1d(np.asarray(center, dtype=float))
        if rho < 0:
            raise ValueError("radius must be nonnegative")
        self.rho = float(rho)
        self.norm = as_norm(norm)
        self.delta = float(delta)

    @property
    def n(self) -> int:
        return self.center.size

    def dist(self, x) -> float:
        r = vec_norm(np.atleast_1d(np.asarray(x, float)) - self.center, self.norm)
        return max(0.0, r - self.rho)

    def sample(self, rng, count):
        direc = rng.standard_normal((count, self.n))
        scale = np.array([vec_norm(v, self.norm) for v in direc])
        scale[scale == 0] = 1.0
        radius = self.rho * rng.random(count) ** (1.0 / self.n)
        return self.center[None, :] + direc * (radius / scale)[:, None]

    def extreme_points(self):
        if self.n == 1:
            return np.array([[self.center[0] - self.rho], [self.center[0] + self.rho]])
        if self.norm is NormKind.INF:
            corners = np.array(np.meshgrid(*[[-self.rho, self.rho]] * self.n)
                               ).reshape(self.n, -1).T
            return self.center[None, :] + corners
        return None

    def describe(self):
        return f"ball(center={self.center.tolist()}, rho={self.rho}, norm={self.norm.value})"


class Box(Region):
    """Coordinate box [lo_i, hi_i]; infinite bounds allowed."""

    def __init__(self, lo, hi, delta: float = 0.0):
        self.lo = np.atleast_1d(np.asarray(lo, dtype=float))
        self.hi = np.atleast_1d(np.asarray(hi, dtype=float))
        if self.lo.shape != self.hi.shape or np.any(self.lo > self.hi):
            raise ValueError("box bounds must satisfy lo <= hi componentwise")
        self.delta = float(delta)

    @property
    def n(self) -> int:
        return self.lo.size

    def dist(self, x) -> float:
        x = np.atleast_1d(np.asarray(x, float))
        below = np.where(np.isfinite(self.lo), self.lo - x, -np.inf)
        above = np.where(np.isfinite(self.hi), x - self.hi, -np.inf)
        return max(0.0, float(np.max(np.maximum(below, above))))

    def sample(self, rng, count):
        # unbounded sides are sampled with a unit-scale exponential tail
        lo = self.lo
        hi = self.hi
        out = np.empty((count, self.n))
        for i in range(self.n):
            if np.isfinite(lo[i]) and np.isfinite(hi[i]):
                out[:, i] = rng.uniform(lo[i], hi[i], count)
            elif np.isfinite(lo[i]):
                out[:, i] = lo[i] + rng.exponential(1.0, count)
            elif np.isfinite(hi[i]):
                out[:, i] = hi[i] - rng.exponential(1.0, count)
            else:
                out[:, i] = rng.standard_normal(count)
        return out

    def extreme_points(self):
        if not (np.all(np.isfinite(self.lo)) and np.all(np.isfinite(self.hi))):
            if self.n == 1 and np.isfinite(self.lo[0]):
                return np.array([[self.lo[0]]])
            if self.n == 1 and np.isfinite(self.hi[0]):
                return np.array([[self.hi[0]]])
            return None
        grids = np.meshgrid(*[[self.lo[i], self.hi[i]] for i in range(self.n)])
        return np.array(grids).reshape(self.n, -1).T

    def describe(self):
        return f"box(lo={self.lo.tolist()}, hi={self.hi.tolist()})"


class HalfLine(Box):
    """Product of half-lines [a, infinity)^n."""

    def __init__(self, a: float, n: int = 1, delta: float = 0.0):
        super().__init__([a] * n, [np.inf] * n, delta=delta)
        self.a = float(a)

    def describe(self):
        return f"halfline(a={self.a}, n={self.n})"


class SimplexGamma(Region):
    """Epidemic simplex {S >= 0, I >= 0, S + I <= 1 - c}."""

    def __init__(self, c: float, delta: float = 0.0):
        if not 0 <= c < 1:
            raise ValueError("c must lie in [0, 1)")
        self.c = float(c)
        self.delta = float(delta)

    @property
    def n(self) -> int:
        return 2

    def _member_within(self, x, d: float) -> bool:
        # the sup-norm box of radius d around x meets the simplex iff
        # every coordinate reaches 0 and the smallest reachable sum fits
        x = np.atleast_1d(np.asarray(x, float))
        if np.any(x < -d):
            return False
        return float(np.sum(np.maximum(x - d, 0.0))) <= 1.0 - self.c

    def dist(self, x) -> float:
        if self._member_within(x, 0.0):
            return 0.0
        lo, hi = 0.0, 1.0
        while not self._member_within(x, hi):
            hi *= 2.0
            if hi > 1e12:
                return float(hi)
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if self._member_within(x, mid):
                hi = mid
            else:
                lo = mid
        return hi

    def sample(self, rng, count):
        u = rng.random((count, 2))
        flip = u.sum(axis=1) > 1.0
        u[flip] = 1.0 - u[flip]
        return (1.0 - self.c) * u

    def extreme_points(self):
        side = 1.0 - self.c
        return np.array([[0.0, 0.0], [side, 0.0], [0.0, side]])

    def describe(self):
        return f"simplex_gamma(c={self.c})"


class CustomRegion(Region):
    """Membership predicate plus sampler; distance by sampled proxy."""

    def __init__(self, predicate, sampler, n: int, delta: float = 0.0,
                 dist_fn=None, proxy_samples: int = 4096, proxy_seed: int = 0):
        self.predicate = predicate
        self.sampler = sampler
        self.n = int(n)
        self.delta = float(delta)
        self.dist_fn = dist_fn
        self._proxy_samples = proxy_samples
        self._proxy_seed = proxy_seed
        self._cloud = None

    def dist(self, x) -> float:
        x = np.atleast_1d(np.asarray(x, float))
        if self.predicate(x):
            return 0.0
        if self.dist_fn is not None:
            return float(self.dist_fn(x))
        # sampled upper bound on the distance; exact membership still
        # comes from the predicate above
        if self._cloud is None:
            rng = np.random.default_rng(self._proxy_seed)
            self._cloud = self.sample(rng, self._proxy_samples)
        return float(np.min(np.max(np.abs(self._cloud - x[None, :]), axis=1)))

    def sample(self, rng, count):
        return np.asarray(self.sampler(rng, count), dtype=float).reshape(count, self.n)


# ---------------------------------------------------------------------------
# systems and trajectories

@dataclass
class SemilinearSplit:
    """Decomposition g(t, x) = A(t) x + f(t, x).

    ``vectorized`` means f also accepts a (K, n) matrix of states (one row
    per time; t is then an array or ignored) and returns rows.
    """

    A: LinearSystem
    f: Callable[[float, np.ndarray], np.ndarray]
    fx: Callable[[float, np.ndarray], np.ndarray]
    vectorized: bool = False

    def f_rows(self, t: np.ndarray, Y: np.ndarray) -> np.ndarray:
        if self.vectorized:
            return np.asarray(self.f(t, Y), dtype=float).reshape(Y.shape)
        return np.stack([np.atleast_1d(np.asarray(self.f(t[i], Y[i]), dtype=float))
                         for i in range(len(t))])

    def A_rows(self, t: np.ndarray, Y: np.ndarray) -> np.ndarray:
        if self.A.is_constant:
            return Y @ self.A.constant_matrix.T
        return np.stack([self.A.A(t[i]) @ Y[i] for i in range(len(t))])


@dataclass
class OdeSystem:
    """Right-hand side g, its state Jacobian gx, and optional structure.

    ``mu_sup_exact(H, delta, k)`` and ``fx_sup_exact(H, delta, k)``, when
    set, return closed-form suprema (value, witness) over the delta-
    neighborhood / its convex hull, or None when the combination is not
    covered; samplers are the fallback.
    """

    n: int
    g: Callable[[float, np.ndarray], np.ndarray]
    gx: Callable[[float, np.ndarray], np.ndarray]
    split: Optional[SemilinearSplit] = None
    name: str = ""
    autonomous: bool = True
    vectorized: bool = False
    mu_sup_exact: Optional[Callable] = None
    fx_sup_exact: Optional[Callable] = None

    def rhs(self, t: float, x: np.ndarray) -> np.ndarray:
        v = np.atleast_1d(np.asarray(self.g(t, x), dtype=float))
        if not np.all(np.isfinite(v)):
            raise EvaluationError(f"non-finite right-hand side at t={t}, x={x}")
        return v

    def rhs_rows(self, t: np.ndarray, Y: np.ndarray) -> np.ndarray:
        """g evaluated on one state row per time (vectorized when declared)."""
        if self.vectorized:
            return np.asarray(self.g(t, Y), dtype=float).reshape(Y.shape)
        return np.stack([self.rhs(t[i], Y[i]) for i in range(len(t))])

    def jac(self, t: float, x: np.ndarray) -> np.ndarray:
        return np.atleast_2d(np.asarray(self.gx(t, x), dtype=float))

    def validate_split(self, rng: np.random.Generator, samples: int = 20,
                       scale: float = 1.0, tol: float = 1e-12) -> None:
        if self.split is None:
            return
        for _ in range(samples):
            t = float(rng.random() * 10.0)
            x = rng.uniform(-scale, scale, self.n)
            lhs = self.rhs(t, x)
            rhs = self.split.A.A(t) @ x + np.atleast_1d(self.split.f(t, x))
            if np.max(np.abs(lhs - rhs)) > tol:
                raise RegistryError(f"split of '{self.name}' is inconsistent "
                                    f"with g at t={t}, x={x}")


@dataclass
class Trajectory:
    """Grid solution of an initial value problem on [0, horizon)."""

    t: np.ndarray
    states: np.ndarray
    horizon: float
    blew_up: bool = False
    blowup_time: Optional[float] = None
    dense: Optional[Callable[[float], np.ndarray]] = None

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.states = np.atleast_2d(np.asarray(self.states, dtype=float))
        if self.states.shape[0] != self.t.size:
            raise ValueError("states must carry one row per grid time")
        if self.t.size > 1 and np.any(np.diff(self.t) <= 0):
            raise ValueError("trajectory grid must increase strictly")

    @property
    def n(self) -> int:
        return self.states.shape[1]

    def to_csv(self, path) -> None:
        header = "t," + ",".join(f"x{i + 1}" for i in range(self.n))
        data = np.column_stack([self.t, self.states])
        np.savetxt(path, data, delimiter=",", header=header, comments="",
                   fmt="%.17g")


def integrate(sys: OdeSystem, x0, T: float, tol: float = DEFAULT_TOL,
              t_eval=None, max_step: float = np.inf) -> Trajectory:
    """Adaptive solution of x' = g(t, x) on [0, min(T, blow-up)).

    Blow-up is declared when |x| reaches 1e8 or the step size underflows;
    the trajectory then ends at the blow-up time with ``blew_up`` set.
    """
    if T <= 0:
        raise ValueError("horizon T must be positive")
    if tol <= 0:
        raise ValueError("tol must be positive")
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))

    def event(t, x):
        return float(np.max(np.abs(x))) - BLOWUP_THRESHOLD

    event.terminal = True
    event.direction = 1.0

    sol = solve_ivp(sys.rhs, (0.0, T), x0, method="DOP853", rtol=tol, atol=tol,
                    t_eval=t_eval, max_step=max_step, events=[event],
                    dense_output=True)
    blew_up = False
    blowup_time = None
    if sol.status == 1:  # blow-up event
        blew_up = True
        blowup_time = float(sol.t_events[0][0])
    elif sol.status == -1:  # step underflow near a singularity
        blew_up = True
        blowup_time = float(sol.t[-1]) if sol.t.size else 0.0
    ts = sol.t
    ys = sol.y.T
    if ts.size == 0:
        ts = np.array([0.0])
        ys = x0[None, :]
    return Trajectory(ts, ys, horizon=T, blew_up=blew_up,
                      blowup_time=blowup_time, dense=sol.sol)


def exm_exact(c: float, t):
    """Closed-form solution of x' = -(x + 1/2)^2 with x(0) = c.

    x(t) = -1/2 + gamma/(gamma t + 1) with gamma = c + 1/2, valid on the
    maximal interval containing 0; times outside it raise DomainError.
    """
    gamma = float(c) + 0.5
    tt = np.asarray(t, dtype=float)
    if gamma == 0.0:
        out = np.full_like(tt, -0.5)
        return float(out) if np.isscalar(t) or tt.ndim == 0 else out
    if gamma > 0:
        bad = tt <= -1.0 / gamma
    else:
        bad = tt >= -1.0 / gamma
    if np.any(bad):
        raise DomainError(f"time outside the existence interval of the solution "
                          f"with x(0)={c} (gamma={gamma:g})")
    out = -0.5 + gamma / (gamma * tt + 1.0)
    return float(out) if np.isscalar(t) or tt.ndim == 0 else out


def jacobian_fd(sys: OdeSystem, t: float, x, h: float = 1e-6) -> np.ndarray:
    """Central finite-difference Jacobian of g in x (consistency checks)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = x.size
    J = np.empty((n, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = h
        J[:, j] = (sys.rhs(t, x + e) - sys.rhs(t, x - e)) / (2.0 * h)
    return J


# ---------------------------------------------------------------------------
# polynomial maps for declarative custom systems

class PolynomialMap:
    """Vector polynomial from coefficient terms.

    ``terms[i]`` is a list of (coefficient, exponents) pairs for output
    component i, with ``exponents`` a length-n tuple of nonnegative ints.
    """

    def __init__(self, n: int, terms):
        self.n = int(n)
        self.terms = []
        for comp in terms:
            parsed = []
            for coeff, exps in comp:
                exps = tuple(int(e) for e in exps)
                if len(exps) != self.n or any(e < 0 for e in exps):
                    raise RegistryError(f"bad exponent tuple {exps} for dimension {n}")
                parsed.append((float(coeff), exps))
            self.terms.append(parsed)
        if len(self.terms) != self.n:
            raise RegistryError("need one term list per output component")

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.zeros(self.n)
        for i, comp in enumerate(self.terms):
            for coeff, exps in comp:
                out[i] += coeff * math.prod(x[j] ** e for j, e in enumerate(exps) if e)
        return out

    def jacobian(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        J = np.zeros((self.n, self.n))
        for i, comp in enumerate(self.terms):
            for coeff, exps in comp:
                for j, e in enumerate(exps):
                    if e == 0:
                        continue
                    term = coeff * e * x[j] ** (e - 1)
                    for l, el in enumerate(exps):
                        if l != j and el:
                            term *= x[l] ** el
                    J[i, j] += term
        return J


# ---------------------------------------------------------------------------
# registry

def _interval_of(H: Region):
    """Lower/upper bound of a one-dimensional region, or None."""
    if isinstance(H, Ball) and H.n == 1:
        return H.center[0] - H.rho, H.center[0] + H.rho
    if isinstance(H, Box) and H.n == 1:
        return H.lo[0], H.hi[0]
    return None


def _exm_system() -> OdeSystem:
    def g(t, x):
        x = np.asarray(x, dtype=float)
        return -(x + 0.5) ** 2

    def gx(t, x):
        return np.array([[-2.0 * (x[0] + 0.5)]])

    def f(t, x):
        x = np.asarray(x, dtype=float)
        return -x ** 2 - 0.25

    def fx(t, x):
        return np.array([[-2.0 * x[0]]])

    def mu_sup(H, delta, k):
        iv = _interval_of(H)
        if iv is None:
            return None
        lo = iv[0] - delta
        sup = -2.0 * (lo + 0.5)
        return sup, np.array([lo])

    def fx_sup(H, delta, k):
        iv = _interval_of(H)
        if iv is None:
            return None
        lo, hi = iv[0] - delta, iv[1] + delta
        if not np.isfinite(hi):
            return None
        if abs(lo) >= abs(hi):
            return 2.0 * abs(lo), np.array([lo])
        return 2.0 * abs(hi), np.array([hi])

    split = SemilinearSplit(LinearSystem.constant([[-1.0]]), f, fx,
                            vectorized=True)
    return OdeSystem(1, g, gx, split=split, name="exm", vectorized=True,
                     mu_sup_exact=mu_sup, fx_sup_exact=fx_sup)


def _logistic_system(a: float, b: float) -> OdeSystem:
    a, b = float(a), float(b)
    if a == 0 or b == 0:
        raise RegistryError("logistic parameters a, b must be nonzero")

    def g(t, x):
        x = np.asarray(x, dtype=float)
        return x * (a * x + b)

    def gx(t, x):
        return np.array([[2.0 * a * x[0] + b]])

    def f(t, x):
        x = np.asarray(x, dtype=float)
        return a * x ** 2

    def fx(t, x):
        return np.array([[2.0 * a * x[0]]])

    def mu_sup(H, delta, k):
        iv = _interval_of(H)
        if iv is None:
            return None
        lo, hi = iv[0] - delta, iv[1] + delta
        # gx is affine in x: the sup sits at an interval endpoint
        if a > 0:
            if not np.isfinite(hi):
                return np.inf, np.array([hi])
            return 2.0 * a * hi + b, np.array([hi])
        return 2.0 * a * lo + b, np.array([lo])

    split = SemilinearSplit(LinearSystem.constant([[b]]), f, fx,
                            vectorized=True)
    return OdeSystem(1, g, gx, split=split, name="logistic", vectorized=True,
                     mu_sup_exact=mu_sup)


def _si_system() -> OdeSystem:
    def g(t, x):
        x = np.asarray(x, dtype=float)
        S, I = x[..., 0], x[..., 1]
        return np.stack([1.0 - I * S - S, I * S - I], axis=-1)

    def gx(t, x):
        S, I = x[0], x[1]
        return np.array([[-I - 1.0, -S], [I, S - 1.0]])

    def f(t, x):
        x = np.asarray(x, dtype=float)
        S, I = x[..., 0], x[..., 1]
        return np.stack([1.0 - I * S, I * S], axis=-1)

    def fx(t, x):
        S, I = x[0], x[1]
        return np.array([[-I, -S], [I, S]])

    def mu_sup(H, delta, k):
        if not (isinstance(H, SimplexGamma) and as_norm(k) is NormKind.INF):
            return None
        # sup of mu_inf(gx) = S - 1 + I over the sup-norm delta-neighborhood
        # of Gamma_c is -(c - 2*delta), attained at (1 - c + delta, -delta)
        sup = -(H.c - 2.0 * delta)
        return sup, np.array([1.0 - H.c + delta, -delta])

    split = SemilinearSplit(LinearSystem.constant([[-1.0, 0.0], [0.0, -1.0]]),
                            f, fx, vectorized=True)
    return OdeSystem(2, g, gx, split=split, name="si", vectorized=True,
                     mu_sup_exact=mu_sup)


def _linear_poly_system(A, coeffs) -> OdeSystem:
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if A.shape[0] != A.shape[1]:
        raise RegistryError(f"linear part must be square, got {A.shape}")
    n = A.shape[0]
    poly = PolynomialMap(n, coeffs)
    lin = LinearSystem.constant(A)

    def g(t, x):
        return A @ np.atleast_1d(x) + poly(x)

    def gx(t, x):
        return A + poly.jacobian(x)

    def f(t, x):
        return poly(x)

    def fx(t, x):
        return poly.jacobian(x)

    split = SemilinearSplit(lin, f, fx)
    return OdeSystem(n, g, gx, split=split, name="linear_poly")


def registry(name: str, **params) -> OdeSystem:
    """Named system lookup: exm, logistic(a, b), si, linear_poly(A, coeffs)."""
    name = str(name).lower().replace("-", "_")
    try:
        if name == "exm":
            return _exm_system()
        if name == "logistic":
            return _logistic_system(params["a"], params["b"])
        if name == "si":
            return _si_system()
        if name == "linear_poly":
            return _linear_poly_system(params["A"], params["coeffs"])
    except KeyError as exc:
        raise RegistryError(f"system '{name}' is missing parameter {exc}") from exc
    raise RegistryError(f"unknown system '{name}' "
                        "(choices: exm, logistic, si, linear_poly)")
