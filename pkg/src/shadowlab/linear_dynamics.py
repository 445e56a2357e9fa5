"""Linear systems x' = A(t) x: transition matrices, exponential dichotomies.

Dichotomy constants are supplied by the caller and *verified* on a grid of
time pairs; nothing here estimates them for general time-varying A(t).  For
constant diagonalizable A a helper derives (P, N, lambda) from the spectral
splitting.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.linalg import expm

from .errors import StiffnessError
from .lognorm import NormKind, as_norm, mat_norm, mu_closed


class LinearSystem:
    """Coefficient family A(t), t >= 0, of a linear system x' = A(t) x."""

    def __init__(self, n: int, A: Callable[[float], np.ndarray],
                 constant_matrix: Optional[np.ndarray] = None):
        self.n = int(n)
        self._A = A
        self.constant_matrix = None
        if constant_matrix is not None:
            self.constant_matrix = np.asarray(constant_matrix, dtype=float).reshape(n, n)

    @property
    def is_constant(self) -> bool:
        return self.constant_matrix is not None

    def A(self, t: float) -> np.ndarray:
        if self.constant_matrix is not None:
            return self.constant_matrix
        return np.asarray(self._A(t), dtype=float).reshape(self.n, self.n)

    @classmethod
    def constant(cls, M) -> "LinearSystem":
        M = np.atleast_2d(np.asarray(M, dtype=float))
        if M.shape[0] != M.shape[1]:
            raise ValueError(f"constant coefficient must be square, got {M.shape}")
        return cls(M.shape[0], lambda t: M, constant_matrix=M)

    @classmethod
    def from_grid(cls, ts, mats) -> "LinearSystem":
        """Piecewise-linear interpolation of matrix samples in time."""
        ts = np.asarray(ts, dtype=float)
        mats = np.asarray(mats, dtype=float)
        if ts.ndim != 1 or ts.size < 2 or np.any(np.diff(ts) <= 0):
            raise ValueError("need an increasing grid of at least two times")
        if mats.shape[0] != ts.size or mats.shape[1] != mats.shape[2]:
            raise ValueError("matrix samples must be (len(ts), n, n)")
        n = mats.shape[1]

        def A(t, ts=ts, mats=mats):
            t = float(np.clip(t, ts[0], ts[-1]))
            j = min(int(np.searchsorted(ts, t, side="right")) - 1, ts.size - 2)
            j = max(j, 0)
            w = (t - ts[j]) / (ts[j + 1] - ts[j])
            return (1.0 - w) * mats[j] + w * mats[j + 1]

        return cls(n, A)


def transition(sys: LinearSystem, t: float, s: float, tol: float = 1e-10) -> np.ndarray:
    """Transition matrix T(t, s) mapping the state at time s to time t.

    Constant coefficients use the scaling-and-squaring matrix exponential;
    otherwise the matrix ODE X' = A(u) X is integrated adaptively with local
    error <= tol (DOP853).  T(s, s) = I exactly.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    t, s = float(t), float(s)
    n = sys.n
    if t == s:
        return np.eye(n)
    if sys.is_constant:
        return expm(sys.constant_matrix * (t - s))

    def rhs(u, xflat):
        return (sys.A(u) @ xflat.reshape(n, n)).ravel()

    sol = solve_ivp(rhs, (s, t), np.eye(n).ravel(), method="DOP853",
                    rtol=tol, atol=tol)
    if not sol.success:
        raise StiffnessError(f"transition-matrix integration failed on "
                             f"[{s}, {t}]: {sol.message}")
    return sol.y[:, -1].reshape(n, n)


class DichotomyKind(str, Enum):
    DICHOTOMY = "dichotomy"
    CONTRACTION = "contraction"
    EXPANSION = "expansion"


@dataclass
class DichotomyData:
    """Projection family P(t) with constants N, lambda for (ed0)-(ed2).

    kind CONTRACTION forces P(t) = I and EXPANSION forces P(t) = 0.
    """

    n: int
    N: float
    lam: float
    kind: DichotomyKind = DichotomyKind.DICHOTOMY
    projection: Optional[Callable[[float], np.ndarray]] = None

    def __post_init__(self):
        if self.N <= 0 or self.lam <= 0:
            raise ValueError("dichotomy constants N and lambda must be positive")
        self.kind = DichotomyKind(self.kind)
        if self.kind is DichotomyKind.CONTRACTION:
            self.projection = lambda t, n=self.n: np.eye(n)
        elif self.kind is DichotomyKind.EXPANSION:
            self.projection = lambda t, n=self.n: np.zeros((n, n))
        elif self.projection is None:
            raise ValueError("a projection family is required for kind 'dichotomy'")

    def P(self, t: float) -> np.ndarray:
        return np.asarray(self.projection(t), dtype=float).reshape(self.n, self.n)

    @classmethod
    def contraction(cls, n: int, N: float, lam: float) -> "DichotomyData":
        return cls(n, N, lam, DichotomyKind.CONTRACTION)

    @classmethod
    def expansion(cls, n: int, N: float, lam: float) -> "DichotomyData":
        return cls(n, N, lam, DichotomyKind.EXPANSION)

    @classmethod
    def with_projection(cls, P, N: float, lam: float) -> "DichotomyData":
        """Constant projection matrix P, general dichotomy."""
        P = np.atleast_2d(np.asarray(P, dtype=float))
        return cls(P.shape[0], N, lam, DichotomyKind.DICHOTOMY, lambda t: P)


@dataclass
class ConditionResult:
    name: str
    passed: bool
    worst_margin: float          # max of (lhs - rhs); <= 0 means satisfied
    worst_pair: tuple            # (t, s) attaining the worst margin
    checks: int

    def line(self) -> str:
        status = "pass" if self.passed else "FAIL"
        return (f"{self.name:<24s} {status}  worst margin {self.worst_margin:+.3e} "
                f"at (t, s) = ({self.worst_pair[0]:g}, {self.worst_pair[1]:g}) "
                f"[{self.checks} checks]")


@dataclass
class DichotomyReport:
    """Grid verification result for (ed0)-(ed2); sampled pairs only."""

    grid: np.ndarray
    norm: NormKind
    tol: float
    conditions: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conditions)

    def condition(self, name: str) -> ConditionResult:
        for c in self.conditions:
            if c.name == name:
                return c
        raise KeyError(name)

    def summary(self) -> str:
        lines = [
            "exponential dichotomy verification "
            f"({'pass' if self.passed else 'FAIL'})",
            f"grid: {self.grid.size} times in [{self.grid[0]:g}, {self.grid[-1]:g}], "
            f"norm {self.norm.value}, tol {self.tol:g}",
        ]
        lines += ["  " + c.line() for c in self.conditions]
        lines.append("note: conditions checked on sampled grid pairs only, "
                     "not proved for all t, s.")
        return "\n".join(lines)


def verify_dichotomy(sys: LinearSystem, d: DichotomyData, grid,
                     tol: float = 1e-8, k=NormKind.TWO,
                     transition_tol: float = 1e-11) -> DichotomyReport:
    """Check projection idempotency, commutation and the decay bounds
    (ed1)/(ed2) on all ordered pairs from the grid.

    Failures do not raise; the report carries the worst margin per condition.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("grid must be a nonempty 1-d array of times")
    if grid.size > 1 and np.any(np.diff(grid) <= 0):
        raise ValueError("grid must increase strictly")
    k = as_norm(k)
    G = grid.size
    n = sys.n

    P = [d.P(t) for t in grid]
    # T(t_i, t_j) for i >= j from per-interval steps; inverses for i < j.
    steps = [transition(sys, grid[i + 1], grid[i], transition_tol)
             for i in range(G - 1)]
    T = [[None] * G for _ in range(G)]
    for j in range(G):
        T[j][j] = np.eye(n)
        for i in range(j + 1, G):
            T[i][j] = steps[i - 1] @ T[i - 1][j]
    for i in range(G):
        for j in range(i + 1, G):
            T[i][j] = np.linalg.inv(T[j][i])

    def run(name, pairs, lhs_rhs):
        worst = -np.inf
        worst_pair = (grid[0], grid[0])
        count = 0
        for (i, j) in pairs:
            lhs, rhs = lhs_rhs(i, j)
            margin = lhs - rhs
            count += 1
            if margin > worst:
                worst = margin
                worst_pair = (grid[i], grid[j])
        return ConditionResult(name, worst <= 0.0, worst, worst_pair, count)

    idxs = range(G)
    all_pairs = [(i, j) for i in idxs for j in idxs]
    fwd_pairs = [(i, j) for i in idxs for j in idxs if i >= j]
    bwd_pairs = [(i, j) for i in idxs for j in idxs if i <= j]

    report = DichotomyReport(grid=grid, norm=k, tol=tol)
    report.conditions.append(run(
        "projection P^2 = P", [(i, i) for i in idxs],
        lambda i, j: (mat_norm(P[i] @ P[i] - P[i], k), 1e-10)))
    report.conditions.append(run(
        "commutation (ed0)", all_pairs,
        lambda i, j: (mat_norm(P[i] @ T[i][j] - T[i][j] @ P[j], k), tol)))
    report.conditions.append(run(
        "forward decay (ed1)", fwd_pairs,
        lambda i, j: (mat_norm(T[i][j] @ P[j], k),
                      d.N * np.exp(-d.lam * (grid[i] - grid[j])) + tol)))
    report.conditions.append(run(
        "backward decay (ed2)", bwd_pairs,
        lambda i, j: (mat_norm(T[i][j] @ (np.eye(n) - P[j]), k),
                      d.N * np.exp(-d.lam * (grid[j] - grid[i])) + tol)))
    return report


def coppel_bound(sys: LinearSystem, s: float, t: float, k=NormKind.INF,
                 quad_tol: float = 1e-12) -> float:
    """Growth bound exp(integral_s^t mu_k(A(u)) du) >= |T(t, s)|_k.

    Constant coefficients reduce to exp(mu_k(A) (t - s)) exactly.
    """
    if not 0 <= s <= t:
        raise ValueError("need 0 <= s <= t")
    k = as_norm(k)
    if sys.is_constant:
        return float(np.exp(mu_closed(sys.constant_matrix, k) * (t - s)))
    if t == s:
        return 1.0
    val, _ = quad(lambda u: mu_closed(sys.A(u), k), s, t,
                  epsabs=quad_tol, epsrel=quad_tol, limit=200)
    return float(np.exp(val))


def constant_dichotomy(A, k=NormKind.TWO, gap_tol: float = 1e-12) -> DichotomyData:
    """Derive (P, N, lambda) for a constant diagonalizable matrix.

    P projects onto the span of eigenvectors with negative real part,
    lambda is the spectral gap to the imaginary axis, and N comes from the
    conditioning of the eigenvector basis.  Eigenvalues on the imaginary
    axis admit no dichotomy and raise.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    n = A.shape[0]
    w, V = np.linalg.eig(A)
    if np.any(np.abs(w.real) <= gap_tol):
        raise ValueError("eigenvalue on the imaginary axis: no exponential dichotomy")
    stable = w.real < 0
    lam = float(np.min(np.abs(w.real)))
    cond = float(np.linalg.cond(V, 2))
    N = max(cond, 1.0)
    if np.all(stable):
        return DichotomyData.contraction(n, N, lam)
    if not np.any(stable):
        return DichotomyData.expansion(n, N, lam)
    Pi = np.diag(stable.astype(float))
    P = np.real(V @ Pi @ np.linalg.inv(V))
    return DichotomyData.with_projection(P, N, lam)
