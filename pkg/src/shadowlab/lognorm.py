"""Logarithmic norms (Lozinskii measures) of real square matrices.

The measure mu(A) is the one-sided derivative of |I + h*A| at h = 0+ for an
induced matrix norm.  Unlike a norm it can be negative, which is what makes
it useful for contraction estimates: |T(t,s)| <= exp(integral of mu(A)).
Closed forms exist for the inf-, 1- and 2-norms; the difference quotient at
small h > 0 serves as an independent oracle for all of them.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np


class NormKind(str, Enum):
    """The three vector norms with closed-form matrix measures."""

    INF = "inf"
    ONE = "one"
    TWO = "two"


def as_norm(k) -> NormKind:
    """Coerce a NormKind or its string value ('inf'|'one'|'two')."""
    if isinstance(k, NormKind):
        return k
    return NormKind(str(k).lower())


def _square(A) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim == 0:
        A = A.reshape(1, 1)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix entries must be finite")
    return A


def vec_norm(x, k=NormKind.INF) -> float:
    """Vector norm |x|_k."""
    x = np.asarray(x, dtype=float).ravel()
    k = as_norm(k)
    if k is NormKind.INF:
        return float(np.max(np.abs(x))) if x.size else 0.0
    if k is NormKind.ONE:
        return float(np.sum(np.abs(x)))
    return float(np.sqrt(np.sum(x * x)))


def mat_norm(A, k=NormKind.INF) -> float:
    """Induced operator norm |A|_k."""
    A = _square(A)
    k = as_norm(k)
    if k is NormKind.INF:
        return float(np.max(np.sum(np.abs(A), axis=1)))
    if k is NormKind.ONE:
        return float(np.max(np.sum(np.abs(A), axis=0)))
    return float(np.linalg.norm(A, 2))


def mu_closed(A, k=NormKind.INF) -> float:
    """Closed-form logarithmic norm mu_k(A).

    inf: max over rows of a_ii + sum of off-diagonal |a_ik|;
    one: the column analogue;
    two: largest eigenvalue of the symmetric part (A + A^T)/2.
    """
    A = _square(A)
    k = as_norm(k)
    if k is NormKind.INF:
        d = np.diagonal(A)
        off = np.sum(np.abs(A), axis=1) - np.abs(d)
        return float(np.max(d + off))
    if k is NormKind.ONE:
        d = np.diagonal(A)
        off = np.sum(np.abs(A), axis=0) - np.abs(d)
        return float(np.max(d + off))
    sym = 0.5 * (A + A.T)
    return float(np.linalg.eigvalsh(sym)[-1])


def mu_limit(A, k=NormKind.INF, h: float = 1e-6) -> float:
    """Difference quotient (|I + h*A|_k - 1)/h at small h > 0.

    This is the defining right limit evaluated at finite h; it is the
    independent oracle for ``mu_closed`` and agrees with it to O(h*|A|^2).
    """
    if h <= 0:
        raise ValueError("h must be positive (the limit is one-sided)")
    A = _square(A)
    n = A.shape[0]
    return (mat_norm(np.eye(n) + h * A, k) - 1.0) / h


@dataclass(frozen=True)
class MatrixPath:
    """Piecewise-linear matrix path M(s) on the parameter interval [0, 1].

    ``s`` must increase strictly from 0 to 1; ``mats`` has shape (len(s), n, n).
    """

    s: np.ndarray
    mats: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.s, dtype=float)
        mats = np.asarray(self.mats, dtype=float)
        if s.ndim != 1 or s.size < 2:
            raise ValueError("need at least two parameter samples")
        if np.any(np.diff(s) <= 0):
            raise ValueError("parameter samples must increase strictly")
        if abs(s[0]) > 0 or abs(s[-1] - 1.0) > 0:
            raise ValueError("parameter samples must start at 0 and end at 1")
        if mats.ndim != 3 or mats.shape[0] != s.size or mats.shape[1] != mats.shape[2]:
            raise ValueError("matrix samples must be (len(s), n, n) with one square "
                             "matrix per parameter value")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "mats", mats)

    @property
    def dim(self) -> int:
        return self.mats.shape[1]

    @classmethod
    def from_callable(cls, func, num: int = 33) -> "MatrixPath":
        s = np.linspace(0.0, 1.0, num)
        mats = np.stack([_square(func(si)) for si in s])
        return cls(s, mats)

    def at(self, si: float) -> np.ndarray:
        """Evaluate the piecewise-linear interpolant at a parameter value."""
        si = float(si)
        if si <= self.s[0]:
            return self.mats[0].copy()
        if si >= self.s[-1]:
            return self.mats[-1].copy()
        j = int(np.searchsorted(self.s, si, side="right")) - 1
        t = (si - self.s[j]) / (self.s[j + 1] - self.s[j])
        return (1.0 - t) * self.mats[j] + t * self.mats[j + 1]

    def resample(self, num: int) -> "MatrixPath":
        s = np.union1d(np.linspace(0.0, 1.0, num), self.s)
        mats = np.stack([self.at(si) for si in s])
        return MatrixPath(s, mats)


def mu_integral_check(path: MatrixPath, k=NormKind.INF,
                      quadrature_points: int = 129) -> tuple[float, float]:
    """Check mu(integral of M) <= integral of mu(M) on a matrix path.

    Both sides use the composite trapezoid rule on the resampled grid
    (including the path's own nodes, so the matrix integral of the
    piecewise-linear path is exact).  Returns (lhs, rhs).
    """
    if quadrature_points < 2:
        raise ValueError("quadrature_points must be at least 2")
    rp = path.resample(quadrature_points)
    integral = np.trapezoid(rp.mats, rp.s, axis=0)
    lhs = mu_closed(integral, k)
    rhs = float(np.trapezoid([mu_closed(M, k) for M in rp.mats], rp.s))
    return lhs, rhs
