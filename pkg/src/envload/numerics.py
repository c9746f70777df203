"""Dense symmetric linear algebra: cyclic Jacobi eigendecomposition and
Cholesky SPD solves. Matrices here are tiny (p <= 7), so the implementations
favor being explicit and portable over being fast.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class NotPositiveDefiniteError(ValueError):
    """Cholesky hit a non-positive pivot; try a larger ridge."""


class ConvergenceError(RuntimeError):
    """Jacobi sweeps did not reduce the off-diagonal norm in time."""


class SymMatrix:
    """Dense symmetric matrix; storage is the packed upper triangle, so
    symmetry holds by construction."""

    def __init__(self, dim: int, packed: np.ndarray) -> None:
        if dim < 1:
            raise ValueError(f"dimension must be >= 1, got {dim}")
        expected = dim * (dim + 1) // 2
        packed = np.asarray(packed, dtype=np.float64)
        if packed.shape != (expected,):
            raise ValueError(f"packed storage must have length {expected}")
        if not np.all(np.isfinite(packed)):
            raise ValueError("matrix entries must be finite")
        self._dim = dim
        self._packed = packed.copy()
        self._packed.setflags(write=False)

    @classmethod
    def from_full(cls, a: np.ndarray, asym_tol: float = 1e-8) -> "SymMatrix":
        """Build from a full matrix. Relative asymmetry above asym_tol is an
        error; below it, the upper triangle wins."""
        a = np.asarray(a, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"need a square matrix, got shape {a.shape}")
        scale = float(np.max(np.abs(a))) if a.size else 0.0
        asym = float(np.max(np.abs(a - a.T))) if a.size else 0.0
        if asym > asym_tol * max(1.0, scale):
            raise ValueError(f"matrix is not symmetric (max asymmetry {asym:g})")
        dim = a.shape[0]
        iu = np.triu_indices(dim)
        return cls(dim, a[iu])

    @property
    def dim(self) -> int:
        return self._dim

    def to_full(self) -> np.ndarray:
        full = np.zeros((self._dim, self._dim), dtype=np.float64)
        iu = np.triu_indices(self._dim)
        full[iu] = self._packed
        full.T[iu] = self._packed
        return full

    def trace(self) -> float:
        return float(np.trace(self.to_full()))


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues sorted descending; eigenvectors[:, i] pairs with
    eigenvalues[i]. Sign convention: each eigenvector's largest-magnitude
    component is non-negative (first such component on ties)."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def _off_diagonal_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.sqrt(np.sum(off * off)))


def jacobi_eigen(matrix: SymMatrix, max_sweeps: int = 100) -> EigenDecomposition:
    """Cyclic Jacobi rotations until the off-diagonal Frobenius norm drops
    below 1e-12 * ||A||_F (or max_sweeps, then ConvergenceError)."""
    n = matrix.dim
    a = matrix.to_full()
    v = np.eye(n)
    target = 1e-12 * float(np.sqrt(np.sum(a * a)))

    if _off_diagonal_norm(a) > target:
        converged = False
        for _ in range(max_sweeps):
            for p in range(n - 1):
                for q in range(p + 1, n):
                    _rotate(a, v, p, q)
            if _off_diagonal_norm(a) <= target:
                converged = True
                break
        if not converged:
            raise ConvergenceError(
                f"no convergence after {max_sweeps} sweeps; off-diagonal "
                f"residual {_off_diagonal_norm(a):g} (target {target:g})"
            )

    eigenvalues = np.diag(a).copy()
    order = np.argsort(-eigenvalues, kind="stable")
    eigenvalues = eigenvalues[order]
    vectors = v[:, order].copy()
    for j in range(n):
        col = vectors[:, j]
        lead = int(np.argmax(np.abs(col)))
        if col[lead] < 0.0:
            vectors[:, j] = -col
    return EigenDecomposition(eigenvalues, vectors)


def _rotate(a: np.ndarray, v: np.ndarray, p: int, q: int) -> None:
    """One Jacobi rotation zeroing a[p, q], applied to a and accumulated in v."""
    apq = a[p, q]
    if apq == 0.0:
        return
    app = a[p, p]
    aqq = a[q, q]
    theta = (aqq - app) / (2.0 * apq)
    if theta >= 0.0:
        t = 1.0 / (theta + math.sqrt(theta * theta + 1.0))
    else:
        t = -1.0 / (-theta + math.sqrt(theta * theta + 1.0))
    c = 1.0 / math.sqrt(t * t + 1.0)
    s = t * c

    n = a.shape[0]
    for i in range(n):
        if i != p and i != q:
            aip = a[i, p]
            aiq = a[i, q]
            a[i, p] = a[p, i] = aip * c - aiq * s
            a[i, q] = a[q, i] = aiq * c + aip * s
    a[p, p] = app - t * apq
    a[q, q] = aqq + t * apq
    a[p, q] = a[q, p] = 0.0

    for i in range(n):
        vip = v[i, p]
        viq = v[i, q]
        v[i, p] = vip * c - viq * s
        v[i, q] = viq * c + vip * s


class CholeskyFactor:
    """Lower-triangular factor of (A + ridge*I); reusable solver context."""

    def __init__(self, matrix: SymMatrix, ridge: float = 0.0) -> None:
        if ridge < 0.0:
            raise ValueError(f"ridge must be >= 0, got {ridge}")
        a = matrix.to_full()
        n = matrix.dim
        if ridge > 0.0:
            a[np.diag_indices(n)] += ridge
        lower = np.zeros((n, n), dtype=np.float64)
        for i in range(n):
            for j in range(i + 1):
                s = a[i, j] - float(np.dot(lower[i, :j], lower[j, :j]))
                if i == j:
                    if s <= 0.0:
                        raise NotPositiveDefiniteError(
                            f"pivot {s:g} at row {i} is not positive; "
                            f"increase the ridge (current {ridge:g})"
                        )
                    lower[i, i] = math.sqrt(s)
                else:
                    lower[i, j] = s / lower[j, j]
        self._lower = lower
        self._dim = n
        self.ridge = ridge

    @property
    def dim(self) -> int:
        return self._dim

    def solve(self, b: np.ndarray) -> np.ndarray:
        b = np.asarray(b, dtype=np.float64)
        if b.shape != (self._dim,):
            raise ValueError(f"b must have shape ({self._dim},), got {b.shape}")
        lower = self._lower
        n = self._dim
        y = np.zeros(n)
        for i in range(n):
            y[i] = (b[i] - float(np.dot(lower[i, :i], y[:i]))) / lower[i, i]
        x = np.zeros(n)
        for i in range(n - 1, -1, -1):
            x[i] = (y[i] - float(np.dot(lower[i + 1 :, i], x[i + 1 :]))) / lower[i, i]
        return x


def spd_solve(matrix: SymMatrix, b: np.ndarray, ridge: float = 0.0) -> np.ndarray:
    """Solve (A + ridge*I) x = b via Cholesky."""
    return CholeskyFactor(matrix, ridge).solve(b)
