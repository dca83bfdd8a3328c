"""Small dense SPD factorization, solves, and symmetric eigenvalues.

The factorization wraps LAPACK Cholesky inside a jitter ladder so that
kernel matrices that are PSD-but-numerically-singular (nugget-free smooth
kernels) still factor; the ladder scales are relative to the mean
diagonal. Eigenvalues are computed by cyclic Jacobi rotations, which is
adequate for the p <= 8 matrices the collinearity index needs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg


class NotPositiveDefiniteError(Exception):
    """Raised when the jitter ladder cannot make a matrix factorable."""


JITTER_LADDER = (0.0, 1e-12, 1e-10, 1e-8)

__all__ = [
    "SpdFactor",
    "NotPositiveDefiniteError",
    "JITTER_LADDER",
    "spd_factor",
    "spd_solve",
    "sym_eigenvalues",
]


@dataclass(frozen=True)
class SpdFactor:
    """Lower Cholesky factor of (matrix + jitter_used * I)."""

    dimension: int
    lower: np.ndarray
    jitter_used: float


def _require_symmetric(a: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"square matrix required, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix contains non-finite entries")
    scale = max(1.0, float(np.max(np.abs(a))))
    if float(np.max(np.abs(a - a.T))) > tol * scale:
        raise ValueError("matrix is not symmetric within 1e-12")
    return a


def spd_factor(matrix: np.ndarray) -> SpdFactor:
    """Cholesky with an escalating diagonal jitter ladder.

    Ladder scales are multiples of the mean diagonal: 0, 1e-12, 1e-10,
    1e-8. jitter_used records the absolute jitter that succeeded.
    """
    a = _require_symmetric(matrix)
    n = a.shape[0]
    mean_diag = float(np.mean(np.diag(a))) if n else 0.0
    for scale in JITTER_LADDER:
        jitter = scale * mean_diag
        try:
            attempt = a if jitter == 0.0 else a + jitter * np.eye(n)
            lower = np.linalg.cholesky(attempt)
        except np.linalg.LinAlgError:
            continue
        return SpdFactor(dimension=n, lower=lower, jitter_used=jitter)
    raise NotPositiveDefiniteError(
        f"matrix not positive definite after jitter ladder {JITTER_LADDER} "
        f"x mean diagonal {mean_diag!r}")


def spd_solve(factor: SpdFactor, rhs: np.ndarray) -> np.ndarray:
    """Solve (A + jitter I) x = rhs from an SpdFactor."""
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape[0] != factor.dimension:
        raise ValueError(
            f"rhs leading dimension {rhs.shape[0]} != factor dimension "
            f"{factor.dimension}")
    return scipy.linalg.cho_solve((factor.lower, True), rhs,
                                  check_finite=False)


def sym_eigenvalues(matrix: np.ndarray) -> np.ndarray:
    """Eigenvalues of a small symmetric matrix, sorted nonincreasing.

    Cyclic Jacobi sweeps; iteration stops once the off-diagonal Frobenius
    norm falls below 1e-12 times the initial full Frobenius norm.
    """
    a = _require_symmetric(matrix).copy()
    n = a.shape[0]
    if n > 8:
        raise ValueError(f"sym_eigenvalues supports p <= 8, got {n}")
    if n == 1:
        return a[0, :1].copy()

    def off_norm(m: np.ndarray) -> float:
        off = m - np.diag(np.diag(m))
        return float(np.sqrt(np.sum(off * off)))

    target = 1e-12 * float(np.sqrt(np.sum(a * a)))
    for _ in range(64):
        if off_norm(a) <= target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                # classic two-sided rotation annihilating (p, q)
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.sqrt(1.0 + theta * theta)) \
                    if theta != 0.0 else 1.0
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = c
                rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                a = rot.T @ a @ rot
                a[p, q] = a[q, p] = 0.0
    else:
        if off_norm(a) > target:
            raise ArithmeticError("Jacobi iteration failed to converge")
    return np.sort(np.diag(a))[::-1].copy()
