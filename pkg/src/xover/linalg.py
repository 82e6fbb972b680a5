"""Small dense linear algebra for projection-based information matrices.

Everything here operates on plain numpy arrays.  The operations carry
the exact tolerances the rest of the package relies on: a relative
1e-9 cutoff for generalized inverses and pivots, 1e-8 for projector
idempotence and Loewner comparisons.
"""

from __future__ import annotations

import numpy as np

G_INVERSE_RTOL = 1e-9
PSD_TOL = 1e-8


class SingularMatrixError(np.linalg.LinAlgError):
    """Raised when a matrix is singular to working tolerance."""

    def __init__(self, message: str, pivot: float):
        super().__init__(message)
        self.pivot = pivot


def g_inverse(m: np.ndarray, rtol: float = G_INVERSE_RTOL) -> np.ndarray:
    """A generalized inverse G of ``m`` with ``m @ G @ m == m``.

    Computed from the singular value decomposition with singular
    values below ``rtol * max_singular_value`` treated as zero, so the
    result is deterministic and rank-revealing.  The zero matrix maps
    to the zero matrix.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2:
        raise ValueError("g_inverse expects a matrix")
    if not np.any(m):
        return np.zeros((m.shape[1], m.shape[0]))
    u, s, vt = np.linalg.svd(m, full_matrices=False)
    cutoff = rtol * s[0]
    inv = np.where(s > cutoff, 1.0 / np.where(s > cutoff, s, 1.0), 0.0)
    return (vt.T * inv) @ u.T


def projector(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Orthogonal projectors onto the column space of ``x`` and its complement.

    Returns ``(pr, pr_perp)`` with ``pr = x (x'x)^- x'`` symmetrized and
    ``pr_perp = I - pr``.  The result does not depend on the choice of
    generalized inverse.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[1] == 0:
        raise ValueError("projector expects a matrix with at least one column")
    pr = x @ g_inverse(x.T @ x) @ x.T
    pr = (pr + pr.T) / 2.0
    return pr, np.eye(x.shape[0]) - pr


def inverse_spd(m: np.ndarray, tol: float) -> np.ndarray:
    """Inverse of a symmetric positive definite matrix.

    Runs an explicit Cholesky factorization and raises
    :class:`SingularMatrixError` carrying the offending pivot when any
    pivot falls at or below ``tol``.  The output is symmetrized.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("inverse_spd expects a square matrix")
    size = m.shape[0]
    chol = np.zeros_like(m)
    for j in range(size):
        pivot = m[j, j] - chol[j, :j] @ chol[j, :j]
        if pivot <= tol:
            raise SingularMatrixError(
                f"pivot {pivot:.3e} at index {j} is at or below tolerance {tol:.3e}",
                pivot=float(pivot),
            )
        chol[j, j] = np.sqrt(pivot)
        if j + 1 < size:
            chol[j + 1 :, j] = (m[j + 1 :, j] - chol[j + 1 :, :j] @ chol[j, :j]) / chol[
                j, j
            ]
    identity = np.eye(size)
    lower_inv = np.linalg.solve(chol, identity)
    inv = lower_inv.T @ lower_inv
    return (inv + inv.T) / 2.0


def loewner_leq(a: np.ndarray, b: np.ndarray, tol: float | None = None) -> bool:
    """True when ``b - a`` is positive semidefinite to tolerance.

    The default tolerance is ``1e-8 * (1 + max|b - a|)`` on the
    smallest eigenvalue of the symmetrized difference.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("loewner_leq expects two square matrices of equal size")
    diff = b - a
    diff = (diff + diff.T) / 2.0
    if tol is None:
        tol = PSD_TOL * (1.0 + float(np.abs(diff).max(initial=0.0)))
    smallest = float(np.linalg.eigvalsh(diff)[0])
    return smallest >= -tol
