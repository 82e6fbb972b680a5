"""Linear-model incidence matrices and information criteria.

The response model for a crossover design has a general mean, period
effects, unit effects, direct treatment effects, and first-order
carryover effects (no carryover into the first period).  Ordering the
np observations unit by unit with the period index moving fastest,
the incidence matrices are

    P = 1_n (x) I_p      periods
    U = I_n (x) 1_p      units
    T                    direct treatment incidence, np x (t+1)
    F = (I_n (x) L) T    carryover incidence, with L the lag operator

and the information matrix for direct effects is
``C = T' pr_perp(X) T`` where X stacks the nuisance columns of the
chosen model.  Deleting the control row and column of C gives the
information matrix M for the test-minus-control contrasts.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .design import Design
from .linalg import SingularMatrixError, inverse_spd, projector

M_SINGULAR_RTOL = 1e-9
COMPLETE_SYMMETRY_TOL = 1e-8


class DisconnectedDesignError(ValueError):
    """The test-vs-control contrasts are not all estimable."""


class ModelKind(enum.Enum):
    """Which nuisance effects are eliminated alongside the mean.

    CARRYOVER   periods + units + carryover (the full model)
    TWO_WAY     periods + units
    ONE_WAY     units
    ZERO_WAY    general mean only
    """

    CARRYOVER = "carryover"
    TWO_WAY = "two-way"
    ONE_WAY = "one-way"
    ZERO_WAY = "zero-way"

    @classmethod
    def from_name(cls, name: str) -> "ModelKind":
        for kind in cls:
            if kind.value == name:
                return kind
        raise ValueError(
            f"unknown model {name!r}; expected one of "
            f"{', '.join(k.value for k in cls)}"
        )


@dataclass(frozen=True)
class ModelMatrices:
    P: np.ndarray
    U: np.ndarray
    T: np.ndarray
    F: np.ndarray
    L: np.ndarray


def build_model_matrices(d: Design) -> ModelMatrices:
    """Incidence matrices of ``d`` with observation (k, u) at row u*p + k."""
    t, p, n = d.t, d.p, d.n
    P = np.tile(np.eye(p), (n, 1))
    U = np.kron(np.eye(n), np.ones((p, 1)))
    flat = d.grid.T.reshape(-1)  # unit-major, period fastest
    T = np.zeros((n * p, t + 1))
    T[np.arange(n * p), flat] = 1.0
    L = np.zeros((p, p))
    L[1:, :-1] = np.eye(p - 1)
    F = np.kron(np.eye(n), L) @ T
    return ModelMatrices(P=P, U=U, T=T, F=F, L=L)


def _nuisance(mats: ModelMatrices, kind: ModelKind) -> np.ndarray:
    if kind is ModelKind.CARRYOVER:
        return np.hstack([mats.P, mats.U, mats.F])
    if kind is ModelKind.TWO_WAY:
        return np.hstack([mats.P, mats.U])
    if kind is ModelKind.ONE_WAY:
        return mats.U
    return np.ones((mats.U.shape[0], 1))


def c_matrix(d: Design, kind: ModelKind = ModelKind.CARRYOVER) -> np.ndarray:
    """Information matrix for direct effects under the given model.

    Symmetric, positive semidefinite, with zero row sums: only
    treatment contrasts are estimable.
    """
    mats = build_model_matrices(d)
    _, pr_perp = projector(_nuisance(mats, kind))
    c = mats.T.T @ pr_perp @ mats.T
    return (c + c.T) / 2.0


def m_matrix(c: np.ndarray) -> np.ndarray:
    """Contrast information: drop the control row and column of ``c``."""
    c = np.asarray(c)
    if c.ndim != 2 or c.shape[0] != c.shape[1] or c.shape[0] < 2:
        raise ValueError("m_matrix expects a square matrix of size >= 2")
    return c[1:, 1:].copy()


def contrast_covariance(d: Design, kind: ModelKind = ModelKind.CARRYOVER) -> np.ndarray:
    """Covariance (in units of sigma^2) of the test-minus-control estimates.

    This is the inverse of the contrast information matrix.  Raises
    :class:`DisconnectedDesignError` when that matrix is singular to
    tolerance, i.e. some contrast is not estimable.
    """
    m = m_matrix(c_matrix(d, kind))
    tol = M_SINGULAR_RTOL * (1.0 + float(np.abs(m).max(initial=0.0)))
    try:
        return inverse_spd(m, tol=tol)
    except SingularMatrixError as exc:
        raise DisconnectedDesignError(
            f"design is disconnected under the {kind.value} model "
            f"(information pivot {exc.pivot:.3e})"
        ) from exc


def a_criterion(d: Design, kind: ModelKind = ModelKind.CARRYOVER) -> float:
    """Total contrast variance: trace of the contrast covariance."""
    return float(np.trace(contrast_covariance(d, kind)))


def mv_criterion(d: Design, kind: ModelKind = ModelKind.CARRYOVER) -> float:
    """Worst single contrast variance: max diagonal of the covariance."""
    return float(np.max(np.diag(contrast_covariance(d, kind))))


def is_completely_symmetric(m: np.ndarray, tol: float = COMPLETE_SYMMETRY_TOL) -> bool:
    """True when all diagonal entries agree and all off-diagonals agree."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("is_completely_symmetric expects a square matrix")
    diag = np.diag(m)
    if diag.max() - diag.min() > tol:
        return False
    if m.shape[0] == 1:
        return True
    off = m[~np.eye(m.shape[0], dtype=bool)]
    return bool(off.max() - off.min() <= tol)
