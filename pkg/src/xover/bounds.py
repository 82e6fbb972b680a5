"""Lower bounds on the total contrast variance and the control-replication sweep.

Two bounds are provided for the carryover model.

``design_trace_bound`` evaluates an achievable lower bound on
``Tr(M^-1)`` for one concrete design, using only its counting
statistics.  It comes from averaging the information matrix over
relabelings of the test treatments and replacing the carryover block
by its best-case envelope; the averaged matrix has one eigenvalue of
multiplicity t - 1 (``x_term``) and one simple eigenvalue
(``y_term``), giving ``bound = (t-1)/x_term + 1/y_term``.

``class_trace_bound`` bounds every eligible design (period-balanced
control, no self-carryover) with a given control replication r0, by
substituting the minimal achievable per-unit control sums; here
``bound = t(t-1)^2 p / x_term + t p / y_term``.  Minimizing over r0
(``optimize_r0``) yields the certification target for optimality.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .design import DesignCounts


class InfeasibleError(ValueError):
    """Parameters admit no eligible design / bound is not defined."""


@dataclass(frozen=True)
class ControlSums:
    """Per-unit control count sums entering the bounds.

    sq_full : sum over units of (control count)^2
    cross   : sum over units of (control count) * (head control count)
    sq_head : sum over units of (head control count)^2

    "head" means the first p - 1 periods.
    """

    sq_full: int
    cross: int
    sq_head: int

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.sq_full, self.cross, self.sq_head)


class TraceBound(NamedTuple):
    x_term: float
    y_term: float
    bound: float


@dataclass(frozen=True)
class ProfileEntry:
    r0: int
    head_r0: int
    x_term: float
    y_term: float
    bound: float


@dataclass(frozen=True)
class BoundProfile:
    """Result of sweeping the class bound over the control replication."""

    t: int
    p: int
    n: int
    entries: tuple[ProfileEntry, ...]
    best_r0: int
    best_bound: float


def min_control_sums(n: int, p: int, r0: int) -> ControlSums:
    """Minimal per-unit control sums over eligible designs with given r0.

    Eligibility forces the head replication to be r0 (p-1)/p, so p must
    divide r0.  The minima spread the control counts as evenly as
    possible over units, with the units that hold the control in the
    last period taking the smallest head counts.  All arithmetic is
    exact integer arithmetic.
    """
    if p < 2:
        raise InfeasibleError(f"need at least two periods, got p={p}")
    if r0 % p != 0:
        raise InfeasibleError(
            f"control replication {r0} is not a multiple of the period count {p}"
        )
    if not 0 <= r0 <= n * p:
        raise InfeasibleError(f"control replication {r0} outside 0..{n * p}")

    head_r0 = r0 * (p - 1) // p
    q_full = r0 // n
    q_head = head_r0 // n
    sq_full = r0 + (2 * r0 - n) * q_full - n * q_full * q_full
    sq_head = head_r0 + (2 * head_r0 - n) * q_head - n * q_head * q_head

    last_units = r0 // p  # units holding the control in the last period
    if last_units < n - head_r0 + n * q_head:
        cross = (
            head_r0
            + (2 * head_r0 - n + last_units) * q_head
            - n * q_head * q_head
        )
    else:
        cross = (
            2 * head_r0
            + last_units
            - n
            + (2 * head_r0 - 2 * n + last_units) * q_head
            - n * q_head * q_head
        )
    return ControlSums(sq_full=sq_full, cross=cross, sq_head=sq_head)


@dataclass(frozen=True)
class BoundTerms:
    """Raw class-bound quantities for property checking.

    ``value = t(t-1)^2 p / x_denom + t p / y_denom`` is the class bound
    as a function of free control sums; ``x_adjust`` and ``y_adjust``
    are the derivatives' carryover coefficients (both appear squared or
    linearly in the monotonicity of ``value`` in each control sum).
    """

    x_denom: float
    y_denom: float
    x_adjust: float
    y_adjust: float
    value: float


def bound_terms(
    t: int, p: int, n: int, head_r0: float, sums: ControlSums | tuple[float, float, float]
) -> BoundTerms:
    """Evaluate the class-bound quantities at free control sums.

    ``head_r0`` is the control replication over the first p - 1
    periods; eligibility fixes the full replication at
    ``head_r0 * p / (p - 1)``.
    """
    if isinstance(sums, ControlSums):
        s1, s2, s3 = sums.as_tuple()
    else:
        s1, s2, s3 = sums
    if t < 2:
        raise InfeasibleError("bounds need at least two test treatments")
    r0 = head_r0 * p / (p - 1)
    d_den = n * (p - 1) * (p * t - t - 1) - (p * t - t + p - 2) * head_r0 + s3
    e_den = n * p * (p - 1) * head_r0 - head_r0**2 - n * (p - 1) * s3
    if d_den <= 0 or e_den <= 0:
        raise InfeasibleError(
            f"head replication {head_r0} infeasible for n={n}, p={p} "
            f"(denominators {d_den:.6g}, {e_den:.6g})"
        )
    excess = n * t * (p - 1) - t * head_r0 - s2
    x_denom = t * (p - 1) * (n * p - r0) - p * (r0 - s1 / p) - excess**2 / d_den
    y_denom = p * (r0 - s1 / p) - n * (p - 1) * s2**2 / e_den
    x_adjust = excess / d_den
    y_adjust = n * (p - 1) * s2 / e_den
    if x_denom <= 0 or y_denom <= 0:
        raise InfeasibleError(
            f"bound undefined at head replication {head_r0} "
            f"(denominators {x_denom:.6g}, {y_denom:.6g})"
        )
    value = t * (t - 1) ** 2 * p / x_denom + t * p / y_denom
    return BoundTerms(
        x_denom=x_denom,
        y_denom=y_denom,
        x_adjust=x_adjust,
        y_adjust=y_adjust,
        value=value,
    )


def class_trace_bound(t: int, p: int, n: int, r0: int) -> TraceBound:
    """Lower bound on Tr(M^-1) over eligible designs with replication r0.

    Requires 3 <= p <= t + 1, p | r0, and an interior head replication
    (0 < r0 (p-1)/p < n (p-1)).
    """
    _check_shape(t, p)
    if r0 % p != 0:
        raise InfeasibleError(
            f"control replication {r0} is not a multiple of the period count {p}"
        )
    head_r0 = r0 * (p - 1) // p
    if not 0 < head_r0 < n * (p - 1):
        raise InfeasibleError(
            f"head replication {head_r0} outside the open range 0..{n * (p - 1)}"
        )
    terms = bound_terms(t, p, n, head_r0, min_control_sums(n, p, r0))
    return TraceBound(x_term=terms.x_denom, y_term=terms.y_denom, bound=terms.value)


def optimize_r0(t: int, p: int, n: int) -> BoundProfile:
    """Sweep the class bound over feasible control replications.

    Candidates are the multiples of p with head replication at most
    n (p-1)/2 (denser controls force a self-carryover somewhere).
    Ties break toward the smaller replication.
    """
    _check_shape(t, p)
    entries: list[ProfileEntry] = []
    best_r0, best_bound = -1, float("inf")
    for m in range(1, n // 2 + 1):
        r0 = m * p
        try:
            x_term, y_term, bound = class_trace_bound(t, p, n, r0)
        except InfeasibleError:
            continue
        entries.append(
            ProfileEntry(
                r0=r0, head_r0=m * (p - 1), x_term=x_term, y_term=y_term, bound=bound
            )
        )
        if bound < best_bound:
            best_r0, best_bound = r0, bound
    if not entries:
        raise InfeasibleError(f"no feasible control replication for t={t} p={p} n={n}")
    return BoundProfile(
        t=t,
        p=p,
        n=n,
        entries=tuple(entries),
        best_r0=best_r0,
        best_bound=best_bound,
    )


def design_trace_bound(counts: DesignCounts) -> TraceBound:
    """Achievable lower bound on Tr(M^-1) from one design's counts.

    Valid for any design whose head control replication is strictly
    between 0 and n (p - 1); the design need not be eligible.  Equality
    holds when every treatment is period-balanced, the information
    blocks are invariant under test relabeling, and no test treatment
    repeats within the head of a unit.
    """
    t, p, n = counts.t, counts.p, counts.n
    if t < 2:
        raise InfeasibleError("bounds need at least two test treatments")
    r0 = int(counts.reps[0])
    head_r0 = int(counts.head_reps[0])
    late_r0 = int(counts.control_late_reps)
    if not 0 < head_r0 < n * (p - 1):
        raise InfeasibleError(
            f"head control replication {head_r0} outside the open range "
            f"0..{n * (p - 1)}"
        )

    n0 = counts.unit_counts[0].astype(float)
    h0 = counts.head_counts[0].astype(float)
    s1 = float(n0 @ n0)
    s2 = float(n0 @ h0)
    s3 = float(h0 @ h0)
    tests = counts.unit_counts[1:].astype(float)
    tests_head = counts.head_counts[1:].astype(float)
    test_sq = float(np.sum(tests * tests))
    test_cross = float(np.sum(tests * tests_head))
    m00 = float(counts.preceded_by[0, 0])
    m_test_diag = float(np.trace(counts.preceded_by)) - m00

    # scalars of the relabel-averaged information blocks
    a1 = r0 - s1 / p
    b1 = (n * p - r0 - test_sq / p) / t
    a2 = m00 - s2 / p
    b2 = (m_test_diag - test_cross / p) / t
    c2 = -a2 / t
    f2 = (late_r0 - (p - 1) / p * r0 - m00 + s2 / p) / t
    a3 = head_r0 - s3 / p
    bt3 = (n * (p - 1) - head_r0) * (p - 1) / (t * p)
    et3 = (
        (p - 1) / p * head_r0 - s3 / p - (p - 2) / p * (n * (p - 1) - head_r0)
    ) / (t * (t - 1))
    c3 = (s3 / p - (p - 1) / p * head_r0) / t

    carry_gap = bt3 - et3
    carry_det = a3 * bt3 + (t - 1) * a3 * et3 - t * c3 * c3
    if carry_gap <= 0 or carry_det <= 0:
        raise InfeasibleError("carryover envelope is not positive definite")

    x_term = (t * t * b1 - a1) / (t * (t - 1)) - ((t * b2 + f2) / (t - 1)) ** 2 / carry_gap
    y_term = a1 / t - (
        t * c2 * c2 * (bt3 + (t - 1) * et3 + c3) + f2 * f2 * (a3 + t * c3)
    ) / carry_det
    if x_term <= 0 or y_term <= 0:
        raise InfeasibleError("bound undefined: nonpositive eigenvalue envelope")
    return TraceBound(
        x_term=x_term, y_term=y_term, bound=(t - 1) / x_term + 1.0 / y_term
    )


def _check_shape(t: int, p: int) -> None:
    if not 3 <= p <= t + 1:
        raise InfeasibleError(
            f"bounds are defined for 3 <= p <= t + 1, got p={p}, t={t}"
        )
