"""Exact balance checking and optimality certificates.

``verify_balance`` evaluates every clause of the full balance
definition by integer counting (no tolerances).  ``certify`` combines
the balance report with the trace bounds: a design is certified optimal
when it is fully balanced, its control replication minimizes the class
bound, its criterion value attains that bound, and its information
matrix is completely symmetric.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bounds import InfeasibleError, class_trace_bound, optimize_r0
from .design import Design, compute_counts, eligibility_violations
from .model import (
    DisconnectedDesignError,
    ModelKind,
    a_criterion,
    c_matrix,
    is_completely_symmetric,
    m_matrix,
)

CERTIFY_TOL = 1e-6


def _equal(values: np.ndarray) -> bool:
    arr = np.asarray(values).ravel()
    return arr.size == 0 or bool((arr == arr[0]).all())


def _block_clauses(
    unit_counts: np.ndarray, r_control: int, n: int
) -> dict[str, bool]:
    """Clauses (a)-(e) of the incomplete block balance for one count table."""
    tests = unit_counts[1:]
    present = tests >= 1
    floor = r_control // n
    concurrence = (present.astype(int) @ present.astype(int).T)
    off_diag = concurrence[~np.eye(concurrence.shape[0], dtype=bool)]
    control_mask = unit_counts[0] == floor
    with_floor_control = present.astype(int) @ control_mask.astype(int)
    return {
        "equal_test_replication": _equal(tests.sum(axis=1)),
        "tests_at_most_once_per_unit": bool((tests <= 1).all()),
        "equal_pair_concurrence": _equal(off_diag),
        "control_floor_or_ceil_per_unit": bool(
            np.isin(unit_counts[0], (floor, floor + 1)).all()
        ),
        "equal_units_with_floor_control_and_test": _equal(with_floor_control),
    }


@dataclass(frozen=True)
class BalanceReport:
    """Outcome of every exact balance clause for one design."""

    t: int
    p: int
    n: int
    r0: int
    direct_block: dict[str, bool]
    head_block: dict[str, bool]
    carryover_balance: dict[str, bool]
    period_proportional: dict[str, bool]
    joint_balance: dict[str, bool]
    eligible: bool
    failures: tuple[str, ...] = field(default=())

    @property
    def fully_balanced(self) -> bool:
        groups = (
            self.direct_block,
            self.head_block,
            self.carryover_balance,
            self.period_proportional,
            self.joint_balance,
        )
        return all(all(group.values()) for group in groups)

    def to_dict(self) -> dict:
        return {
            "t": self.t,
            "p": self.p,
            "n": self.n,
            "r0": self.r0,
            "direct_block": dict(self.direct_block),
            "head_block": dict(self.head_block),
            "carryover_balance": dict(self.carryover_balance),
            "period_proportional": dict(self.period_proportional),
            "joint_balance": dict(self.joint_balance),
            "eligible": self.eligible,
            "fully_balanced": self.fully_balanced,
            "failures": list(self.failures),
        }


def verify_balance(d: Design) -> BalanceReport:
    """Evaluate all five balance condition groups by exact integer counts."""
    counts = compute_counts(d)
    t, p, n = d.t, d.p, d.n
    r0 = int(counts.reps[0])
    head_r0 = int(counts.head_reps[0])

    direct = _block_clauses(counts.unit_counts, r0, n)
    head = _block_clauses(counts.head_counts, head_r0, n)

    m = counts.preceded_by
    test_block = m[1:, 1:]
    carry = {
        "equal_test_test_precedence": _equal(
            test_block[~np.eye(t, dtype=bool)]
        ),
        "equal_control_after_test": _equal(m[0, 1:]),
        "equal_test_after_control": _equal(m[1:, 0]),
        "no_self_precedence": bool((np.diag(m) == 0).all()),
    }

    l = counts.period_counts
    test_total = n * p - r0
    period = {
        "tests_uniform_on_periods": bool(
            test_total % (t * p) == 0 and (l[1:] == test_total // (t * p)).all()
        ),
        "control_uniform_on_periods": bool(
            r0 % p == 0 and (l[0] == r0 // p).all()
        ),
    }

    once = (counts.unit_counts == 1).astype(int)
    head_once = (counts.head_counts == 1).astype(int)
    joint_table = once[1:] @ head_once[1:].T  # (i present once, j once in head)
    floor_full = r0 // n
    floor_head = head_r0 // n
    control_floor_head = (counts.head_counts[0] == floor_head).astype(int)
    control_floor_full = (counts.unit_counts[0] == floor_full).astype(int)
    joint = {
        "equal_head_and_present_pairs": _equal(
            joint_table[~np.eye(t, dtype=bool)]
        ),
        "equal_tests_in_floor_control_head_units": _equal(
            once[1:] @ control_floor_head
        ),
        "equal_head_tests_in_floor_control_units": _equal(
            head_once[1:] @ control_floor_full
        ),
    }

    failures = []
    for group_name, group in (
        ("direct_block", direct),
        ("head_block", head),
        ("carryover_balance", carry),
        ("period_proportional", period),
        ("joint_balance", joint),
    ):
        for clause, ok in group.items():
            if not ok:
                failures.append(f"{group_name}.{clause}")

    return BalanceReport(
        t=t,
        p=p,
        n=n,
        r0=r0,
        direct_block=direct,
        head_block=head,
        carryover_balance=carry,
        period_proportional=period,
        joint_balance=joint,
        eligible=not eligibility_violations(d),
        failures=tuple(failures),
    )


@dataclass(frozen=True)
class Certificate:
    """Optimality verdict for a design under the carryover model."""

    design_label: str
    t: int
    p: int
    n: int
    r0: int
    verdict: str  # "optimal" | "efficient" | "not-certified"
    criterion: float | None
    bound_at_r0: float | None
    min_bound: float | None
    best_r0: int | None
    efficiency: float | None
    completely_symmetric: bool
    fully_balanced: bool
    reasons: tuple[str, ...]
    report: BalanceReport

    def to_dict(self) -> dict:
        return {
            "design": self.design_label,
            "t": self.t,
            "p": self.p,
            "n": self.n,
            "r0": self.r0,
            "verdict": self.verdict,
            "criterion": self.criterion,
            "bound_at_r0": self.bound_at_r0,
            "min_bound": self.min_bound,
            "best_r0": self.best_r0,
            "efficiency": self.efficiency,
            "completely_symmetric": self.completely_symmetric,
            "fully_balanced": self.fully_balanced,
            "reasons": list(self.reasons),
            "balance": self.report.to_dict(),
        }


def certify(d: Design) -> Certificate:
    """Certify optimality of a design within the eligible class.

    Verdicts: "optimal" when the design is fully balanced, its control
    replication minimizes the trace bound, the criterion value attains
    the minimum bound within 1e-6 and the information matrix is
    completely symmetric; "efficient" (with score min bound / trace)
    when the design is eligible and connected but not optimal;
    "not-certified" otherwise, with reasons.
    """
    report = verify_balance(d)
    t, p, n, r0 = report.t, report.p, report.n, report.r0
    label = f"t={t} p={p} n={n} r0={r0}"
    reasons: list[str] = []

    criterion = None
    symmetric = False
    try:
        m = m_matrix(c_matrix(d, ModelKind.CARRYOVER))
        criterion = a_criterion(d, ModelKind.CARRYOVER)
        symmetric = is_completely_symmetric(m)
    except DisconnectedDesignError as exc:
        reasons.append(f"not connected: {exc}")

    bound_at_r0 = None
    min_bound = None
    best_r0 = None
    if 3 <= p <= t + 1:
        profile = optimize_r0(t, p, n)
        min_bound = profile.best_bound
        best_r0 = profile.best_r0
        try:
            bound_at_r0 = class_trace_bound(t, p, n, r0).bound
        except InfeasibleError as exc:
            reasons.append(f"no class bound at r0={r0}: {exc}")
    else:
        reasons.append(f"bounds cover 3 <= p <= t + 1, got p={p}, t={t}")

    violations = eligibility_violations(d)
    reasons.extend(violations)
    if not report.fully_balanced:
        reasons.extend(report.failures)

    verdict = "not-certified"
    efficiency = None
    if criterion is not None and min_bound is not None and not violations:
        efficiency = min(min_bound / criterion, 1.0)
        optimal = (
            report.fully_balanced
            and r0 == best_r0
            and abs(criterion - min_bound) <= CERTIFY_TOL
            and symmetric
        )
        verdict = "optimal" if optimal else "efficient"

    return Certificate(
        design_label=label,
        t=t,
        p=p,
        n=n,
        r0=r0,
        verdict=verdict,
        criterion=criterion,
        bound_at_r0=bound_at_r0,
        min_bound=min_bound,
        best_r0=best_r0,
        efficiency=efficiency,
        completely_symmetric=symmetric,
        fully_balanced=report.fully_balanced,
        reasons=tuple(reasons),
        report=report,
    )
