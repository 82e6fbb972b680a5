"""Efficiency measures under four nested models.

A design is scored against four lower bounds: the carryover-model trace
bound within the eligible class, a direct-effects-only bound (no
nuisance structure beyond the mean), and a reduced-model bound that
drops the carryover adjustment (identical for the one-way and two-way
elimination models, since period effects cost nothing for
period-uniform designs).

``reproduce_table`` rebuilds the benchmark table of fifteen designs and
reports computed versus reference efficiencies side by side.
"""

from __future__ import annotations

from dataclasses import dataclass

from .bounds import optimize_r0
from .construct import ConstructionError, ExistenceError, construct
from .design import Design, eligibility_violations
from .model import ModelKind, a_criterion
from . import fixtures


class IneligibleDesignError(ValueError):
    """The carryover-model efficiency is defined only on the eligible class."""


def zero_way_bound(t: int, p: int, n: int) -> float:
    """Smallest direct-effects-only trace over integer allocations.

    Minimizes t/r0 + sum(1/r_i) over the control replication r0, with
    the test replications an as-equal-as-possible integer split of
    np - r0 (every treatment used at least once).
    """
    total = n * p
    if total < t + 1:
        raise ValueError(f"{n} units x {p} periods cannot hold {t} tests and a control")
    best = float("inf")
    for r0 in range(1, total - t + 1):
        rest = total - r0
        base, extra = divmod(rest, t)
        value = t / r0 + (t - extra) / base + (extra / (base + 1) if extra else 0.0)
        best = min(best, value)
    return best


def reduced_model_bound(
    t: int, p: int, n: int, kind: ModelKind = ModelKind.ONE_WAY
) -> float:
    """Trace bound with the carryover adjustment removed.

    Valid under both the one-way (units only) and two-way (units and
    periods) elimination models; the values coincide.  Minimized over
    every integer control replication, with the squared control counts
    at their minimum for each r0 and test treatments appearing at most
    once per unit.
    """
    if kind not in (ModelKind.ONE_WAY, ModelKind.TWO_WAY):
        raise ValueError(f"reduced-model bound covers one-way/two-way, got {kind}")
    if t < 2:
        raise ValueError(f"need at least two test treatments, got {t}")
    total = n * p
    best = float("inf")
    for r0 in range(1, total - t + 1):
        q = r0 // n
        xi1 = r0 + (2 * r0 - n) * q - n * q * q
        y_denom = (r0 - xi1 / p) / t
        x_denom = (t * (total - r0) * (p - 1) / p - (r0 - xi1 / p)) / (t * (t - 1))
        if y_denom <= 0 or x_denom <= 0:
            continue
        best = min(best, (t - 1) / x_denom + 1 / y_denom)
    return best


def efficiency_carryover(d: Design) -> float:
    """Carryover-model efficiency within the eligible class, capped at 1."""
    violations = eligibility_violations(d)
    if violations:
        raise IneligibleDesignError("; ".join(violations))
    profile = optimize_r0(d.t, d.p, d.n)
    return min(profile.best_bound / a_criterion(d, ModelKind.CARRYOVER), 1.0)


@dataclass(frozen=True)
class EfficiencyReport:
    """Efficiencies of one design under the four models, with raw values."""

    e_c: float | None
    e_0: float
    e_1: float
    e_2: float
    traces: dict[str, float]
    bounds: dict[str, float]

    def to_dict(self) -> dict:
        return {
            "e_c": self.e_c,
            "e_0": self.e_0,
            "e_1": self.e_1,
            "e_2": self.e_2,
            "traces": dict(self.traces),
            "bounds": dict(self.bounds),
        }


def efficiency_report(d: Design) -> EfficiencyReport:
    """All four efficiencies of a design (e_c is None outside the class)."""
    t, p, n = d.t, d.p, d.n
    traces = {
        kind.value: a_criterion(d, kind)
        for kind in (
            ModelKind.CARRYOVER,
            ModelKind.TWO_WAY,
            ModelKind.ONE_WAY,
            ModelKind.ZERO_WAY,
        )
    }
    bound_zero = zero_way_bound(t, p, n)
    bound_reduced = reduced_model_bound(t, p, n)
    bounds = {"zero-way": bound_zero, "reduced": bound_reduced}
    try:
        e_c = efficiency_carryover(d)
        bounds["carryover"] = optimize_r0(t, p, n).best_bound
    except IneligibleDesignError:
        e_c = None
    return EfficiencyReport(
        e_c=e_c,
        e_0=min(bound_zero / traces[ModelKind.ZERO_WAY.value], 1.0),
        e_1=min(bound_reduced / traces[ModelKind.ONE_WAY.value], 1.0),
        e_2=min(bound_reduced / traces[ModelKind.TWO_WAY.value], 1.0),
        traces=traces,
        bounds=bounds,
    )


# Reference efficiencies (percent) for the fifteen benchmark designs:
# (row, p, t, n, r0, e_c, e_0, e_1, e_2).
REFERENCE_EFFICIENCIES: tuple[tuple, ...] = (
    (1, 3, 2, 6, 6, 100.0, 97.50, 100.0, 100.0),
    (2, 3, 3, 9, 9, 100.0, 100.0, 100.0, 100.0),
    (3, 3, 4, 36, 36, 100.0, 100.0, 100.0, 100.0),
    (4, 3, 5, 30, 30, 100.0, 99.84, 99.85, 99.85),
    (5, 3, 7, 49, 42, 100.0, 99.98, 99.97, 99.97),
    (6, 4, 3, 4, 4, 100.0, 94.4, 98.75, 98.75),
    (7, 4, 4, 16, 16, 100.0, 96.55, 100.0, 100.0),
    (8, 4, 5, 40, 40, 100.0, 98.18, 100.0, 100.0),
    (9, 4, 6, 40, 40, 100.0, 99.16, 100.0, 100.0),
    (10, 4, 7, 28, 28, 100.0, 99.82, 100.0, 100.0),
    (11, 4, 9, 48, 48, 100.0, 100.0, 100.0, 100.0),
    (12, 5, 4, 48, 60, 100.0, 96.43, 97.56, 97.56),
    (13, 5, 5, 50, 50, 99.50, 93.10, 96.87, 96.87),
    (14, 5, 6, 30, 30, 99.30, 95.23, 98.53, 98.53),
    (15, 5, 7, 70, 70, 100.0, 96.68, 99.47, 99.47),
)


def _benchmark_design(p: int, t: int, n: int, r0: int) -> tuple[Design | None, str]:
    """The design behind one benchmark row, or None with the reason."""
    if r0 != n:
        return None, "not constructed (best control replication differs from n)"
    if (t, p, n) == (6, 5, 30):
        return fixtures.load("ex7"), "bundled reference design"
    try:
        return construct(t, p, n), "constructed"
    except ConstructionError as exc:
        return exc.design, f"search incomplete (violation score {exc.score:g})"
    except ExistenceError as exc:
        return None, f"no construction: {exc}"


def reproduce_table(rows: tuple[int, ...] | None = None) -> list[dict]:
    """Recompute the benchmark table; each entry pairs computed and reference.

    ``rows`` restricts the computation to the given 1-based row numbers.
    Rows without an available design carry None efficiencies and a note.
    """
    out = []
    for row, p, t, n, r0, e_c, e_0, e_1, e_2 in REFERENCE_EFFICIENCIES:
        if rows is not None and row not in rows:
            continue
        design, note = _benchmark_design(p, t, n, r0)
        entry = {
            "row": row,
            "p": p,
            "t": t,
            "n": n,
            "r0": r0,
            "reference": {"e_c": e_c, "e_0": e_0, "e_1": e_1, "e_2": e_2},
            "computed": None,
            "note": note,
        }
        if design is not None:
            report = efficiency_report(design)
            entry["computed"] = {
                "e_c": None if report.e_c is None else 100.0 * report.e_c,
                "e_0": 100.0 * report.e_0,
                "e_1": 100.0 * report.e_1,
                "e_2": 100.0 * report.e_2,
            }
        out.append(entry)
    return out
