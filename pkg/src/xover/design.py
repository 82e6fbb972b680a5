"""Crossover designs and their counting statistics.

A design assigns one of ``t + 1`` treatments (label 0 is the control,
labels ``1..t`` are the test treatments) to each cell of a ``p x n``
grid: rows are periods, columns are experimental units.  Everything
downstream (information matrices, bounds, certificates) is computed
from the grid or from the integer counting statistics collected here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class DesignParseError(ValueError):
    """Raised when a design file or grid is malformed."""


@dataclass(frozen=True, eq=False)
class Design:
    """An assignment of treatments 0..t to a periods-by-units grid.

    Parameters
    ----------
    t : int
        Number of test treatments.  Valid labels are 0 (control) to t.
    grid : numpy.ndarray
        Integer array of shape (p, n); entry (k, u) is the treatment
        given to unit u in period k.
    """

    t: int
    grid: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.grid)
        if grid.ndim != 2 or grid.size == 0:
            raise DesignParseError("grid must be a nonempty 2-d array")
        if not np.issubdtype(grid.dtype, np.integer):
            rounded = np.rint(grid)
            if not np.array_equal(rounded, grid):
                raise DesignParseError("grid entries must be integers")
            grid = rounded
        grid = grid.astype(int, copy=True)
        if self.t < 1:
            raise DesignParseError(f"need at least one test treatment, got t={self.t}")
        lo, hi = int(grid.min()), int(grid.max())
        if lo < 0 or hi > self.t:
            bad = "…"
            pos = np.argwhere((grid < 0) | (grid > self.t))[0]
            bad = int(grid[pos[0], pos[1]])
            raise DesignParseError(
                f"label {bad} at period {pos[0] + 1}, unit {pos[1] + 1} "
                f"is outside 0..{self.t}"
            )
        grid.setflags(write=False)
        object.__setattr__(self, "grid", grid)

    @property
    def p(self) -> int:
        return self.grid.shape[0]

    @property
    def n(self) -> int:
        return self.grid.shape[1]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Design):
            return NotImplemented
        return self.t == other.t and np.array_equal(self.grid, other.grid)

    def __hash__(self):
        return hash((self.t, self.grid.shape, self.grid.tobytes()))

    def __repr__(self) -> str:
        return f"Design(t={self.t}, p={self.p}, n={self.n})"


@dataclass(frozen=True)
class DesignCounts:
    """Integer counting statistics of a design.

    Attributes
    ----------
    unit_counts : (t+1, n) array
        Times treatment i appears in unit u.
    head_counts : (t+1, n) array
        Same, restricted to the first p - 1 periods (the occurrences
        that carry over into a following period).
    period_counts : (t+1, p) array
        Times treatment i appears in period k.
    preceded_by : (t+1, t+1) array
        Entry (i, j): times treatment i is immediately preceded by
        treatment j within a unit.
    reps : (t+1,) array
        Total replication of each treatment.
    head_reps : (t+1,) array
        Replication restricted to the first p - 1 periods.
    control_late_reps : int
        Control occurrences in periods 2..p.
    """

    unit_counts: np.ndarray
    head_counts: np.ndarray
    period_counts: np.ndarray
    preceded_by: np.ndarray
    reps: np.ndarray
    head_reps: np.ndarray
    control_late_reps: int

    @property
    def t(self) -> int:
        return self.reps.size - 1

    @property
    def p(self) -> int:
        return self.period_counts.shape[1]

    @property
    def n(self) -> int:
        return self.unit_counts.shape[1]


def compute_counts(d: Design) -> DesignCounts:
    """Collect every counting statistic of ``d`` in one pass."""
    t, p, n = d.t, d.p, d.n
    grid = d.grid

    unit_counts = np.zeros((t + 1, n), dtype=int)
    head_counts = np.zeros((t + 1, n), dtype=int)
    period_counts = np.zeros((t + 1, p), dtype=int)
    preceded_by = np.zeros((t + 1, t + 1), dtype=int)

    for u in range(n):
        col = grid[:, u]
        for k in range(p):
            i = col[k]
            unit_counts[i, u] += 1
            period_counts[i, k] += 1
            if k < p - 1:
                head_counts[i, u] += 1
            if k > 0:
                preceded_by[i, col[k - 1]] += 1

    reps = unit_counts.sum(axis=1)
    head_reps = head_counts.sum(axis=1)
    control_late_reps = int(reps[0] - period_counts[0, 0])

    for arr in (unit_counts, head_counts, period_counts, preceded_by, reps, head_reps):
        arr.setflags(write=False)
    return DesignCounts(
        unit_counts=unit_counts,
        head_counts=head_counts,
        period_counts=period_counts,
        preceded_by=preceded_by,
        reps=reps,
        head_reps=head_reps,
        control_late_reps=control_late_reps,
    )


def control_products(counts: DesignCounts) -> tuple[int, int, int]:
    """Per-unit control count sums: (sum n0^2, sum n0*h0, sum h0^2).

    Here n0 is the control count of a unit and h0 its count over the
    first p - 1 periods.  These three sums drive the trace bounds.
    """
    n0 = counts.unit_counts[0]
    h0 = counts.head_counts[0]
    return int(n0 @ n0), int(n0 @ h0), int(h0 @ h0)


def eligibility_violations(d: Design) -> list[str]:
    """Check membership in the eligible class used by the bounds.

    A design is eligible when the control appears equally often in
    every period and no treatment (control included) is immediately
    preceded by itself in any unit.  Returns a list of human-readable
    violations; an empty list means the design is eligible.
    """
    counts = compute_counts(d)
    violations: list[str] = []
    r0, p = int(counts.reps[0]), d.p
    l0 = counts.period_counts[0]
    if r0 % p != 0 or not np.all(l0 * p == r0):
        violations.append(
            f"control is not period-balanced: per-period counts {l0.tolist()} "
            f"with total {r0} (needs {r0}/{p} in every period)"
        )
    diag = np.diag(counts.preceded_by)
    for i in np.nonzero(diag)[0]:
        violations.append(
            f"treatment {int(i)} immediately follows itself {int(diag[i])} time(s)"
        )
    return violations


def is_eligible(d: Design) -> bool:
    """True when ``eligibility_violations(d)`` is empty."""
    return not eligibility_violations(d)


def parse_design(text: str) -> Design:
    """Parse the plain-text design format.

    The first non-comment line holds ``t p n``; the next ``p`` lines
    each hold ``n`` whitespace-separated labels in ``0..t``.  Lines
    starting with ``#`` and blank lines are ignored.
    """
    lines = []
    for raw in text.splitlines():
        stripped = raw.strip()
        if stripped and not stripped.startswith("#"):
            lines.append(stripped)
    if not lines:
        raise DesignParseError("empty design text")

    header = lines[0].split()
    if len(header) != 3:
        raise DesignParseError(f"header must be 't p n', got {lines[0]!r}")
    try:
        t, p, n = (int(x) for x in header)
    except ValueError:
        raise DesignParseError(f"header must hold three integers, got {lines[0]!r}")
    if t < 1 or p < 1 or n < 1:
        raise DesignParseError(f"header values must be positive, got t={t} p={p} n={n}")
    if len(lines) - 1 != p:
        raise DesignParseError(f"expected {p} grid rows, found {len(lines) - 1}")

    grid = np.zeros((p, n), dtype=int)
    for k, line in enumerate(lines[1:]):
        entries = line.split()
        if len(entries) != n:
            raise DesignParseError(
                f"row {k + 1} has {len(entries)} entries, expected {n}"
            )
        for u, tok in enumerate(entries):
            try:
                label = int(tok)
            except ValueError:
                raise DesignParseError(
                    f"row {k + 1}, column {u + 1}: {tok!r} is not an integer"
                )
            if not 0 <= label <= t:
                raise DesignParseError(
                    f"row {k + 1}, column {u + 1}: label {label} outside 0..{t}"
                )
            grid[k, u] = label
    return Design(t=t, grid=grid)


def render_design(d: Design) -> str:
    """Canonical text form; ``parse_design(render_design(d)) == d``."""
    lines = [f"{d.t} {d.p} {d.n}"]
    for k in range(d.p):
        lines.append(" ".join(str(int(x)) for x in d.grid[k]))
    return "\n".join(lines) + "\n"
