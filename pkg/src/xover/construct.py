"""Design constructors.

Three routes produce fully balanced designs with control replication
r0 = n:

* ``substitute_control`` (p = t + 1): relabel one symbol of a balanced
  uniform design as the control.
* ``rotating_substitution`` (p = t): juxtapose t copies of a smaller
  balanced uniform design, each with a different treatment replaced by
  the control.
* ``three_step_construct`` (p <= t): lay the blocks of a balanced
  incomplete block design into p arrays with a fixed control row per
  array, then run a seeded local search over within-column swaps of the
  test treatments until all balance conditions hold.

``construct`` dispatches on (t, p, n) and verifies the result.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .design import Design


class ExistenceError(ValueError):
    """No design with the requested structure exists / is constructible."""


class ConstructionError(RuntimeError):
    """The randomized search exhausted its budget without succeeding."""

    def __init__(self, message: str, design: Design, score: float):
        super().__init__(message)
        self.design = design
        self.score = score


# ---------------------------------------------------------------------------
# balanced uniform designs


def _williams_square(s: int) -> np.ndarray:
    """Order-s cyclic square whose columns are shifts of the zigzag row.

    For even s every ordered pair of distinct symbols is adjacent in a
    column exactly once; for odd s the square together with its
    period-reversed copy is balanced (every ordered pair twice).
    """
    base = np.zeros(s, dtype=int)
    for j in range(1, s):
        base[j] = (j + 1) // 2 if j % 2 == 1 else s - j // 2
    return (base[:, None] + np.arange(s)[None, :]) % s


def balanced_uniform(t: int, n: int) -> Design:
    """A balanced uniform design on t symbols, t periods, n units.

    Every symbol appears once per unit and n/t times per period, and
    every ordered pair of distinct symbols is equally often adjacent
    within a unit.  Feasible when t divides n and either t is even or
    n is an even multiple of t.
    """
    if t < 2:
        raise ExistenceError(f"need at least two symbols, got {t}")
    if n % t != 0:
        raise ExistenceError(f"unit count {n} is not a multiple of the order {t}")
    mult = n // t
    square = _williams_square(t)
    if t % 2 == 0:
        grid = np.hstack([square] * mult)
    else:
        if mult % 2 != 0:
            raise ExistenceError(
                f"odd order {t} needs an even multiple of units, got {n} = {mult} x {t}"
            )
        pair = np.hstack([square, square[::-1, :]])
        grid = np.hstack([pair] * (mult // 2))
    return Design(t=t - 1, grid=grid)


def substitute_control(t: int, n: int) -> Design:
    """Fully balanced design with p = t + 1 and one control per unit.

    Builds a balanced uniform design on t + 1 symbols and reads symbol
    0 as the control: each unit holds the control and every test
    treatment exactly once.
    """
    base = balanced_uniform(t + 1, n)
    return Design(t=t, grid=base.grid)


def rotating_substitution(t: int, n: int) -> Design:
    """Fully balanced design with p = t via rotating control substitution.

    Takes a balanced uniform design on t symbols with n/t units and
    juxtaposes t copies, replacing a different treatment by the control
    in each copy.  Feasible when n/t^2 is an integer and t is even, or
    n/t^2 is an even integer and t is odd.
    """
    if t < 3:
        raise ExistenceError(f"rotation needs at least three periods, got t={t}")
    if n % t != 0:
        raise ExistenceError(f"unit count {n} is not a multiple of t={t}")
    base = balanced_uniform(t, n // t)  # raises when n/t is not a valid multiple
    symbols = base.grid + 1  # test labels 1..t
    copies = []
    for treatment in range(1, t + 1):
        block = symbols.copy()
        block[block == treatment] = 0
        copies.append(block)
    return Design(t=t, grid=np.hstack(copies))


# ---------------------------------------------------------------------------
# balanced incomplete block designs


@dataclass(frozen=True)
class BibDesign:
    """A 2-design: b blocks of size k on v treatments 1..v."""

    v: int
    k: int
    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(
            self, "blocks", tuple(tuple(sorted(block)) for block in self.blocks)
        )
        reps = {i: 0 for i in range(1, self.v + 1)}
        pairs: dict[tuple[int, int], int] = {}
        for block in self.blocks:
            if len(set(block)) != self.k:
                raise ValueError(f"block {block} is not a {self.k}-subset")
            if not all(1 <= i <= self.v for i in block):
                raise ValueError(f"block {block} outside 1..{self.v}")
            for i in block:
                reps[i] += 1
            for pair in itertools.combinations(block, 2):
                pairs[pair] = pairs.get(pair, 0) + 1
        rep_values = set(reps.values())
        if len(rep_values) != 1:
            raise ValueError(f"unequal replications {sorted(rep_values)}")
        expected_pairs = {
            pair: 0 for pair in itertools.combinations(range(1, self.v + 1), 2)
        }
        expected_pairs.update(pairs)
        lam_values = set(expected_pairs.values())
        if len(lam_values) != 1:
            raise ValueError(f"unequal pair counts {sorted(lam_values)}")

    @property
    def b(self) -> int:
        return len(self.blocks)

    @property
    def r(self) -> int:
        return self.b * self.k // self.v

    @property
    def lam(self) -> int:
        return self.r * (self.k - 1) // (self.v - 1)


def _fano_blocks() -> tuple[tuple[int, ...], ...]:
    return tuple(
        tuple(sorted(((base + shift - 1) % 7) + 1 for base in (1, 2, 4)))
        for shift in range(7)
    )


_CATALOG: dict[tuple[int, int], tuple[tuple[int, ...], ...]] = {
    (7, 3): _fano_blocks(),
    (7, 4): tuple(
        tuple(sorted(set(range(1, 8)) - set(block))) for block in _fano_blocks()
    ),
    (9, 3): (
        (1, 2, 3), (4, 5, 6), (7, 8, 9),
        (1, 4, 7), (2, 5, 8), (3, 6, 9),
        (1, 5, 9), (2, 6, 7), (3, 4, 8),
        (1, 6, 8), (2, 4, 9), (3, 5, 7),
    ),
    (6, 3): (
        (1, 2, 3), (1, 2, 4), (1, 3, 5), (1, 4, 6), (1, 5, 6),
        (2, 3, 6), (2, 4, 5), (2, 5, 6), (3, 4, 5), (3, 4, 6),
    ),
}


def _complete_blocks(v: int, k: int) -> tuple[tuple[int, ...], ...]:
    return tuple(itertools.combinations(range(1, v + 1), k))


def _search_blocks(v: int, k: int) -> tuple[tuple[int, ...], ...] | None:
    """Backtracking search for a small 2-design; fallback for v <= 8."""
    if v > 8:
        return None
    candidates = _complete_blocks(v, k)
    for lam in range(1, 5):
        r_num = lam * (v - 1)
        if r_num % (k - 1) != 0:
            continue
        r = r_num // (k - 1)
        if (v * r) % k != 0:
            continue
        b = v * r // k
        if b >= len(candidates):
            continue  # the complete design is at least as small
        pair_left = {pair: lam for pair in itertools.combinations(range(1, v + 1), 2)}

        def extend(chosen: list, start: int) -> list | None:
            if len(chosen) == b:
                return chosen if all(x == 0 for x in pair_left.values()) else None
            for idx in range(start, len(candidates)):
                block = candidates[idx]
                bp = list(itertools.combinations(block, 2))
                if any(pair_left[pair] == 0 for pair in bp):
                    continue
                for pair in bp:
                    pair_left[pair] -= 1
                result = extend(chosen + [block], idx)
                if result is not None:
                    return result
                for pair in bp:
                    pair_left[pair] += 1
            return None

        found = extend([], 0)
        if found is not None:
            return tuple(found)
    return None


def bib_design(v: int, k: int) -> BibDesign:
    """Smallest available balanced incomplete block design for (v, k).

    Prefers a named catalog design, falls back to the complete design
    (all k-subsets), then to a bounded backtracking search for v <= 8.
    """
    if not 2 <= k < v:
        raise ExistenceError(f"block size {k} must satisfy 2 <= k < v = {v}")
    if (v, k) in _CATALOG:
        return BibDesign(v=v, k=k, blocks=_CATALOG[(v, k)])
    if v <= 12:
        searched = _search_blocks(v, k)
        if searched is not None:
            return BibDesign(v=v, k=k, blocks=searched)
        return BibDesign(v=v, k=k, blocks=_complete_blocks(v, k))
    raise ExistenceError(f"no supported block design for v={v}, k={k}")


# ---------------------------------------------------------------------------
# the three-step construction


@dataclass(frozen=True)
class SearchConfig:
    """Budget of the within-column swap search (deterministic per seed)."""

    seed: int = 1729
    max_restarts: int = 32
    max_iters_per_restart: int = 100000

    def __post_init__(self):
        if self.max_restarts <= 0 or self.max_iters_per_restart <= 0:
            raise ValueError("search budget must be positive")


def existence_quotients(t: int, p: int, n: int) -> tuple[bool, Fraction, Fraction]:
    """Necessary integrality conditions for a fully balanced design with r0 = n.

    Returns (feasible, q1, q2) where q1 = n(p-1)/(pt) is the per-period
    test replication and q2 = (p-1)(p-2)n/(pt(t-1)) the per-ordered-pair
    test adjacency count; both must be integers.
    """
    q1 = Fraction(n * (p - 1), p * t)
    q2 = Fraction((p - 1) * (p - 2) * n, p * t * (t - 1))
    return q1.denominator == 1 and q2.denominator == 1, q1, q2


def _pick_bib(t: int, k: int, columns: int) -> BibDesign:
    """A (t, k) block design whose block count divides the column budget."""
    options: list[BibDesign] = []
    try:
        options.append(bib_design(t, k))
    except ExistenceError:
        pass
    complete = BibDesign(v=t, k=k, blocks=_complete_blocks(t, k))
    if all(opt.blocks != complete.blocks for opt in options):
        options.append(complete)
    fitting = [opt for opt in options if columns % opt.b == 0]
    if not fitting:
        raise ExistenceError(
            f"no block design on {t} treatments with block size {k} has a "
            f"block count dividing {columns} (available: "
            f"{sorted(opt.b for opt in options)})"
        )
    return min(fitting, key=lambda opt: opt.b)


def _step2_layout(t: int, p: int, n: int, bib: BibDesign) -> list[list[int]]:
    """p juxtaposed p-by-(n/p) arrays, array a carrying control in row a.

    Each block copy is rotated by (array + copy index) before filling,
    which spreads every block element uniformly over the last period
    across the copies and gives the swap search a balanced start.
    """
    columns_per_array = n // p
    k = p - 1
    cols: list[list[int]] = []
    for array in range(p):
        for j in range(columns_per_array):
            block = bib.blocks[j % bib.b]
            shift = (array + j // bib.b) % k
            order = block[shift:] + block[:shift]
            col = [0] * p
            fill = iter(order)
            for row in range(p):
                if row != array:
                    col[row] = next(fill)
            cols.append(col)
    return cols


class _SearchState:
    """Mutable counters for the swap search, updated incrementally."""

    def __init__(self, t: int, p: int, n: int, cols: list[list[int]]):
        self.t, self.p, self.n = t, p, n
        self.cols = [list(c) for c in cols]
        self.control_row = [c.index(0) for c in self.cols]
        self.test_rows = [
            [k for k in range(p) if k != ctrl] for ctrl in self.control_row
        ]
        size = t + 1
        self.precede = [[0] * size for _ in range(size)]  # (successor, predecessor)
        self.period = [[0] * p for _ in range(size)]
        self.joint = [[0] * size for _ in range(size)]  # (anywhere, in head)
        self.head_pairs = [[0] * size for _ in range(size)]

        for u in range(n):
            col = self.cols[u]
            for k in range(p):
                self.period[col[k]][k] += 1
                if k > 0:
                    self.precede[col[k]][col[k - 1]] += 1
            members = [x for x in col if x != 0]
            head = [x for x in col[: p - 1] if x != 0]
            for j in head:
                for i in members:
                    if i != j:
                        self.joint[i][j] += 1
                for i in head:
                    if i != j:
                        self.head_pairs[i][j] += 1

        last_units = sum(1 for ctrl in self.control_row if ctrl == p - 1)
        pair_total = (p - 1) * (p - 2) * n
        self.target_precede = [[0.0] * size for _ in range(size)]
        adj_target = pair_total / (p * t * (t - 1))
        control_adj = n * (p - 1) / (p * t)
        for i in range(1, size):
            for j in range(1, size):
                if i != j:
                    self.target_precede[i][j] = adj_target
            self.target_precede[0][i] = control_adj
            self.target_precede[i][0] = control_adj
        self.target_period = n * (p - 1) / (t * p)
        joint_total = last_units * (p - 1) * (p - 2) + (n - last_units) * (p - 2) ** 2
        self.target_joint = joint_total / (t * (t - 1))
        head_total = last_units * (p - 1) * (p - 2) + (n - last_units) * (p - 2) * (
            p - 3
        )
        self.target_head = head_total / (t * (t - 1))
        self.score = self._full_score()

    def _full_score(self) -> float:
        t, p = self.t, self.p
        total = 0.0
        for i in range(t + 1):
            for j in range(t + 1):
                total += abs(self.precede[i][j] - self.target_precede[i][j])
        for i in range(1, t + 1):
            for k in range(p):
                total += abs(self.period[i][k] - self.target_period)
            for j in range(1, t + 1):
                if i != j:
                    total += abs(self.joint[i][j] - self.target_joint)
                    total += abs(self.head_pairs[i][j] - self.target_head)
        return total

    def _cell_delta(self, table, target, i, j, change) -> float:
        old = table[i][j]
        tgt = target[i][j] if isinstance(target, list) else target
        return abs(old + change - tgt) - abs(old - tgt)

    def swap_delta(self, u: int, k1: int, k2: int) -> tuple[float, list]:
        """Score change of swapping rows k1 < k2 in column u, plus an undo log."""
        col = self.cols[u]
        x, y = col[k1], col[k2]
        p = self.p
        updates: dict[tuple, int] = {}

        def bump(kind, i, j, change):
            key = (kind, i, j)
            updates[key] = updates.get(key, 0) + change

        bump("l", x, k1, -1)
        bump("l", x, k2, +1)
        bump("l", y, k2, -1)
        bump("l", y, k1, +1)

        touched = sorted({k for k in (k1 - 1, k1, k2 - 1, k2) if 0 <= k < p - 1})
        newcol = list(col)
        newcol[k1], newcol[k2] = y, x
        for k in touched:
            bump("m", col[k + 1], col[k], -1)
            bump("m", newcol[k + 1], newcol[k], +1)

        if k2 == p - 1:
            members = [v for v in col if v != 0]
            # x moves out of the head, y moves in
            for i in members:
                if i != x:
                    bump("A", i, x, -1)
                if i != y:
                    bump("A", i, y, +1)
            head_rest = [v for v in col[: p - 1] if v != 0 and v != x]
            for i in head_rest:
                if i != y:
                    bump("H", i, x, -1)
                    bump("H", x, i, -1)
                    bump("H", i, y, +1)
                    bump("H", y, i, +1)

        delta = 0.0
        for (kind, i, j), change in updates.items():
            if change == 0:
                continue
            if kind == "l":
                delta += self._cell_delta(self.period, self.target_period, i, j, change)
            elif kind == "m":
                delta += self._cell_delta(self.precede, self.target_precede, i, j, change)
            elif kind == "A":
                delta += self._cell_delta(self.joint, self.target_joint, i, j, change)
            else:
                delta += self._cell_delta(self.head_pairs, self.target_head, i, j, change)
        return delta, [(key, change) for key, change in updates.items()]

    def commit(self, u: int, k1: int, k2: int, delta: float, log: list) -> None:
        col = self.cols[u]
        col[k1], col[k2] = col[k2], col[k1]
        for (kind, i, j), change in log:
            if kind == "l":
                self.period[i][j] += change
            elif kind == "m":
                self.precede[i][j] += change
            elif kind == "A":
                self.joint[i][j] += change
            else:
                self.head_pairs[i][j] += change
        self.score += delta

    def shuffle(self, rng: np.random.Generator, head_only: bool = False) -> None:
        """Randomize the test entries of every column, then recount.

        With ``head_only`` the last-period entries stay put, preserving
        the head-membership tables.
        """
        for u in range(self.n):
            rows = self.test_rows[u]
            if head_only:
                rows = [k for k in rows if k < self.p - 1]
            values = [self.cols[u][k] for k in rows]
            order = rng.permutation(len(values))
            for slot, k in enumerate(rows):
                self.cols[u][k] = values[order[slot]]
        self.__init__(self.t, self.p, self.n, self.cols)

    def grid(self) -> np.ndarray:
        return np.array(self.cols, dtype=int).T


_TEMP_START = 1.5
_TEMP_END = 0.02
_REHEAT_CYCLES = 4
_HEAD_MOVE_SHARE = 0.8
_DROP_SWAP_SHARE = 0.1


def three_step_construct(
    t: int, p: int, n: int, cfg: SearchConfig | None = None
) -> tuple[Design, float]:
    """Block-design layout plus annealed swap search; returns (design, score).

    Score 0 means every balance condition holds.  A nonzero score is
    the best effort found within the budget; callers decide whether to
    accept it.  Deterministic for a fixed configuration.
    """
    cfg = cfg or SearchConfig()
    if not 3 <= p <= t:
        raise ExistenceError(f"the three-step construction needs 3 <= p <= t, got p={p}, t={t}")
    if n % p != 0:
        raise ExistenceError(f"unit count {n} must be a multiple of the period count {p}")
    feasible, q1, q2 = existence_quotients(t, p, n)
    if not feasible:
        raise ExistenceError(
            f"no fully balanced design with control replication n exists: "
            f"period quotient {q1}, adjacency quotient {q2} must both be integers"
        )
    bib = _pick_bib(t, p - 1, n // p)
    layout = _step2_layout(t, p, n, bib)

    state = _SearchState(t, p, n, layout)
    moves = [
        (u, k1, k2)
        for u in range(n)
        for k1, k2 in itertools.combinations(state.test_rows[u], 2)
    ]
    # swaps inside the head leave the head-membership tables alone, which
    # the rotated layout already satisfies; sample them preferentially
    head_moves = [(u, k1, k2) for u, k1, k2 in moves if k2 < p - 1] or moves
    # columns holding the same block, control not in the last period: the
    # drop-exchange move trades their last-period entries atomically
    by_block: dict[tuple[int, ...], list[int]] = {}
    for u in range(n):
        if state.control_row[u] != p - 1:
            key = tuple(sorted(v for v in state.cols[u] if v != 0))
            by_block.setdefault(key, []).append(u)
    drop_groups = [group for group in by_block.values() if len(group) >= 2]
    cycle_len = max(1, cfg.max_iters_per_restart // _REHEAT_CYCLES)
    cooling = (_TEMP_END / _TEMP_START) ** (1.0 / cycle_len)

    best_grid = state.grid()
    best_score = state.score

    def snapshot():
        nonlocal best_score, best_grid
        if state.score < best_score:
            best_score, best_grid = state.score, state.grid()

    for restart in range(cfg.max_restarts):
        rng = np.random.default_rng([cfg.seed, restart])
        if restart > 0:
            state.__init__(t, p, n, layout)
            state.shuffle(rng, head_only=restart % 2 == 0)
        snapshot()
        temp = _TEMP_START
        iters = 0
        while iters < cfg.max_iters_per_restart and state.score > 0:
            roll = rng.random()
            if drop_groups and roll >= 1.0 - _DROP_SWAP_SHARE:
                group = drop_groups[int(rng.integers(len(drop_groups)))]
                first = int(rng.integers(len(group)))
                second = int(rng.integers(len(group) - 1))
                second += second >= first
                u1, u2 = group[first], group[second]
                x, y = state.cols[u1][p - 1], state.cols[u2][p - 1]
                if x != y:
                    k_y = state.cols[u1].index(y)
                    k_x = state.cols[u2].index(x)
                    d1, log1 = state.swap_delta(u1, k_y, p - 1)
                    state.commit(u1, k_y, p - 1, d1, log1)
                    d2, log2 = state.swap_delta(u2, k_x, p - 1)
                    total = d1 + d2
                    if total <= 0 or rng.random() < math.exp(-total / temp):
                        state.commit(u2, k_x, p - 1, d2, log2)
                        snapshot()
                    else:
                        undo, undo_log = state.swap_delta(u1, k_y, p - 1)
                        state.commit(u1, k_y, p - 1, undo, undo_log)
            else:
                pool = head_moves if roll < _HEAD_MOVE_SHARE else moves
                u, k1, k2 = pool[int(rng.integers(len(pool)))]
                delta, log = state.swap_delta(u, k1, k2)
                if delta <= 0 or rng.random() < math.exp(-delta / temp):
                    state.commit(u, k1, k2, delta, log)
                    snapshot()
            iters += 1
            temp = temp * cooling if iters % cycle_len else _TEMP_START
        if best_score == 0:
            break
    return Design(t=t, grid=best_grid), best_score


def construct(t: int, p: int, n: int, cfg: SearchConfig | None = None) -> Design:
    """Build and verify a fully balanced design with control replication n.

    Dispatch: p = t + 1 uses the control substitution, p = t the
    rotating substitution (falling back to the search when the rotation
    is infeasible), p < t the three-step search.  Raises
    :class:`ExistenceError` for infeasible parameters and
    :class:`ConstructionError` (carrying the best design and its score)
    when the search budget runs out.
    """
    if not 3 <= p <= t + 1:
        raise ExistenceError(f"constructions cover 3 <= p <= t + 1, got p={p}, t={t}")
    feasible, q1, q2 = existence_quotients(t, p, n)
    if not feasible:
        raise ExistenceError(
            f"no fully balanced design with control replication n={n} exists for "
            f"t={t}, p={p}: quotients {q1} and {q2} must be integers"
        )
    if p == t + 1:
        design = substitute_control(t, n)
    elif p == t:
        try:
            design = rotating_substitution(t, n)
        except ExistenceError:
            design, score = three_step_construct(t, p, n, cfg)
            if score > 0:
                raise ConstructionError(
                    f"search budget exhausted at violation score {score}",
                    design=design,
                    score=score,
                )
    else:
        design, score = three_step_construct(t, p, n, cfg)
        if score > 0:
            raise ConstructionError(
                f"search budget exhausted at violation score {score}",
                design=design,
                score=score,
            )

    from .verify import verify_balance

    report = verify_balance(design)
    if not report.fully_balanced:
        raise RuntimeError(
            "internal error: constructed design failed verification: "
            + "; ".join(report.failures)
        )
    return design
