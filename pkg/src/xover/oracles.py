"""Independent oracles used by the test suite.

Everything here recomputes quantities by a route disjoint from the
production code: covariances by direct least squares on the full model
matrix, minimum control-count sums by dynamic programming over actual
unit sequences, and empirical covariances by Monte Carlo simulation.
"""

from __future__ import annotations

import itertools

import numpy as np

from .bounds import InfeasibleError
from .design import Design
from .linalg import g_inverse
from .model import DisconnectedDesignError, ModelKind, build_model_matrices

ORACLE_RTOL = 1e-8
BRUTE_FORCE_MAX_UNITS = 12
SYMMETRIZE_MAX_SIZE = 5


def _full_design_matrix(d: Design, kind: ModelKind) -> tuple[np.ndarray, int]:
    """Stacked model matrix for one kind and the column offset of the
    treatment block."""
    mats = build_model_matrices(d)
    blocks = [np.ones((d.n * d.p, 1))]
    if kind in (ModelKind.CARRYOVER, ModelKind.TWO_WAY):
        blocks.extend([mats.P, mats.U])
    elif kind is ModelKind.ONE_WAY:
        blocks.append(mats.U)
    offset = sum(b.shape[1] for b in blocks)
    blocks.append(mats.T)
    if kind is ModelKind.CARRYOVER:
        blocks.append(mats.F)
    return np.hstack(blocks), offset


def _contrast_rows(d: Design, width: int, offset: int) -> np.ndarray:
    rows = np.zeros((d.t, width))
    rows[:, offset] = -1.0
    for i in range(d.t):
        rows[i, offset + 1 + i] = 1.0
    return rows


def ols_covariance_oracle(d: Design, kind: ModelKind) -> np.ndarray:
    """Covariance of the test-minus-control estimates, in units of sigma^2.

    Computed straight from a g-inverse of X'X for the full model matrix;
    the result does not depend on the g-inverse because the contrasts
    are estimable (checked, otherwise raises).
    """
    x, offset = _full_design_matrix(d, kind)
    xtx = x.T @ x
    g = g_inverse(xtx)
    rows = _contrast_rows(d, x.shape[1], offset)
    residual = rows @ g @ xtx - rows
    if np.abs(residual).max() > ORACLE_RTOL * (1 + np.abs(rows).max()):
        raise DisconnectedDesignError(
            "test-minus-control contrasts are not estimable under "
            f"{kind.value}; design is disconnected"
        )
    return rows @ g @ rows.T


def sequence_pool(t: int, p: int) -> list[tuple[tuple[int, ...], int, int]]:
    """All length-p unit sequences over {0..t} with no immediate repeats.

    Each entry is (sequence, control count, control count in the first
    p - 1 periods).  Pool size is (t+1) * t**(p-1).
    """
    pool = []
    for seq in itertools.product(range(t + 1), repeat=p):
        if any(seq[k] == seq[k + 1] for k in range(p - 1)):
            continue
        n0 = sum(1 for v in seq if v == 0)
        head = n0 - (1 if seq[-1] == 0 else 0)
        pool.append((seq, n0, head))
    return pool


def _control_count_pairs(p: int) -> list[tuple[int, int]]:
    """Feasible per-unit (full, head) control counts: non-adjacent placements."""
    pairs = set()
    for mask in range(1 << p):
        if mask & (mask << 1):
            continue
        n0 = bin(mask).count("1")
        head = n0 - ((mask >> (p - 1)) & 1)
        pairs.add((n0, head))
    return sorted(pairs)


def brute_force_min_sums(n: int, p: int, r0: int) -> tuple[int, int, int]:
    """Minimum (sum n0^2, sum n0*h0, sum h0^2) by explicit enumeration.

    Dynamic program over units; per-unit control counts range over the
    placements realizable without self-adjacency.  Totals are pinned to
    r0 controls overall and r0(p-1)/p in the first p - 1 periods.
    """
    if n > BRUTE_FORCE_MAX_UNITS:
        raise ValueError(f"brute force capped at {BRUTE_FORCE_MAX_UNITS} units, got {n}")
    if r0 == 0:
        return (0, 0, 0)
    if (r0 * (p - 1)) % p != 0:
        raise InfeasibleError(f"head replication r0(p-1)/p is not an integer for r0={r0}")
    head_total = r0 * (p - 1) // p
    pairs = _control_count_pairs(p)
    dp: dict[tuple[int, int], tuple[int, int, int]] = {(0, 0): (0, 0, 0)}
    for _ in range(n):
        ndp: dict[tuple[int, int], tuple[int, int, int]] = {}
        for (s_full, s_head), sums in dp.items():
            for n0, head in pairs:
                key = (s_full + n0, s_head + head)
                if key[0] > r0 or key[1] > head_total:
                    continue
                cand = (
                    sums[0] + n0 * n0,
                    sums[1] + n0 * head,
                    sums[2] + head * head,
                )
                cur = ndp.get(key)
                if cur is None:
                    ndp[key] = cand
                else:
                    ndp[key] = (
                        min(cur[0], cand[0]),
                        min(cur[1], cand[1]),
                        min(cur[2], cand[2]),
                    )
        dp = ndp
    result = dp.get((r0, head_total))
    if result is None:
        raise InfeasibleError(f"no arrangement of {r0} controls over {n} units of {p} periods")
    return result


def symmetrize(m: np.ndarray) -> np.ndarray:
    """Average of m over all simultaneous row/column permutations."""
    m = np.asarray(m, dtype=float)
    size = m.shape[0]
    if m.shape != (size, size):
        raise ValueError(f"need a square matrix, got {m.shape}")
    if size > SYMMETRIZE_MAX_SIZE:
        raise ValueError(f"explicit averaging capped at size {SYMMETRIZE_MAX_SIZE}")
    acc = np.zeros_like(m)
    count = 0
    for perm in itertools.permutations(range(size)):
        acc += m[np.ix_(perm, perm)]
        count += 1
    return acc / count


def random_eligible_design(
    t: int, p: int, n: int, seed: int, max_tries: int = 2000
) -> Design:
    """A random design in the eligible class, deterministic per seed.

    Controls are placed period-uniformly (r0 a random multiple of p)
    with no unit carrying adjacent controls; tests fill the remaining
    cells top-down, never repeating the entry directly above.
    """
    if t < 2:
        raise ValueError("need at least two test treatments")
    rng = np.random.default_rng(seed)
    per_period_cap = max(1, (n * ((p + 1) // 2)) // (2 * p))
    per_period = int(rng.integers(1, per_period_cap + 1))
    for _ in range(max_tries):
        grid = np.zeros((p, n), dtype=int)
        mask = np.zeros((p, n), dtype=bool)
        for k in range(p):
            units = rng.choice(n, size=per_period, replace=False)
            mask[k, units] = True
        if (mask[:-1] & mask[1:]).any():
            continue
        for u in range(n):
            prev = -1
            for k in range(p):
                if mask[k, u]:
                    grid[k, u] = 0
                    prev = 0
                    continue
                choices = [lab for lab in range(1, t + 1) if lab != prev]
                lab = int(choices[rng.integers(len(choices))])
                grid[k, u] = lab
                prev = lab
        return Design(t=t, grid=grid)
    raise InfeasibleError(
        f"could not place {per_period} controls per period over {n} units "
        f"without self-adjacency in {max_tries} tries"
    )


def monte_carlo_contrast_cov(
    d: Design,
    kind: ModelKind,
    replicates: int = 2000,
    seed: int = 20260814,
    sigma: float = 1.0,
) -> np.ndarray:
    """Empirical covariance of the contrast estimates over simulated fits.

    Simulates responses with arbitrary fixed effects, refits by least
    squares per replicate, and returns the sample covariance of the
    test-minus-control estimates in units of sigma^2.
    """
    x, offset = _full_design_matrix(d, kind)
    rng = np.random.default_rng(seed)
    params = rng.normal(size=x.shape[1])
    mean = x @ params
    rows = _contrast_rows(d, x.shape[1], offset)
    solver = rows @ np.linalg.pinv(x)
    noise = rng.standard_normal((len(mean), replicates))
    estimates = solver @ (mean[:, None] + sigma * noise)
    return np.cov(estimates) / sigma**2
