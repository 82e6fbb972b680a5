import numpy as np
import pytest

from conftest import eligible_sample
from xover.bounds import (
    InfeasibleError,
    bound_terms,
    class_trace_bound,
    design_trace_bound,
    min_control_sums,
    optimize_r0,
)
from xover.design import compute_counts
from xover.model import a_criterion


def test_min_control_sums_examples():
    assert min_control_sums(9, 3, 9).as_tuple() == (9, 6, 6)
    assert min_control_sums(6, 3, 6).as_tuple() == (6, 4, 4)
    assert min_control_sums(50, 5, 60).as_tuple() == (80, 58, 48)


def test_min_control_sums_zero_and_errors():
    assert min_control_sums(6, 3, 0).as_tuple() == (0, 0, 0)
    with pytest.raises(InfeasibleError, match="multiple"):
        min_control_sums(6, 3, 4)
    with pytest.raises(InfeasibleError):
        min_control_sums(2, 3, 9)


def test_class_trace_bound_reference_values():
    assert class_trace_bound(5, 5, 50, 60).bound == pytest.approx(0.24179, abs=1e-4)
    assert class_trace_bound(5, 5, 50, 50).bound == pytest.approx(0.24299, abs=1e-4)
    assert class_trace_bound(6, 5, 30, 30).bound == pytest.approx(0.55044, abs=1e-4)


def test_class_trace_bound_attained_by_certified_design(ex1):
    bound = class_trace_bound(3, 3, 9, 9).bound
    assert bound == pytest.approx(a_criterion(ex1), abs=1e-6)


def test_class_trace_bound_errors():
    with pytest.raises(InfeasibleError, match="3 <= p <= t \\+ 1"):
        class_trace_bound(3, 5, 10, 5)
    with pytest.raises(InfeasibleError, match="multiple"):
        class_trace_bound(3, 3, 9, 7)
    with pytest.raises(InfeasibleError, match="open range"):
        class_trace_bound(3, 3, 9, 0)


@pytest.mark.parametrize(
    "t,p,n,expected",
    [
        (3, 3, 9, 9),
        (2, 3, 6, 6),
        (4, 3, 36, 36),
        (5, 3, 30, 30),
        # four-period cases with best replication equal to the unit count
        (3, 4, 4, 4),
        (4, 4, 16, 16),
        (5, 4, 40, 40),
        (6, 4, 40, 40),
        (7, 4, 28, 28),
        (8, 4, 224, 224),
        (9, 4, 48, 48),
        # five-period cases
        (4, 5, 10, 10),
        (5, 5, 50, 60),
        (4, 5, 48, 60),
        (6, 5, 30, 30),
        (7, 5, 70, 70),
    ],
)
def test_optimize_r0_argmins(t, p, n, expected):
    profile = optimize_r0(t, p, n)
    assert profile.best_r0 == expected
    best = min(e.bound for e in profile.entries)
    assert profile.best_bound == pytest.approx(best)


def test_optimize_r0_profile_is_complete():
    profile = optimize_r0(3, 3, 9)
    assert [e.r0 for e in profile.entries] == [3, 6, 9, 12]
    assert all(e.head_r0 * profile.p == e.r0 * (profile.p - 1) for e in profile.entries)
    with pytest.raises(InfeasibleError):
        optimize_r0(2, 3, 1)


def test_design_trace_bound_equality_on_certified(ex1, ex2, ex5):
    for d in (ex1, ex2, ex5):
        bound = design_trace_bound(compute_counts(d)).bound
        assert bound == pytest.approx(a_criterion(d), abs=1e-6)


def test_design_trace_bound_below_trace(ex7):
    bound = design_trace_bound(compute_counts(ex7)).bound
    assert bound <= a_criterion(ex7) + 1e-8


def test_bound_dominance_on_random_eligible_designs():
    for d in eligible_sample(60, seed=100):
        trace = a_criterion(d)
        counts = compute_counts(d)
        design_bound = design_trace_bound(counts).bound
        assert design_bound <= trace + 1e-8 * (1 + trace)
        if 3 <= d.p <= d.t + 1:
            r0 = int(counts.reps[0])
            class_bound = class_trace_bound(d.t, d.p, d.n, r0).bound
            assert class_bound <= design_bound + 1e-8 * (1 + design_bound)


def _xi_samples(t, p, n, r0):
    base = min_control_sums(n, p, r0)
    head_r0 = r0 * (p - 1) // p
    cap = n * t * (p - 1) - t * head_r0
    for d1 in (0, 1, 3):
        for d2 in (0, 1, 3):
            for d3 in (0, 1, 3):
                xi = (base.sq_full + d1, base.cross + d2, base.sq_head + d3)
                if xi[1] <= cap:
                    yield xi


def _feasible_terms(t, p, n, r0, xi):
    head_r0 = r0 * (p - 1) // p
    try:
        return bound_terms(t, p, n, head_r0, xi)
    except InfeasibleError:
        return None


def _grid_cases():
    # every shape with 3 <= p <= t + 1 and every eligible-density r0
    for t in range(2, 9):
        for p in range(3, t + 2):
            n = 2 * p
            for m in range(1, n // 2 + 1):
                yield t, p, n, m * p


def test_bound_term_inequalities_on_grid():
    checked = 0
    for t, p, n, r0 in _grid_cases():
        head_r0 = r0 * (p - 1) // p
        ratio = head_r0 / n
        for xi in _xi_samples(t, p, n, r0):
            terms = _feasible_terms(t, p, n, r0, xi)
            if terms is None:
                continue
            checked += 1
            d1, d2 = terms.x_denom, terms.y_denom
            th1, th2 = terms.x_adjust, terms.y_adjust
            # no self-adjacency caps the head control density at (p-1)/2
            assert ratio <= (p - 1) / 2 + 1e-12
            # the large denominator dominates the small one
            assert d1 >= (t - 1) * d2 - 1e-9 * (1 + abs(d1))
            if ratio <= (p - 1) / (t + 1):
                assert d1 / ((t - 1) * d2) >= t * (p - 1) / (t * (p - 1) - 1) - 1e-9
            # adjustment factors are ordered nonnegative
            assert th1 >= -1e-12
            assert (p * t - t - 1) / (t * (p - 1)) * th1 <= th2 + 1e-9
            if ratio >= (p - 1) / (t + 1):
                assert th2 >= th1 - 1e-9
    assert checked > 500


def test_bound_monotone_in_control_sums():
    for t, p, n, r0 in _grid_cases():
        for xi in _xi_samples(t, p, n, r0):
            here = _feasible_terms(t, p, n, r0, xi)
            if here is None:
                continue
            for axis in range(3):
                stepped = list(xi)
                stepped[axis] += 1
                head_r0 = r0 * (p - 1) // p
                if axis == 1 and stepped[1] > n * t * (p - 1) - t * head_r0:
                    continue
                there = _feasible_terms(t, p, n, r0, tuple(stepped))
                if there is not None:
                    assert there.value >= here.value - 1e-9


def test_control_sum_eligibility_caps():
    # sampled eligible designs respect the density and cross-product caps
    for d in eligible_sample(40, seed=7):
        counts = compute_counts(d)
        head_r0 = int(counts.head_reps[0])
        assert head_r0 <= d.n * (d.p - 1) / 2
        if d.p <= d.t + 1:
            n0 = counts.unit_counts[0]
            h0 = counts.head_counts[0]
            assert int(n0 @ h0) <= d.t * (d.n * (d.p - 1) - head_r0)
