from fractions import Fraction

import numpy as np
import pytest

from xover.construct import (
    BibDesign,
    ConstructionError,
    ExistenceError,
    SearchConfig,
    balanced_uniform,
    bib_design,
    construct,
    existence_quotients,
    rotating_substitution,
    substitute_control,
    three_step_construct,
)
from xover.design import compute_counts, is_eligible
from xover.verify import certify, verify_balance


def _pair_adjacencies(d):
    counts = compute_counts(d)
    m = counts.preceded_by
    off = m[~np.eye(m.shape[0], dtype=bool)]
    return off


def test_balanced_uniform_even_symbols():
    d = balanced_uniform(4, 8)
    assert (d.t, d.p, d.n) == (3, 4, 8)
    counts = compute_counts(d)
    assert np.all(counts.unit_counts == 1)
    assert np.all(counts.period_counts == 2)
    off = _pair_adjacencies(d)
    assert np.all(off == off[0])
    assert np.all(np.diag(counts.preceded_by) == 0)


def test_balanced_uniform_odd_symbols_needs_even_multiple():
    d = balanced_uniform(5, 10)
    counts = compute_counts(d)
    assert np.all(counts.unit_counts == 1)
    off = _pair_adjacencies(d)
    assert np.all(off == off[0])
    with pytest.raises(ExistenceError):
        balanced_uniform(5, 5)
    with pytest.raises(ExistenceError):
        balanced_uniform(4, 6)


def test_substitute_control_certifies_optimal():
    cert = certify(substitute_control(3, 4))
    assert cert.verdict == "optimal"


def test_rotating_substitution_certifies_optimal():
    d = rotating_substitution(4, 16)
    assert (d.t, d.p, d.n) == (4, 4, 16)
    assert certify(d).verdict == "optimal"


def test_rotating_substitution_rejects_bad_unit_count():
    with pytest.raises(ExistenceError):
        rotating_substitution(3, 10)


def test_bib_design_balance():
    for v, k in [(7, 3), (9, 3), (6, 3), (7, 4), (4, 3), (5, 4), (6, 5)]:
        bib = bib_design(v, k)
        assert bib.v == v and bib.k == k
        # symbols are the test-treatment labels 1..v
        occurrences = np.zeros(v + 1, dtype=int)
        pairs = np.zeros((v + 1, v + 1), dtype=int)
        for block in bib.blocks:
            assert len(set(block)) == k
            assert all(1 <= i <= v for i in block)
            for i in block:
                occurrences[i] += 1
            for i in block:
                for j in block:
                    if i != j:
                        pairs[i, j] += 1
        occurrences = occurrences[1:]
        pairs = pairs[1:, 1:]
        assert len(set(occurrences.tolist())) == 1
        off = pairs[~np.eye(v, dtype=bool)]
        assert len(set(off.tolist())) == 1
        assert bib.r == occurrences[0]
        assert bib.lam == off[0]


def test_bib_design_rejects_invalid_blocks():
    with pytest.raises(ValueError):
        BibDesign(v=4, k=2, blocks=((0, 1), (2, 3)))  # unequal pair counts


def test_existence_quotients():
    ok, q1, q2 = existence_quotients(3, 3, 9)
    assert ok and (q1, q2) == (Fraction(2), Fraction(1))
    ok, q1, q2 = existence_quotients(2, 3, 6)
    assert ok and (q1, q2) == (Fraction(2), Fraction(2))
    ok, q1, q2 = existence_quotients(6, 5, 30)
    assert not ok and q2 == Fraction(12, 5)


def test_three_step_small_case_reaches_zero():
    design, score = three_step_construct(3, 3, 9, SearchConfig(max_restarts=4))
    assert score == 0
    assert verify_balance(design).fully_balanced
    assert is_eligible(design)


def test_three_step_rejects_bad_shapes():
    with pytest.raises(ExistenceError):
        three_step_construct(6, 5, 30)  # fails the divisibility quotients
    with pytest.raises(ExistenceError):
        three_step_construct(3, 3, 10)  # period count does not divide units
    with pytest.raises(ValueError):
        three_step_construct(3, 5, 10)  # needs p <= t


def test_search_config_validation():
    with pytest.raises(ValueError):
        SearchConfig(max_restarts=0)
    with pytest.raises(ValueError):
        SearchConfig(max_iters_per_restart=-1)


def test_construct_dispatch_and_guards():
    assert construct(2, 3, 6).p == 3  # control substitution route
    assert construct(3, 3, 9).n == 9  # search route after rotation fallback
    with pytest.raises(ExistenceError):
        construct(6, 5, 30)
    with pytest.raises(ExistenceError):
        construct(3, 6, 12)  # p > t + 1


def test_construct_is_deterministic_per_seed():
    a = construct(4, 3, 36, SearchConfig(seed=5))
    b = construct(4, 3, 36, SearchConfig(seed=5))
    assert a == b


def test_construction_error_carries_best_design():
    # a budget too small to finish still reports its best attempt
    cfg = SearchConfig(seed=1, max_restarts=1, max_iters_per_restart=5)
    design, score = three_step_construct(7, 4, 28, cfg)
    assert score > 0 and design.n == 28
    with pytest.raises(ConstructionError) as err:
        construct(7, 4, 28, cfg)
    assert err.value.score == score
    assert err.value.design == design
