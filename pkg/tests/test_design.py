import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from xover.design import (
    Design,
    DesignParseError,
    compute_counts,
    control_products,
    eligibility_violations,
    is_eligible,
    parse_design,
    render_design,
)


def test_design_shape_and_labels():
    d = Design(t=2, grid=[[0, 1], [1, 2], [2, 0]])
    assert (d.p, d.n) == (3, 2)
    assert d.grid.dtype == int


def test_design_rejects_bad_labels():
    with pytest.raises(DesignParseError, match="outside 0..2"):
        Design(t=2, grid=[[0, 3]])
    with pytest.raises(DesignParseError, match="outside 0..1"):
        Design(t=1, grid=[[-1, 0]])
    with pytest.raises(DesignParseError):
        Design(t=0, grid=[[0]])
    with pytest.raises(DesignParseError, match="integers"):
        Design(t=1, grid=[[0.5, 1.0]])


def test_design_grid_is_immutable():
    d = Design(t=1, grid=[[0, 1]])
    with pytest.raises(ValueError):
        d.grid[0, 0] = 1


def test_counts_hand_example():
    # unit 1: control twice (periods 1 and 3); unit 2: 1 then 2 then 1
    d = Design(t=2, grid=[[0, 1], [1, 2], [0, 1]])
    c = compute_counts(d)
    assert c.unit_counts[:, 0].tolist() == [2, 1, 0]
    assert c.unit_counts[:, 1].tolist() == [0, 2, 1]
    assert c.head_counts[:, 0].tolist() == [1, 1, 0]
    assert c.period_counts[0].tolist() == [1, 0, 1]
    assert c.preceded_by[1, 0] == 1  # treatment 1 right after control once
    assert c.preceded_by[0, 1] == 1
    assert c.preceded_by[1, 2] == 1
    assert c.reps.tolist() == [2, 3, 1]
    assert c.head_reps.tolist() == [1, 2, 1]
    assert c.control_late_reps == 1


def test_counts_totals(ex2):
    c = compute_counts(ex2)
    assert c.reps.sum() == ex2.p * ex2.n
    assert c.head_reps.sum() == (ex2.p - 1) * ex2.n
    assert np.array_equal(c.unit_counts.sum(axis=0), np.full(ex2.n, ex2.p))
    assert np.array_equal(c.period_counts.sum(axis=0), np.full(ex2.p, ex2.n))
    assert c.preceded_by.sum() == (ex2.p - 1) * ex2.n


def test_control_products(ex1):
    assert control_products(compute_counts(ex1)) == (9, 6, 6)


def test_eligibility(ex1):
    assert is_eligible(ex1)
    skewed = Design(t=1, grid=[[0, 0], [1, 1], [0, 1]])
    msgs = eligibility_violations(skewed)
    assert any("period-balanced" in m for m in msgs)
    repeat = Design(t=2, grid=[[0, 1], [1, 1], [2, 0]])
    msgs = eligibility_violations(repeat)
    assert any("follows itself" in m for m in msgs)


def test_parse_design_errors():
    with pytest.raises(DesignParseError, match="empty"):
        parse_design("# nothing here\n")
    with pytest.raises(DesignParseError, match="header"):
        parse_design("3 3\n0 1 2\n")
    with pytest.raises(DesignParseError, match="grid rows"):
        parse_design("1 2 2\n0 1\n")
    with pytest.raises(DesignParseError, match="entries"):
        parse_design("1 1 3\n0 1\n")
    with pytest.raises(DesignParseError, match="not an integer"):
        parse_design("1 1 2\n0 x\n")
    with pytest.raises(DesignParseError, match="outside"):
        parse_design("1 1 2\n0 2\n")


def test_parse_ignores_comments_and_blanks():
    d = parse_design("# a design\n\n2 2 3\n0 1 2\n\n1 2 0\n# trailing\n")
    assert (d.t, d.p, d.n) == (2, 2, 3)


@st.composite
def design_grids(draw):
    t = draw(st.integers(min_value=1, max_value=5))
    p = draw(st.integers(min_value=1, max_value=6))
    n = draw(st.integers(min_value=1, max_value=8))
    cells = draw(
        st.lists(
            st.lists(st.integers(min_value=0, max_value=t), min_size=n, max_size=n),
            min_size=p,
            max_size=p,
        )
    )
    return Design(t=t, grid=cells)


@given(design_grids())
@settings(max_examples=200, deadline=None)
def test_parse_render_round_trip(d):
    assert parse_design(render_design(d)) == d
