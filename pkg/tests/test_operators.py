"""Maximal operators and norms against hand-computed values plus
structural identities on random data."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from filtermax import (
    FilteredSpace,
    bilinear_maximal,
    cond_exp,
    lp_norm,
    maximal,
    tailed_bilinear_maximal,
    tailed_maximal,
    weighted_maximal,
)

F = np.array([1.0, 0.0, 0.0, 0.0])
G = np.array([0.0, 1.0, 0.0, 0.0])


def test_maximal_hand_values(quad):
    assert maximal(quad, F).tolist() == [1.0, 0.5, 0.25, 0.25]
    # takes absolute values of the averages
    assert maximal(quad, -F).tolist() == [1.0, 0.5, 0.25, 0.25]


def test_bilinear_maximal_hand_values(quad):
    assert bilinear_maximal(quad, F, G).tolist() == [0.25, 0.25, 0.0625, 0.0625]
    ones = np.ones(4)
    assert np.array_equal(bilinear_maximal(quad, F, ones), maximal(quad, F))


def test_tailed_operators_hand_values(quad):
    ones = np.ones(4)
    assert tailed_bilinear_maximal(quad, 1, F, ones).tolist() == [1.0, 0.5, 0.0, 0.0]
    assert tailed_maximal(quad, 1, F).tolist() == [1.0, 0.5, 0.0, 0.0]
    # tail from the coarsest level is the full operator
    assert np.array_equal(tailed_bilinear_maximal(quad, 0, F, G), bilinear_maximal(quad, F, G))
    assert np.array_equal(tailed_maximal(quad, 0, F), maximal(quad, F))
    with pytest.raises(ValueError):
        tailed_maximal(quad, 3, F)


def test_weighted_maximal_hand_values(quad):
    sigma = np.array([3.0, 1.0, 1.0, 1.0])
    assert weighted_maximal(quad, F, sigma).tolist() == [1.0, 0.75, 0.5, 0.5]
    # sigma == 1 reduces to the unweighted operator
    assert np.array_equal(weighted_maximal(quad, F, np.ones(4)), maximal(quad, F))
    with pytest.raises(ValueError):
        weighted_maximal(quad, F, np.zeros(4))


def test_lp_norm_hand_values(quad):
    ones = np.ones(4)
    assert lp_norm(quad, F, ones, 2.0) == 0.5
    assert lp_norm(quad, ones, ones, 3.0) == pytest.approx(1.0)
    assert lp_norm(quad, F, ones, 2.0, subset=[0, 1]) == 0.5
    assert lp_norm(quad, F, ones, 2.0, subset=[1, 2, 3]) == 0.0
    # weighted: ||1_{0}||_{L^2(w)} with w = (4,1,1,1)
    w = np.array([4.0, 1.0, 1.0, 1.0])
    assert lp_norm(quad, F, w, 2.0) == 1.0
    with pytest.raises(ValueError):
        lp_norm(quad, F, ones, 0.0)
    with pytest.raises(ValueError):
        lp_norm(quad, F, np.array([-1.0, 1.0, 1.0, 1.0]), 2.0)


@st.composite
def space_and_fn(draw):
    n = draw(st.integers(min_value=2, max_value=8))
    masses = draw(
        st.lists(st.floats(min_value=0.05, max_value=5.0), min_size=n, max_size=n)
    )
    levels = [[list(range(n))], [[i] for i in range(n)]]
    if n >= 4:
        levels.insert(1, [list(range(n // 2)), list(range(n // 2, n))])
    f = draw(
        st.lists(st.floats(min_value=-50, max_value=50), min_size=n, max_size=n)
    )
    return FilteredSpace(masses, levels), np.array(f)


@settings(max_examples=60, deadline=None)
@given(space_and_fn())
def test_squaring_identity_bit_exact(sf):
    """max_i |E_i f|^2 computed two ways gives the identical floats."""
    space, f = sf
    m = maximal(space, f)
    assert np.array_equal(m * m, bilinear_maximal(space, f, f))


@settings(max_examples=60, deadline=None)
@given(space_and_fn(), st.integers(min_value=0, max_value=1000))
def test_maximal_is_sublinear(sf, seed):
    space, f = sf
    g = np.random.default_rng(seed).standard_normal(space.n) * 10
    lhs = maximal(space, f + g)
    rhs = maximal(space, f) + maximal(space, g)
    assert np.all(lhs <= rhs * (1 + 1e-12) + 1e-12)


@settings(max_examples=60, deadline=None)
@given(space_and_fn())
def test_maximal_dominates_each_level(sf):
    space, f = sf
    m = maximal(space, f)
    for level in range(space.n_levels):
        assert np.all(np.abs(cond_exp(space, f, level)) <= m + 1e-12)


def test_tailed_decreasing_in_start_level(quad):
    rng = np.random.default_rng(3)
    f = np.abs(rng.standard_normal(4))
    g = np.abs(rng.standard_normal(4))
    prev = tailed_bilinear_maximal(quad, 0, f, g)
    for i in range(1, quad.n_levels):
        cur = tailed_bilinear_maximal(quad, i, f, g)
        assert np.all(cur <= prev + 1e-15)
        prev = cur


def test_appending_duplicate_finest_level_changes_nothing(quad):
    """Constant extension of the filtration window is invisible to the
    operators — the finite-window maxima already capture every level."""
    levels = [[a.tolist() for a in lv] for lv in quad.atoms]
    extended = FilteredSpace(quad.masses.tolist(), levels + [levels[-1]])
    rng = np.random.default_rng(11)
    f = rng.standard_normal(4)
    g = np.abs(rng.standard_normal(4))
    assert np.array_equal(maximal(quad, f), maximal(extended, f))
    assert np.array_equal(
        bilinear_maximal(quad, f, g), bilinear_maximal(extended, f, g)
    )
    assert np.array_equal(
        tailed_bilinear_maximal(quad, 1, f, g), tailed_bilinear_maximal(extended, 1, f, g)
    )
    sigma = np.abs(rng.standard_normal(4)) + 0.1
    assert np.array_equal(
        weighted_maximal(quad, f, sigma), weighted_maximal(extended, f, sigma)
    )
