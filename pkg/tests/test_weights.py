"""Weight characteristics against hand-computed values; exact vs heuristic
modes; witness records."""

import json
import math

import numpy as np
import pytest

from filtermax import (
    Exponents,
    a_p_constant,
    b_p_constant,
    compute_constant,
    rh_constant,
    s_p_constant,
    sigma_from_omega,
    w_infty_constant,
)

P22 = Exponents(2.0, 2.0)


def ones(space):
    return np.ones(space.n)


def test_sigma_from_omega_duality():
    omega = np.array([0.25, 1.0, 9.0])
    assert sigma_from_omega(omega, 2.0).tolist() == [4.0, 1.0, 1.0 / 9.0]
    # applying the dual map with the conjugate exponent undoes it
    for p in (1.5, 2.0, 3.0):
        pp = p / (p - 1.0)
        back = sigma_from_omega(sigma_from_omega(omega, p), pp)
        assert np.allclose(back, omega, rtol=1e-12)
    with pytest.raises(ValueError):
        sigma_from_omega(omega, 1.0)
    with pytest.raises(ValueError):
        sigma_from_omega(np.array([1.0, 0.0]), 2.0)


def test_a_constant_trivial_and_hand(quad):
    one = ones(quad)
    c = a_p_constant(quad, one, one, one, P22)
    assert c.value == 1.0
    assert c.mode == "exact"

    v = np.array([2.0, 1.0, 1.0, 1.0])
    c = a_p_constant(quad, v, one, one, P22)
    # with unit omegas the characteristic is max over atoms of E(v)
    assert c.value == 2.0
    assert c.witness == {"level": 2, "atom": [0]}


def test_b_constant_trivial_and_hand(quad):
    one = ones(quad)
    assert b_p_constant(quad, one, one, one, P22).value == 1.0
    v = np.array([2.0, 1.0, 1.0, 1.0])
    # unit omegas make the geometric correction 1, so again max E(v)
    assert b_p_constant(quad, v, one, one, P22).value == 2.0


def test_b_exceeds_a_on_spread_weights(quad):
    """E(sigma)^p >= E(sigma)^(p/p') * geometric correction: the log-bump
    constant dominates the base characteristic (here p = 1, p/p' halves
    the exponent while the correction is a geometric mean <= E)."""
    rng = np.random.default_rng(5)
    v = np.exp(rng.standard_normal(4))
    w1 = np.exp(rng.standard_normal(4))
    w2 = np.exp(rng.standard_normal(4))
    a = a_p_constant(quad, v, w1, w2, P22).value
    b = b_p_constant(quad, v, w1, w2, P22).value
    assert b >= a * (1 - 1e-12)


def test_rh_hand_value(pair):
    omega1 = np.array([0.25, 1.0])  # sigma1 = (4, 1)
    omega2 = np.array([1.0, 0.25])  # sigma2 = (1, 4)
    c = rh_constant(pair, omega1, omega2, P22, mode="exact")
    # full tail: sqrt(2.5) * sqrt(2.5) / int sqrt(sigma1 sigma2) = 2.5 / 2
    assert c.value == pytest.approx(1.25, rel=1e-14)
    assert c.mode == "exact"
    assert c.witness["tail"] == [0, 1]
    assert c.value >= 1.0


def test_rh_is_one_for_flat_weights(quad):
    one = ones(quad)
    c = rh_constant(quad, one, one, P22, mode="exact")
    assert c.value == pytest.approx(1.0, rel=1e-14)


def test_s_constant_trivial(quad):
    one = ones(quad)
    c = s_p_constant(quad, one, one, one, P22, mode="exact")
    assert c.value == pytest.approx(1.0, rel=1e-12)
    assert c.mode == "exact"


def test_w_infty_hand_value(pair):
    omega1 = np.array([0.25, 1.0])
    omega2 = np.array([1.0, 0.25])
    c = w_infty_constant(pair, omega1, omega2, P22, mode="exact")
    # attained on the full tail: int sqrt(M sigma1 * M sigma2) / int sqrt(sigma1 sigma2)
    # = sqrt(4 * 2.5)/2 restricted-averaged = sqrt(10)/2
    assert c.value == pytest.approx(math.sqrt(10.0) / 2.0, rel=1e-12)
    assert c.value >= 1.0


def test_heuristic_mode_is_lower_bound(mixed6):
    rng = np.random.default_rng(17)
    exps = Exponents(2.5, 1.7)
    for trial in range(4):
        w1 = np.exp(rng.standard_normal(6))
        w2 = np.exp(rng.standard_normal(6))
        v = np.exp(rng.standard_normal(6))
        for name in ("rh", "s", "winf"):
            exact = compute_constant(name, mixed6, v, w1, w2, exps, mode="exact")
            heur = compute_constant(name, mixed6, v, w1, w2, exps, mode="heuristic")
            assert heur.mode == "lower-bound"
            assert exact.mode == "exact"
            assert heur.value <= exact.value * (1 + 1e-12)


def test_witnesses_are_json_clean_and_locate_the_value(quad):
    rng = np.random.default_rng(23)
    v = np.exp(rng.standard_normal(4))
    w1 = np.exp(rng.standard_normal(4))
    w2 = np.exp(rng.standard_normal(4))
    for name in ("a", "b", "rh", "s", "winf"):
        for mode in ("exact", "heuristic"):
            c = compute_constant(name, quad, v, w1, w2, P22, mode=mode)
            text = json.dumps(c.witness)
            assert "Infinity" not in text and "NaN" not in text
            assert float(c) == c.value
    # tail witnesses carry the stopping time itself
    c = rh_constant(quad, w1, w2, P22, mode="exact")
    assert set(c.witness) >= {"origin", "tail", "tau"}
    assert all(lv is None or isinstance(lv, int) for lv in c.witness["tau"])


def test_compute_constant_dispatch_matches_direct(quad):
    rng = np.random.default_rng(31)
    v = np.exp(rng.standard_normal(4))
    w1 = np.exp(rng.standard_normal(4))
    w2 = np.exp(rng.standard_normal(4))
    assert compute_constant("a", quad, v, w1, w2, P22).value == a_p_constant(
        quad, v, w1, w2, P22
    ).value
    assert compute_constant("RH", quad, v, w1, w2, P22).value == rh_constant(
        quad, w1, w2, P22
    ).value
    with pytest.raises(ValueError, match="unknown constant"):
        compute_constant("zzz", quad, v, w1, w2, P22)


def test_weights_must_be_positive(quad):
    one = ones(quad)
    bad = np.array([1.0, 0.0, 1.0, 1.0])
    with pytest.raises(ValueError):
        a_p_constant(quad, bad, one, one, P22)
    with pytest.raises(ValueError):
        rh_constant(quad, bad, one, P22)
    with pytest.raises(ValueError):
        s_p_constant(quad, one, one, bad, P22)


def test_rh_every_tail_ratio_at_least_one(mixed6):
    """The conditional Hölder inequality forces every tail ratio >= 1, so
    the reported maximum is >= 1 for arbitrary positive weights."""
    rng = np.random.default_rng(41)
    for _ in range(5):
        w1 = np.exp(1.5 * rng.standard_normal(6))
        w2 = np.exp(1.5 * rng.standard_normal(6))
        exps = Exponents(float(rng.uniform(1.2, 4.0)), float(rng.uniform(1.2, 4.0)))
        c = rh_constant(mixed6, w1, w2, exps, mode="exact")
        assert c.value >= 1.0 - 1e-12
