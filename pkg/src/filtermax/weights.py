"""Bilinear Muckenhoupt-type weight characteristics.

Five constants for a triple (v, omega1, omega2) of strictly positive
weights and a Hölder pair (p1, p2):

* the joint A-characteristic (level/atom maximum),
* the reverse-Hölder constant [RH] (supremum over stopping-time tails),
* the bilinear testing/sparse constant [S] (supremum over tails),
* the exp-log (Hruščëv-type) constant [B] (level/atom maximum),
* the two-weight M-product constant [W∞] (supremum over tails).

The dual weights sigma_s = omega_s^{-1/(p_s - 1)} are derived internally.
Tail suprema run over T_0 — on a finite tower the T_i tail families are
nested decreasingly in i, so the i = 0 supremum is the binding one.
Exact mode enumerates every achievable tail (budgeted); heuristic mode
searches candidate stopping times and yields a certified lower bound.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .operators import bilinear_maximal, maximal
from .space import Exponents, FilteredSpace, Fn, as_fn, cond_exp
from .stopping import (
    enumerate_tail_masks,
    heuristic_sup_over_tau,
    mask_points,
    stopping_time_from_tail,
)

EXACT = "exact"
HEURISTIC = "heuristic"


@dataclass(frozen=True)
class WeightConstant:
    """A named characteristic with the mode it was computed in and a witness.

    mode is "exact" (true maximum) or "lower-bound" (heuristic search).
    The witness locates where the value is attained: {"level", "atom"} for
    atom maxima, {"origin", "tail"} for tail suprema.
    """

    name: str
    value: float
    mode: str
    witness: dict

    def __float__(self) -> float:
        return self.value


def _positive(space: FilteredSpace, w, name: str) -> Fn:
    arr = as_fn(space, w)
    if np.any(arr <= 0):
        raise ValueError(f"{name} must be strictly positive")
    return arr


def sigma_from_omega(omega: Fn, p_s: float) -> Fn:
    """Dual weight sigma = omega^(-1/(p_s - 1)); involutive under p_s -> p_s'."""
    if not p_s > 1:
        raise ValueError(f"exponent must exceed 1, got {p_s!r}")
    omega = np.asarray(omega, dtype=float)
    if np.any(omega <= 0):
        raise ValueError("omega must be strictly positive")
    return omega ** (-1.0 / (p_s - 1.0))


def _tau_witness(tau) -> dict:
    # stop levels as ints with None for "never" keeps the record JSON-clean
    levels = [int(x) if np.isfinite(x) else None for x in tau.levels]
    return {"origin": tau.origin, "tail": tau.tail_set().tolist(), "tau": levels}


def _atom_max(space: FilteredSpace, density: Callable[[int], Fn], name: str) -> WeightConstant:
    best_val = -np.inf
    best: tuple[int, int] = (0, 0)
    for level in range(space.n_levels):
        vals = density(level)
        for a_idx, atom in enumerate(space.atoms[level]):
            v = float(vals[atom[0]])
            if v > best_val:
                best_val = v
                best = (level, a_idx)
    level, a_idx = best
    witness = {"level": level, "atom": space.atoms[level][a_idx].tolist()}
    return WeightConstant(name, best_val, EXACT, witness)


def a_p_constant(space: FilteredSpace, v: Fn, omega1: Fn, omega2: Fn, exps: Exponents) -> WeightConstant:
    """max over levels and atoms of E(v) E(sigma1)^(p/p1') E(sigma2)^(p/p2')."""
    v = _positive(space, v, "v")
    sigma1 = sigma_from_omega(_positive(space, omega1, "omega1"), exps.p1)
    sigma2 = sigma_from_omega(_positive(space, omega2, "omega2"), exps.p2)
    p = exps.p
    e1, e2 = p / exps.p1_prime, p / exps.p2_prime

    def density(level: int) -> Fn:
        return (
            cond_exp(space, v, level)
            * cond_exp(space, sigma1, level) ** e1
            * cond_exp(space, sigma2, level) ** e2
        )

    return _atom_max(space, density, "A")


def b_p_constant(space: FilteredSpace, v: Fn, omega1: Fn, omega2: Fn, exps: Exponents) -> WeightConstant:
    """max over levels and atoms of
    E(v) E(sigma1)^p E(sigma2)^p / exp E(log(sigma1^(p/p1) sigma2^(p/p2)))."""
    v = _positive(space, v, "v")
    sigma1 = sigma_from_omega(_positive(space, omega1, "omega1"), exps.p1)
    sigma2 = sigma_from_omega(_positive(space, omega2, "omega2"), exps.p2)
    p = exps.p
    log_mix = np.log(sigma1 ** (p / exps.p1) * sigma2 ** (p / exps.p2))

    def density(level: int) -> Fn:
        return (
            cond_exp(space, v, level)
            * cond_exp(space, sigma1, level) ** p
            * cond_exp(space, sigma2, level) ** p
            / np.exp(cond_exp(space, log_mix, level))
        )

    return _atom_max(space, density, "B")


def _sup_over_tails(
    space: FilteredSpace,
    name: str,
    tail_objective: Callable[[np.ndarray], float],
    guide: tuple[Fn, Fn],
    mode: str,
    budget: int | None,
) -> WeightConstant:
    """Maximize an objective of the tail point set over T_0 tails."""
    if mode == EXACT:
        best_val = -np.inf
        best_pts: np.ndarray | None = None
        for mask in enumerate_tail_masks(space, 0, budget=budget):
            if mask == 0:
                continue
            pts = mask_points(space, mask)
            val = tail_objective(pts)
            if val > best_val:
                best_val = val
                best_pts = pts
        assert best_pts is not None
        tau = stopping_time_from_tail(space, 0, best_pts)
        return WeightConstant(name, best_val, EXACT, _tau_witness(tau))
    if mode == HEURISTIC:
        value, tau = heuristic_sup_over_tau(
            space, 0, lambda t: tail_objective(t.tail_set()), guide=guide
        )
        return WeightConstant(name, value, "lower-bound", _tau_witness(tau))
    raise ValueError(f"mode must be 'exact' or 'heuristic', got {mode!r}")


def rh_constant(
    space: FilteredSpace,
    omega1: Fn,
    omega2: Fn,
    exps: Exponents,
    mode: str = EXACT,
    budget: int | None = None,
) -> WeightConstant:
    """Reverse-Hölder constant of (sigma1, sigma2):

        sup over tails E of  sigma1(E)^(p/p1) sigma2(E)^(p/p2)
                             / integral over E of sigma1^(p/p1) sigma2^(p/p2).

    Always >= 1 (Hölder with exponents p1/p, p2/p gives the reverse bound),
    with equality when sigma1 is proportional to sigma2.
    """
    sigma1 = sigma_from_omega(_positive(space, omega1, "omega1"), exps.p1)
    sigma2 = sigma_from_omega(_positive(space, omega2, "omega2"), exps.p2)
    a1, a2 = exps.p / exps.p1, exps.p / exps.p2
    w1 = sigma1 * space.masses
    w2 = sigma2 * space.masses
    mix = sigma1**a1 * sigma2**a2 * space.masses

    def objective(pts: np.ndarray) -> float:
        return float(w1[pts].sum() ** a1 * w2[pts].sum() ** a2 / mix[pts].sum())

    return _sup_over_tails(space, "RH", objective, (sigma1, sigma2), mode, budget)


def s_p_constant(
    space: FilteredSpace,
    v: Fn,
    omega1: Fn,
    omega2: Fn,
    exps: Exponents,
    mode: str = EXACT,
    budget: int | None = None,
) -> WeightConstant:
    """Testing constant over indicator inputs localized to stopping tails:

        sup over tails E of
        ( integral over E of M(sigma1 1_E, sigma2 1_E)^p v dmu
          / [ sigma1(E)^(p/p1) sigma2(E)^(p/p2) ] )^(1/p).
    """
    v = _positive(space, v, "v")
    sigma1 = sigma_from_omega(_positive(space, omega1, "omega1"), exps.p1)
    sigma2 = sigma_from_omega(_positive(space, omega2, "omega2"), exps.p2)
    p = exps.p
    a1, a2 = p / exps.p1, p / exps.p2
    w1 = sigma1 * space.masses
    w2 = sigma2 * space.masses
    v_mass = v * space.masses

    def objective(pts: np.ndarray) -> float:
        chi = np.zeros(space.n)
        chi[pts] = 1.0
        m = bilinear_maximal(space, sigma1 * chi, sigma2 * chi)
        num = float((m[pts] ** p * v_mass[pts]).sum())
        den = w1[pts].sum() ** a1 * w2[pts].sum() ** a2
        return float((num / den) ** (1.0 / p))

    return _sup_over_tails(space, "S", objective, (sigma1, sigma2), mode, budget)


def w_infty_constant(
    space: FilteredSpace,
    omega1: Fn,
    omega2: Fn,
    exps: Exponents,
    mode: str = EXACT,
    budget: int | None = None,
) -> WeightConstant:
    """Two-weight maximal-product constant:

        sup over tails E of  integral over E of M(sigma1 1_E)^(p/p1) M(sigma2 1_E)^(p/p2) dmu
                             / integral over E of sigma1^(p/p1) sigma2^(p/p2) dmu.

    At least 1 whenever the finest level separates points.
    """
    sigma1 = sigma_from_omega(_positive(space, omega1, "omega1"), exps.p1)
    sigma2 = sigma_from_omega(_positive(space, omega2, "omega2"), exps.p2)
    a1, a2 = exps.p / exps.p1, exps.p / exps.p2
    mix = sigma1**a1 * sigma2**a2 * space.masses

    def objective(pts: np.ndarray) -> float:
        chi = np.zeros(space.n)
        chi[pts] = 1.0
        m1 = maximal(space, sigma1 * chi)
        m2 = maximal(space, sigma2 * chi)
        num = float((m1[pts] ** a1 * m2[pts] ** a2 * space.masses[pts]).sum())
        return num / float(mix[pts].sum())

    return _sup_over_tails(space, "Winf", objective, (sigma1, sigma2), mode, budget)


ALL_CONSTANTS = ("a", "rh", "s", "b", "winf")


def compute_constant(
    name: str,
    space: FilteredSpace,
    v: Fn,
    omega1: Fn,
    omega2: Fn,
    exps: Exponents,
    mode: str = EXACT,
    budget: int | None = None,
) -> WeightConstant:
    """Dispatch by short name ("a", "rh", "s", "b", "winf")."""
    key = name.lower()
    if key == "a":
        return a_p_constant(space, v, omega1, omega2, exps)
    if key == "b":
        return b_p_constant(space, v, omega1, omega2, exps)
    if key == "rh":
        return rh_constant(space, omega1, omega2, exps, mode=mode, budget=budget)
    if key == "s":
        return s_p_constant(space, v, omega1, omega2, exps, mode=mode, budget=budget)
    if key == "winf":
        return w_infty_constant(space, omega1, omega2, exps, mode=mode, budget=budget)
    raise ValueError(f"unknown constant {name!r}; expected one of {ALL_CONSTANTS}")
