"""Maximal operators and weighted norms on a filtered space.

All maxima run over the full level window 0..L (or a tail j >= i of it);
on a finite tower the conditional expectations are constant outside the
window, so nothing is lost by truncating.
"""

from __future__ import annotations

import numpy as np

from .space import FilteredSpace, Fn, as_fn, cond_exp, weighted_cond_exp


def maximal(space: FilteredSpace, f: Fn) -> Fn:
    """Doob maximal function Mf = max over levels of |E(f | F_level)|."""
    out = np.abs(cond_exp(space, f, 0))
    for level in range(1, space.n_levels):
        np.maximum(out, np.abs(cond_exp(space, f, level)), out=out)
    return out


def bilinear_maximal(space: FilteredSpace, f: Fn, g: Fn) -> Fn:
    """max over levels of |E(f | F_level)| |E(g | F_level)| (same level for both)."""
    out = np.abs(cond_exp(space, f, 0) * cond_exp(space, g, 0))
    for level in range(1, space.n_levels):
        np.maximum(out, np.abs(cond_exp(space, f, level) * cond_exp(space, g, level)), out=out)
    return out


def tailed_bilinear_maximal(space: FilteredSpace, i: int, f: Fn, g: Fn) -> Fn:
    """Tail version: max over levels j >= i only."""
    space._check_level(i)
    out = np.abs(cond_exp(space, f, i) * cond_exp(space, g, i))
    for level in range(i + 1, space.n_levels):
        np.maximum(out, np.abs(cond_exp(space, f, level) * cond_exp(space, g, level)), out=out)
    return out


def tailed_maximal(space: FilteredSpace, i: int, f: Fn) -> Fn:
    """max over levels j >= i of |E(f | F_j)|."""
    space._check_level(i)
    out = np.abs(cond_exp(space, f, i))
    for level in range(i + 1, space.n_levels):
        np.maximum(out, np.abs(cond_exp(space, f, level)), out=out)
    return out


def weighted_maximal(space: FilteredSpace, f: Fn, sigma: Fn) -> Fn:
    """Doob maximal operator of the measure sigma dmu:

        M^sigma f = max over levels of E^sigma(|f| | F_level).

    Satisfies the Doob bound ||M^sigma f||_{L^p(sigma)} <= p' ||f||_{L^p(sigma)}
    for every p in (1, inf).
    """
    absf = np.abs(as_fn(space, f))
    out = weighted_cond_exp(space, absf, sigma, 0)
    for level in range(1, space.n_levels):
        np.maximum(out, weighted_cond_exp(space, absf, sigma, level), out=out)
    return out


def lp_norm(space: FilteredSpace, f: Fn, weight: Fn, p: float, subset=None) -> float:
    """(integral over the subset of |f|^p weight dmu)^(1/p); weight >= 0, p > 0."""
    if not p > 0:
        raise ValueError(f"p must be positive, got {p!r}")
    f = as_fn(space, f)
    weight = as_fn(space, weight)
    if np.any(weight < 0):
        raise ValueError("weight must be nonnegative")
    dens = np.abs(f) ** p * weight * space.masses
    if subset is None:
        total = float(dens.sum())
    else:
        total = float(dens[space.as_subset(subset)].sum())
    return total ** (1.0 / p)
