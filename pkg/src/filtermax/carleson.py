"""Carleson embedding over a principal forest.

The level sets of a forest slice each node P by the dyadic size of the
weighted product at the node's stopping level:

    A_P^l = B(P) intersect { 2^l < E_K1(sigma1) E_K1(sigma2) <= 2^(l+1) },

where the base set B(P) is either the node itself ("node" variant) or its
exit set ("exit" variant); both carry the same embedding theorem.  A
nonnegative coefficient a_Q is attached to each nonempty A_P^l.

The Carleson condition with constant A demands, for every stopping time
tau in T_i (i = the forest's base level):

    sum of a_Q over Q contained in {tau < inf}
        <= A * integral over {tau < inf} of sigma1^(p/p1) sigma2^(p/p2) dmu.

`certify_carleson_constant` computes the smallest such A exhaustively
(budgeted tail enumeration) — the embedding verifier refuses to run with
an uncertified constant unless one is supplied explicitly.  Under the
condition, for f_s = h_s with finite L^(p_s)(omega_s) norms,

    sum over Q of essinf_Q( E^sigma1(h1 sigma1^-1 | F_K1)
                            E^sigma2(h2 sigma2^-1 | F_K1) )^p a_Q
        <= A (p1' p2')^p ||h1||_{L^p1(omega1)}^p/p1... (norms over P0)

with the product of the two restricted norms on the right; the weighted
Doob inequality supplies the (p1' p2')^p factor.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .principal import PrincipalForest
from .space import Exponents, FilteredSpace, Fn, as_fn, cond_exp, weighted_cond_exp
from .stopping import StoppingTime, enumerate_tail_masks, finest_mask, mask_points, stopping_time_from_tail
from .weights import sigma_from_omega

VARIANTS = ("node", "exit")


@dataclass(frozen=True)
class CarlesonEntry:
    node_index: int  # preorder index into forest.nodes()
    k1: int
    level_exp: int   # l: the dyadic shell (2^l, 2^(l+1)]
    points: np.ndarray
    coefficient: float


@dataclass(frozen=True)
class CarlesonFamily:
    variant: str
    base_level: int
    entries: tuple[CarlesonEntry, ...]
    carleson_A: float | None = None
    certified: bool = False

    def coefficients(self) -> np.ndarray:
        return np.array([e.coefficient for e in self.entries])

    def with_coefficients(self, coeffs: Sequence[float]) -> "CarlesonFamily":
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (len(self.entries),):
            raise ValueError(f"need {len(self.entries)} coefficients")
        if np.any(coeffs < 0) or not np.all(np.isfinite(coeffs)):
            raise ValueError("coefficients must be finite and nonnegative")
        entries = tuple(replace(e, coefficient=float(c)) for e, c in zip(self.entries, coeffs))
        return CarlesonFamily(self.variant, self.base_level, entries, None, False)

    def with_constant(self, value: float, certified: bool) -> "CarlesonFamily":
        return CarlesonFamily(self.variant, self.base_level, self.entries, float(value), certified)


def build_level_sets(
    forest: PrincipalForest, sigma1: Fn, sigma2: Fn, variant: str = "node"
) -> CarlesonFamily:
    """Slice each node into dyadic shells of E_K1(sigma1) E_K1(sigma2).

    Only nonempty shells are materialized; coefficients start at zero.
    """
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")
    space = forest.space
    sigma1 = as_fn(space, sigma1)
    sigma2 = as_fn(space, sigma2)
    if np.any(sigma1 <= 0) or np.any(sigma2 <= 0):
        raise ValueError("sigma weights must be strictly positive")
    entries: list[CarlesonEntry] = []
    cache: dict[int, Fn] = {}
    for node_index, node in enumerate(forest.nodes()):
        base = node.points if variant == "node" else node.exit_points
        if base.size == 0:
            continue
        if node.k1 not in cache:
            cache[node.k1] = cond_exp(space, sigma1, node.k1) * cond_exp(space, sigma2, node.k1)
        w = cache[node.k1][base]
        # 2^l < w <= 2^(l+1): exponents via floor(log2) corrected exactly
        exps = np.floor(np.log2(w)).astype(int)
        for pos, (x, l) in enumerate(zip(w, exps)):
            while x > 2.0 ** (l + 1):
                l += 1
            while x <= 2.0**l:
                l -= 1
            exps[pos] = l
        for l in sorted(set(int(e) for e in exps)):
            pts = base[exps == l]
            entries.append(CarlesonEntry(node_index, node.k1, l, pts, 0.0))
    return CarlesonFamily(variant, forest.base_level, tuple(entries))


def proof_coefficients(
    space: FilteredSpace, family: CarlesonFamily, sigma1: Fn, sigma2: Fn, v: Fn, exps: Exponents
) -> CarlesonFamily:
    """a_Q = integral over Q of (E_K1(sigma1) E_K1(sigma2))^p v dmu."""
    sigma1 = as_fn(space, sigma1)
    sigma2 = as_fn(space, sigma2)
    v = as_fn(space, v)
    cache: dict[int, Fn] = {}
    coeffs = []
    for entry in family.entries:
        if entry.k1 not in cache:
            cache[entry.k1] = cond_exp(space, sigma1, entry.k1) * cond_exp(space, sigma2, entry.k1)
        w = cache[entry.k1][entry.points]
        coeffs.append(float((w**exps.p * v[entry.points] * space.masses[entry.points]).sum()))
    return family.with_coefficients(coeffs)


def _mix_density(space: FilteredSpace, sigma1: Fn, sigma2: Fn, exps: Exponents) -> Fn:
    return sigma1 ** (exps.p / exps.p1) * sigma2 ** (exps.p / exps.p2) * space.masses


def certify_carleson_constant(
    space: FilteredSpace,
    family: CarlesonFamily,
    sigma1: Fn,
    sigma2: Fn,
    exps: Exponents,
    budget: int | None = None,
) -> tuple[CarlesonFamily, StoppingTime]:
    """Smallest A valid for every tau in T_i, by exhaustive tail enumeration.

    Returns the certified family and the worst-case stopping time.
    """
    sigma1 = as_fn(space, sigma1)
    sigma2 = as_fn(space, sigma2)
    mix = _mix_density(space, sigma1, sigma2, exps)
    entry_masks = [finest_mask(space, e.points) for e in family.entries]
    coeffs = family.coefficients()
    # per-finest-atom mix integrals for fast tail sums
    atom_mix = np.array(
        [mix[atom].sum() for atom in space.atoms[space.last_level]]
    )
    best = 0.0
    best_mask: int | None = None
    for mask in enumerate_tail_masks(space, family.base_level, budget=budget):
        if mask == 0:
            continue
        num = sum(
            c for c, em in zip(coeffs, entry_masks) if em & mask == em
        )
        den = sum(atom_mix[a] for a in range(atom_mix.size) if mask >> a & 1)
        ratio = num / den
        if ratio > best or best_mask is None:
            best = ratio
            best_mask = mask
    assert best_mask is not None
    tau = stopping_time_from_tail(space, family.base_level, mask_points(space, best_mask))
    return family.with_constant(best, certified=True), tau


@dataclass(frozen=True)
class CarlesonCheck:
    lhs: float
    rhs: float
    constant: float

    @property
    def ok(self) -> bool:
        return self.lhs <= self.rhs * (1.0 + 1e-9) + 1e-12


def check_carleson_condition(
    space: FilteredSpace,
    family: CarlesonFamily,
    sigma1: Fn,
    sigma2: Fn,
    exps: Exponents,
    tau: StoppingTime,
) -> CarlesonCheck:
    """Evaluate the condition for one stopping time with the family's A."""
    if family.carleson_A is None:
        raise ValueError("A not certified: certify_carleson_constant or with_constant first")
    if tau.origin > family.base_level:
        raise ValueError(
            f"tau must come from T_{family.base_level} or coarser, got origin {tau.origin}"
        )
    sigma1 = as_fn(space, sigma1)
    sigma2 = as_fn(space, sigma2)
    tail = tau.tail_mask()
    inside = np.zeros(space.n, dtype=bool)
    inside[space.as_subset(np.flatnonzero(tail))] = True
    lhs = 0.0
    for entry in family.entries:
        if inside[entry.points].all():
            lhs += entry.coefficient
    mix = _mix_density(space, sigma1, sigma2, exps)
    rhs = family.carleson_A * float(mix[tail].sum())
    return CarlesonCheck(lhs=lhs, rhs=rhs, constant=family.carleson_A)


@dataclass(frozen=True)
class EmbeddingReport:
    lhs: float
    rhs: float
    carleson_A: float
    certified: bool
    variant: str

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    @property
    def ok(self) -> bool:
        return self.lhs <= self.rhs * (1.0 + 1e-9) + 1e-12


def verify_embedding(
    forest: PrincipalForest,
    family: CarlesonFamily,
    h1: Fn,
    h2: Fn,
    omega1: Fn,
    omega2: Fn,
    exps: Exponents,
) -> EmbeddingReport:
    """Check the embedding conclusion for the given data.

    lhs: sum over entries of essinf_Q(E^s1(h1/sigma1|F_K1) E^s2(h2/sigma2|F_K1))^p a_Q.
    rhs: A (p1' p2')^p (int_P0 h1^p1 omega1)^(p/p1) (int_P0 h2^p2 omega2)^(p/p2).

    The sigma_s here are derived from the omega_s; the family must have
    been built and certified against those same dual weights.  Requires a
    certified (or explicitly supplied) Carleson constant.
    """
    if family.carleson_A is None:
        raise ValueError("A not certified: certify_carleson_constant or with_constant first")
    space = forest.space
    h1 = as_fn(space, h1)
    h2 = as_fn(space, h2)
    omega1 = as_fn(space, omega1)
    omega2 = as_fn(space, omega2)
    sigma1 = sigma_from_omega(omega1, exps.p1)
    sigma2 = sigma_from_omega(omega2, exps.p2)
    cache: dict[int, Fn] = {}
    lhs = 0.0
    for entry in family.entries:
        if entry.k1 not in cache:
            cache[entry.k1] = weighted_cond_exp(space, h1 / sigma1, sigma1, entry.k1) * weighted_cond_exp(
                space, h2 / sigma2, sigma2, entry.k1
            )
        essinf = float(cache[entry.k1][entry.points].min())
        lhs += essinf**exps.p * entry.coefficient
    p0 = forest.root.points
    n1 = float((h1[p0] ** exps.p1 * omega1[p0] * space.masses[p0]).sum())
    n2 = float((h2[p0] ** exps.p2 * omega2[p0] * space.masses[p0]).sum())
    rhs = (
        family.carleson_A
        * (exps.p1_prime * exps.p2_prime) ** exps.p
        * n1 ** (exps.p / exps.p1)
        * n2 ** (exps.p / exps.p2)
    )
    return EmbeddingReport(
        lhs=lhs, rhs=rhs, carleson_A=family.carleson_A, certified=family.certified, variant=family.variant
    )
