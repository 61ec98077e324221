"""Principal sets: a stopping-time decomposition that linearizes the
tailed bilinear maximal operator into a sparse sum.

Given nonnegative h1, h2, a base level i, a level-i measurable seed set
Omega0, and a shell exponent k with

    P0 = { 4^(k-1) < E_i(h1) E_i(h2) <= 4^k }  intersect  Omega0

of positive mass, the forest is grown recursively: a node P carrying
(K1, K2) spawns the first-hit time

    tau_P(x) = inf { j >= K1 : E_j(h1)(x) E_j(h2)(x) > 4^(K2+1) }   on P,

and its children are the nonempty shell pieces

    { 4^(l-1) < E_j(h1) E_j(h2) <= 4^l }  intersect  {tau_P = j}  intersect  P

over finite hit levels j and shell exponents l (automatically j > K1 and
l >= K2 + 2).  The exit set E(P) removes the children from P.  The
resulting family satisfies:

  P.1  the exit sets partition P0;
  P.2  each node is a union of its level-K1 atoms;
  P.3  1_P <= 2 E(1_{E(P)} | F_K1) on P  (so mu(P) <= 2 mu(E(P)));
  P.4  4^(K2-1) < E_K1(h1) E_K1(h2) <= 4^K2 on P;
  P.5  sup_{j>=i} E_j(h1 1_P) E_j(h2 1_P) <= 4^(K2+1) on E(P);

and the sparse bound 16 * sum over nodes of 4^(K2-1) 1_{E(P)} dominates
the tailed bilinear maximal function of (h1 1_P0, h2 1_P0) pointwise on
P0, with the base-level supremum localizing: the tailed operator of the
truncated pair agrees on P0 with the tailed operator of (h1, h2).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .operators import tailed_bilinear_maximal
from .space import FilteredSpace, Fn, as_fn, cond_exp


def shell_index(x: float, base: float = 4.0) -> int:
    """The unique integer l with base^(l-1) < x <= base^l (x > 0).

    Computed by log and then corrected with exact power comparisons, so
    boundary values land on the correct side (base^l is exact in double
    precision for the magnitudes that occur here).
    """
    if not x > 0:
        raise ValueError(f"shell index needs x > 0, got {x!r}")
    l = int(math.floor(math.log(x) / math.log(base)))
    while x > base**l:
        l += 1
    while x <= base ** (l - 1):
        l -= 1
    return l


@dataclass(frozen=True)
class PrincipalSet:
    """One node of the forest: point set, stopping data, exit set, children."""

    points: np.ndarray
    k1: int
    k2: int
    generation: int
    exit_points: np.ndarray
    children: tuple["PrincipalSet", ...]

    def __iter__(self) -> Iterator["PrincipalSet"]:
        yield self
        for child in self.children:
            yield from child


@dataclass(frozen=True)
class PrincipalForest:
    """The full construction for one (i, k, Omega0, h1, h2) quintuple."""

    space: FilteredSpace
    base_level: int
    base_k: int
    omega0: np.ndarray
    h1: Fn
    h2: Fn
    root: PrincipalSet

    def nodes(self) -> list[PrincipalSet]:
        return list(self.root)

    @property
    def n_nodes(self) -> int:
        return sum(1 for _ in self.root)


def _level_products(space: FilteredSpace, h1: Fn, h2: Fn) -> list[Fn]:
    return [cond_exp(space, h1, j) * cond_exp(space, h2, j) for j in range(space.n_levels)]


def build_principal_forest(
    space: FilteredSpace, i: int, k: int, omega0, h1: Fn, h2: Fn
) -> PrincipalForest | None:
    """Grow the forest; returns None when P0 is empty.

    h1, h2 must be nonnegative; omega0 must be level-i measurable.
    """
    space._check_level(i)
    h1 = as_fn(space, h1)
    h2 = as_fn(space, h2)
    if np.any(h1 < 0) or np.any(h2 < 0):
        raise ValueError("h1 and h2 must be nonnegative")
    omega0 = space.as_subset(omega0)
    if not space.is_level_measurable(i, omega0):
        raise ValueError(f"Omega0 must be a union of level-{i} atoms")
    prods = _level_products(space, h1, h2)

    in_omega0 = np.zeros(space.n, dtype=bool)
    in_omega0[omega0] = True
    p0_mask = in_omega0 & (4.0 ** (k - 1) < prods[i]) & (prods[i] <= 4.0**k)
    if not p0_mask.any():
        return None

    def grow(points: np.ndarray, k1: int, k2: int, generation: int) -> PrincipalSet:
        threshold = 4.0 ** (k2 + 1)
        remaining = np.ones(space.n, dtype=bool)  # not yet stopped, within this node
        node_mask = np.zeros(space.n, dtype=bool)
        node_mask[points] = True
        children: list[PrincipalSet] = []
        assert not (prods[k1][points] > threshold).any(), "node violates its own shell bound"
        for j in range(k1 + 1, space.n_levels):
            hit = node_mask & remaining & (prods[j] > threshold)
            if not hit.any():
                continue
            remaining &= ~hit
            shells = sorted({shell_index(float(x)) for x in np.unique(prods[j][hit])})
            for l in shells:
                piece = hit & (4.0 ** (l - 1) < prods[j]) & (prods[j] <= 4.0**l)
                if not piece.any():
                    continue
                assert l >= k2 + 2, "child shell must jump by at least two"
                children.append(grow(np.flatnonzero(piece), j, l, generation + 1))
        child_mask = np.zeros(space.n, dtype=bool)
        for child in children:
            child_mask[child.points] = True
        exit_points = np.flatnonzero(node_mask & ~child_mask)
        return PrincipalSet(
            points=points,
            k1=k1,
            k2=k2,
            generation=generation,
            exit_points=exit_points,
            children=tuple(children),
        )

    root = grow(np.flatnonzero(p0_mask), i, k, 1)
    return PrincipalForest(
        space=space, base_level=i, base_k=k, omega0=omega0, h1=h1, h2=h2, root=root
    )


def occupied_shells(space: FilteredSpace, i: int, omega0, h1: Fn, h2: Fn) -> list[int]:
    """Shell exponents k for which P0 is nonempty."""
    prods = cond_exp(space, as_fn(space, h1), i) * cond_exp(space, as_fn(space, h2), i)
    idx = space.as_subset(omega0)
    vals = prods[idx]
    return sorted({shell_index(float(x)) for x in vals[vals > 0]})


def forest_cover(space: FilteredSpace, i: int, omega0, h1: Fn, h2: Fn) -> list[PrincipalForest]:
    """One forest per occupied shell k; their P0's tile
    Omega0 intersect {E_i(h1) E_i(h2) > 0}."""
    forests = []
    for k in occupied_shells(space, i, omega0, h1, h2):
        forest = build_principal_forest(space, i, k, omega0, h1, h2)
        assert forest is not None, "occupied shell produced an empty P0"
        forests.append(forest)
    return forests


def sparse_bound(forest: PrincipalForest) -> Fn:
    """16 * sum over nodes of 4^(K2-1) 1_{E(P)} — zero off P0."""
    out = np.zeros(forest.space.n)
    for node in forest.root:
        out[node.exit_points] += 16.0 * 4.0 ** (node.k2 - 1)
    return out


@dataclass(frozen=True)
class PropertyReport:
    """Outcome of checking P.1..P.5 plus the doubling bound on one forest.

    Margins are signed slacks (>= 0 means the property holds):
      p3_margin    min over nodes/points of 2 E(1_{E(P)}|F_K1) - 1,
      p5_margin    min over nodes of the relative gap
                   (4^(K2+1) - sup) / 4^(K2+1) on the exit set,
      doubling_margin  min over nodes of 2 mu(E(P)) - mu(P), relative to mu(P).
    """

    n_nodes: int
    p1_ok: bool
    p2_ok: bool
    p3_margin: float
    p4_ok: bool
    p5_margin: float
    doubling_margin: float
    max_doubling_ratio: float

    _CUSHION = 1e-12  # float comparisons of independently-rounded aggregates

    @property
    def p3_ok(self) -> bool:
        return self.p3_margin >= -self._CUSHION

    @property
    def p5_ok(self) -> bool:
        return self.p5_margin >= -self._CUSHION

    @property
    def doubling_ok(self) -> bool:
        return self.doubling_margin >= -self._CUSHION

    @property
    def ok(self) -> bool:
        return self.p1_ok and self.p2_ok and self.p3_ok and self.p4_ok and self.p5_ok and self.doubling_ok


def verify_properties(forest: PrincipalForest) -> PropertyReport:
    """Evaluate P.1–P.5 and the doubling bound exactly on every node."""
    space = forest.space
    prods = _level_products(space, forest.h1, forest.h2)
    root = forest.root

    # P.1: exit sets are pairwise disjoint and tile P0
    counts = np.zeros(space.n, dtype=np.int64)
    for node in root:
        counts[node.exit_points] += 1
    p0_mask = np.zeros(space.n, dtype=bool)
    p0_mask[root.points] = True
    p1_ok = bool(np.all(counts[p0_mask] == 1) and np.all(counts[~p0_mask] == 0))

    p2_ok = True
    p4_ok = True
    p3_margin = np.inf
    p5_margin = np.inf
    doubling_margin = np.inf
    max_ratio = 0.0
    for node in root:
        if not space.is_level_measurable(node.k1, node.points):
            p2_ok = False
        vals = prods[node.k1][node.points]
        if not (np.all(4.0 ** (node.k2 - 1) < vals) and np.all(vals <= 4.0**node.k2)):
            p4_ok = False
        exit_ind = space.indicator(node.exit_points)
        cover = 2.0 * cond_exp(space, exit_ind, node.k1) - 1.0
        p3_margin = min(p3_margin, float(cover[node.points].min()))
        chi = space.indicator(node.points)
        tail_max = tailed_bilinear_maximal(
            space, forest.base_level, forest.h1 * chi, forest.h2 * chi
        )
        cap = 4.0 ** (node.k2 + 1)
        if node.exit_points.size:
            p5_margin = min(p5_margin, (cap - float(tail_max[node.exit_points].max())) / cap)
        mu_p = space.measure(node.points)
        mu_exit = space.measure(node.exit_points)
        doubling_margin = min(doubling_margin, (2.0 * mu_exit - mu_p) / mu_p)
        if mu_exit > 0:
            max_ratio = max(max_ratio, mu_p / mu_exit)
        else:
            max_ratio = np.inf
    return PropertyReport(
        n_nodes=forest.n_nodes,
        p1_ok=p1_ok,
        p2_ok=p2_ok,
        p3_margin=p3_margin,
        p4_ok=p4_ok,
        p5_margin=p5_margin,
        doubling_margin=doubling_margin,
        max_doubling_ratio=max_ratio,
    )


def doubling_check(forest: PrincipalForest) -> tuple[bool, float]:
    """mu(P) <= 2 mu(E(P)) at every node; returns (ok, worst ratio)."""
    worst = 0.0
    for node in forest.root:
        mu_exit = forest.space.measure(node.exit_points)
        if mu_exit == 0:
            return False, np.inf
        worst = max(worst, forest.space.measure(node.points) / mu_exit)
    return worst <= 2.0 * (1.0 + 1e-12), worst


@dataclass(frozen=True)
class DominationReport:
    """Sparse bound vs the tailed bilinear maximal function on P0."""

    bound: Fn
    operator: Fn          # tailed operator of (h1 1_P0, h2 1_P0)
    operator_global: Fn   # tailed operator of (h1, h2), for the localization identity
    min_slack: float      # min over P0 of bound - operator
    tightest_point: int
    localization_gap: float  # max over P0 of |operator - operator_global|

    @property
    def ok(self) -> bool:
        scale = max(float(np.max(self.bound)), 1.0)
        return self.min_slack >= -1e-12 * scale and self.localization_gap <= 1e-12 * scale


def sparse_domination_report(forest: PrincipalForest) -> DominationReport:
    """Check the sparse bound dominates the tailed operator pointwise on P0."""
    space = forest.space
    chi = space.indicator(forest.root.points)
    op_local = tailed_bilinear_maximal(space, forest.base_level, forest.h1 * chi, forest.h2 * chi)
    op_global = tailed_bilinear_maximal(space, forest.base_level, forest.h1, forest.h2)
    bound = sparse_bound(forest)
    p0 = forest.root.points
    slack = bound[p0] - op_local[p0]
    arg = int(np.argmin(slack))
    gap = float(np.max(np.abs(op_local[p0] - op_global[p0])))
    return DominationReport(
        bound=bound,
        operator=op_local,
        operator_global=op_global,
        min_slack=float(slack[arg]),
        tightest_point=int(p0[arg]),
        localization_gap=gap,
    )


# ---- serialization ---------------------------------------------------------


def forest_to_dict(forest: PrincipalForest) -> dict:
    def node_dict(node: PrincipalSet) -> dict:
        return {
            "points": node.points.tolist(),
            "k1": node.k1,
            "k2": node.k2,
            "generation": node.generation,
            "exit": node.exit_points.tolist(),
            "children": [node_dict(c) for c in node.children],
        }

    return {
        "base_level": forest.base_level,
        "base_k": forest.base_k,
        "omega0": forest.omega0.tolist(),
        "h1": forest.h1.tolist(),
        "h2": forest.h2.tolist(),
        "root": node_dict(forest.root),
    }


def forest_from_dict(space: FilteredSpace, data: dict) -> PrincipalForest:
    """Rebuild from the defining data and verify the stored structure matches."""
    forest = build_principal_forest(
        space, data["base_level"], data["base_k"], data["omega0"], data["h1"], data["h2"]
    )
    if forest is None:
        raise ValueError("stored forest has an empty P0 on this space")

    def check(node: PrincipalSet, stored: dict, path: str) -> None:
        if (
            node.points.tolist() != stored["points"]
            or node.k1 != stored["k1"]
            or node.k2 != stored["k2"]
            or node.exit_points.tolist() != stored["exit"]
            or len(node.children) != len(stored["children"])
        ):
            raise ValueError(f"stored forest disagrees with reconstruction at {path}")
        for idx, (child, schild) in enumerate(zip(node.children, stored["children"])):
            check(child, schild, f"{path}.children[{idx}]")

    check(forest.root, data["root"], "root")
    return forest


def dump_forest(forest: PrincipalForest, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(forest_to_dict(forest), fh)
        fh.write("\n")


def load_forest(space: FilteredSpace, path: str) -> PrincipalForest:
    with open(path) as fh:
        return forest_from_dict(space, json.load(fh))
