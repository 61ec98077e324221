"""Acceptance gate: eight end-to-end criteria over generated ensembles.

Each test prints a single summary line (visible with `pytest -s`) and
asserts zero violations at the stated tolerances.  Ensembles are fully
deterministic: seeds, shapes, and exponent pairs are fixed cycles.
"""

import itertools
import time

import numpy as np
import pytest

from filtermax import (
    FilteredSpace,
    build_principal_forest,
    check_carleson,
    check_properties,
    check_thm11_forward,
    check_thm12,
    check_thm14,
    check_thm15,
    compute_constant,
    count_stopping_times,
    enumerate_stopping_times,
    evaluation_pairs,
    gen_instance,
    occupied_shells,
    rows_to_csv,
    run_ensemble,
    sparse_bound,
    sparse_domination_report,
    verify_properties,
)
from filtermax.cli import main

from conftest import brute_force_stopping_times

SMALL_SHAPES = [(2, 2), (3, 2), (2, 3)]  # enumerable: at most 15 atoms
WIDE_SHAPES = [(2, 2), (3, 2), (4, 2), (2, 3), (3, 3)]  # at most 27 points
P_PAIRS = [(2.0, 2.0), (1.5, 3.0), (4.0, 1.3), (2.5, 2.5), (3.0, 1.5)]


def make_ensemble(count, shapes, models, seed0):
    shape_cycle = itertools.cycle(shapes)
    p_cycle = itertools.cycle(P_PAIRS)
    model_cycle = itertools.cycle(models)
    for t in range(count):
        depth, branching = next(shape_cycle)
        p1, p2 = next(p_cycle)
        yield gen_instance(
            seed0 + t, depth=depth, branching=branching, model=next(model_cycle), p1=p1, p2=p2
        )


def test_criterion_1_product_weight_bound():
    """Theorem bound with the product weight: 500 instances x 5 pairs."""
    start = time.perf_counter()
    violations = 0
    for inst in make_ensemble(500, WIDE_SHAPES, ["product"], seed0=1000):
        row = check_thm11_forward(inst, evaluation_pairs(inst, 5))
        if not row.passed or row.rel_tol != 1e-9:
            violations += 1
    elapsed = time.perf_counter() - start
    assert violations == 0
    assert elapsed < 30.0
    print(f"criterion 1: PASS — 2500 pair evaluations, 0 violations, {elapsed:.1f}s")


def test_criterion_2_testing_constant():
    """[S] attained by the tail-indicator family; every ratio below the
    testing-constant bound; 100 exhaustively enumerable instances."""
    attain_worst = 0.0
    violations = 0
    for inst in make_ensemble(100, SMALL_SHAPES, ["lognormal", "product"], seed0=3000):
        rows = {r.theorem: r for r in check_thm12(inst, evaluation_pairs(inst, 5), mode="exact")}
        attain_worst = max(attain_worst, rows["thm12_attain"].lhs)
        for row in rows.values():
            if not row.passed:
                violations += 1
    assert attain_worst <= 1e-12
    assert violations == 0
    print(
        "criterion 2: PASS — 100 instances, attainment error "
        f"{attain_worst:.2e}, 0 violations"
    )


def test_criterion_3_exp_log_and_mixed_bounds():
    """Log-bump bound on 500 instances; mixed bound with the exact
    weak-infinity constant on 100 enumerable instances; the norm
    substitution identity to 1e-12 throughout."""
    violations = 0
    subst_worst = 0.0
    for inst in make_ensemble(500, WIDE_SHAPES, ["lognormal"], seed0=5000):
        bound, subst = check_thm14(inst, evaluation_pairs(inst, 5))
        subst_worst = max(subst_worst, subst.lhs)
        if not bound.passed or not subst.passed:
            violations += 1
    for inst in make_ensemble(100, SMALL_SHAPES, ["lognormal", "product"], seed0=6000):
        row = check_thm15(inst, evaluation_pairs(inst, 5), mode="exact")
        if not row.passed or row.mode != "exact":
            violations += 1
    assert violations == 0
    assert subst_worst <= 1e-12
    print(
        "criterion 3: PASS — 500 + 100 instances, substitution error "
        f"{subst_worst:.2e}, 0 violations"
    )


def test_criterion_4_principal_sets():
    """P.1-P.5, doubling, and pointwise sparse domination on 500 random
    constructions, plus the worked four-point example."""
    rng = np.random.default_rng(77)
    built = 0
    trials = 0
    while built < 500 and trials < 3000:
        trials += 1
        depth, branching = WIDE_SHAPES[trials % len(WIDE_SHAPES)]
        inst = gen_instance(9000 + trials, depth=depth, branching=branching)
        space = inst.space
        i = int(rng.integers(0, space.n_levels - 1))
        atoms = space.level_atoms(i)
        keep = rng.random(len(atoms)) < 0.75
        if not keep.any():
            keep[int(rng.integers(0, len(atoms)))] = True
        omega0 = np.concatenate([a for a, k in zip(atoms, keep) if k])
        h1 = np.exp(1.3 * rng.standard_normal(space.n)) * (rng.random(space.n) > 0.15)
        h2 = np.exp(1.3 * rng.standard_normal(space.n)) * (rng.random(space.n) > 0.15)
        shells = occupied_shells(space, i, omega0, h1, h2)
        if not shells:
            continue
        k = shells[int(rng.integers(0, len(shells)))]
        forest = build_principal_forest(space, i, k, omega0, h1, h2)
        if forest is None:
            continue
        built += 1
        assert verify_properties(forest).ok, f"trial {trials}"
        assert sparse_domination_report(forest).ok, f"trial {trials}"
    assert built == 500

    quad = FilteredSpace(
        [0.25] * 4, [[[0, 1, 2, 3]], [[0, 1], [2, 3]], [[0], [1], [2], [3]]]
    )
    h = np.array([1.0, 0.0, 0.0, 0.0])
    worked = build_principal_forest(quad, 0, -2, np.arange(4), h, h)
    assert sparse_bound(worked).tolist() == [4.0, 0.25, 0.25, 0.25]
    report = sparse_domination_report(worked)
    assert report.operator.tolist() == [1.0, 0.25, 0.0625, 0.0625]
    assert report.min_slack == 0.0
    print(f"criterion 4: PASS — 500 forests verified in {trials} trials + worked example")


def test_criterion_5_carleson_embedding():
    """Embedding with certified constants, both shell variants, on 200
    instances: 100% pass rate required."""
    passed = 0
    total = 0
    for inst in make_ensemble(200, SMALL_SHAPES, ["lognormal", "product"], seed0=12000):
        for row in check_carleson(inst):
            total += 1
            passed += row.passed
    assert total == 400
    assert passed == total
    print(f"criterion 5: PASS — {passed}/{total} embeddings hold with certified constants")


def test_criterion_6_kernel_properties():
    """Tower rule, conditional Hölder, Jensen(log), the dual-weighted
    maximal bound, the squaring identity, and [RH] >= 1: 240 draws each."""
    worst = {}
    for idx, inst in enumerate(make_ensemble(6, WIDE_SHAPES, ["lognormal"], seed0=15000)):
        for row in check_properties(inst, draws=40, seed=15500 + idx):
            assert row.passed, row.theorem
            if row.theorem == "prop_rh_ge1":
                continue
            worst[row.theorem] = max(worst.get(row.theorem, 0.0), row.lhs)
    assert set(worst) == {
        "prop_tower",
        "prop_cond_holder",
        "prop_jensen_log",
        "prop_doob",
        "prop_square",
    }
    assert all(v <= 1e-9 for v in worst.values())
    assert worst["prop_square"] <= 1e-12
    print(f"criterion 6: PASS — 240 draws per property, worst error {max(worst.values()):.2e}")


def test_criterion_7_oracle_equivalence():
    """The recursive enumerator equals filter-all-assignments on every
    catalogued space with <= 12 atoms; heuristic constants never exceed
    exact ones on co-run instances."""
    catalog = [
        FilteredSpace([1.0], [[[0]]]),
        FilteredSpace([0.5, 0.5], [[[0, 1]], [[0], [1]]]),
        FilteredSpace([1.0, 2.0], [[[0, 1]], [[0, 1]], [[0], [1]]]),
        FilteredSpace([0.25] * 4, [[[0, 1, 2, 3]], [[0, 1], [2, 3]], [[0], [1], [2], [3]]]),
        FilteredSpace(
            [0.1, 0.2, 0.3, 0.15, 0.15, 0.1],
            [[[0, 1, 2, 3, 4, 5]], [[0, 1], [2, 3, 4], [5]], [[0], [1], [2], [3], [4], [5]]],
        ),
        FilteredSpace(
            [1.0] * 5,
            [[[0, 1, 2, 3, 4]], [[0, 1], [2, 3, 4]], [[0], [1], [2, 3, 4]], [[0], [1], [2], [3, 4]]],
        ),
        FilteredSpace([1.0] * 8, [[[0, 1, 2, 3, 4, 5, 6, 7]], [[0, 1], [2, 3], [4, 5], [6, 7]]]),
        FilteredSpace([2.0, 1.0, 1.0], [[[0, 1, 2]], [[0], [1, 2]], [[0], [1], [2]]]),
    ]
    compared = 0
    for space in catalog:
        assert space.atom_count() <= 12
        for i in range(space.n_levels):
            got = set(enumerate_stopping_times(space, i))
            want = brute_force_stopping_times(space, i)
            assert got == want, f"space {space}, origin {i}"
            assert len(got) == count_stopping_times(space, i)
            compared += len(got)

    overshoots = 0
    for inst in make_ensemble(30, SMALL_SHAPES, ["lognormal", "product"], seed0=17000):
        for name in ("rh", "s", "winf"):
            exact = compute_constant(
                name, inst.space, inst.v, inst.omega1, inst.omega2, inst.exps, mode="exact"
            )
            heur = compute_constant(
                name, inst.space, inst.v, inst.omega1, inst.omega2, inst.exps, mode="heuristic"
            )
            if heur.value > exact.value * (1 + 1e-12):
                overshoots += 1
    assert overshoots == 0
    print(
        f"criterion 7: PASS — {compared} stopping times matched set-for-set; "
        "90 heuristic/exact co-runs without overshoot"
    )


def test_criterion_8_cli_determinism(tmp_path):
    """`verify --ensemble` twice with identical flags: byte-identical CSV
    regardless of --jobs."""
    payloads = []
    for name, jobs in (("r1.csv", "1"), ("r2.csv", "1"), ("r3.csv", "2"), ("r4.csv", "4")):
        out = tmp_path / name
        code = main(
            [
                "verify",
                "--ensemble", "2100", "6",
                "--suite", "all",
                "--depth", "2",
                "--branching", "2",
                "--out", str(out),
                "--jobs", jobs,
            ]
        )
        assert code == 0
        payloads.append(out.read_bytes())
    assert len(set(payloads)) == 1
    rows = run_ensemble(2100, 6, suite="all", depth=2, branching=2)
    assert rows_to_csv(rows).encode() == payloads[0]
    print(f"criterion 8: PASS — 4 CLI runs byte-identical ({len(payloads[0])} bytes)")
