"""Acceptance suite: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -s`` to see the summary lines.
"""

import numpy as np
import pytest

from polyverify.arrangement import build_arrangement, region_count_bound, traverse_regions
from polyverify.bench import loglog_slope, run_bench
from polyverify.instances import random_functionals, random_problem, random_shallow, random_tll
from polyverify.network import build_max_network, build_min_network, eval_network, tll_eval_lattice, tll_to_relu
from polyverify.oracle import brute_force_regions, exhaustive_verify
from polyverify.tolerances import current
from polyverify.verifier import (
    VerificationProblem,
    active_affine_shallow,
    active_affine_tll,
    evaluate,
    switching_functionals_shallow,
    switching_functionals_tll,
    verify,
)

from conftest import interval


def report(number, title, ok, detail):
    print(f"\n[{'PASS' if ok else 'FAIL'}] {number}. {title}: {detail}")
    assert ok, detail


def test_1_enumeration_matches_brute_force():
    mismatches = []
    for seed in range(100):
        rng = np.random.default_rng([1, seed])
        n, N = int(rng.integers(1, 4)), int(rng.integers(1, 9))
        a = build_arrangement(random_functionals(rng, N, n), seed=seed)
        seen = set()
        traverse_regions(a, lambda r, g: seen.add(r))
        if seen != set(brute_force_regions(a)):
            mismatches.append(seed)
    report(1, "traversal = brute force on 100 arrangements", not mismatches, f"mismatching seeds {mismatches}")


def test_2_region_bound():
    over, tight, trials = [], 0, 0
    for seed in range(100):
        rng = np.random.default_rng([2, seed])
        n, N = int(rng.integers(1, 4)), int(rng.integers(1, 9))
        a = build_arrangement(random_functionals(rng, N, n), seed=seed)
        if traverse_regions(a) > region_count_bound(len(a), n):
            over.append(seed)
    for seed in range(100):
        rng = np.random.default_rng([20, seed])
        N = int(rng.integers(1, 7))
        a = build_arrangement(random_functionals(rng, N, 2), seed=seed)
        trials += 1
        tight += traverse_regions(a) == region_count_bound(N, 2)
    ok = not over and tight >= 0.95 * trials
    report(2, "region count bound", ok, f"{len(over)} over the bound; equality in {tight}/{trials} generic n=2 draws")


def _fidelity(net, functionals, active, seed):
    a = build_arrangement(functionals, seed=seed)
    worst = 0.0

    def visit(r, g):
        nonlocal worst
        worst = max(worst, float(np.max(np.abs(active(net, r, a)(g.witness) - evaluate(net, g.witness)))))

    traverse_regions(a, visit)
    return worst


def test_3_active_affine_fidelity():
    worst = 0.0
    for seed in range(50):
        rng = np.random.default_rng([3, seed])
        net = random_shallow(rng, int(rng.integers(1, 9)), int(rng.integers(1, 4)), int(rng.integers(1, 3)))
        worst = max(worst, _fidelity(net, switching_functionals_shallow(net), active_affine_shallow, seed))
    for seed in range(50):
        rng = np.random.default_rng([30, seed])
        t = random_tll(rng, int(rng.integers(1, 5)), int(rng.integers(1, 4)), int(rng.integers(1, 3)), int(rng.integers(1, 3)))
        fs = switching_functionals_tll(t)
        if fs:
            worst = max(worst, _fidelity(t, fs, active_affine_tll, seed))
        else:
            # a single local function: the network is affine everywhere
            x = rng.standard_normal(t.n)
            worst = max(worst, float(np.max(np.abs(active_affine_tll(t, None, None)(x) - evaluate(t, x)))))
    report(3, "active affine fidelity on 100 networks", worst <= 1e-9, f"max error {worst:.3e} (limit 1e-9)")


def test_4_verify_matches_oracle():
    disagree, bad_witness, counts = [], [], {"SAT": 0, "UNSAT": 0}
    for arch in ("shallow", "tll"):
        for seed in range(50):
            rng = np.random.default_rng([4, seed, arch == "tll"])
            n, m = int(rng.integers(1, 3)), int(rng.integers(1, 3))
            if arch == "shallow":
                net = random_shallow(rng, int(rng.integers(1, 7)), n, m)
            else:
                net = random_tll(rng, int(rng.integers(1, 5)), int(rng.integers(1, 4)), n, m)
            # even seeds widen the output box so both verdicts are well represented
            p = random_problem(rng, net, spread=(0.0, 0.3) if seed % 2 == 0 else (-0.3, 0.3))
            v = verify(p)
            counts[v.status] += 1
            if v.status != exhaustive_verify(p).status:
                disagree.append((arch, seed))
            if v.status == "UNSAT":
                y = evaluate(net, v.witness)
                margin = p.output_polytope.constraints[v.constraint_index](y)
                if not (margin > 0 and p.input_polytope.contains(v.witness)):
                    bad_witness.append((arch, seed))
    ok = not disagree and not bad_witness
    detail = f"{len(disagree)} disagreements, {len(bad_witness)} bad witnesses over 100 problems ({counts['SAT']} SAT, {counts['UNSAT']} UNSAT)"
    report(4, "verify agrees with exhaustive oracle", ok, detail)


def test_5_tll_realization_and_min_max():
    worst = 0.0
    for seed in range(50):
        rng = np.random.default_rng([5, seed])
        t = random_tll(rng, int(rng.integers(1, 5)), int(rng.integers(1, 4)), int(rng.integers(1, 3)), int(rng.integers(1, 3)))
        net = tll_to_relu(t)
        for x in rng.uniform(-3, 3, size=(200, t.n)):
            worst = max(worst, float(np.max(np.abs(eval_network(net, x) - tll_eval_lattice(t, x)))))
    inexact = 0
    rng = np.random.default_rng(55)
    for k in range(2, 10):
        mn, mx = build_min_network(k), build_max_network(k)
        for _ in range(200):
            x = rng.integers(-(2**20), 2**20, size=k) / 2.0 ** int(rng.integers(0, 9))
            inexact += eval_network(mn, x)[0] != x.min() or eval_network(mx, x)[0] != x.max()
    ok = worst <= 1e-9 and inexact == 0
    report(5, "TLL realization and min/max networks", ok, f"TLL max error {worst:.3e} (limit 1e-9); {inexact} inexact min/max outputs")


@pytest.mark.slow
def test_6_polynomial_scaling():
    sizes = [4, 8, 16, 32]
    rows = run_bench("shallow", sizes, n=2, seeds=(0,))
    calls = [r.lp_calls for r in rows]
    slope = loglog_slope(sizes, calls)
    ratio = calls[-1] / calls[-2]
    ok = slope <= 6.5 and ratio < 100
    report(6, "polynomial growth of LP calls", ok, f"lp_calls {calls}; slope {slope:.2f} (limit 6.5); ratio 32/16 {ratio:.1f} (limit 100)")


def test_7_coverage_of_input():
    misses, total = 0, 0
    feas = current().feas
    for seed in range(20):
        rng = np.random.default_rng([7, seed])
        n = int(rng.integers(1, 3))
        net = random_shallow(rng, 4, n) if seed % 2 else random_tll(rng, 3, 2, n)
        p = random_problem(rng, net)
        kept = verify(p, exhaustive=True, record_regions=True).kept_regions
        for x in rng.uniform(-1, 1, size=(500, n)):
            total += 1
            misses += not any(np.all(g.closure.values(x) <= feas) for g in kept)
    report(7, "kept regions cover the input polytope", misses == 0, f"{misses} misses out of {total} samples")


def test_8_fixtures(relu_x, abs_tll):
    cases = [
        ("relu SAT", VerificationProblem(relu_x, interval(-1, 1), interval(-0.1, 1.1)), "SAT"),
        ("relu UNSAT", VerificationProblem(relu_x, interval(-1, 1), interval(0, 0.5)), "UNSAT"),
        ("|x| SAT", VerificationProblem(abs_tll, interval(-2, 2), interval(-0.5, 2.5)), "SAT"),
        ("|x| UNSAT", VerificationProblem(abs_tll, interval(-2, 2), interval(-0.5, 1.5)), "UNSAT"),
    ]
    parts, ok = [], True
    for name, p, expected in cases:
        v = verify(p)
        good = v.status == expected and (expected == "SAT" or v.margin >= 0.4)
        ok &= good
        parts.append(f"{name} -> {v.status}" + (f" margin {v.margin:.3f}" if v.status == "UNSAT" else ""))
    report(8, "end-to-end fixtures", ok, "; ".join(parts))
