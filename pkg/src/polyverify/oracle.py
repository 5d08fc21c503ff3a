"""Brute-force references for cross-checking the traversal-based verifier.

Nothing here touches the poset traversal or the active-function recovery:
regions come from a depth-first search over sign vectors, and the affine
piece on a region is read off by linearizing the network at its witness.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import tolerances
from .arrangement import Arrangement, RegionEncoding
from .geometry import (
    DegenerateInputError,
    LpCounter,
    Polytope,
    chebyshev_center,
    interior_point,
)
from .network import TllNetwork, linearize_at, tll_to_relu
from .verifier import (
    Verdict,
    VerificationProblem,
    Violation,
    check_region,
    evaluate,
    problem_arrangement,
)

BRUTE_FORCE_LIMIT = 20
DEFAULT_SEED = 0xC0FFEE


class OracleLimitExceeded(ValueError):
    pass


@dataclass
class OracleReport:
    agreed: bool
    details: str = ""


def _signed_polytope(a: Arrangement, signs: list[float]) -> Polytope:
    k = len(signs)
    s = np.asarray(signs)
    return Polytope.from_arrays(-s[:, None] * a.A[:k], -s * a.c[:k])


def brute_force_regions(
    a: Arrangement, counter: Optional[LpCounter] = None, with_witness: bool = False
):
    """All sign vectors of ``a`` whose region has an interior point.

    Depth-first over the bits; a prefix with no interior point cuts off its
    whole subtree, which is sound because adding constraints only shrinks
    the set.  Returns a set of encodings, or a dict encoding -> witness.
    """
    N = len(a)
    if N > BRUTE_FORCE_LIMIT:
        raise OracleLimitExceeded(f"{N} hyperplanes exceed the brute-force limit of {BRUTE_FORCE_LIMIT}")
    eps = tolerances.current().interior
    found: dict[RegionEncoding, np.ndarray] = {}

    def dfs(signs: list[float]) -> None:
        x, r = chebyshev_center(_signed_polytope(a, signs), counter=counter)
        if x is None or r < eps:
            return
        if len(signs) == N:
            found[RegionEncoding.from_bits([s > 0 for s in signs])] = x
            return
        dfs(signs + [1.0])
        dfs(signs + [-1.0])

    dfs([])
    return found if with_witness else set(found)


@dataclass
class Counterexample:
    point: np.ndarray
    constraint_index: int
    margin: float


def _hit_and_run(P: Polytope, x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    d = rng.standard_normal(P.dim)
    d /= np.linalg.norm(d)
    slack = -(P.A @ x + P.c)
    rate = P.A @ d
    with np.errstate(divide="ignore"):
        steps = slack / rate
    hi = np.min(steps[rate > 0], initial=np.inf)
    lo = np.max(steps[rate < 0], initial=-np.inf)
    if not (np.isfinite(hi) and np.isfinite(lo)):
        raise DegenerateInputError("hit-and-run chord is unbounded")
    return x + rng.uniform(lo, hi) * d


def sample_falsify(p: VerificationProblem, trials: int = 1000, seed: int = DEFAULT_SEED) -> Optional[Counterexample]:
    """Search for a violation by hit-and-run sampling of P_x.

    Can only ever prove UNSAT; ``None`` means nothing was found.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    Px, Py = p.input_polytope, p.output_polytope
    x = interior_point(Px)
    if x is None:
        raise DegenerateInputError("input polytope has no interior")
    feas = tolerances.current().feas
    rng = np.random.default_rng(seed)
    for _ in range(trials):
        x = _hit_and_run(Px, x, rng)
        y = evaluate(p.network, x)
        values = Py.A @ y + Py.c
        i = int(np.argmax(values)) if len(Py) else -1
        if i >= 0 and values[i] > feas:
            return Counterexample(x.copy(), i, float(Py.constraints[i](y)))
    return None


def exhaustive_verify(p: VerificationProblem, exhaustive: bool = False, seed: int = 0) -> Verdict:
    """Reference verifier: every sign vector, linearization at each witness."""
    start = time.perf_counter()
    counter = LpCounter()
    p.validate(counter)
    a, _ = problem_arrangement(p, seed)
    relu = tll_to_relu(p.network) if isinstance(p.network, TllNetwork) else p.network
    regions = brute_force_regions(a, counter=counter, with_witness=True)
    verdict = Verdict("SAT", hyperplanes=len(a), regions_traversed=len(regions))
    Px = p.input_polytope
    eps = tolerances.current().interior
    for r in sorted(regions):
        witness = regions[r]
        # strictly inside P_x, judged by direct evaluation rather than bits
        if np.max(Px.values(witness)) > -eps:
            continue
        verdict.regions_verified += 1
        s = r.signs()
        closure = Polytope.from_arrays(-s[:, None] * a.A, -s * a.c)
        affine = linearize_at(relu, witness)
        found, marginal = check_region(p, affine, closure, witness, counter)
        verdict.marginal += marginal
        verdict.violations.extend(Violation(r.hex(), i, x, m) for i, x, m in found)
        if found and not exhaustive:
            break
    if verdict.violations:
        v = verdict.violations[0]
        verdict.status = "UNSAT"
        verdict.witness, verdict.constraint_index, verdict.margin = v.witness, v.constraint_index, v.margin
    verdict.lp_calls = counter.calls
    verdict.wall_time_ms = (time.perf_counter() - start) * 1e3
    return verdict


def compare_regions(traversed: set, brute: set) -> OracleReport:
    if traversed == brute:
        return OracleReport(True)
    missing = sorted(brute - traversed)
    extra = sorted(traversed - brute)
    first = (missing or extra)[0]
    kind = "missed by traversal" if missing else "not found by brute force"
    return OracleReport(False, f"{len(missing)} missing, {len(extra)} extra; first {kind}: {first.hex()}")


def compare_verdicts(fast: Verdict, reference: Verdict) -> OracleReport:
    if fast.status == reference.status:
        return OracleReport(True)
    other = reference if reference.status == "UNSAT" else fast
    return OracleReport(False, f"status {fast.status} vs reference {reference.status}; witness {other.witness.tolist()}")
