"""Seeded random instances for tests, benchmarks and the acceptance suite."""

from __future__ import annotations

import numpy as np

from .geometry import LinearFunctional, Polytope
from .network import Layer, ReluNetwork, TllComponent, TllNetwork
from .verifier import VerificationProblem, evaluate


def random_functionals(rng: np.random.Generator, N: int, n: int, central: bool = False) -> list[LinearFunctional]:
    """Gaussian functionals; ``central`` puts every hyperplane through the origin."""
    return [LinearFunctional(rng.standard_normal(n), 0.0 if central else rng.standard_normal()) for _ in range(N)]


def random_shallow(rng: np.random.Generator, hidden: int, n: int, m: int = 1) -> ReluNetwork:
    return ReluNetwork(
        [
            Layer(rng.standard_normal((hidden, n)), rng.standard_normal(hidden), True),
            Layer(rng.standard_normal((m, hidden)), rng.standard_normal(m), False),
        ]
    )


def random_tll(rng: np.random.Generator, N: int, M: int, n: int, m: int = 1) -> TllNetwork:
    comps = []
    for _ in range(m):
        selectors = []
        for _ in range(M):
            size = rng.integers(1, N + 1)
            selectors.append(rng.choice(N, size=size, replace=False).tolist())
        comps.append(TllComponent(rng.standard_normal((N, n)), rng.standard_normal(N), selectors))
    return TllNetwork(comps)


def random_problem(
    rng: np.random.Generator, network, spread: tuple[float, float] = (-0.3, 0.3), samples: int = 400
) -> VerificationProblem:
    """Box input ``[-1, 1]^n`` and an output box near the sampled output range.

    Each output bound is pushed outward by a random fraction of the sampled
    span drawn from ``spread``; negative fractions pull it inward.  The
    default makes roughly half the problems SAT, an all-negative ``spread``
    guarantees UNSAT.
    """
    n = network.in_dim
    Px = Polytope.box(-np.ones(n), np.ones(n))
    xs = rng.uniform(-1, 1, size=(samples, n))
    ys = np.array([evaluate(network, x) for x in xs])
    lo, hi = ys.min(axis=0), ys.max(axis=0)
    span = np.maximum(hi - lo, 1e-3)
    lo = lo - rng.uniform(*spread, size=lo.shape) * span
    hi = hi + rng.uniform(*spread, size=hi.shape) * span
    hi = np.maximum(hi, lo + 1e-3 * span)
    return VerificationProblem(network, Px, Polytope.box(lo, hi))
