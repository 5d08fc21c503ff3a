"""Scaling runs: verify a family of growing SAT instances and record the cost."""

from __future__ import annotations

import csv
import io
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .arrangement import region_count_bound
from .geometry import Polytope
from .instances import random_shallow, random_tll
from .verifier import VerificationProblem, verify

BENCH_FIELDS = ["size", "regions", "lp_calls", "wall_ms", "arch", "seed", "hyperplanes", "bound"]


@dataclass
class BenchRow:
    size: int
    regions: int
    lp_calls: int
    wall_ms: float
    arch: str
    seed: int
    hyperplanes: int
    bound: int


def bench_instance(arch: str, size: int, n: int, seed: int, M: int = 2, m: int = 1) -> VerificationProblem:
    """SAT instance of the given size: the output box is far too large to violate.

    ``size`` is the hidden width for ``shallow`` and N for ``tll``.
    """
    rng = np.random.default_rng([seed, size])
    if arch == "shallow":
        net = random_shallow(rng, size, n, m)
    elif arch == "tll":
        net = random_tll(rng, size, M, n, m)
    else:
        raise ValueError(f"unknown architecture {arch!r}")
    Px = Polytope.box(-np.ones(n), np.ones(n))
    Py = Polytope.box(np.full(m, -1e6), np.full(m, 1e6))
    return VerificationProblem(net, Px, Py)


def run_bench(
    arch: str,
    sizes: Sequence[int],
    n: int = 2,
    seeds: Sequence[int] = (0,),
    M: int = 2,
    m: int = 1,
    workers: int = 1,
) -> list[BenchRow]:
    rows = []
    for size in sizes:
        for seed in seeds:
            p = bench_instance(arch, size, n, seed, M, m)
            v = verify(p, exhaustive=True, workers=workers, seed=seed)
            rows.append(
                BenchRow(
                    size=size,
                    regions=v.regions_traversed,
                    lp_calls=v.lp_calls,
                    wall_ms=round(v.wall_time_ms, 3),
                    arch=arch,
                    seed=seed,
                    hyperplanes=v.hyperplanes,
                    bound=region_count_bound(v.hyperplanes, n),
                )
            )
    return rows


def rows_to_csv(rows: Sequence[BenchRow]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=BENCH_FIELDS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(asdict(row))
    return buf.getvalue()


def loglog_slope(sizes, values) -> float:
    """Least-squares slope of ``log(values)`` against ``log(sizes)``."""
    return float(np.polyfit(np.log(np.asarray(sizes, float)), np.log(np.asarray(values, float)), 1)[0])
