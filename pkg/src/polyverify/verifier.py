"""Exact input/output polytope verification for shallow and TLL networks.

Every region of the switching arrangement (extended by the input-polytope
hyperplanes) carries a single affine piece of the network, so the question
"does the image of P_x stay inside P_y" reduces to one LP per kept region per
output constraint.
"""

from __future__ import annotations

import graphlib
import logging
import time
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from . import tolerances
from .arrangement import (
    Arrangement,
    RegionEncoding,
    RegionGeometry,
    StopTraversal,
    TraversalStats,
    build_arrangement,
    traverse_regions,
)
from .geometry import (
    AffineFunction,
    DegenerateInputError,
    DimensionError,
    LinearFunctional,
    LpCounter,
    LpStatus,
    Polytope,
    _solve,
    interior_point,
)
from .network import ReluNetwork, TllNetwork, eval_network, tll_eval_lattice

log = logging.getLogger(__name__)

Network = Union[ReluNetwork, TllNetwork]


class InternalInvariantError(RuntimeError):
    """Something that cannot happen on valid input happened anyway."""


class UnsupportedArchitecture(ValueError):
    pass


def evaluate(net: Network, x) -> np.ndarray:
    if isinstance(net, TllNetwork):
        return tll_eval_lattice(net, x)
    return eval_network(net, x)


@dataclass(frozen=True, eq=False)
class VerificationProblem:
    network: Network
    input_polytope: Polytope
    output_polytope: Polytope

    def validate(self, counter: Optional[LpCounter] = None) -> None:
        """Check dimensions, and that P_x is bounded and full-dimensional."""
        net = self.network
        if not isinstance(net, TllNetwork):
            if not isinstance(net, ReluNetwork) or not net.is_shallow():
                raise UnsupportedArchitecture("only shallow ReLU networks and TLL networks can be verified")
        if self.input_polytope.dim != net.in_dim:
            raise DimensionError(f"input polytope is {self.input_polytope.dim}-D, network takes {net.in_dim} inputs")
        if self.output_polytope.dim != net.out_dim:
            raise DimensionError(
                f"output polytope is {self.output_polytope.dim}-D, network has {net.out_dim} outputs"
            )
        if len(self.input_polytope) == 0:
            raise DegenerateInputError("input polytope has no constraints (unbounded)")
        if interior_point(self.input_polytope, counter=counter) is None:
            raise DegenerateInputError("input polytope is empty or not full-dimensional")
        if not self.input_polytope.is_bounded(counter=counter):
            raise DegenerateInputError("input polytope is unbounded")

    def to_dict(self) -> dict:
        return {
            "network": self.network.to_dict(),
            "input_polytope": self.input_polytope.to_dict(),
            "output_polytope": self.output_polytope.to_dict(),
        }


@dataclass
class Violation:
    region: str
    constraint_index: int
    witness: np.ndarray
    margin: float

    def to_dict(self) -> dict:
        return {
            "region": self.region,
            "constraint_index": self.constraint_index,
            "witness": self.witness.tolist(),
            "margin": self.margin,
        }


@dataclass
class Verdict:
    status: str
    witness: Optional[np.ndarray] = None
    constraint_index: Optional[int] = None
    margin: Optional[float] = None
    violations: list[Violation] = field(default_factory=list)
    regions_traversed: int = 0
    regions_verified: int = 0
    lp_calls: int = 0
    wall_time_ms: float = 0.0
    marginal: int = 0
    hyperplanes: int = 0
    kept_regions: list[RegionGeometry] = field(default_factory=list, repr=False)

    @property
    def sat(self) -> bool:
        return self.status == "SAT"

    def to_dict(self) -> dict:
        d = {"status": self.status}
        if self.status == "UNSAT":
            d.update(
                witness=self.witness.tolist(),
                constraint_index=self.constraint_index,
                margin=self.margin,
            )
            if len(self.violations) > 1:
                d["violations"] = [v.to_dict() for v in self.violations]
        d.update(
            regions_traversed=self.regions_traversed,
            regions_verified=self.regions_verified,
            lp_calls=self.lp_calls,
            wall_time_ms=self.wall_time_ms,
            hyperplanes=self.hyperplanes,
        )
        if self.marginal:
            d["marginal"] = self.marginal
        return d


# -- shallow networks ----------------------------------------------------------


def _is_zero_row(w) -> bool:
    return float(np.max(np.abs(w))) <= tolerances.current().zero


def switching_functionals_shallow(net: ReluNetwork) -> list[LinearFunctional]:
    """Hidden-neuron pre-activations, one functional per neuron.

    Neurons with an all-zero weight row never switch and are left out.
    """
    if not isinstance(net, ReluNetwork) or not net.is_shallow():
        raise UnsupportedArchitecture("expected a shallow network (nonlinear layer then linear layer)")
    L = net.layers[0]
    return [LinearFunctional(w, b) for w, b in zip(L.W, L.b) if not _is_zero_row(w)]


def active_affine_shallow(net: ReluNetwork, region: RegionEncoding, a: Arrangement) -> AffineFunction:
    """Affine piece of a shallow network on ``region``.

    ``a`` must have been built from :func:`switching_functionals_shallow`
    followed by any extra functionals, whose bits are ignored.
    """
    L1, L2 = net.layers
    d = np.empty(L1.out_dim)
    k = 0
    for i, (w, b) in enumerate(zip(L1.W, L1.b)):
        if _is_zero_row(w):
            d[i] = 1.0 if b > 0 else 0.0
        else:
            d[i] = 1.0 if a.input_sign(k, region) > 0 else 0.0
            k += 1
    W = L2.W @ (d[:, None] * L1.W)
    b = L2.W @ (d * L1.b) + L2.b
    return AffineFunction(W, b)


# -- TLL networks --------------------------------------------------------------


def _tll_pairs(t: TllNetwork):
    """Yield ``(kappa, i, j, functional_or_None, constant_sign)`` for ``i < j``.

    Pairs of local functions with equal slopes never cross; they get no
    functional and a fixed sign instead.
    """
    for kappa, comp in enumerate(t.components):
        for i in range(comp.N):
            for j in range(i + 1, comp.N):
                dw = comp.W_ell[i] - comp.W_ell[j]
                db = comp.b_ell[i] - comp.b_ell[j]
                if _is_zero_row(dw):
                    yield kappa, i, j, None, (1 if db > 0 else -1)
                else:
                    yield kappa, i, j, LinearFunctional(dw, db), 0


def switching_functionals_tll(t: TllNetwork) -> list[LinearFunctional]:
    """Pairwise differences of local functions, component by component."""
    return [f for *_, f, _ in _tll_pairs(t) if f is not None]


def _total_order(N: int, greater: dict[tuple[int, int], bool]) -> list[int]:
    """Indices sorted ascending by value, from pairwise comparisons."""
    ts = graphlib.TopologicalSorter({k: set() for k in range(N)})
    for (i, j), i_greater in greater.items():
        if i_greater:
            ts.add(i, j)
        else:
            ts.add(j, i)
    try:
        order = list(ts.static_order())
    except graphlib.CycleError as exc:
        raise InternalInvariantError(f"pairwise order of local functions is cyclic: {exc.args[1]}") from exc
    # a tournament without cycles is a strict total order
    pos = {k: r for r, k in enumerate(order)}
    for (i, j), i_greater in greater.items():
        if (pos[i] > pos[j]) != i_greater:
            raise InternalInvariantError("pairwise order is not transitive")
    return order


def active_indices_tll(t: TllNetwork, region: RegionEncoding, a: Arrangement) -> list[int]:
    """Index of the active local function of each component on ``region``."""
    comparisons: list[dict[tuple[int, int], bool]] = [{} for _ in t.components]
    k = 0
    for kappa, i, j, f, const in _tll_pairs(t):
        if f is None:
            comparisons[kappa][(i, j)] = const > 0
        else:
            comparisons[kappa][(i, j)] = a.input_sign(k, region) > 0
            k += 1
    active = []
    for comp, greater in zip(t.components, comparisons):
        order = _total_order(comp.N, greater)
        rank = {idx: r for r, idx in enumerate(order)}
        mins = [min(s, key=rank.__getitem__) for s in comp.selectors]
        active.append(max(mins, key=rank.__getitem__))
    return active


def active_affine_tll(t: TllNetwork, region: RegionEncoding, a: Arrangement) -> AffineFunction:
    """Affine piece of a TLL network on ``region``.

    ``a`` must have been built from :func:`switching_functionals_tll`
    followed by any extra functionals, whose bits are ignored.
    """
    idx = active_indices_tll(t, region, a)
    W = np.array([c.W_ell[i] for c, i in zip(t.components, idx)])
    b = np.array([c.b_ell[i] for c, i in zip(t.components, idx)])
    return AffineFunction(W, b)


def switching_functionals(net: Network) -> list[LinearFunctional]:
    if isinstance(net, TllNetwork):
        return switching_functionals_tll(net)
    return switching_functionals_shallow(net)


def active_affine(net: Network, region: RegionEncoding, a: Arrangement) -> AffineFunction:
    if isinstance(net, TllNetwork):
        return active_affine_tll(net, region, a)
    return active_affine_shallow(net, region, a)


# -- driver --------------------------------------------------------------------


def problem_arrangement(p: VerificationProblem, seed: int = 0) -> tuple[Arrangement, range]:
    """Arrangement of switching and input-polytope functionals.

    Returns it with the input-index range occupied by P_x constraints.
    """
    switching = switching_functionals(p.network)
    functionals = switching + list(p.input_polytope.constraints)
    if not functionals:
        raise DegenerateInputError("no hyperplanes to arrange")
    a = build_arrangement(functionals, seed=seed)
    return a, range(len(switching), len(functionals))


def inside_input(a: Arrangement, region: RegionEncoding, px_range: range) -> bool:
    return all(a.input_sign(k, region) < 0 for k in px_range)


def check_region(
    p: VerificationProblem,
    affine: AffineFunction,
    closure: Polytope,
    witness: np.ndarray,
    counter: Optional[LpCounter],
) -> tuple[list[tuple[int, np.ndarray, float]], int]:
    """Maximize each output constraint over one region.

    Returns the re-validated violations as ``(index, point, margin)`` and the
    number of optima that landed in the marginal band ``(0, feas]``.
    """
    feas = tolerances.current().feas
    Py = p.output_polytope
    found = []
    marginal = 0
    for i in range(len(Py)):
        w, c = Py.A[i] @ affine.W, float(Py.A[i] @ affine.b + Py.c[i])
        if _is_zero_row(w):
            value, x = c, witness
        else:
            sol = _solve(w, c, closure, "max", counter)
            if sol.status != LpStatus.OPTIMAL:
                raise InternalInvariantError(f"region LP returned {sol.status.value} on a bounded region")
            value, x = sol.objective, sol.argpoint
        if value <= 0:
            continue
        if value <= feas:
            marginal += 1
            continue
        y = evaluate(p.network, x)
        direct = float(Py.A[i] @ y + Py.c[i])
        if direct > feas and p.input_polytope.contains(x):
            found.append((i, x, float(Py.constraints[i](y))))
        else:
            log.warning("LP violation %.3g at constraint %d did not re-validate (direct %.3g)", value, i, direct)
            marginal += 1
    return found, marginal


def verify(
    p: VerificationProblem,
    exhaustive: bool = False,
    workers: int = 1,
    seed: int = 0,
    record_regions: bool = False,
) -> Verdict:
    """Decide whether ``p.network`` maps ``P_x`` into ``P_y``.

    Stops at the first violation unless ``exhaustive`` is set.  With
    ``record_regions`` the kept regions are attached to the verdict.
    """
    start = time.perf_counter()
    counter = LpCounter()
    p.validate(counter)
    a, px_range = problem_arrangement(p, seed)
    verdict = Verdict("SAT", hyperplanes=len(a))

    def visit(r: RegionEncoding, geom: RegionGeometry) -> None:
        if not inside_input(a, r, px_range):
            return
        verdict.regions_verified += 1
        if record_regions:
            verdict.kept_regions.append(geom)
        affine = active_affine(p.network, r, a)
        found, marginal = check_region(p, affine, geom.closure, geom.witness, counter)
        verdict.marginal += marginal
        for i, x, margin in found:
            verdict.violations.append(Violation(r.hex(), i, x, margin))
        if found and not exhaustive:
            raise StopTraversal

    stats = TraversalStats()
    verdict.regions_traversed = traverse_regions(a, visit, workers=workers, counter=counter, stats=stats)
    if verdict.violations:
        first = verdict.violations[0]
        verdict.status = "UNSAT"
        verdict.witness = first.witness
        verdict.constraint_index = first.constraint_index
        verdict.margin = first.margin
    verdict.lp_calls = counter.calls
    verdict.wall_time_ms = (time.perf_counter() - start) * 1e3
    return verdict
