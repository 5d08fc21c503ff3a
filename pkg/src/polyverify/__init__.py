"""Exact verification of shallow and Two-Level-Lattice ReLU networks
against convex input/output polytopes, by hyperplane-arrangement traversal."""

from .arrangement import (
    Arrangement,
    RegionEncoding,
    RegionGeometry,
    build_arrangement,
    find_successors,
    region_closure,
    region_count_bound,
    traverse_regions,
)
from .geometry import (
    AffineFunction,
    LinearFunctional,
    LpSolution,
    LpStatus,
    Polytope,
    eval_functional,
    interior_point,
    minimal_h_representation,
    solve_lp,
)
from .network import (
    Layer,
    ReluNetwork,
    TllComponent,
    TllNetwork,
    build_max_network,
    build_min_network,
    eval_network,
    parallel_compose,
    sequential_compose,
    tll_eval_lattice,
    tll_to_relu,
)
from .verifier import Verdict, VerificationProblem, verify

__version__ = "0.1.0"

__all__ = [
    "AffineFunction",
    "Arrangement",
    "Layer",
    "LinearFunctional",
    "LpSolution",
    "LpStatus",
    "Polytope",
    "RegionEncoding",
    "RegionGeometry",
    "ReluNetwork",
    "TllComponent",
    "TllNetwork",
    "Verdict",
    "VerificationProblem",
    "build_arrangement",
    "build_max_network",
    "build_min_network",
    "eval_functional",
    "eval_network",
    "find_successors",
    "interior_point",
    "minimal_h_representation",
    "parallel_compose",
    "region_closure",
    "region_count_bound",
    "sequential_compose",
    "solve_lp",
    "tll_eval_lattice",
    "tll_to_relu",
    "traverse_regions",
    "verify",
]
