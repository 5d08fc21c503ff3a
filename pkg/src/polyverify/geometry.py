"""Affine functionals, H-polytopes and the LP-based queries on them."""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from . import lp as _lp
from . import tolerances
from .lp import LpIterationLimit, LpStatus  # noqa: F401  (re-exported)


class DimensionError(ValueError):
    pass


class DegenerateInputError(ValueError):
    """A polytope or arrangement is empty, lower-dimensional, or otherwise unusable."""


class LpCounter:
    """Thread-safe tally of LP solves, threaded through the hot paths."""

    def __init__(self):
        self.calls = 0
        self._lock = threading.Lock()

    def add(self, k: int = 1) -> None:
        with self._lock:
            self.calls += k


def _tick(counter: Optional[LpCounter]) -> None:
    if counter is not None:
        counter.add()


@dataclass(frozen=True, eq=False)
class LinearFunctional:
    """``x -> w @ x + c``; a nonzero ``w`` is required."""

    w: np.ndarray
    c: float

    def __post_init__(self):
        w = np.array(self.w, dtype=float).reshape(-1)
        w.setflags(write=False)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "c", float(self.c))
        if w.size == 0 or np.max(np.abs(w)) <= tolerances.current().zero:
            raise ValueError("zero functional does not define a hyperplane")

    @property
    def dim(self) -> int:
        return self.w.shape[0]

    def __call__(self, x) -> float:
        return eval_functional(self, x)

    def __neg__(self) -> "LinearFunctional":
        return LinearFunctional(-self.w, -self.c)

    def normalized(self) -> "LinearFunctional":
        s = np.linalg.norm(self.w)
        return LinearFunctional(self.w / s, self.c / s)

    def to_dict(self) -> dict:
        return {"w": self.w.tolist(), "c": self.c}

    @classmethod
    def from_dict(cls, d: dict) -> "LinearFunctional":
        return cls(d["w"], d["c"])

    def __repr__(self):
        return f"LinearFunctional(w={self.w.tolist()}, c={self.c})"


def eval_functional(f: LinearFunctional, x) -> float:
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != f.dim:
        raise DimensionError(f"point has dimension {x.shape[0]}, functional expects {f.dim}")
    return float(f.w @ x + f.c)


@dataclass(frozen=True, eq=False)
class AffineFunction:
    """``x -> W @ x + b`` from R^n to R^m."""

    W: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        W = np.atleast_2d(np.array(self.W, dtype=float))
        b = np.array(self.b, dtype=float).reshape(-1)
        if W.shape[0] != b.shape[0]:
            raise DimensionError(f"W has {W.shape[0]} rows but b has {b.shape[0]} entries")
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "b", b)

    @property
    def in_dim(self) -> int:
        return self.W.shape[1]

    @property
    def out_dim(self) -> int:
        return self.W.shape[0]

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float).reshape(-1)
        if x.shape[0] != self.in_dim:
            raise DimensionError(f"point has dimension {x.shape[0]}, map expects {self.in_dim}")
        return self.W @ x + self.b

    def row(self, i: int) -> LinearFunctional:
        return LinearFunctional(self.W[i], self.b[i])

    def pullback(self, f: LinearFunctional) -> tuple[np.ndarray, float]:
        """Coefficients ``(w, c)`` of ``f o self``; ``w`` may be zero."""
        if f.dim != self.out_dim:
            raise DimensionError("functional and map output dimension differ")
        return self.W.T @ f.w, float(f.w @ self.b + f.c)


class Polytope:
    """``{x : l(x) <= 0 for every constraint l}``.

    Constraints identical up to positive scaling are collapsed on
    construction; ``index_map[i]`` gives the kept position of input ``i``.
    Boundedness and nonemptiness are properties to check, not assumptions.
    """

    def __init__(self, constraints: Sequence[LinearFunctional], dim: Optional[int] = None):
        constraints = list(constraints)
        if dim is None:
            if not constraints:
                raise DimensionError("cannot infer dimension of an unconstrained polytope")
            dim = constraints[0].dim
        for f in constraints:
            if f.dim != dim:
                raise DimensionError(f"constraint of dimension {f.dim} in a {dim}-dimensional polytope")
        self.dim = dim
        self.index_map: list[int] = []
        if constraints:
            U = np.array([np.append(f.w, f.c) / np.linalg.norm(f.w) for f in constraints])
            close = np.max(np.abs(U[:, None, :] - U[None, :, :]), axis=2) <= tolerances.current().feas
            first = np.argmax(close, axis=1)  # earliest equivalent constraint
            kept_rows = np.flatnonzero(first == np.arange(len(constraints)))
            position = {int(r): k for k, r in enumerate(kept_rows)}
            for i in range(len(constraints)):
                j = int(first[i])
                while first[j] != j:
                    j = int(first[j])
                self.index_map.append(position[j])
            self.constraints: tuple[LinearFunctional, ...] = tuple(constraints[r] for r in kept_rows)
            self.A = U[kept_rows, :-1]
            self.c = U[kept_rows, -1]
        else:
            self.constraints = ()
            self.A = np.zeros((0, dim))
            self.c = np.zeros(0)
        self.A.setflags(write=False)
        self.c.setflags(write=False)

    @classmethod
    def from_arrays(cls, A, c) -> "Polytope":
        """Polytope ``A @ x + c <= 0``."""
        A = np.atleast_2d(np.asarray(A, dtype=float))
        c = np.asarray(c, dtype=float).reshape(-1)
        return cls([LinearFunctional(a, ci) for a, ci in zip(A, c)], dim=A.shape[1])

    @classmethod
    def box(cls, lower, upper) -> "Polytope":
        lower = np.asarray(lower, dtype=float).reshape(-1)
        upper = np.asarray(upper, dtype=float).reshape(-1)
        n = lower.shape[0]
        cons = []
        for i in range(n):
            e = np.zeros(n)
            e[i] = 1.0
            cons.append(LinearFunctional(e, -upper[i]))
            cons.append(LinearFunctional(-e, lower[i]))
        return cls(cons, dim=n)

    def __len__(self) -> int:
        return len(self.constraints)

    def __repr__(self):
        return f"Polytope(dim={self.dim}, constraints={len(self)})"

    def values(self, x) -> np.ndarray:
        """Unit-normalized constraint values at ``x`` (signed distances)."""
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise DimensionError("point dimension mismatch")
        return x @ self.A.T + self.c

    def contains(self, x, tol: Optional[float] = None) -> bool:
        tol = tolerances.current().feas if tol is None else tol
        return bool(np.all(self.values(x) <= tol))

    def subset(self, indices: Iterable[int]) -> "Polytope":
        return Polytope([self.constraints[i] for i in indices], dim=self.dim)

    def is_bounded(self, counter: Optional[LpCounter] = None) -> bool:
        for i in range(self.dim):
            for s in (1.0, -1.0):
                w = np.zeros(self.dim)
                w[i] = s
                status, _ = _lp.solve_raw(-w, self.A, -self.c)
                _tick(counter)
                if status == LpStatus.UNBOUNDED:
                    return False
        return True

    def to_dict(self) -> dict:
        return {"dim": self.dim, "constraints": [f.to_dict() for f in self.constraints]}

    @classmethod
    def from_dict(cls, d: dict) -> "Polytope":
        return cls([LinearFunctional.from_dict(e) for e in d["constraints"]], dim=int(d["dim"]))


@dataclass(frozen=True)
class LpSolution:
    status: LpStatus
    objective: float = float("nan")
    argpoint: Optional[np.ndarray] = field(default=None, repr=False)


def solve_lp(
    objective: LinearFunctional,
    constraints: Polytope,
    sense: str = "max",
    counter: Optional[LpCounter] = None,
) -> LpSolution:
    """Optimize ``objective`` over ``constraints``.

    ``sense`` is ``"max"`` or ``"min"``.  Iteration-limit failures surface as
    :class:`LpIterationLimit` rather than a status.
    """
    if objective.dim != constraints.dim:
        raise DimensionError("objective and constraints have different dimensions")
    return _solve(objective.w, objective.c, constraints, sense, counter)


def _solve(w, c0, p: Polytope, sense: str, counter: Optional[LpCounter]) -> LpSolution:
    if sense not in ("max", "min"):
        raise ValueError(f"sense must be 'max' or 'min', not {sense!r}")
    sgn = -1.0 if sense == "max" else 1.0
    status, x = _lp.solve_raw(sgn * np.asarray(w, dtype=float), p.A, -p.c)
    _tick(counter)
    if status != LpStatus.OPTIMAL:
        return LpSolution(status)
    return LpSolution(status, float(np.asarray(w) @ x + c0), x)


def chebyshev_center(p: Polytope, cap: float = 1.0, counter: Optional[LpCounter] = None):
    """Center and clearance of the largest ball (radius at most ``cap``) inside ``p``.

    Returns ``(None, -inf)`` when ``p`` is empty.
    """
    n = p.dim
    m = len(p)
    A = np.zeros((m + 1, n + 1))
    A[:m, :n] = p.A
    A[:m, n] = 1.0
    A[m, n] = 1.0
    b = np.append(-p.c, cap)
    obj = np.zeros(n + 1)
    obj[n] = -1.0
    status, z = _lp.solve_raw(obj, A, b)
    _tick(counter)
    if status != LpStatus.OPTIMAL:
        return None, float("-inf")
    x = z[:n]
    if not m:
        return x, float(cap)
    # report the clearance actually achieved, not the LP's claim
    return x, min(float(z[n]), float(-np.max(p.values(x))))


def interior_point(p: Polytope, counter: Optional[LpCounter] = None) -> Optional[np.ndarray]:
    """A point with every constraint ``<= -interior`` (unit-normalized), or None."""
    x, r = chebyshev_center(p, counter=counter)
    if x is None or r < tolerances.current().interior:
        return None
    return x


def minimal_h_representation(
    p: Polytope,
    candidates: Optional[Iterable[int]] = None,
    counter: Optional[LpCounter] = None,
    check_interior: bool = True,
) -> list[int]:
    """Indices of the irredundant constraints of a full-dimensional polytope.

    Constraint ``i`` is kept iff maximizing it over the polytope with ``i``
    relaxed to ``l_i(x) <= 1`` gives a value above the feasibility tolerance.
    ``candidates`` restricts which constraints are tested (the rest are
    neither tested nor returned).
    """
    if check_interior and interior_point(p, counter=counter) is None:
        raise DegenerateInputError("polytope is empty or not full-dimensional")
    feas = tolerances.current().feas
    idx = range(len(p)) if candidates is None else candidates
    b = -p.c.copy()
    keep = []
    for i in idx:
        b[i] = 1.0 - p.c[i]
        status, x = _lp.solve_raw(-p.A[i], p.A, b)
        b[i] = -p.c[i]
        _tick(counter)
        if status == LpStatus.UNBOUNDED:
            keep.append(i)
        elif status == LpStatus.INFEASIBLE:
            raise DegenerateInputError("relaxed polytope infeasible; input is degenerate")
        elif p.A[i] @ x + p.c[i] > feas:
            keep.append(i)
    return sorted(keep)
