"""Linear programming backends.

Every backend solves the same problem::

    minimize    c @ x
    subject to  A @ x <= b,   x free

and returns ``(LpStatus, x_or_None)``.  The rest of the package only talks to
:func:`solve_raw`, so swapping the backend is a one-line change
(:func:`set_backend` or the ``backend=`` keyword).
"""

from __future__ import annotations

import enum
from typing import Callable, Optional

import numpy as np
from scipy.optimize import linprog


class LpStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


class LpError(RuntimeError):
    """The LP backend failed to produce a trustworthy status."""


class LpIterationLimit(LpError):
    pass


Backend = Callable[[np.ndarray, np.ndarray, np.ndarray], "tuple[LpStatus, Optional[np.ndarray]]"]


def highs_backend(c, A, b):
    n = c.shape[0]
    if A.shape[0] == 0:
        if np.any(c != 0):
            return LpStatus.UNBOUNDED, None
        return LpStatus.OPTIMAL, np.zeros(n)
    # dual simplex occasionally reports "unknown" on degenerate problems
    # (objective parallel to a tight row); retry with IPM, then our simplex
    for method in ("highs", "highs-ipm"):
        res = linprog(c, A_ub=A, b_ub=b, bounds=[(None, None)] * n, method=method)
        if res.status == 0:
            return LpStatus.OPTIMAL, np.asarray(res.x, dtype=float)
        if res.status == 1:
            raise LpIterationLimit(res.message)
        if res.status == 2:
            return LpStatus.INFEASIBLE, None
        if res.status == 3:
            return LpStatus.UNBOUNDED, None
    try:
        return simplex_backend(c, A, b)
    except LpError as exc:
        raise LpError(f"HiGHS failed ({res.message}); fallback simplex failed ({exc})") from exc


# -- dense two-phase simplex -------------------------------------------------

_PIVOT_TOL = 1e-10


def _pivot(T, row, col):
    T[row] /= T[row, col]
    column = T[:, col].copy()
    column[row] = 0.0
    T -= np.outer(column, T[row])


def _run_simplex(T, basis, allowed, max_iter):
    """Bland's-rule simplex on tableau ``T`` (objective in the last row).

    Returns False if the problem is unbounded along some allowed column.
    """
    m = T.shape[0] - 1
    for _ in range(max_iter):
        reduced = T[-1, :-1]
        entering = -1
        for j in np.flatnonzero(allowed):
            if reduced[j] < -_PIVOT_TOL:
                entering = j
                break
        if entering < 0:
            return True
        col = T[:m, entering]
        candidates = np.flatnonzero(col > _PIVOT_TOL)
        if candidates.size == 0:
            return False
        ratios = T[candidates, -1] / col[candidates]
        best = ratios.min()
        ties = candidates[ratios <= best + 1e-12 * max(1.0, abs(best))]
        leave = min(ties, key=lambda r: basis[r])
        _pivot(T, leave, entering)
        basis[leave] = entering
    raise LpIterationLimit(f"simplex exceeded {max_iter} iterations")


def simplex_backend(c, A, b, max_iter: int = 10_000):
    """Self-contained dense two-phase simplex with Bland's anti-cycling rule.

    Free variables are split as ``x = u - v``; rows with negative right-hand
    side get an artificial variable for phase one.
    """
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = A.shape
    if m == 0:
        if np.any(c != 0):
            return LpStatus.UNBOUNDED, None
        return LpStatus.OPTIMAL, np.zeros(n)

    neg = b < 0
    n_art = int(neg.sum())
    n_cols = 2 * n + m + n_art
    T = np.zeros((m + 1, n_cols + 1))
    sign = np.where(neg, -1.0, 1.0)
    T[:m, :n] = A * sign[:, None]
    T[:m, n : 2 * n] = -A * sign[:, None]
    T[:m, 2 * n : 2 * n + m] = np.diag(sign)
    T[:m, -1] = b * sign
    basis = np.empty(m, dtype=int)
    art_rows = np.flatnonzero(neg)
    for k, r in enumerate(art_rows):
        T[r, 2 * n + m + k] = 1.0
        basis[r] = 2 * n + m + k
    for r in np.flatnonzero(~neg):
        basis[r] = 2 * n + r

    allowed = np.ones(n_cols, dtype=bool)
    if n_art:
        T[-1, 2 * n + m :] = 1.0
        T[-1, -1] = 0.0
        for r in art_rows:
            T[-1] -= T[r]
        _run_simplex(T, basis, allowed, max_iter)
        if -T[-1, -1] > 1e-9 * max(1.0, np.abs(b).max()):
            return LpStatus.INFEASIBLE, None
        # drive leftover zero-level artificials out of the basis
        keep = np.ones(m + 1, dtype=bool)
        for r in range(m):
            if basis[r] >= 2 * n + m:
                nz = np.flatnonzero(np.abs(T[r, : 2 * n + m]) > _PIVOT_TOL)
                if nz.size:
                    _pivot(T, r, nz[0])
                    basis[r] = nz[0]
                else:
                    keep[r] = False
        T = T[keep]
        basis = basis[keep[:m]]
        allowed[2 * n + m :] = False

    T[-1] = 0.0
    T[-1, :n] = c
    T[-1, n : 2 * n] = -c
    for r, j in enumerate(basis):
        if T[-1, j] != 0.0:
            T[-1] -= T[-1, j] * T[r]
    if not _run_simplex(T, basis, allowed, max_iter):
        return LpStatus.UNBOUNDED, None

    z = np.zeros(n_cols)
    z[basis] = T[:-1, -1]
    return LpStatus.OPTIMAL, z[:n] - z[n : 2 * n]


BACKENDS: dict[str, Backend] = {"highs": highs_backend, "simplex": simplex_backend}
_backend: Backend = highs_backend


def set_backend(name: str) -> None:
    global _backend
    _backend = BACKENDS[name]


def solve_raw(c, A, b, backend: Optional[Backend] = None):
    """Minimize ``c @ x`` subject to ``A @ x <= b`` with the active backend."""
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float).reshape(-1, c.shape[0])
    b = np.asarray(b, dtype=float).reshape(-1)
    return (backend or _backend)(c, A, b)
