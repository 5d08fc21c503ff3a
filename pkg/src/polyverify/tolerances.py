"""Numerical tolerances shared by every module.

The active values live in a module-level object so the CLI can override them
for a whole run; library callers normally leave the defaults alone.
"""

from __future__ import annotations

import contextlib
import dataclasses
from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    zero: float = 1e-12  # zero-row rejection
    feas: float = 1e-9  # constraint feasibility / violation threshold
    interior: float = 1e-7  # strict interior margin for region witnesses
    objective: float = 1e-9  # LP objective comparisons

    def as_dict(self) -> dict[str, float]:
        return dataclasses.asdict(self)


DEFAULT = Tolerances()
_current = DEFAULT


def current() -> Tolerances:
    return _current


def set_tolerances(tol: Tolerances) -> None:
    global _current
    _current = tol


@contextlib.contextmanager
def use_tolerances(**overrides: float):
    """Temporarily override some tolerances, e.g. ``use_tolerances(feas=1e-8)``."""
    global _current
    previous = _current
    _current = dataclasses.replace(previous, **overrides)
    try:
        yield _current
    finally:
        _current = previous
