"""JSON loaders for networks, polytopes, arrangements and problem bundles.

All loaders raise :class:`InputError` with a location hint (file, line or
field path) so the CLI can report malformed input precisely.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Callable

from .geometry import LinearFunctional, Polytope
from .network import network_from_dict
from .verifier import VerificationProblem


class InputError(ValueError):
    pass


def read_json(path) -> Any:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"{path}: cannot read ({exc.strerror})") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON ({exc.msg})") from exc


def _parse(where: str, build: Callable[[Any], Any], data: Any):
    try:
        return build(data)
    except KeyError as exc:
        raise InputError(f"{where}: missing field {exc.args[0]!r}") from exc
    except (TypeError, ValueError, IndexError) as exc:
        raise InputError(f"{where}: {exc}") from exc


def polytope_from_json(data: Any, where: str = "polytope") -> Polytope:
    return _parse(where, Polytope.from_dict, data)


def network_from_json(data: Any, where: str = "network"):
    return _parse(where, network_from_dict, data)


def functionals_from_json(data: Any, where: str = "arrangement") -> tuple[int, list[LinearFunctional]]:
    def build(d):
        dim = int(d["dim"])
        fs = [LinearFunctional.from_dict(e) for e in d["functionals"]]
        for k, f in enumerate(fs):
            if f.dim != dim:
                raise ValueError(f"functionals[{k}] has dimension {f.dim}, expected {dim}")
        return dim, fs

    return _parse(where, build, data)


def problem_from_json(data: Any, where: str = "bundle") -> VerificationProblem:
    if not isinstance(data, dict):
        raise InputError(f"{where}: expected a JSON object")
    for key in ("network", "input_polytope", "output_polytope"):
        if key not in data:
            raise InputError(f"{where}: missing field {key!r}")
    return VerificationProblem(
        network_from_json(data["network"], f"{where}.network"),
        polytope_from_json(data["input_polytope"], f"{where}.input_polytope"),
        polytope_from_json(data["output_polytope"], f"{where}.output_polytope"),
    )


def load_problem(bundle=None, network=None, input_polytope=None, output_polytope=None) -> VerificationProblem:
    """Load from a bundle file, or from three separate files (not both)."""
    separate = (network, input_polytope, output_polytope)
    if bundle is not None:
        if any(s is not None for s in separate):
            raise InputError("give either a bundle or separate network/polytope files, not both")
        return problem_from_json(read_json(bundle), str(bundle))
    if any(s is None for s in separate):
        raise InputError("need a bundle, or all of --network, --input and --output")
    return VerificationProblem(
        network_from_json(read_json(network), str(network)),
        polytope_from_json(read_json(input_polytope), str(input_polytope)),
        polytope_from_json(read_json(output_polytope), str(output_polytope)),
    )


def dump(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=False)
