"""ReLU networks as parameter lists, their composition, and TLL networks."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import block_diag

from . import tolerances
from .geometry import AffineFunction, DimensionError


@dataclass(frozen=True, eq=False)
class Layer:
    """``z -> max(W z + b, 0)`` if ``nonlinear`` else ``z -> W z + b``."""

    W: np.ndarray
    b: np.ndarray
    nonlinear: bool = True

    def __post_init__(self):
        W = np.atleast_2d(np.array(self.W, dtype=float))
        b = np.array(self.b, dtype=float).reshape(-1)
        if W.shape[0] != b.shape[0]:
            raise DimensionError(f"layer W is {W.shape} but b has {b.shape[0]} entries")
        W.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "nonlinear", bool(self.nonlinear))

    @property
    def in_dim(self) -> int:
        return self.W.shape[1]

    @property
    def out_dim(self) -> int:
        return self.W.shape[0]

    def __call__(self, z: np.ndarray) -> np.ndarray:
        y = self.W @ z + self.b
        return np.maximum(y, 0.0) if self.nonlinear else y


class ReluNetwork:
    """An ordered list of layers; the last one must be linear."""

    def __init__(self, layers: Sequence[Layer]):
        layers = tuple(layers)
        if not layers:
            raise ValueError("a network needs at least one layer")
        for prev, nxt in zip(layers, layers[1:]):
            if nxt.in_dim != prev.out_dim:
                raise DimensionError(f"layer with {prev.out_dim} outputs feeds layer with {nxt.in_dim} inputs")
        if layers[-1].nonlinear:
            raise ValueError("the final layer of a network must be linear")
        self.layers = layers

    @property
    def arch(self) -> list[tuple[int, int]]:
        return [(L.in_dim, L.out_dim) for L in self.layers]

    @property
    def in_dim(self) -> int:
        return self.layers[0].in_dim

    @property
    def out_dim(self) -> int:
        return self.layers[-1].out_dim

    @property
    def depth(self) -> int:
        return len(self.layers)

    def is_shallow(self) -> bool:
        return len(self.layers) == 2 and self.layers[0].nonlinear

    def __call__(self, x) -> np.ndarray:
        return eval_network(self, x)

    def __repr__(self):
        return f"ReluNetwork(arch={self.arch})"

    def to_dict(self) -> dict:
        return {
            "kind": "relu",
            "layers": [{"W": L.W.tolist(), "b": L.b.tolist(), "nonlinear": L.nonlinear} for L in self.layers],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ReluNetwork":
        return cls([Layer(e["W"], e["b"], e["nonlinear"]) for e in d["layers"]])


def eval_network(net: ReluNetwork, x) -> np.ndarray:
    z = np.asarray(x, dtype=float).reshape(-1)
    if z.shape[0] != net.in_dim:
        raise DimensionError(f"input has dimension {z.shape[0]}, network expects {net.in_dim}")
    for layer in net.layers:
        z = layer(z)
    return z


def linearize_at(net: ReluNetwork, x) -> AffineFunction:
    """Affine map that agrees with ``net`` on the activation cell containing ``x``.

    Neurons with exactly zero pre-activation are treated as inactive.
    """
    z = np.asarray(x, dtype=float).reshape(-1)
    W = np.eye(net.in_dim)
    b = np.zeros(net.in_dim)
    for layer in net.layers:
        pre = layer.W @ z + layer.b
        W = layer.W @ W
        b = layer.W @ b + layer.b
        if layer.nonlinear:
            active = (pre > 0).astype(float)
            W = active[:, None] * W
            b = active * b
            z = np.maximum(pre, 0.0)
        else:
            z = pre
    return AffineFunction(W, b)


def sequential_compose(a: ReluNetwork, b: ReluNetwork) -> ReluNetwork:
    """The network ``x -> a(b(x))``: ``b``'s layers followed by ``a``'s."""
    if b.out_dim != a.in_dim:
        raise DimensionError(f"inner network has {b.out_dim} outputs, outer expects {a.in_dim}")
    return ReluNetwork(b.layers + a.layers)


def parallel_compose(a: ReluNetwork, b: ReluNetwork) -> ReluNetwork:
    """The network ``x -> (a(x), b(x))`` on a shared input.

    First layers are stacked; later layers are block diagonal so each branch
    keeps reading its own hidden units.
    """
    if a.in_dim != b.in_dim:
        raise DimensionError("parallel composition needs equal input dimensions")
    if a.depth != b.depth:
        raise ValueError(f"parallel composition needs equal depth ({a.depth} != {b.depth})")
    layers = []
    for k, (La, Lb) in enumerate(zip(a.layers, b.layers)):
        if La.nonlinear != Lb.nonlinear:
            raise ValueError(f"layer {k} kinds differ")
        W = np.vstack([La.W, Lb.W]) if k == 0 else block_diag(La.W, Lb.W)
        layers.append(Layer(W, np.concatenate([La.b, Lb.b]), La.nonlinear))
    return ReluNetwork(layers)


def parallel_all(nets: Sequence[ReluNetwork]) -> ReluNetwork:
    out = nets[0]
    for net in nets[1:]:
        out = parallel_compose(out, net)
    return out


def _direct_sum(nets: Sequence[ReluNetwork]) -> ReluNetwork:
    """Side-by-side networks on disjoint input blocks."""
    layers = []
    for group in zip(*(net.layers for net in nets)):
        layers.append(
            Layer(block_diag(*(L.W for L in group)), np.concatenate([L.b for L in group]), group[0].nonlinear)
        )
    return ReluNetwork(layers)


# -- min/max building blocks -------------------------------------------------

_TWO_MIN = ReluNetwork(
    [
        Layer([[-1, -1], [1, 1], [1, -1], [-1, 1]], np.zeros(4), True),
        Layer([[-0.5, 0.5, -0.5, -0.5]], [0.0], False),
    ]
)
_TWO_MAX = ReluNetwork(
    [
        Layer([[1, 1], [-1, -1], [-1, 1], [1, -1]], np.zeros(4), True),
        Layer([[0.5, -0.5, 0.5, 0.5]], [0.0], False),
    ]
)


def two_min_network() -> ReluNetwork:
    return _TWO_MIN


def two_max_network() -> ReluNetwork:
    return _TWO_MAX


def input_replicator(n: int, m: int) -> ReluNetwork:
    """Linear ``R^n -> R^m`` (``m > n``) passing inputs through, repeating the last one."""
    if not 0 < n < m:
        raise ValueError("input replicator needs 0 < n < m")
    W = np.zeros((m, n))
    W[:n] = np.eye(n)
    W[n:, n - 1] = 1.0
    return ReluNetwork([Layer(W, np.zeros(m), False)])


def pairwise_network(n: int, kind: str = "min") -> ReluNetwork:
    """``R^n -> R^ceil(n/2)``: min (or max) of consecutive pairs, odd input repeated."""
    block = _TWO_MIN if kind == "min" else _TWO_MAX
    half = -(-n // 2)
    stage = _direct_sum([block] * half)
    if n % 2:
        stage = sequential_compose(stage, input_replicator(n, 2 * half))
    return stage


def _reduce_network(k: int, kind: str) -> ReluNetwork:
    if k < 2:
        raise ValueError(f"min/max network needs k >= 2, got {k}")
    net = pairwise_network(k, kind)
    width = -(-k // 2)
    while width > 1:
        net = sequential_compose(pairwise_network(width, kind), net)
        width = -(-width // 2)
    return net


def build_min_network(k: int) -> ReluNetwork:
    return _reduce_network(k, "min")


def build_max_network(k: int) -> ReluNetwork:
    return _reduce_network(k, "max")


# -- TLL networks ------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TllComponent:
    """One scalar TLL: local functions ``W_ell x + b_ell`` and 0-based selector sets."""

    W_ell: np.ndarray
    b_ell: np.ndarray
    selectors: tuple[frozenset[int], ...]

    def __post_init__(self):
        W = np.atleast_2d(np.array(self.W_ell, dtype=float))
        b = np.array(self.b_ell, dtype=float).reshape(-1)
        if W.shape[0] != b.shape[0]:
            raise DimensionError("W_ell and b_ell disagree on N")
        sels = tuple(frozenset(int(k) for k in s) for s in self.selectors)
        N = W.shape[0]
        if not sels:
            raise ValueError("a TLL component needs at least one selector set")
        for s in sels:
            if not s:
                raise ValueError("selector sets must be nonempty")
            if min(s) < 0 or max(s) >= N:
                raise ValueError(f"selector index out of range 0..{N - 1}: {sorted(s)}")
        P = np.column_stack([W, b])
        scale = max(1.0, float(np.max(np.abs(P))))
        for i in range(N):
            for j in range(i + 1, N):
                if np.max(np.abs(P[i] - P[j])) <= tolerances.current().zero * scale:
                    raise ValueError(f"local linear functions {i + 1} and {j + 1} coincide")
        W.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "W_ell", W)
        object.__setattr__(self, "b_ell", b)
        object.__setattr__(self, "selectors", sels)

    @property
    def N(self) -> int:
        return self.W_ell.shape[0]

    @property
    def M(self) -> int:
        return len(self.selectors)


class TllNetwork:
    """Multi-output TLL: ``m`` equally sized scalar components sharing the input."""

    def __init__(self, components: Sequence[TllComponent]):
        components = tuple(components)
        if not components:
            raise ValueError("a TLL network needs at least one component")
        first = components[0]
        for comp in components:
            if (comp.N, comp.M, comp.W_ell.shape[1]) != (first.N, first.M, first.W_ell.shape[1]):
                raise ValueError("TLL components must share N, M and input dimension")
        self.components = components

    @property
    def n(self) -> int:
        return self.components[0].W_ell.shape[1]

    in_dim = n

    @property
    def m(self) -> int:
        return len(self.components)

    out_dim = m

    @property
    def N(self) -> int:
        return self.components[0].N

    @property
    def M(self) -> int:
        return self.components[0].M

    def __call__(self, x) -> np.ndarray:
        return tll_eval_lattice(self, x)

    def __repr__(self):
        return f"TllNetwork(n={self.n}, m={self.m}, N={self.N}, M={self.M})"

    def to_dict(self) -> dict:
        return {
            "kind": "tll",
            "n": self.n,
            "m": self.m,
            "N": self.N,
            "M": self.M,
            "components": [
                {
                    "W_ell": c.W_ell.tolist(),
                    "b_ell": c.b_ell.tolist(),
                    "selectors": [sorted(k + 1 for k in s) for s in c.selectors],
                }
                for c in self.components
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TllNetwork":
        comps = [
            TllComponent(c["W_ell"], c["b_ell"], [[k - 1 for k in s] for s in c["selectors"]])
            for c in d["components"]
        ]
        net = cls(comps)
        for key in ("n", "m", "N", "M"):
            if key in d and int(d[key]) != getattr(net, key):
                raise ValueError(f"declared {key}={d[key]} does not match components ({getattr(net, key)})")
        return net


def tll_eval_lattice(t: TllNetwork, x) -> np.ndarray:
    """Evaluate ``max_j min_{k in s_j}`` of the local functions, per component."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != t.n:
        raise DimensionError(f"input has dimension {x.shape[0]}, TLL expects {t.n}")
    out = np.empty(t.m)
    for kappa, comp in enumerate(t.components):
        v = comp.W_ell @ x + comp.b_ell
        out[kappa] = max(min(v[k] for k in s) for s in comp.selectors)
    return out


def selector_matrix(selector: frozenset[int], N: int) -> np.ndarray:
    """``N x N`` 0/1 matrix picking the selected rows, padding with the last one."""
    rows = sorted(selector)
    rows += [rows[-1]] * (N - len(rows))
    S = np.zeros((N, N))
    S[np.arange(N), rows] = 1.0
    return S


def _component_to_relu(comp: TllComponent) -> ReluNetwork:
    N = comp.N
    local = ReluNetwork([Layer(comp.W_ell, comp.b_ell, False)])
    branches = []
    for s in comp.selectors:
        select = ReluNetwork([Layer(selector_matrix(s, N), np.zeros(N), False)])
        branch = select if N == 1 else sequential_compose(build_min_network(N), select)
        branches.append(branch)
    body = parallel_all(branches)
    if comp.M > 1:
        body = sequential_compose(build_max_network(comp.M), body)
    return sequential_compose(body, local)


def tll_to_relu(t: TllNetwork) -> ReluNetwork:
    """ReLU realization: local layer, selectors, min networks, then a max network."""
    return parallel_all([_component_to_relu(c) for c in t.components])


def network_from_dict(d: dict):
    kind = d.get("kind")
    if kind == "relu":
        return ReluNetwork.from_dict(d)
    if kind == "tll":
        return TllNetwork.from_dict(d)
    raise ValueError(f"unknown network kind {kind!r}")
