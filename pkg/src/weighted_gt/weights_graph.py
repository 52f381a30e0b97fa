"""Node weights, undirected simple graphs, and their text formats.

Nodes are 0-based everywhere in the library.  The edge-list file format and
CLI output are 1-based.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatch, NonPositiveWeight, TooFewNodes

__all__ = [
    "WeightVector",
    "Graph",
    "DegreeSequence",
    "GraphStats",
    "make_weights",
    "uniform_weights",
    "is_connected",
    "graph_stats",
    "write_edgelist",
    "read_edgelist",
    "format_edgelist",
    "write_weights",
    "read_weights",
]


@dataclass(frozen=True)
class WeightVector:
    """Positive node weights normalized so that they sum to ``n``.

    Build instances with :func:`make_weights`; the constructor trusts its
    input apart from a cheap positivity check.
    """

    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.array(self.values, dtype=float)
        if v.ndim != 1:
            raise DimensionMismatch("weights must be a 1-D vector")
        if np.any(~np.isfinite(v)) or np.any(v <= 0):
            raise NonPositiveWeight("all weights must be finite and > 0")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def lambda_max(self) -> float:
        return float(self.values.max())

    @property
    def lambda_min(self) -> float:
        return float(self.values.min())

    @property
    def c_lambda(self) -> float:
        """``sum(lambda_i^2) / n^2``; equals ``1/n`` for uniform weights."""
        return float(np.dot(self.values, self.values) / self.n**2)

    @property
    def kappa(self) -> float:
        """Metric distortion ``sqrt(lambda_max / lambda_min)``."""
        return math.sqrt(self.lambda_max / self.lambda_min)

    @property
    def is_uniform(self) -> bool:
        return bool(np.all(self.values == self.values[0]))

    def __len__(self) -> int:
        return self.n

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, WeightVector):
            return NotImplemented
        return np.array_equal(self.values, other.values)

    def __hash__(self) -> int:
        return hash(self.values.tobytes())


def make_weights(raw: Iterable[float]) -> WeightVector:
    """Rescale positive weights to sum to their count.

    >>> make_weights([2, 6]).values.tolist()
    [0.5, 1.5]
    """
    v = np.asarray(list(raw) if not isinstance(raw, np.ndarray) else raw, dtype=float)
    if v.ndim != 1:
        raise DimensionMismatch("weights must be a 1-D vector")
    if v.shape[0] < 2:
        raise TooFewNodes(f"need at least 2 weights, got {v.shape[0]}")
    if np.any(~np.isfinite(v)) or np.any(v <= 0):
        raise NonPositiveWeight("all weights must be finite and > 0")
    n = v.shape[0]
    total = math.fsum(v)
    if total == n:
        return WeightVector(v.copy())
    return WeightVector(v * (n / total))


def uniform_weights(n: int) -> WeightVector:
    return make_weights(np.ones(n))


def _norm_edge(i: int, j: int) -> tuple[int, int]:
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph on nodes ``0..n-1``.

    ``edges`` holds normalized pairs ``(i, j)`` with ``i < j``.  Sorted
    neighbor lists are precomputed for matrix assembly and traversal.
    """

    n: int
    edges: frozenset
    adjacency: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.n < 1:
            raise TooFewNodes("graph needs at least one node")
        norm = set()
        for e in self.edges:
            i, j = (int(x) for x in e)
            if i == j:
                raise ValueError(f"self-loop on node {i}")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"edge ({i}, {j}) out of range for n={self.n}")
            norm.add(_norm_edge(i, j))
        nbrs: list[list[int]] = [[] for _ in range(self.n)]
        for i, j in norm:
            nbrs[i].append(j)
            nbrs[j].append(i)
        object.__setattr__(self, "edges", frozenset(norm))
        object.__setattr__(self, "adjacency", tuple(tuple(sorted(a)) for a in nbrs))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]]) -> "Graph":
        """Build a graph, silently dropping duplicate edges."""
        return cls(n, frozenset(_norm_edge(int(a), int(b)) for a, b in edges))

    @property
    def degrees(self) -> np.ndarray:
        return np.array([len(a) for a in self.adjacency], dtype=int)

    def neighbors(self, i: int) -> tuple[int, ...]:
        return self.adjacency[i]

    def has_edge(self, i: int, j: int) -> bool:
        return _norm_edge(i, j) in self.edges

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def connected(self) -> bool:
        return is_connected(self)

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def adjacency_matrix(self) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=int)
        for i, j in self.edges:
            a[i, j] = a[j, i] = 1
        return a

    def components(self) -> list[list[int]]:
        """Connected components as sorted node lists, ordered by smallest node."""
        seen = [False] * self.n
        comps = []
        for s in range(self.n):
            if seen[s]:
                continue
            seen[s] = True
            comp, queue = [s], deque([s])
            while queue:
                u = queue.popleft()
                for v in self.adjacency[u]:
                    if not seen[v]:
                        seen[v] = True
                        comp.append(v)
                        queue.append(v)
            comps.append(sorted(comp))
        return comps


@dataclass(frozen=True)
class DegreeSequence:
    """Target degrees, each in ``[1, n-1]`` with an even total."""

    degrees: tuple

    def __post_init__(self) -> None:
        d = tuple(int(x) for x in self.degrees)
        n = len(d)
        if n < 2:
            raise TooFewNodes("degree sequence needs at least 2 entries")
        bad = [x for x in d if not 1 <= x <= n - 1]
        if bad:
            raise ValueError(f"degrees must lie in [1, {n - 1}], got {bad}")
        if sum(d) % 2:
            raise ValueError("degree sum must be even")
        object.__setattr__(self, "degrees", d)

    @property
    def n(self) -> int:
        return len(self.degrees)

    def as_array(self) -> np.ndarray:
        return np.array(self.degrees, dtype=int)


def is_connected(g: Graph) -> bool:
    """Breadth-first search from node 0 reaches every node."""
    if g.n == 0:
        return True
    seen = {0}
    queue = deque([0])
    while queue:
        u = queue.popleft()
        for v in g.adjacency[u]:
            if v not in seen:
                seen.add(v)
                queue.append(v)
    return len(seen) == g.n


@dataclass(frozen=True)
class GraphStats:
    n: int
    num_edges: int
    min_degree: int
    max_degree: int
    mean_degree: float
    connected: bool
    c_lambda: float
    kappa: float


def graph_stats(g: Graph, lam: WeightVector) -> GraphStats:
    if g.n != lam.n:
        raise DimensionMismatch(f"graph has {g.n} nodes but weights have {lam.n}")
    deg = g.degrees
    return GraphStats(
        n=g.n,
        num_edges=g.num_edges,
        min_degree=int(deg.min()),
        max_degree=int(deg.max()),
        mean_degree=float(deg.mean()),
        connected=is_connected(g),
        c_lambda=lam.c_lambda,
        kappa=lam.kappa,
    )


# -- text formats -----------------------------------------------------------

def format_edgelist(g: Graph) -> str:
    lines = [f"n {g.n}"]
    lines += [f"{i + 1} {j + 1}" for i, j in g.sorted_edges()]
    return "\n".join(lines) + "\n"


def write_edgelist(g: Graph, path) -> None:
    Path(path).write_text(format_edgelist(g), encoding="utf-8")


def read_edgelist(path) -> Graph:
    lines = [ln.split() for ln in Path(path).read_text(encoding="utf-8").splitlines()]
    lines = [ln for ln in lines if ln and not ln[0].startswith("#")]
    if not lines or lines[0][0] != "n" or len(lines[0]) != 2:
        raise ValueError(f"{path}: first line must be 'n <count>'")
    n = int(lines[0][1])
    return Graph.from_edges(n, ((int(a) - 1, int(b) - 1) for a, b in lines[1:]))


def write_weights(lam: WeightVector, path) -> None:
    text = "".join(f"{x!r}\n" for x in lam.values.tolist())
    Path(path).write_text(text, encoding="utf-8")


def read_weights(path) -> WeightVector:
    vals = [float(s) for s in Path(path).read_text(encoding="utf-8").split()]
    return make_weights(vals)
