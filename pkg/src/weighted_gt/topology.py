"""Benchmark topologies and the weight-proportional graph builder.

The builder turns a weight vector into a target degree sequence, realizes it
with Havel-Hakimi, repairs connectivity with degree-preserving edge swaps,
and falls back to a ring-plus-greedy construction when that fails.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np

from .errors import (
    BadDimensions,
    BadProbability,
    BadRadius,
    GraphicalityFailure,
    InfeasibleAverageDegree,
    TooFewNodes,
)
from .rng import as_stream
from .weights_graph import DegreeSequence, Graph, WeightVector, make_weights

__all__ = [
    "Family",
    "TopologySpec",
    "BuildResult",
    "ring",
    "grid",
    "static_exponential",
    "erdos_renyi",
    "random_geometric",
    "scale_to_degrees",
    "havel_hakimi",
    "make_connected",
    "fallback_connected",
    "realize_weights",
    "build_graph_from_weights",
    "build_topology",
]

DEFAULT_TRIALS = 50


class Family(str, enum.Enum):
    RING = "ring"
    GRID = "grid"
    STATIC_EXPONENTIAL = "exp"
    ERDOS_RENYI = "er"
    RANDOM_GEOMETRIC = "rgg"
    FROM_WEIGHTS = "from_weights"


@dataclass(frozen=True)
class TopologySpec:
    """Which graph to build.

    ``params`` by family: grid takes ``rows``, ``cols``, ``periodic``; er
    takes ``p``; rgg takes ``r``; from_weights takes ``weights``, ``dbar``
    and optionally ``K``.
    """

    family: Family
    n: int
    params: Mapping[str, Any] = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "family", Family(self.family))
        if self.n < 2:
            raise TooFewNodes(f"n must be >= 2, got {self.n}")
        p = self.params
        if self.family is Family.GRID:
            rows, cols = p.get("rows"), p.get("cols")
            if rows is None or cols is None or rows * cols != self.n:
                raise BadDimensions(f"grid needs rows*cols == n={self.n}")
        elif self.family is Family.ERDOS_RENYI:
            _check_probability(p.get("p", -1.0))
        elif self.family is Family.RANDOM_GEOMETRIC:
            _check_radius(p.get("r", -1.0))
        elif self.family is Family.FROM_WEIGHTS:
            _check_dbar(p.get("dbar", 0.0), self.n)


def _check_probability(p: float) -> None:
    if not 0.0 < p < 1.0:
        raise BadProbability(f"edge probability must lie in (0, 1), got {p}")


def _check_radius(r: float) -> None:
    if not 0.0 < r <= math.sqrt(2.0):
        raise BadRadius(f"radius must lie in (0, sqrt(2)], got {r}")


def _check_dbar(dbar: float, n: int) -> None:
    if not 1.0 <= dbar <= n - 1:
        raise InfeasibleAverageDegree(f"average degree must lie in [1, {n - 1}], got {dbar}")


# -- deterministic families -------------------------------------------------

def ring(n: int) -> Graph:
    if n < 3:
        raise TooFewNodes(f"ring needs n >= 3, got {n}")
    return Graph.from_edges(n, ((i, (i + 1) % n) for i in range(n)))


def grid(rows: int, cols: int, periodic: bool = True) -> Graph:
    """Lattice with node ``r * cols + c``; ``periodic`` wraps both axes.

    Wrapping a side of length 2 produces a duplicate edge, which the edge
    set absorbs, so a 2x2 torus is just the 4-cycle.
    """
    if rows < 2 or cols < 2:
        raise BadDimensions(f"grid needs rows, cols >= 2, got {rows}x{cols}")
    edges = []
    for r in range(rows):
        for c in range(cols):
            u = r * cols + c
            for dr, dc in ((0, 1), (1, 0)):
                rr, cc = r + dr, c + dc
                if periodic:
                    rr, cc = rr % rows, cc % cols
                elif rr >= rows or cc >= cols:
                    continue
                v = rr * cols + cc
                if v != u:
                    edges.append((u, v))
    return Graph.from_edges(rows * cols, edges)


def static_exponential(n: int) -> Graph:
    """Link each node to the nodes at power-of-two offsets up to ``n / 2``."""
    if n < 3:
        raise TooFewNodes(f"static exponential graph needs n >= 3, got {n}")
    edges = []
    hop = 1
    while hop <= n / 2:
        edges += [(i, (i + hop) % n) for i in range(n) if (i + hop) % n != i]
        hop *= 2
    return Graph.from_edges(n, edges)


# -- random families --------------------------------------------------------

def erdos_renyi(n: int, p: float, seed) -> Graph:
    """G(n, p): one uniform per pair ``(i, j)``, ``i < j``, in lexicographic order."""
    _check_probability(p)
    if n < 2:
        raise TooFewNodes(f"n must be >= 2, got {n}")
    iu, ju = np.triu_indices(n, k=1)
    keep = as_stream(seed).uniform(iu.size) < p
    return Graph.from_edges(n, zip(iu[keep].tolist(), ju[keep].tolist()))


def random_geometric(n: int, r: float, seed) -> Graph:
    """Uniform points in the unit square, joined when within distance ``r``.

    Connectivity is not guaranteed; check ``Graph.connected``.
    """
    _check_radius(r)
    if n < 2:
        raise TooFewNodes(f"n must be >= 2, got {n}")
    pts = as_stream(seed).uniform((n, 2))
    dist = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=-1))
    iu, ju = np.triu_indices(n, k=1)
    keep = dist[iu, ju] <= r
    return Graph.from_edges(n, zip(iu[keep].tolist(), ju[keep].tolist()))


# -- weight-proportional construction ---------------------------------------

def _round_half_away(x: float) -> int:
    return int(math.floor(abs(x) + 0.5)) * (1 if x >= 0 else -1)


def scale_to_degrees(lam: WeightVector, dbar: float) -> DegreeSequence:
    """Integer degrees proportional to ``lam`` with total near ``n * dbar``.

    ``S`` is the even integer nearest to ``n * dbar`` (halves round away from
    zero).  Each ``round(S * lam_i / sum(lam))`` is clipped to ``[1, n-1]``
    and an odd total is repaired at the lowest index still below ``n-1``.
    """
    n = lam.n
    _check_dbar(dbar, n)
    S = 2 * _round_half_away(n * dbar / 2.0)
    scale = S / math.fsum(lam.values)
    d = [min(n - 1, max(1, _round_half_away(scale * x))) for x in lam.values]
    if sum(d) % 2:
        k = next((i for i, x in enumerate(d) if x < n - 1), None)
        if k is None:
            raise InfeasibleAverageDegree("every degree is n-1 and the total is odd")
        d[k] += 1
    return DegreeSequence(tuple(d))


def havel_hakimi(d: DegreeSequence | Sequence[int]) -> Graph:
    """Realize ``d`` exactly or raise :class:`GraphicalityFailure`.

    Each round removes the vertex with the largest residual and joins it to
    the ``r`` largest remaining residuals.  Ties go to the lower index, which
    makes the construction deterministic.  Plain integer sequences are
    accepted unvalidated, so out-of-range demands surface as failures.
    """
    residual = list(d.degrees) if isinstance(d, DegreeSequence) else [int(x) for x in d]
    n = len(residual)
    remaining = set(range(n))
    adj: list[set[int]] = [set() for _ in range(n)]
    edges = []
    while any(residual[i] > 0 for i in remaining):
        order = sorted(remaining, key=lambda i: (-residual[i], i))
        u = order[0]
        r = residual[u]
        remaining.discard(u)
        residual[u] = 0
        if r > len(remaining):
            raise GraphicalityFailure(f"vertex {u} needs {r} neighbors, only {len(remaining)} left")
        targets = [v for v in order[1:] if v not in adj[u]][:r]
        if len(targets) < r:
            raise GraphicalityFailure(f"vertex {u} cannot find {r} new neighbors")
        for v in targets:
            residual[v] -= 1
            if residual[v] < 0:
                raise GraphicalityFailure(f"residual degree of vertex {v} went negative")
            adj[u].add(v)
            adj[v].add(u)
            edges.append((u, v))
    return Graph.from_edges(n, edges)


def make_connected(g: Graph, K: int = DEFAULT_TRIALS, seed=0) -> Graph:
    """Merge components with degree-preserving double edge swaps.

    Each of at most ``K`` rounds takes the two largest components, draws one
    internal edge from each uniformly, and rewires ``(a,b), (c,d)`` into
    ``(a,c), (b,d)`` or else ``(a,d), (b,c)``.  The result can still be
    disconnected, e.g. when a component has no edge to give up.
    """
    if g.connected:
        return g
    stream = as_stream(seed)
    edges = set(g.edges)
    n = g.n
    for _ in range(K):
        h = Graph(n, frozenset(edges))
        comps = h.components()
        if len(comps) == 1:
            return h
        comps.sort(key=lambda c: (-len(c), c[0]))
        picked = []
        for comp in comps[:2]:
            members = set(comp)
            internal = sorted(e for e in edges if e[0] in members)
            if not internal:
                break
            picked.append(internal[stream.integers(len(internal))])
        if len(picked) < 2:
            continue
        (a, b), (c, dd) = picked
        for e1, e2 in (((a, c), (b, dd)), ((a, dd), (b, c))):
            n1, n2 = tuple(sorted(e1)), tuple(sorted(e2))
            if e1[0] == e1[1] or e2[0] == e2[1] or n1 in edges or n2 in edges:
                continue
            edges -= {(a, b), (c, dd)}
            edges |= {n1, n2}
            break
    return Graph(n, frozenset(edges))


def fallback_connected(d: DegreeSequence) -> Graph:
    """Ring plus greedy edges between the neediest non-adjacent vertices."""
    n = d.n
    if n < 3:
        raise TooFewNodes(f"fallback construction needs n >= 3, got {n}")
    base = ring(n)
    edges = set(base.edges)
    need = [d.degrees[i] - 2 for i in range(n)]
    for _ in range(n * (n - 1) // 2):
        u = max(range(n), key=lambda i: (need[i], -i))
        if need[u] <= 0:
            break
        candidates = [
            v for v in range(n)
            if v != u and need[v] > 0 and tuple(sorted((u, v))) not in edges
        ]
        if not candidates:
            break
        v = max(candidates, key=lambda i: (need[i], -i))
        edges.add(tuple(sorted((u, v))))
        need[u] -= 1
        need[v] -= 1
    return Graph(n, frozenset(edges))


@dataclass(frozen=True)
class BuildResult:
    graph: Graph
    target: DegreeSequence
    exact: bool
    trials: int

    @property
    def used_fallback(self) -> bool:
        return not self.exact


def realize_weights(lam: WeightVector, dbar: float, K: int = DEFAULT_TRIALS, seed=0) -> BuildResult:
    """Full builder, reporting whether the exact degree sequence was achieved.

    One random stream drives every trial's edge swaps, so successive trials
    explore different rewirings of the same Havel-Hakimi realization.
    """
    if K < 1:
        raise ValueError(f"trial budget must be >= 1, got {K}")
    target = scale_to_degrees(lam, dbar)
    stream = as_stream(seed)
    for trial in range(1, K + 1):
        try:
            g = havel_hakimi(target)
        except GraphicalityFailure:
            continue
        g = make_connected(g, K, stream)
        if g.connected:
            return BuildResult(g, target, True, trial)
    return BuildResult(fallback_connected(target), target, False, K)


def build_graph_from_weights(lam: WeightVector, dbar: float, K: int = DEFAULT_TRIALS, seed=0) -> Graph:
    return realize_weights(lam, dbar, K, seed).graph


def build_topology(spec: TopologySpec) -> Graph:
    p = spec.params
    fam = spec.family
    if fam is Family.RING:
        return ring(spec.n)
    if fam is Family.GRID:
        return grid(int(p["rows"]), int(p["cols"]), bool(p.get("periodic", True)))
    if fam is Family.STATIC_EXPONENTIAL:
        return static_exponential(spec.n)
    if fam is Family.ERDOS_RENYI:
        return erdos_renyi(spec.n, float(p["p"]), spec.seed)
    if fam is Family.RANDOM_GEOMETRIC:
        return random_geometric(spec.n, float(p.get("r", 0.3)), spec.seed)
    lam = p["weights"]
    if not isinstance(lam, WeightVector):
        lam = make_weights(lam)
    return build_graph_from_weights(lam, float(p["dbar"]), int(p.get("K", DEFAULT_TRIALS)), spec.seed)
