"""Lazy Metropolis-Hastings mixing matrices with a prescribed stationary weight."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import BadLaziness, DimensionMismatch, Disconnected
from .weights_graph import Graph, WeightVector, uniform_weights

__all__ = [
    "MatrixKind",
    "MixingMatrix",
    "ValidationReport",
    "metropolis",
    "doubly_stochastic",
    "validate",
    "dump_csv",
    "load_csv",
    "DEFAULT_LAZINESS",
    "VALIDATION_TOL",
]

DEFAULT_LAZINESS = 0.3
VALIDATION_TOL = 1e-10


class MatrixKind(str, enum.Enum):
    ROW_STOCHASTIC_LAMBDA = "RowStochasticLambda"
    DOUBLY_STOCHASTIC = "DoublyStochastic"


@dataclass(frozen=True)
class MixingMatrix:
    """Dense ``n x n`` transition matrix together with its declared stationary weights.

    The constructor only checks shapes so that faulty matrices can still be
    wrapped and handed to :func:`validate`.
    """

    entries: np.ndarray
    stationary: WeightVector
    laziness: float
    kind: MatrixKind

    def __post_init__(self) -> None:
        w = np.array(self.entries, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise DimensionMismatch(f"mixing matrix must be square, got {w.shape}")
        if w.shape[0] != self.stationary.n:
            raise DimensionMismatch("matrix size and stationary weight length differ")
        w.setflags(write=False)
        object.__setattr__(self, "entries", w)
        object.__setattr__(self, "kind", MatrixKind(self.kind))

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def with_entries(self, entries: np.ndarray) -> "MixingMatrix":
        return MixingMatrix(entries, self.stationary, self.laziness, self.kind)


def _check_inputs(g: Graph, lam: WeightVector, eps: float) -> None:
    if not 0.0 < eps < 1.0:
        raise BadLaziness(f"laziness must lie in (0, 1), got {eps}")
    if g.n != lam.n:
        raise DimensionMismatch(f"graph has {g.n} nodes but weights have {lam.n}")
    if not g.connected:
        raise Disconnected("mixing matrix requires a connected graph")


def _assemble(g: Graph, lam: np.ndarray, eps: float) -> np.ndarray:
    n = g.n
    deg = g.degrees.astype(float)
    w = np.zeros((n, n))
    if g.edges:
        i, j = np.array(sorted(g.edges)).T
        # both orientations of each edge
        src = np.concatenate([i, j])
        dst = np.concatenate([j, i])
        ratio = (lam[dst] * deg[src]) / (lam[src] * deg[dst])
        w[src, dst] = (1.0 - eps) / deg[src] * np.minimum(1.0, ratio)
    w[np.diag_indices(n)] = 1.0 - w.sum(axis=1)
    return w


def metropolis(g: Graph, lam: WeightVector, eps: float = DEFAULT_LAZINESS) -> MixingMatrix:
    """Row-stochastic ``W`` reversible with respect to ``lam / n``.

    Off-diagonal neighbor entries are
    ``(1 - eps) / d_i * min(1, lam_j d_i / (lam_i d_j))`` and the diagonal
    absorbs the remaining mass.
    """
    _check_inputs(g, lam, eps)
    return MixingMatrix(_assemble(g, lam.values, eps), lam, eps, MatrixKind.ROW_STOCHASTIC_LAMBDA)


def doubly_stochastic(g: Graph, eps: float = DEFAULT_LAZINESS) -> MixingMatrix:
    """Symmetric special case of :func:`metropolis` with uniform weights."""
    lam = uniform_weights(g.n)
    _check_inputs(g, lam, eps)
    return MixingMatrix(_assemble(g, lam.values, eps), lam, eps, MatrixKind.DOUBLY_STOCHASTIC)


@dataclass(frozen=True)
class ValidationReport:
    row_sum: float
    worst_row: int
    stationarity: float
    detailed_balance: float
    diagonal_floor: float
    negative_entries: float
    column_sum: float | None
    tol: float = VALIDATION_TOL

    @property
    def passed(self) -> bool:
        checks = [self.row_sum, self.stationarity, self.detailed_balance,
                  self.diagonal_floor, self.negative_entries]
        if self.column_sum is not None:
            checks.append(self.column_sum)
        return all(c <= self.tol for c in checks)

    def __bool__(self) -> bool:
        return self.passed


def validate(m: MixingMatrix, tol: float = VALIDATION_TOL) -> ValidationReport:
    """Report the largest violation of each matrix invariant.

    All residuals are max-norms.  ``diagonal_floor`` is how far the smallest
    diagonal entry sits below the laziness ``eps`` (0 when satisfied).
    """
    w = m.entries
    lam = m.stationary.values
    n = m.n
    row_err = np.abs(w.sum(axis=1) - 1.0)
    pi = lam / n
    stat = float(np.max(np.abs(pi @ w - pi)))
    flow = lam[:, None] * w
    balance = float(np.max(np.abs(flow - flow.T)))
    floor = float(max(0.0, m.laziness - np.min(np.diag(w))))
    negative = float(max(0.0, -np.min(w)))
    col = None
    if m.kind is MatrixKind.DOUBLY_STOCHASTIC:
        col = float(np.max(np.abs(w.sum(axis=0) - 1.0)))
    return ValidationReport(
        row_sum=float(row_err.max()),
        worst_row=int(np.argmax(row_err)),
        stationarity=stat,
        detailed_balance=balance,
        diagonal_floor=floor,
        negative_entries=negative,
        column_sum=col,
        tol=tol,
    )


def dump_csv(m: MixingMatrix, path) -> None:
    """Write the entries at 17 significant digits, which round-trips doubles."""
    lines = [",".join(f"{x:.17g}" for x in row) for row in m.entries]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_csv(path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", ndmin=2)
