"""Geometry of the lambda-weighted space: norms, spectra, gaps and comparison tests.

``D`` below is ``diag(lam)``.  A matrix reversible with respect to ``lam``
becomes symmetric under ``D^{1/2} W D^{-1/2}``, so every eigensolve here is
a symmetric one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DetailedBalanceViolation, DimensionMismatch, EigensolverFailure
from .mixing import DEFAULT_LAZINESS, MatrixKind, MixingMatrix, doubly_stochastic, metropolis
from .weights_graph import Graph, WeightVector, uniform_weights

__all__ = [
    "ETA",
    "SpectralReport",
    "ComparisonReport",
    "weighted_inner",
    "weighted_norm",
    "similarity_transform",
    "spectrum",
    "symmetric_eigenvalues",
    "weighted_spectral_norm",
    "block_power_norm_closed_form",
    "block_power_coefficient",
    "assemble_block_A",
    "penalty_factor_R",
    "theorem2_condition",
    "weighted_laplacian",
    "rayleigh_second_smallest",
    "corollary_condition",
    "loewner_min_eig",
    "compare",
]

ETA = 1.8e-3
BALANCE_TOL = 1e-8


def _lam_array(lam) -> np.ndarray:
    return lam.values if isinstance(lam, WeightVector) else np.asarray(lam, dtype=float)


def weighted_inner(X: np.ndarray, Y: np.ndarray, lam: WeightVector) -> float:
    """``sum_i lam_i <x_i, y_i>`` over the rows of ``X`` and ``Y``."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    w = _lam_array(lam)
    if X.shape != Y.shape or X.shape[0] != w.shape[0]:
        raise DimensionMismatch(f"shapes {X.shape}, {Y.shape} do not match n={w.shape[0]}")
    X2 = X.reshape(X.shape[0], -1)
    Y2 = Y.reshape(Y.shape[0], -1)
    return float(np.dot(w, np.einsum("ij,ij->i", X2, Y2)))


def weighted_norm(X: np.ndarray, lam: WeightVector) -> float:
    return math.sqrt(max(weighted_inner(X, X, lam), 0.0))


def similarity_transform(m: MixingMatrix) -> np.ndarray:
    """``D^{1/2} W D^{-1/2}`` for a matrix in detailed balance with its weights."""
    lam = m.stationary.values
    flow = lam[:, None] * m.entries
    residual = float(np.max(np.abs(flow - flow.T)))
    if residual > BALANCE_TOL:
        raise DetailedBalanceViolation(
            f"detailed-balance residual {residual:.3e} exceeds {BALANCE_TOL:g}"
        )
    s = np.sqrt(lam)
    return s[:, None] * m.entries / s[None, :]


def symmetric_eigenvalues(S: np.ndarray) -> np.ndarray:
    """Eigenvalues of a symmetric matrix in descending order."""
    sym = 0.5 * (S + S.T)
    try:
        ev = np.linalg.eigvalsh(sym)
    except np.linalg.LinAlgError as exc:
        raise EigensolverFailure(str(exc)) from exc
    return ev[::-1]


@dataclass(frozen=True)
class SpectralReport:
    eigenvalues: np.ndarray
    rho: float
    gap: float
    kappa: float
    kind: MatrixKind

    @property
    def top_eigenvalue(self) -> float:
        return float(self.eigenvalues[0])


def spectrum(m: MixingMatrix) -> SpectralReport:
    """Eigenvalues, ``rho = max(|sigma_2|, |sigma_n|)`` and ``gap = 1 - rho``."""
    if m.kind is MatrixKind.DOUBLY_STOCHASTIC:
        sym = m.entries
    else:
        sym = similarity_transform(m)
    ev = symmetric_eigenvalues(sym)
    rho = float(max(abs(ev[1]), abs(ev[-1]))) if ev.size > 1 else 0.0
    return SpectralReport(
        eigenvalues=ev, rho=rho, gap=1.0 - rho, kappa=m.stationary.kappa, kind=m.kind
    )


def weighted_spectral_norm(M: np.ndarray, lam: WeightVector) -> float:
    """Operator norm induced by the lambda-weighted Frobenius norm.

    ``M`` may be ``n x n`` or a ``2n x 2n`` block matrix acting on stacked
    pairs, in which case the weights are repeated for each block.
    """
    M = np.asarray(M, dtype=float)
    w = _lam_array(lam)
    k, r = divmod(M.shape[0], w.shape[0])
    if r or M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"matrix {M.shape} incompatible with n={w.shape[0]}")
    s = np.sqrt(np.tile(w, k))
    return float(np.linalg.norm(s[:, None] * M / s[None, :], 2))


def block_power_coefficient(t: int) -> float:
    """Squared spectral norm of ``[[1, -t], [0, 1]]``, i.e. ``(t^2 + 2 + t sqrt(t^2 + 4)) / 2``."""
    return (t * t + 2.0 + t * math.sqrt(t * t + 4.0)) / 2.0


def block_power_norm_closed_form(t: int, rho: float, kappa: float = 1.0) -> float:
    """Closed form of ``||A^t||_lam^2`` for the gradient-tracking error recursion.

    Exact for the reversible strategy (``kappa = 1``); with the doubly
    stochastic matrix under non-uniform weights, pass ``kappa`` to get an
    upper bound.
    """
    if t < 1:
        raise ValueError(f"t must be >= 1, got {t}")
    return block_power_coefficient(t) * kappa * rho ** (2 * t)


def assemble_block_A(W_star: np.ndarray, t: int) -> np.ndarray:
    """``A^t = [[W^t, -t W^t], [0, W^t]]`` for ``A = [[W, -W], [0, W]]``."""
    W_star = np.asarray(W_star, dtype=float)
    n = W_star.shape[0]
    P = np.linalg.matrix_power(W_star, t)
    A = np.zeros((2 * n, 2 * n))
    A[:n, :n] = P
    A[:n, n:] = -t * P
    A[n:, n:] = P
    return A


def penalty_factor_R(lam: WeightVector) -> float:
    """``max((1 + eta) kappa^{-1/3}, lam_max^{-1/2})`` with ``eta = 1.8e-3``.

    Slightly above 1 for uniform weights.
    """
    return max((1.0 + ETA) * lam.kappa ** (-1.0 / 3.0), lam.lambda_max ** -0.5)


def theorem2_condition(gap_lambda: float, gap_J: float, lam: WeightVector) -> bool:
    """Sufficient condition for the reversible strategy to win: ``gap_lambda >= R gap_J``."""
    return gap_lambda >= penalty_factor_R(lam) * gap_J


def weighted_laplacian(g: Graph, lam: WeightVector, eps: float = DEFAULT_LAZINESS) -> np.ndarray:
    S = similarity_transform(metropolis(g, lam, eps))
    return np.eye(g.n) - 0.5 * (S + S.T)


def rayleigh_second_smallest(L: np.ndarray, null_vector: np.ndarray) -> float:
    """Smallest eigenvalue of ``L`` restricted to the complement of ``null_vector``."""
    L = np.asarray(L, dtype=float)
    u = np.asarray(null_vector, dtype=float)
    u = u / np.linalg.norm(u)
    # orthonormal basis of the complement via a full QR of the null vector
    Q, _ = np.linalg.qr(np.column_stack([u, np.eye(L.shape[0])]))
    B = Q[:, 1 : L.shape[0]]
    return float(symmetric_eigenvalues(B.T @ L @ B)[-1])


def corollary_condition(g: Graph, lam: WeightVector) -> bool:
    """Pairwise degree/weight test that implies the gap comparison.

    True iff ``R min(d_i/d_j, 1) <= sqrt(lam_i/lam_j) <= max(d_i/d_j, 1) / R``
    for every ordered pair.
    """
    R = penalty_factor_R(lam)
    d = g.degrees.astype(float)
    w = lam.values
    q = d[:, None] / d[None, :]
    s = np.sqrt(w[:, None] / w[None, :])
    lower = R * np.minimum(q, 1.0)
    upper = np.maximum(q, 1.0) / R
    off = ~np.eye(g.n, dtype=bool)
    return bool(np.all((lower <= s)[off]) and np.all((s <= upper)[off]))


def loewner_min_eig(g: Graph, lam: WeightVector, eps: float = DEFAULT_LAZINESS) -> float:
    """Smallest eigenvalue of ``L(lam) - R L(1)``."""
    R = penalty_factor_R(lam)
    diff = weighted_laplacian(g, lam, eps) - R * weighted_laplacian(g, uniform_weights(g.n), eps)
    return float(symmetric_eigenvalues(diff)[-1])


@dataclass(frozen=True)
class ComparisonReport:
    """Side-by-side spectra of ``W(lam)`` and ``W^ds`` on one graph."""

    weighted: SpectralReport
    uniform: SpectralReport
    R: float
    theorem2_holds: bool
    corollary_holds: bool
    fiedler_lambda: float
    fiedler_one: float
    uniform_weights: bool

    @property
    def rho_lambda(self) -> float:
        return self.weighted.rho

    @property
    def rho_J(self) -> float:
        return self.uniform.rho


def compare(g: Graph, lam: WeightVector, eps: float = DEFAULT_LAZINESS) -> ComparisonReport:
    wl = spectrum(metropolis(g, lam, eps))
    wd = spectrum(doubly_stochastic(g, eps))
    s = np.sqrt(lam.values)
    f_lam = rayleigh_second_smallest(weighted_laplacian(g, lam, eps), s)
    f_one = rayleigh_second_smallest(weighted_laplacian(g, uniform_weights(g.n), eps), np.ones(g.n))
    return ComparisonReport(
        weighted=wl,
        uniform=wd,
        R=penalty_factor_R(lam),
        theorem2_holds=theorem2_condition(wl.gap, wd.gap, lam),
        corollary_holds=corollary_condition(g, lam),
        fiedler_lambda=f_lam,
        fiedler_one=f_one,
        uniform_weights=lam.is_uniform,
    )
