"""Decentralized stochastic gradient tracking on a synthetic quadratic problem.

Node ``i`` holds the effective loss
``F_i(theta) = (zeta_i / 2) ||theta - c_i||^2 + (reg / 2) ||theta||^2`` and the
global objective is ``F = (1/n) sum_i lam_i F_i``.  One iteration of either
strategy is::

    Theta <- M (Theta - alpha Y)
    Y     <- M Y + G (g_new - g_old)

with ``(M, G) = (W_ds, diag(lam))`` for Strategy I and ``(W, I)`` for
Strategy II.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .bounds import Strategy
from .errors import BadRange, DimensionMismatch, NonFinite
from .mixing import DEFAULT_LAZINESS, MixingMatrix, doubly_stochastic, metropolis
from .rng import Stream, composite_seed
from .weights_graph import Graph, WeightVector

__all__ = [
    "QuadraticProblem",
    "Trajectory",
    "SimulationConfig",
    "MultiSeedResult",
    "generate_problem",
    "closed_form_optimum",
    "full_gradient",
    "loss",
    "global_loss",
    "stochastic_gradient",
    "noise_draw",
    "weighted_mean_iterate",
    "run",
    "multi_seed",
    "CSV_COLUMNS",
]

CSV_COLUMNS = (
    "t",
    "weighted_grad_norm",
    "consensus_param",
    "consensus_tracker",
    "dist_to_opt",
    "tracking_residual",
    "mean_iterate_grad_norm",
)


@dataclass(frozen=True)
class QuadraticProblem:
    n: int
    d: int
    zeta: np.ndarray
    centers: np.ndarray
    c_base: np.ndarray
    reg: float
    noise_sigma: float
    mu0: float
    base_seed: int
    theta0: np.ndarray
    theta0_nodes: np.ndarray

    @property
    def beta(self) -> float:
        """Smoothness constant ``max_i zeta_i + reg``."""
        return float(self.zeta.max() + self.reg)

    @property
    def upsilon2(self) -> float:
        """Gradient-noise variance ``sigma^2 d``."""
        return float(self.noise_sigma**2 * self.d)


def generate_problem(
    n: int = 16,
    d: int = 10,
    zeta_range: tuple[float, float] = (5.5, 12.5),
    mu0: float = 3.0,
    reg: float = 0.01,
    sigma: float = 1.0,
    seed: int = 0,
) -> QuadraticProblem:
    """Draw a problem instance from one stream seeded with ``seed``.

    Draw order: curvatures, base center, offset directions, shared initial
    point, per-node initial points.
    """
    lo, hi = (float(z) for z in zeta_range)
    if not 0.0 < lo <= hi:
        raise BadRange(f"curvature range must satisfy 0 < lo <= hi, got {zeta_range}")
    if n < 2 or d < 1:
        raise BadRange(f"need n >= 2 and d >= 1, got n={n}, d={d}")
    if reg < 0 or sigma < 0 or mu0 < 0:
        raise BadRange("reg, sigma and mu0 must be non-negative")
    s = Stream(seed)
    zeta = s.uniform(n, lo, hi)
    c_base = s.normal(d)
    v = s.normal((n, d))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    centers = c_base[None, :] + mu0 * v
    theta0 = s.normal(d)
    theta0_nodes = s.normal((n, d))
    arrays = [zeta, c_base, centers, theta0, theta0_nodes]
    for a in arrays:
        a.setflags(write=False)
    return QuadraticProblem(
        n=n, d=d, zeta=zeta, centers=centers, c_base=c_base, reg=float(reg),
        noise_sigma=float(sigma), mu0=float(mu0), base_seed=int(seed),
        theta0=theta0, theta0_nodes=theta0_nodes,
    )


def _weights(lam, n: int) -> np.ndarray:
    w = lam.values if isinstance(lam, WeightVector) else np.asarray(lam, dtype=float)
    if w.shape != (n,):
        raise DimensionMismatch(f"weights have shape {w.shape}, expected ({n},)")
    return w


def closed_form_optimum(p: QuadraticProblem, lam: WeightVector) -> np.ndarray:
    """Minimizer of ``(1/n) sum_i lam_i F_i``.

    Every Hessian is a multiple of the identity, so the solve is scalar:
    ``theta* = sum_i lam_i zeta_i c_i / (sum_i lam_i zeta_i + n reg)``.
    """
    w = _weights(lam, p.n)
    lz = w * p.zeta
    return (lz @ p.centers) / (lz.sum() + p.n * p.reg)


def full_gradient(p: QuadraticProblem, theta: np.ndarray) -> np.ndarray:
    """Noise-free local gradients; ``theta`` is one point or an ``n x d`` stack."""
    theta = np.asarray(theta, dtype=float)
    if theta.ndim == 1:
        theta = np.broadcast_to(theta, (p.n, p.d))
    return p.zeta[:, None] * (theta - p.centers) + p.reg * theta


def loss(p: QuadraticProblem, i: int, theta: np.ndarray) -> float:
    diff = theta - p.centers[i]
    return 0.5 * p.zeta[i] * float(diff @ diff) + 0.5 * p.reg * float(theta @ theta)


def global_loss(p: QuadraticProblem, lam: WeightVector, theta: np.ndarray) -> float:
    w = _weights(lam, p.n)
    return math.fsum(w[i] * loss(p, i, theta) for i in range(p.n)) / p.n


def noise_draw(s0: int, i: int, t: int, d: int) -> np.ndarray:
    return Stream(composite_seed(s0, i, t)).normal(d)


def stochastic_gradient(p: QuadraticProblem, i: int, t: int, theta: np.ndarray, s0: int) -> np.ndarray:
    g = p.zeta[i] * (theta - p.centers[i]) + p.reg * theta
    if p.noise_sigma == 0.0:
        return g
    return g + p.noise_sigma * noise_draw(s0, i, t, p.d)


def _noise(p: QuadraticProblem, t: int, s0: int) -> np.ndarray:
    return np.stack([noise_draw(s0, i, t, p.d) for i in range(p.n)])


def _stochastic_gradients(p: QuadraticProblem, Theta: np.ndarray, t: int, s0: int) -> np.ndarray:
    g = full_gradient(p, Theta)
    if p.noise_sigma != 0.0:
        g = g + p.noise_sigma * _noise(p, t, s0)
    return g


def weighted_mean_iterate(Theta: np.ndarray, lam: WeightVector, strategy) -> np.ndarray:
    """``(1/n) sum_i lam_i theta_i`` for Strategy II, the plain mean for Strategy I."""
    Theta = np.asarray(Theta, dtype=float)
    if Strategy.parse(strategy) is Strategy.I:
        return Theta.mean(axis=0)
    w = _weights(lam, Theta.shape[0])
    return w @ Theta / Theta.shape[0]


@dataclass(frozen=True)
class Trajectory:
    """Recorded metrics plus whole-run accumulators.

    ``sum_consensus`` is ``sum_{t<T} ||E_t||^2_{F,lam}`` and ``sum_grad_sq``
    is ``sum_{t<T} ||grad F(mean iterate_t)||^2``; both accumulate every
    step, not only recorded ones.
    """

    strategy: Strategy
    alpha: float
    T: int
    columns: dict
    sum_consensus: float
    sum_grad_sq: float
    E0_norm2: float
    F0_gap: float
    max_tracking_residual: float
    max_mean_residual: float
    theta_star: np.ndarray
    final_theta: np.ndarray = field(repr=False)
    final_tracker: np.ndarray = field(repr=False)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.columns[name]

    @property
    def t(self) -> np.ndarray:
        return self.columns["t"]

    def final(self, name: str) -> float:
        return float(self.columns[name][-1])

    def to_csv(self, path) -> None:
        _write_columns(self.columns, path)


def _write_columns(columns: dict, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for k in range(len(columns["t"])):
            row = [int(columns["t"][k])]
            row += [f"{float(columns[c][k]):.17g}" for c in CSV_COLUMNS[1:]]
            w.writerow(row)


def run(
    p: QuadraticProblem,
    lam: WeightVector,
    strategy,
    W_row: MixingMatrix,
    W_ds: MixingMatrix,
    alpha: float,
    T: int,
    s0: int | None = None,
    record_every: int = 1,
    init: str = "shared",
) -> Trajectory:
    """Run ``T`` gradient-tracking steps and record metrics every ``record_every``.

    ``init="shared"`` starts every node at ``p.theta0``; ``"independent"``
    uses ``p.theta0_nodes``.  Raises :class:`NonFinite` as soon as the state
    blows up.
    """
    s = Strategy.parse(strategy)
    if alpha <= 0:
        raise ValueError(f"alpha must be > 0, got {alpha}")
    if T < 0 or record_every < 1:
        raise ValueError("need T >= 0 and record_every >= 1")
    w = _weights(lam, p.n)
    n = p.n
    s0 = p.base_seed if s0 is None else int(s0)
    if s is Strategy.I:
        M = W_ds.entries
        G = w[:, None]
        proj = np.full(n, 1.0 / n)  # plain mean
    else:
        M = W_row.entries
        G = None
        proj = w / n
    if M.shape != (n, n):
        raise DimensionMismatch(f"mixing matrix {M.shape} does not match n={n}")

    theta_star = closed_form_optimum(p, w)
    F_star = global_loss(p, w, theta_star)
    if init == "shared":
        Theta = np.tile(p.theta0, (n, 1))
    elif init == "independent":
        Theta = np.array(p.theta0_nodes, dtype=float)
    else:
        raise ValueError(f"init must be 'shared' or 'independent', got {init!r}")

    g = _stochastic_gradients(p, Theta, 0, s0)
    Y = g.copy() if G is None else G * g

    recorded: dict[str, list] = {c: [] for c in CSV_COLUMNS}
    sum_cons = 0.0
    sum_grad = 0.0
    max_track = 0.0
    max_mean = 0.0
    E0 = None
    F0 = None

    def wsq(X: np.ndarray) -> float:
        return float(w @ np.einsum("ij,ij->i", X, X))

    # overflow in diagnostics precedes the non-finite state check by one step
    with np.errstate(over="ignore", invalid="ignore"):
        for t in range(T + 1):
            mean = proj @ Theta
            dev_theta = Theta - mean
            dev_y = Y - proj @ Y
            cons_p = wsq(dev_theta)
            cons_y = alpha * alpha * wsq(dev_y)
            grad_mean = w @ full_gradient(p, mean) / n
            target = w @ g / n
            track = float(np.linalg.norm(proj @ Y - target) / (1.0 + np.linalg.norm(Y)))
            max_track = max(max_track, track)
            if t == 0:
                E0 = cons_p + cons_y
                F0 = max(global_loss(p, w, mean) - F_star, 0.0)
            if t < T:
                sum_cons += cons_p + cons_y
                sum_grad += float(grad_mean @ grad_mean)
            if t % record_every == 0 or t == T:
                recorded["t"].append(t)
                recorded["weighted_grad_norm"].append(float(np.linalg.norm(w @ full_gradient(p, Theta) / n)))
                recorded["consensus_param"].append(cons_p)
                recorded["consensus_tracker"].append(cons_y)
                recorded["dist_to_opt"].append(float(np.linalg.norm(mean - theta_star)))
                recorded["tracking_residual"].append(track)
                recorded["mean_iterate_grad_norm"].append(float(np.linalg.norm(grad_mean)))
            if t == T:
                break

            Theta = M @ (Theta - alpha * Y)
            g_new = _stochastic_gradients(p, Theta, t + 1, s0)
            diff = g_new - g
            Y = M @ Y + (diff if G is None else G * diff)
            if not (np.isfinite(Theta).all() and np.isfinite(Y).all()):
                raise NonFinite(f"state became non-finite at step {t + 1} with alpha={alpha:g}", t=t + 1)
            step = proj @ Theta - mean + alpha * target
            max_mean = max(max_mean, float(np.linalg.norm(step) / (1.0 + np.linalg.norm(mean))))
            g = g_new

    columns = {k: np.asarray(v, dtype=int if k == "t" else float) for k, v in recorded.items()}
    return Trajectory(
        strategy=s, alpha=float(alpha), T=int(T), columns=columns,
        sum_consensus=sum_cons, sum_grad_sq=sum_grad, E0_norm2=float(E0), F0_gap=float(F0),
        max_tracking_residual=max_track, max_mean_residual=max_mean,
        theta_star=theta_star, final_theta=Theta, final_tracker=Y,
    )


@dataclass(frozen=True)
class SimulationConfig:
    """Everything one strategy needs to run across seeds."""

    graph: Graph
    weights: WeightVector
    strategy: Strategy
    alpha: float
    T: int = 240
    record_every: int = 3
    eps: float = DEFAULT_LAZINESS
    d: int = 10
    zeta_range: tuple = (5.5, 12.5)
    mu0: float = 3.0
    reg: float = 0.01
    sigma: float = 1.0
    init: str = "shared"

    def problem(self, seed: int) -> QuadraticProblem:
        return generate_problem(self.graph.n, self.d, self.zeta_range, self.mu0, self.reg, self.sigma, seed)

    def matrices(self) -> tuple[MixingMatrix, MixingMatrix]:
        return metropolis(self.graph, self.weights, self.eps), doubly_stochastic(self.graph, self.eps)


@dataclass(frozen=True)
class MultiSeedResult:
    seeds: tuple
    mean: dict
    runs: tuple

    def final(self, name: str) -> float:
        return float(self.mean[name][-1])

    def to_csv(self, path) -> None:
        _write_columns(self.mean, path)


def _run_seed(args) -> Trajectory:
    cfg, seed, mats = args
    W_row, W_ds = mats
    return run(cfg.problem(seed), cfg.weights, cfg.strategy, W_row, W_ds,
               cfg.alpha, cfg.T, s0=seed, record_every=cfg.record_every, init=cfg.init)


def multi_seed(cfg: SimulationConfig, seeds: Sequence[int], out_dir=None, jobs: int = 1) -> MultiSeedResult:
    """Run one configuration per seed and average the recorded metrics.

    Seed ``s`` draws the problem instance and is also the noise base seed.
    """
    seeds = tuple(int(s) for s in seeds)
    if not seeds:
        raise ValueError("need at least one seed")
    mats = cfg.matrices()
    tasks = [(cfg, s, mats) for s in seeds]
    if jobs > 1 and len(seeds) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(seeds))) as pool:
            runs = tuple(pool.map(_run_seed, tasks))
    else:
        runs = tuple(_run_seed(task) for task in tasks)
    mean = {"t": runs[0].t.copy()}
    for c in CSV_COLUMNS[1:]:
        mean[c] = np.mean([r[c] for r in runs], axis=0)
    if out_dir is not None:
        out = Path(out_dir)
        for s, r in zip(seeds, runs):
            r.to_csv(out / f"seed_{s}.csv")
        _write_columns(mean, out / "mean.csv")
    return MultiSeedResult(seeds=seeds, mean=mean, runs=runs)
