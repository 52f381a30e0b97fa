"""Closed-form constants, step-size limits and convergence bounds.

Strategy I runs the doubly stochastic matrix and pays for the weights
through ``kappa`` and ``lambda_max``.  Strategy II runs the reversible matrix
and does not.  ``rho`` is always the second-largest eigenvalue magnitude of
whichever matrix the strategy uses.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass

from .errors import RhoOutOfRange, StepTooLarge

__all__ = [
    "Strategy",
    "BoundInputs",
    "A_of",
    "B_of",
    "step_size_max",
    "C_constants",
    "rate_bound",
    "euclidean_rate_bound",
    "consensus_bound",
]


class Strategy(str, enum.Enum):
    I = "I"
    II = "II"

    @classmethod
    def parse(cls, value) -> "Strategy":
        if isinstance(value, cls):
            return value
        key = str(value).strip().upper()
        key = {"1": "I", "2": "II", "STRATEGYI": "I", "STRATEGYII": "II"}.get(key, key)
        return cls(key)


@dataclass(frozen=True)
class BoundInputs:
    """Problem and network constants fed to every bound.

    ``E0_norm2`` is the weighted squared norm of the stacked initial
    consensus error ``[(I - M) Theta0; alpha (I - M) Y0]``.
    """

    beta: float
    upsilon2: float
    alpha: float
    T: int
    n: int
    rho: float
    c_lambda: float
    kappa: float = 1.0
    lambda_max: float = 1.0
    F0_gap: float = 0.0
    E0_norm2: float = 0.0

    def __post_init__(self) -> None:
        if self.beta <= 0:
            raise ValueError(f"beta must be > 0, got {self.beta}")
        if self.upsilon2 < 0:
            raise ValueError(f"upsilon2 must be >= 0, got {self.upsilon2}")
        if self.alpha <= 0:
            raise ValueError(f"alpha must be > 0, got {self.alpha}")
        if self.T < 0:
            raise ValueError(f"T must be >= 0, got {self.T}")
        if self.F0_gap < 0 or self.E0_norm2 < 0:
            raise ValueError("F0_gap and E0_norm2 must be >= 0")
        _check_rho(self.rho)

    def as_dict(self) -> dict:
        return asdict(self)


def _check_rho(rho: float) -> None:
    if not 0.0 <= rho < 1.0:
        raise RhoOutOfRange(f"rho must lie in [0, 1), got {rho}")


def A_of(rho: float) -> float:
    _check_rho(rho)
    r2 = rho * rho
    return (1.0 + r2) / (1.0 - r2) ** 3


def B_of(rho: float) -> float:
    _check_rho(rho)
    r2 = rho * rho
    return 2.0 * (1.0 + 3.0 * r2 * r2) / ((1.0 - r2) ** 3 * (1.0 - rho))


def _penalty(strategy: Strategy, lambda_max: float) -> float:
    return lambda_max if Strategy.parse(strategy) is Strategy.I else 1.0


def step_size_max(strategy, beta: float, rho: float, lambda_max: float = 1.0,
                  form: str = "theorem") -> float:
    """Strict upper limit on the step size.

    ``form="theorem"`` gives the rate-theorem limit
    ``sqrt(1 / (62 B)) / (L beta)``; ``form="proposition"`` gives the looser
    consensus limit ``sqrt(1 / (15 B)) / (2 L beta)``.  ``L`` is
    ``lambda_max`` for Strategy I and 1 for Strategy II.
    """
    L = _penalty(strategy, lambda_max)
    B = B_of(rho)
    if form == "theorem":
        return math.sqrt(1.0 / (62.0 * B)) / (L * beta)
    if form == "proposition":
        return math.sqrt(1.0 / (15.0 * B)) / (2.0 * L * beta)
    raise ValueError(f"unknown form {form!r}")


def _C1(strategy, x: BoundInputs) -> float:
    L = _penalty(strategy, x.lambda_max)
    return 1.0 - 60.0 * L * L * x.alpha**2 * x.beta**2 * B_of(x.rho)


def C_constants(strategy, x: BoundInputs) -> tuple[float, float]:
    """``(C1, C2)``, primed forms with ``lambda_max^2`` for Strategy I."""
    L = _penalty(strategy, x.lambda_max)
    c1 = _C1(strategy, x)
    if c1 <= 0:
        raise StepTooLarge(f"C1 = {c1:.4g} <= 0; alpha = {x.alpha:g} is too large")
    c2 = 1.0 - 2.0 * L * L * x.alpha**2 * x.beta**2 * B_of(x.rho) / c1
    if c2 <= 0:
        raise StepTooLarge(f"C2 = {c2:.4g} <= 0; alpha = {x.alpha:g} is too large")
    return c1, c2


def _init_coefficient(x: BoundInputs) -> float:
    r2 = x.rho**2
    return 6.0 * (3.0 * (1.0 - r2) ** 2 + r2) * x.beta**2 / ((1.0 - r2) ** 3 * x.n * x.T)


def _higher_order(x: BoundInputs, lam_sq: float = 1.0) -> float:
    a2b2 = x.alpha**2 * x.beta**2
    return 18.0 * a2b2 * x.upsilon2 * (A_of(x.rho) + lam_sq * 1.5 * x.c_lambda * a2b2 * B_of(x.rho))


def _require_T(x: BoundInputs) -> None:
    if x.T < 1:
        raise ValueError("rate bounds need T >= 1")


def rate_bound(strategy, x: BoundInputs) -> float:
    """Upper bound on the time-averaged squared gradient norm at the mean iterate."""
    _require_T(x)
    s = Strategy.parse(strategy)
    c1, c2 = C_constants(s, x)
    if s is Strategy.I:
        init_mult, tail_mult = x.kappa, x.lambda_max**2
    else:
        init_mult, tail_mult = 1.0, 1.0
    return (
        2.0 * x.F0_gap / (x.alpha * c2 * x.T)
        + x.alpha * x.c_lambda * x.beta * x.upsilon2 / c2
        + init_mult / (c1 * c2) * _init_coefficient(x) * x.E0_norm2
        + tail_mult / (c1 * c2) * _higher_order(x)
    )


def euclidean_rate_bound(x: BoundInputs) -> float:
    """Strategy I bound obtained by a coarse Euclidean rescaling.

    Same shape as :func:`rate_bound` for Strategy I but with ``lambda_max``
    powers in place of ``kappa`` and ``c_lambda``.
    """
    _require_T(x)
    c1, c2 = C_constants(Strategy.I, x)
    L = x.lambda_max
    return (
        2.0 * x.F0_gap / (x.alpha * c2 * x.T)
        + L**3 / (x.n * c2) * x.alpha * x.beta * x.upsilon2
        + L**2 / (c1 * c2) * _init_coefficient(x) * x.E0_norm2
        + L**4 / (c1 * c2) * _higher_order(x, lam_sq=L**2)
    )


def consensus_bound(strategy, x: BoundInputs, sum_grad_norms: float) -> float:
    """Bound on the accumulated consensus error ``sum_t ||E_t||^2`` over ``T`` steps.

    ``sum_grad_norms`` is ``sum_{t<T} ||grad F(mean iterate_t)||^2``.
    """
    if x.T == 0:
        return 0.0
    s = Strategy.parse(strategy)
    c1 = _C1(s, x)
    if c1 <= 0:
        raise StepTooLarge(f"C1 = {c1:.4g} <= 0; alpha = {x.alpha:g} is too large")
    if s is Strategy.I:
        init_mult, tail_mult = x.kappa, x.lambda_max**2
    else:
        init_mult, tail_mult = 1.0, 1.0
    r2 = x.rho**2
    B = B_of(x.rho)
    init = (18.0 * (1.0 - r2) ** 2 + 6.0 * r2) / (1.0 - r2) ** 3 * x.E0_norm2
    grad = 2.0 * x.n * x.alpha**2 * B * sum_grad_norms
    noise = 18.0 * x.n * x.alpha**2 * x.upsilon2 * (
        A_of(x.rho) + 1.5 * x.c_lambda * x.alpha**2 * x.beta**2 * B
    ) * x.T
    return (init_mult * init + tail_mult * (grad + noise)) / c1
