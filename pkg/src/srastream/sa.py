"""Truncated stochastic-approximation engine.

The iterate moves as ``theta <- theta - rho * G`` where ``G`` equals the raw
stochastic update when its Euclidean norm is at most the threshold ``gamma``
and is zeroed otherwise. The threshold controls robustness (large updates,
typically caused by outliers, are dropped); the step-size schedule controls
adaptivity. With ``gamma = inf`` the scheme degenerates to plain SA.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class RhoSchedule:
    """Step-size schedule; ``at(t)`` is the step size used for step t >= 1."""

    def at(self, t: int) -> float:
        raise NotImplementedError

    def max_rho(self, n: int) -> float:
        """Largest step size over steps 1..n+1."""
        return self.at(1)

    def sum_rho(self, n: int) -> float:
        """Sum of step sizes over steps 1..n+1."""
        raise NotImplementedError

    def sum_rho_sq(self, n: int) -> float:
        """Sum of squared step sizes over steps 1..n+1."""
        raise NotImplementedError


@dataclass(frozen=True)
class ConstantRho(RhoSchedule):
    rho: float

    def __post_init__(self):
        if not 0.0 < self.rho <= 1.0:
            raise ValueError("constant step size must be in (0, 1]")

    def at(self, t: int) -> float:
        return self.rho

    def sum_rho(self, n: int) -> float:
        return (n + 1) * self.rho

    def sum_rho_sq(self, n: int) -> float:
        return (n + 1) * self.rho**2


def _harmonic(n: int, power: float = 1.0) -> float:
    # exact compensated sum, chunked so n up to 1e7 stays fast
    total = 0.0
    parts = []
    for start in range(1, n + 1, 1_000_000):
        stop = min(start + 1_000_000, n + 1)
        t = np.arange(start, stop, dtype=float)
        parts.append(float(np.sum(1.0 / t**power)))
    return math.fsum(parts) if parts else total


@dataclass(frozen=True)
class InvSqrtRho(RhoSchedule):
    """rho_t = c / sqrt(t)."""

    c: float

    def __post_init__(self):
        if self.c <= 0:
            raise ValueError("c must be positive")

    def at(self, t: int) -> float:
        return self.c / math.sqrt(t)

    def sum_rho(self, n: int) -> float:
        return self.c * _harmonic(n + 1, 0.5)

    def sum_rho_sq(self, n: int) -> float:
        return self.c**2 * _harmonic(n + 1, 1.0)


@dataclass(frozen=True)
class InvTRho(RhoSchedule):
    """rho_t = 1/(t + offset); turns the SA recursion into a running average.

    A positive offset counts initialization data as prior observations, so
    the average continues from the seeded statistics instead of overwriting
    them at the first step.
    """

    offset: int = 0

    def __post_init__(self):
        if self.offset < 0:
            raise ValueError("offset must be nonnegative")

    def at(self, t: int) -> float:
        return 1.0 / (t + self.offset)

    def sum_rho(self, n: int) -> float:
        return _harmonic(n + 1 + self.offset, 1.0) - _harmonic(self.offset, 1.0)

    def sum_rho_sq(self, n: int) -> float:
        return _harmonic(n + 1 + self.offset, 2.0) - _harmonic(self.offset, 2.0)


def optimal_constant_rho(gamma: float, beta: float, M: float) -> float:
    """Bound-minimizing constant step size for a given threshold.

    Evaluates ``beta * exp(-gamma^2 / M^2) / (2 * gamma)`` where ``beta``
    bundles the smoothness and contamination constants into one tunable.
    Strictly decreasing in gamma.
    """
    if gamma <= 0 or beta <= 0 or M <= 0:
        raise ValueError("gamma, beta and M must be positive")
    return beta * math.exp(-(gamma**2) / M**2) / (2.0 * gamma)


@dataclass(frozen=True)
class SraConfig:
    """Hyperparameters of the truncated SA scheme.

    Attributes:
        gamma: truncation threshold for the update norm (> 0, may be inf).
        rho_schedule: step-size schedule.
        beta: composite constant used to derive a constant step size from
            gamma; optional when the schedule is given directly.
        M: tail-scale constant paired with beta.
    """

    gamma: float
    rho_schedule: RhoSchedule
    beta: float | None = None
    M: float | None = None

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if self.beta is not None and self.beta <= 0:
            raise ValueError("beta must be positive")
        if self.M is not None and self.M <= 0:
            raise ValueError("M must be positive")

    @classmethod
    def from_theory(cls, gamma: float, beta: float, M: float) -> "SraConfig":
        """Constant-step config with rho derived from (gamma, beta, M)."""
        rho = optimal_constant_rho(gamma, beta, M)
        return cls(gamma=gamma, rho_schedule=ConstantRho(rho), beta=beta, M=M)


@dataclass
class SaState:
    """Iterate of the SA recursion plus step and truncation counters."""

    theta: np.ndarray
    t: int = 0
    dropped_count: int = 0

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float)
        if not np.all(np.isfinite(self.theta)):
            raise ValueError("theta must be finite")
        if self.t < 0 or self.dropped_count > self.t:
            raise ValueError("invalid counters")


def truncate(update: np.ndarray, gamma: float) -> tuple[np.ndarray, bool]:
    """Zero the update when its Euclidean norm exceeds gamma.

    Returns ``(G, truncated)``. The boundary ``norm == gamma`` is kept.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    update = np.asarray(update, dtype=float)
    if np.linalg.norm(update) <= gamma:
        return update, False
    return np.zeros_like(update), True


def sa_step(state: SaState, update: np.ndarray, config: SraConfig) -> SaState:
    """One truncated SA step; returns the advanced state.

    The iterate is left bit-identical when the update is dropped. Raises if
    the new iterate is non-finite (divergence).
    """
    g, dropped = truncate(update, config.gamma)
    rho = config.rho_schedule.at(state.t + 1)
    if dropped:
        theta = state.theta
    else:
        theta = state.theta - rho * g
        if not np.all(np.isfinite(theta)):
            raise FloatingPointError("SA iterate diverged to non-finite values")
    return SaState(theta, state.t + 1, state.dropped_count + int(dropped))
