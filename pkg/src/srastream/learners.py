"""Streaming mixture learners sharing one step interface.

Every learner consumes one observation per call, reports a surprise score
computed from the model *before* the update (so a dropped update still
produces a score), and exposes its current parameters. The truncated-SA
learner is the main act; the plain-SA, running-average and discounted
variants serve as baselines.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .gmm import (
    GmmParams,
    SuffStats,
    log_density,
    m_step,
    population_suffstats,
    score_and_expected_stats_flat,
)
from .sa import ConstantRho, InvTRho, RhoSchedule, SaState, SraConfig, sa_step


@dataclass
class StepReport:
    """Outcome of a single learner step."""

    score: float
    truncated: bool
    theta_delta_norm: float


def _window_params(window: np.ndarray, K: int) -> GmmParams:
    """Moment-matching initialization on a warm-up window.

    The sorted window is split into K contiguous chunks; each chunk supplies
    a mean and covariance, chunk sizes supply the weights. Variances are
    floored at a small fraction of the window's overall spread so single
    point chunks do not collapse.
    """
    window = np.atleast_2d(np.asarray(window, dtype=float))
    n, d = window.shape
    if n < K:
        raise ValueError(f"window of length {n} cannot initialize {K} components")
    if n > max(K, 2):
        # contaminated windows would otherwise seed an arbitrarily bad model
        # that a small truncation threshold can never pull back; trim points
        # implausibly far from the window median first
        med = np.median(window, axis=0)
        mad = np.median(np.abs(window - med), axis=0)
        if np.all(mad > 0):
            keep = np.all(np.abs(window - med) <= 6.0 * mad, axis=1)
            if keep.sum() >= max(K, 2):
                window = window[keep]
                n = len(window)
    order = np.argsort(window[:, 0], kind="stable")
    chunks = np.array_split(order, K)
    spread = np.var(window, axis=0).mean()
    floor = max(1e-4 * spread, 1e-12)
    weights = np.array([len(c) / n for c in chunks])
    means = np.stack([window[c].mean(axis=0) for c in chunks])
    covs = np.empty((K, d, d))
    for k, c in enumerate(chunks):
        cov = np.cov(window[c].T, bias=True).reshape(d, d) if len(c) > 1 else np.zeros((d, d))
        covs[k] = cov + floor * np.eye(d)
    return GmmParams(weights, means, covs)


def init_params_from_window(
    window: Sequence,
    K: int,
    mode: str = "moments",
    seed: int | None = None,
    n_draws: int = 20,
) -> GmmParams:
    """Build initial mixture parameters from a warm-up window.

    mode="moments" moment-matches the window directly. mode="uniform" first
    draws ``n_draws`` surrogate points uniformly within the window's
    per-coordinate range (seeded) and moment-matches those; this mimics the
    random-restart protocol used for hyperparameter selection.
    """
    window = np.atleast_2d(np.asarray(window, dtype=float))
    if window.size == 0:
        raise ValueError("window must be non-empty")
    if mode == "moments":
        return _window_params(window, K)
    if mode == "uniform":
        rng = np.random.default_rng(seed)
        lo = window.min(axis=0)
        hi = window.max(axis=0)
        draws = rng.uniform(lo, hi, size=(n_draws, window.shape[1]))
        return _window_params(draws, K)
    raise ValueError(f"unknown init mode: {mode}")


class GmmLearnerBase:
    """Common state and scoring for the EM-family streaming learners."""

    def __init__(self, params: GmmParams):
        self.model = params
        self.stats = population_suffstats(params)
        self.state = SaState(self.stats.flatten())

    @classmethod
    def from_window(
        cls,
        window: Sequence,
        K: int,
        *args,
        init_mode: str = "moments",
        seed: int | None = None,
        **kwargs,
    ):
        params = init_params_from_window(window, K, mode=init_mode, seed=seed)
        return cls(params, *args, **kwargs)

    def score(self, y) -> float:
        """Surprise of ``y`` under the current model: -log f(y; theta)."""
        return -log_density(self.model, y)

    def step(self, y) -> StepReport:
        raise NotImplementedError


class SraGmmLearner(GmmLearnerBase):
    """Truncated-SA online EM for a Gaussian mixture.

    The sufficient statistics follow the SA recursion on the flattened
    statistics vector; updates whose norm exceeds the threshold are dropped,
    in which case both statistics and parameters stay bit-identical.
    """

    def __init__(self, params: GmmParams, config: SraConfig):
        super().__init__(params)
        self.config = config

    def step(self, y) -> StepReport:
        score, sbar = score_and_expected_stats_flat(self.model, y)
        h = self.state.theta - sbar
        prev = self.state.theta
        prev_dropped = self.state.dropped_count
        self.state = sa_step(self.state, h, self.config)
        truncated = self.state.dropped_count > prev_dropped
        if not truncated:
            self.stats = SuffStats.from_flat(self.state.theta, self.model.K, self.model.d)
            self.model = m_step(self.stats)
        delta = float(np.linalg.norm(self.state.theta - prev))
        return StepReport(score, truncated, delta)


class SemGmmLearner(GmmLearnerBase):
    """Plain-SA online EM with a constant discounting parameter r.

    Same arithmetic as the truncated learner with the threshold at infinity,
    so the two coincide bit-for-bit on identical inputs.
    """

    def __init__(self, params: GmmParams, r: float):
        super().__init__(params)
        if not 0.0 < r <= 1.0:
            raise ValueError("r must be in (0, 1]")
        self.r = r

    def step(self, y) -> StepReport:
        score, sbar = score_and_expected_stats_flat(self.model, y)
        prev = self.state.theta
        theta = prev - self.r * (prev - sbar)
        self.state = SaState(theta, self.state.t + 1, self.state.dropped_count)
        self.stats = SuffStats.from_flat(theta, self.model.K, self.model.d)
        self.model = m_step(self.stats)
        return StepReport(score, False, float(np.linalg.norm(theta - prev)))


class IemGmmLearner(GmmLearnerBase):
    """Incremental EM: discounting 1/t, i.e. a running average of the
    per-observation expected statistics.

    ``prior_count`` treats the initialization as that many already-seen
    observations; with the default 0 the first step replaces the seeded
    statistics outright (and a single observation yields a degenerate
    variance, so seeded use should pass the window length here).
    """

    def __init__(self, params: GmmParams, prior_count: int = 0):
        super().__init__(params)
        if prior_count < 0:
            raise ValueError("prior_count must be nonnegative")
        self.prior_count = prior_count

    def step(self, y) -> StepReport:
        score, sbar = score_and_expected_stats_flat(self.model, y)
        prev = self.state.theta
        rho = 1.0 / (self.state.t + 1 + self.prior_count)
        theta = prev - rho * (prev - sbar)
        self.state = SaState(theta, self.state.t + 1, self.state.dropped_count)
        self.stats = SuffStats.from_flat(theta, self.model.K, self.model.d)
        self.model = m_step(self.stats)
        return StepReport(score, False, float(np.linalg.norm(theta - prev)))


#: Responsibility smoothing toward uniform used by the discounted learner.
SDEM_SMOOTHING = 1e-4


class SdemGmmLearner(GmmLearnerBase):
    """Sequentially discounting EM.

    Keeps discounted accumulators of soft counts and weighted moments:
    ``A <- (1 - r) A + new`` per observation, with responsibilities smoothed
    toward uniform by a small mixing constant. With r=0 the accumulators are
    plain sums, i.e. running-average estimates.
    """

    def __init__(self, params: GmmParams, r: float, window: Sequence | None = None):
        super().__init__(params)
        if not 0.0 <= r < 1.0:
            raise ValueError("r must be in [0, 1)")
        self.r = r
        K, d = params.K, params.d
        if window is not None:
            window = np.atleast_2d(np.asarray(window, dtype=float))
            self.counts = np.zeros(K)
            self.first = np.zeros((K, d))
            self.second = np.zeros((K, d, d))
            for y in window:
                self._accumulate(y)
        else:
            # seed with one pseudo-observation worth of population stats
            pop = population_suffstats(params)
            self.counts = pop.s0.copy()
            self.first = pop.s1.copy()
            self.second = pop.s2.copy()
        self._refresh_model()

    def _accumulate(self, y: np.ndarray) -> None:
        from .gmm import responsibilities

        y = np.asarray(y, dtype=float).reshape(self.model.d)
        r = responsibilities(self.model, y)
        r = (1.0 - SDEM_SMOOTHING) * r + SDEM_SMOOTHING / self.model.K
        decay = 1.0 - self.r
        self.counts = decay * self.counts + r
        self.first = decay * self.first + r[:, None] * y[None, :]
        self.second = decay * self.second + r[:, None, None] * np.outer(y, y)[None]

    def _refresh_model(self) -> None:
        total = self.counts.sum()
        self.stats = SuffStats(
            self.counts / total, self.first / total, self.second / total
        )
        self.model = m_step(self.stats)

    def step(self, y) -> StepReport:
        score = self.score(y)
        prev_means = self.model.means.copy()
        self._accumulate(y)
        self._refresh_model()
        self.state = SaState(self.stats.flatten(), self.state.t + 1, 0)
        delta = float(np.linalg.norm(self.model.means - prev_means))
        return StepReport(score, False, delta)


class SgdL2Learner:
    """Truncated SGD with an L2 penalty on a flat parameter vector.

    The per-step update direction is ``lambda * theta + grad(theta, y)``;
    it passes through the same norm-threshold gate as the mixture learner.
    """

    def __init__(
        self,
        theta0: np.ndarray,
        config: SraConfig,
        loss_gradient_fn: Callable[[np.ndarray, np.ndarray], np.ndarray],
        weight_decay: float = 0.0,
        loss_fn: Callable[[np.ndarray, np.ndarray], float] | None = None,
    ):
        if weight_decay < 0:
            raise ValueError("weight_decay must be nonnegative")
        self.state = SaState(np.asarray(theta0, dtype=float))
        self.config = config
        self.grad_fn = loss_gradient_fn
        self.weight_decay = weight_decay
        self.loss_fn = loss_fn

    @property
    def theta(self) -> np.ndarray:
        return self.state.theta

    def step(self, y) -> StepReport:
        y = np.asarray(y, dtype=float)
        score = float(self.loss_fn(self.state.theta, y)) if self.loss_fn else 0.0
        h = self.weight_decay * self.state.theta + np.asarray(
            self.grad_fn(self.state.theta, y), dtype=float
        )
        prev = self.state.theta
        prev_dropped = self.state.dropped_count
        self.state = sa_step(self.state, h, self.config)
        truncated = self.state.dropped_count > prev_dropped
        delta = float(np.linalg.norm(self.state.theta - prev))
        return StepReport(score, truncated, delta)


LEARNER_NAMES = ("sra", "sem", "iem", "sdem")


def make_gmm_learner(
    algorithm: str,
    params: GmmParams,
    *,
    config: SraConfig | None = None,
    r: float | None = None,
    window: Sequence | None = None,
):
    """Factory used by the CLI; dispatches on the algorithm tag."""
    algorithm = algorithm.lower()
    if algorithm == "sra":
        if config is None:
            raise ValueError("sra requires an SraConfig")
        return SraGmmLearner(params, config)
    if algorithm == "sem":
        if r is None:
            raise ValueError("sem requires a discounting parameter r")
        return SemGmmLearner(params, r)
    if algorithm == "iem":
        prior = len(window) if window is not None else 0
        return IemGmmLearner(params, prior_count=prior)
    if algorithm == "sdem":
        if r is None:
            raise ValueError("sdem requires a discounting parameter r")
        return SdemGmmLearner(params, r, window=window)
    raise ValueError(f"unknown algorithm: {algorithm}")
