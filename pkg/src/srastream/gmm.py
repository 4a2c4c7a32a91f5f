"""Gaussian mixture model in sufficient-statistics form.

The mixture is handled through the usual exponential-family summary: per
component a soft occupancy count, an occupancy-weighted first moment and an
occupancy-weighted second moment. Those three blocks fully determine the
closed-form parameter update, so the streaming learners only ever move the
statistics around and call :func:`m_step` to materialize parameters.

All density math is done in log space. Streams in the wild carry values up
to 1e6, so naive exponentials are not an option.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

LOG_2PI = float(np.log(2.0 * np.pi))

#: Relative covariance jitter added after each M-step (scaled by trace/d).
COV_FLOOR_SCALE = 1e-6

#: Components with soft count below this are treated as degenerate.
OCCUPANCY_FLOOR = 1e-8

_TRIU_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _triu(d: int) -> tuple[np.ndarray, np.ndarray]:
    if d not in _TRIU_CACHE:
        _TRIU_CACHE[d] = np.triu_indices(d)
    return _TRIU_CACHE[d]


def logsumexp(x: np.ndarray) -> float:
    """Stable log-sum-exp of a small 1-D array."""
    m = np.max(x)
    if not np.isfinite(m):
        return float(m)
    return float(m + np.log(np.sum(np.exp(x - m))))


class DegenerateComponentError(ValueError):
    """A mixture component has collapsed (soft count below the floor)."""

    def __init__(self, component: int, message: str | None = None):
        self.component = component
        super().__init__(message or f"component {component} is degenerate")


class SingularCovarianceError(ValueError):
    """A component covariance is singular even after flooring."""

    def __init__(self, component: int):
        self.component = component
        super().__init__(f"covariance of component {component} is singular")


@dataclass
class GmmParams:
    """Parameters of a K-component Gaussian mixture in d dimensions.

    Attributes:
        weights: mixture proportions, shape (K,), nonnegative, sum to 1.
        means: component means, shape (K, d).
        covariances: symmetric positive-definite matrices, shape (K, d, d).
    """

    weights: np.ndarray
    means: np.ndarray
    covariances: np.ndarray
    _prec_chol: np.ndarray | None = field(default=None, repr=False, compare=False)
    _log_det: np.ndarray | None = field(default=None, repr=False, compare=False)
    _log_weights: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        self.means = np.atleast_2d(np.asarray(self.means, dtype=float))
        cov = np.asarray(self.covariances, dtype=float)
        if cov.ndim < 3:
            cov = cov.reshape(self.K, self.d, self.d)
        self.covariances = cov

    @property
    def K(self) -> int:
        return self.weights.shape[0]

    @property
    def d(self) -> int:
        return self.means.shape[1]

    def validate(self, weight_tol: float = 1e-9, sym_tol: float = 1e-12) -> None:
        """Raise ValueError if any structural invariant is violated."""
        if np.any(self.weights < 0) or abs(self.weights.sum() - 1.0) > weight_tol:
            raise ValueError("weights must be nonnegative and sum to 1")
        if self.means.shape != (self.K, self.d):
            raise ValueError("means shape mismatch")
        if self.covariances.shape != (self.K, self.d, self.d):
            raise ValueError("covariances shape mismatch")
        for k in range(self.K):
            cov = self.covariances[k]
            if np.max(np.abs(cov - cov.T)) > sym_tol:
                raise ValueError(f"covariance of component {k} is not symmetric")
            if np.linalg.eigvalsh(cov)[0] <= 0:
                raise SingularCovarianceError(k)

    def _ensure_chol(self) -> None:
        if self._prec_chol is not None:
            return
        if self.d == 1:
            var = self.covariances[:, 0, 0]
            if np.any(var <= 0) or not np.all(np.isfinite(var)):
                raise SingularCovarianceError(int(np.argmin(var)))
            self._prec_chol = (1.0 / np.sqrt(var))[:, None, None]
            self._log_det = np.log(var)
            with np.errstate(divide="ignore"):
                self._log_weights = np.log(self.weights)
            return
        try:
            chol = np.linalg.cholesky(self.covariances)
        except np.linalg.LinAlgError:
            # redo per component to name the culprit
            for k in range(self.K):
                try:
                    np.linalg.cholesky(self.covariances[k])
                except np.linalg.LinAlgError:
                    raise SingularCovarianceError(k) from None
            raise
        # inverse of the lower factors; mahalanobis via one batched matvec
        self._prec_chol = np.linalg.inv(chol)
        diag = chol[:, np.arange(self.d), np.arange(self.d)]
        self._log_det = 2.0 * np.sum(np.log(diag), axis=1)
        with np.errstate(divide="ignore"):
            self._log_weights = np.log(self.weights)

    def component_log_densities(self, y: np.ndarray) -> np.ndarray:
        """Per-component log N(y; mu_k, Sigma_k), shape (K,)."""
        self._ensure_chol()
        y = np.asarray(y, dtype=float).reshape(self.d)
        diff = y[None, :] - self.means
        z = np.einsum("kij,kj->ki", self._prec_chol, diff)
        maha = np.einsum("ki,ki->k", z, z)
        return -0.5 * (self.d * LOG_2PI + self._log_det + maha)


@dataclass
class SuffStats:
    """Per-component sufficient statistics of a mixture.

    Attributes:
        s0: soft occupancy per component, shape (K,), entries in [0, 1]
            summing to 1.
        s1: occupancy-weighted first moments, shape (K, d).
        s2: occupancy-weighted second moments, shape (K, d, d).
    """

    s0: np.ndarray
    s1: np.ndarray
    s2: np.ndarray

    def __post_init__(self):
        self.s0 = np.asarray(self.s0, dtype=float)
        self.s1 = np.atleast_2d(np.asarray(self.s1, dtype=float))
        s2 = np.asarray(self.s2, dtype=float)
        if s2.ndim < 3:
            s2 = s2.reshape(self.K, self.d, self.d)
        self.s2 = s2

    @property
    def K(self) -> int:
        return self.s0.shape[0]

    @property
    def d(self) -> int:
        return self.s1.shape[1]

    def validate(self, tol: float = 1e-9) -> None:
        if np.any(self.s0 < 0) or abs(self.s0.sum() - 1.0) > tol:
            raise ValueError("s0 entries must be nonnegative and sum to 1")
        for k in range(self.K):
            if self.s0[k] <= OCCUPANCY_FLOOR:
                continue
            centered = self.s2[k] - np.outer(self.s1[k], self.s1[k]) / self.s0[k]
            if np.linalg.eigvalsh(centered)[0] < -tol:
                raise ValueError(f"second moment of component {k} is not PSD")

    def flatten(self) -> np.ndarray:
        """Flat vector [s0 | s1 | upper-triangle(s2)] used for update norms."""
        iu = _triu(self.d)
        return np.concatenate(
            [self.s0, self.s1.ravel(), self.s2[:, iu[0], iu[1]].ravel()]
        )

    @classmethod
    def from_flat(cls, flat: np.ndarray, K: int, d: int) -> "SuffStats":
        if d == 1:
            return cls(
                flat[:K].copy(),
                flat[K : 2 * K].copy().reshape(K, 1),
                flat[2 * K :].copy().reshape(K, 1, 1),
            )
        iu = _triu(d)
        m = len(iu[0])
        s0 = flat[:K].copy()
        s1 = flat[K : K + K * d].reshape(K, d).copy()
        tri = flat[K + K * d :].reshape(K, m)
        s2 = np.zeros((K, d, d))
        s2[:, iu[0], iu[1]] = tri
        s2 = s2 + np.transpose(s2, (0, 2, 1))
        s2[:, np.arange(d), np.arange(d)] *= 0.5
        return cls(s0, s1, s2)


def log_density(params: GmmParams, y: np.ndarray) -> float:
    """Log density of the mixture at ``y``, computed via log-sum-exp."""
    comp = params.component_log_densities(y)
    with np.errstate(divide="ignore"):
        return float(logsumexp(comp + np.log(params.weights)))


def responsibilities(params: GmmParams, y: np.ndarray) -> np.ndarray:
    """Posterior component probabilities given an observation.

    Returns a nonnegative K-vector that sums to 1.
    """
    comp = params.component_log_densities(y)
    with np.errstate(divide="ignore"):
        logw = comp + np.log(params.weights)
    r = np.exp(logw - logsumexp(logw))
    return r / r.sum()


def expected_suffstats(params: GmmParams, y: np.ndarray) -> SuffStats:
    """Conditional expectation of the complete-data statistics at ``y``."""
    y = np.asarray(y, dtype=float).reshape(params.d)
    r = responsibilities(params, y)
    outer = np.outer(y, y)
    return SuffStats(r, r[:, None] * y[None, :], r[:, None, None] * outer[None, :, :])


def score_and_expected_stats_flat(params: GmmParams, y) -> tuple[float, np.ndarray]:
    """Surprise score and flattened expected statistics in one density pass.

    Returns ``(-log f(y; params), flat)`` where ``flat`` is the flattened
    conditional expectation of the complete-data statistics at ``y``. The
    streaming learners need both every step; fusing them halves the density
    work.
    """
    y = np.asarray(y, dtype=float).reshape(params.d)
    comp = params.component_log_densities(y)
    logw = comp + params._log_weights
    lse = logsumexp(logw)
    r = np.exp(logw - lse)
    r /= r.sum()
    iu = _triu(params.d)
    outer_tri = np.outer(y, y)[iu]
    flat = np.concatenate(
        [r, (r[:, None] * y[None, :]).ravel(), (r[:, None] * outer_tri[None, :]).ravel()]
    )
    return -lse, flat


def m_step(stats: SuffStats) -> GmmParams:
    """Closed-form parameter update from sufficient statistics.

    weights = s0, means = s1/s0, covariances = s2/s0 - mean mean^T with a
    relative jitter floor added afterwards. Raises
    :class:`DegenerateComponentError` when a soft count is below the floor.
    """
    K, d = stats.K, stats.d
    if np.any(stats.s0 < OCCUPANCY_FLOOR):
        raise DegenerateComponentError(int(np.argmin(stats.s0)))
    if d == 1:
        s0 = stats.s0
        mean = stats.s1[:, 0] / s0
        var = stats.s2[:, 0, 0] / s0 - mean * mean
        var = var + np.maximum(COV_FLOOR_SCALE * var, 0.0)
        if not np.all(np.isfinite(var)) or np.any(var <= 0):
            bad = int(np.argmin(var))
            raise DegenerateComponentError(
                bad, f"component {bad} has a non-positive variance"
            )
        params = GmmParams(s0.copy(), mean.reshape(K, 1), var.reshape(K, 1, 1))
        params._ensure_chol()
        return params
    means = stats.s1 / stats.s0[:, None]
    cov = stats.s2 / stats.s0[:, None, None] - np.einsum(
        "ki,kj->kij", means, means
    )
    # symmetrize and floor: jitter scaled to each component's own scale
    cov = 0.5 * (cov + np.transpose(cov, (0, 2, 1)))
    diag = np.arange(d)
    traces = cov[:, diag, diag].sum(axis=1)
    cov[:, diag, diag] += np.maximum(COV_FLOOR_SCALE * traces / d, 0.0)[:, None]
    if not np.all(np.isfinite(cov)):
        raise DegenerateComponentError(
            int(np.argwhere(~np.isfinite(cov))[0][0]),
            "non-finite covariance after the parameter update",
        )
    params = GmmParams(stats.s0.copy(), means, cov)
    try:
        params._ensure_chol()  # PD check; result is cached for density calls
    except SingularCovarianceError as exc:
        raise DegenerateComponentError(
            exc.component,
            f"component {exc.component} has a non-positive-definite covariance",
        ) from None
    return params


def loss(stats: SuffStats, params: GmmParams, penalty=None) -> float:
    """Negated expected complete-data log-likelihood at (stats, params).

    ``penalty`` is an optional hook ``penalty(params) -> float`` added to the
    value (for e.g. an inverse-Wishart-style covariance regularizer); by
    default no penalty is applied.
    """
    params._ensure_chol()
    total = 0.0
    for k in range(params.K):
        s0, s1, s2 = stats.s0[k], stats.s1[k], stats.s2[k]
        mu = params.means[k]
        prec = params._prec_chol[k].T @ params._prec_chol[k]
        quad = s2 - np.outer(s1, mu) - np.outer(mu, s1) + s0 * np.outer(mu, mu)
        with np.errstate(divide="ignore"):
            logw = np.log(params.weights[k]) if params.weights[k] > 0 else -np.inf
        ll_k = (
            s0 * logw
            - 0.5 * s0 * (params.d * LOG_2PI + params._log_det[k])
            - 0.5 * float(np.trace(prec @ quad))
        )
        total -= ll_k
    if penalty is not None:
        total += float(penalty(params))
    return float(total)


def population_suffstats(params: GmmParams) -> SuffStats:
    """Exact moments of the statistics under the mixture itself.

    Useful for moment-matched initialization and fixed-point checks: running
    the parameter update on this object returns ``params`` up to the floor.
    """
    w = params.weights
    s1 = w[:, None] * params.means
    s2 = w[:, None, None] * (
        params.covariances + np.einsum("ki,kj->kij", params.means, params.means)
    )
    return SuffStats(w.copy(), s1, s2)
