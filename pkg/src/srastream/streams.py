"""Seeded generators for contaminated, piecewise-stationary streams.

Each observation comes from the active segment's mixture with probability
``alpha`` and from a uniform box ``[-U, U]^d`` otherwise. Segments switch
abruptly at their start indices. Generation is deterministic given the spec:
the outlier coin flips, component choices, inlier draws and outlier draws
each come from their own PCG64 substream keyed as (seed, lane).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .gmm import GmmParams


@dataclass(frozen=True)
class StreamSpec:
    """Description of a contaminated, piecewise-stationary stream."""

    T: int
    d: int
    alpha: float
    U: float
    segments: tuple  # ordered (start_t, GmmParams) pairs, first start is 1
    seed: int

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError("alpha must be in (0, 1]")
        if self.U <= 0:
            raise ValueError("U must be positive")
        starts = [s for s, _ in self.segments]
        if not starts or starts[0] != 1 or any(
            b <= a for a, b in zip(starts, starts[1:])
        ):
            raise ValueError("segment starts must be strictly increasing from 1")

    @property
    def change_points(self) -> list[int]:
        return [s for s, _ in self.segments[1:]]


@dataclass
class LabeledSample:
    t: int
    y: np.ndarray
    is_outlier: bool
    segment_id: int
    true_means: np.ndarray


@dataclass
class Stream:
    """Generated stream held column-wise for fast evaluation."""

    spec: StreamSpec
    y: np.ndarray  # (T, d)
    is_outlier: np.ndarray  # (T,) bool
    segment_id: np.ndarray  # (T,) int
    true_means: np.ndarray  # (T, K, d)

    def __iter__(self) -> Iterator[LabeledSample]:
        for i in range(self.spec.T):
            yield LabeledSample(
                i + 1, self.y[i], bool(self.is_outlier[i]),
                int(self.segment_id[i]), self.true_means[i],
            )


def generate(spec: StreamSpec) -> Stream:
    """Materialize the stream described by ``spec``."""
    T, d = spec.T, spec.d
    rng_coin = np.random.default_rng([spec.seed, 0])
    rng_comp = np.random.default_rng([spec.seed, 1])
    rng_inlier = np.random.default_rng([spec.seed, 2])
    rng_outlier = np.random.default_rng([spec.seed, 3])

    outlier = rng_coin.random(T) >= spec.alpha
    comp_u = rng_comp.random(T)
    z = rng_inlier.standard_normal((T, d))
    box = rng_outlier.uniform(-spec.U, spec.U, size=(T, d))

    K = spec.segments[0][1].K
    y = np.empty((T, d))
    seg_id = np.empty(T, dtype=int)
    true_means = np.empty((T, K, d))

    starts = [s for s, _ in spec.segments] + [T + 1]
    for si, (start, params) in enumerate(spec.segments):
        lo, hi = start - 1, starts[si + 1] - 1
        seg_id[lo:hi] = si
        true_means[lo:hi] = params.means
        cum = np.cumsum(params.weights)
        comp = np.searchsorted(cum, comp_u[lo:hi], side="right")
        comp = np.minimum(comp, params.K - 1)
        chol = np.linalg.cholesky(params.covariances)
        y[lo:hi] = params.means[comp] + np.einsum(
            "tij,tj->ti", chol[comp], z[lo:hi]
        )
    y[outlier] = box[outlier]
    return Stream(spec, y, outlier, seg_id, true_means)


def benchmark_synthetic_spec(alpha: float = 0.99, U: float = 20.0, seed: int = 0) -> StreamSpec:
    """The two-component benchmark stream with one abrupt mean change.

    20000 one-dimensional points; equal-weight components at +-0.5 (std 0.1)
    switching to +-1.0 at t=10001; contamination uniform on [-U, U].
    """

    def params(a: float) -> GmmParams:
        return GmmParams(
            np.array([0.5, 0.5]),
            np.array([[a], [-a]]),
            np.array([[[0.01]], [[0.01]]]),
        )

    return StreamSpec(
        T=20000, d=1, alpha=alpha, U=U,
        segments=((1, params(0.5)), (10001, params(1.0))),
        seed=seed,
    )


def stream_header(K: int, d: int) -> list[str]:
    cols = ["t"] + [f"y{i + 1}" for i in range(d)]
    cols += ["is_outlier", "segment_id"]
    cols += [f"true_mu_{j + 1}" for j in range(K * d)]
    return cols


def write_stream_csv(stream: Stream, path) -> None:
    """Write the stream with ground truth columns; floats use shortest
    round-trip formatting."""
    K = stream.true_means.shape[1]
    d = stream.spec.d
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(stream_header(K, d))
        for i in range(stream.spec.T):
            row = [i + 1]
            row += [repr(float(v)) for v in stream.y[i]]
            row += [int(stream.is_outlier[i]), int(stream.segment_id[i])]
            row += [repr(float(v)) for v in stream.true_means[i].ravel()]
            w.writerow(row)


def read_stream_csv(path) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Read a stream CSV back as (y, is_outlier, segment_id, true_means).

    ``true_means`` is returned as (T, K*d); reshape with the model K at the
    call site. Raises ValueError naming the offending line on bad rows.
    """
    ys, outs, segs, mus = [], [], [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        d = sum(1 for c in header if c.startswith("y"))
        n_mu = sum(1 for c in header if c.startswith("true_mu_"))
        for lineno, row in enumerate(reader, start=2):
            try:
                ys.append([float(v) for v in row[1 : 1 + d]])
                outs.append(int(row[1 + d]))
                segs.append(int(row[2 + d]))
                mus.append([float(v) for v in row[3 + d : 3 + d + n_mu]])
            except (ValueError, IndexError) as exc:
                raise ValueError(f"malformed stream row at line {lineno}") from exc
    return (
        np.asarray(ys, dtype=float),
        np.asarray(outs, dtype=bool),
        np.asarray(segs, dtype=int),
        np.asarray(mus, dtype=float),
    )


def multi_change_spec(
    n_segments: int = 5,
    segment_len: int = 1000,
    alpha: float = 0.95,
    U: float = 20.0,
    seed: int = 0,
    d: int = 1,
) -> StreamSpec:
    """Contaminated stream with several abrupt mean shifts, used for the
    synthetic change-detection benchmark."""
    rng = np.random.default_rng([seed, 99])
    segments = []
    mean = 0.0
    for si in range(n_segments):
        mean += float(rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 1.0)) if si else 0.0
        params = GmmParams(
            np.array([1.0]),
            np.array([[mean] * d]),
            np.array([np.eye(d) * 0.04]),
        )
        segments.append((si * segment_len + 1, params))
    return StreamSpec(
        T=n_segments * segment_len, d=d, alpha=alpha, U=U,
        segments=tuple(segments), seed=seed,
    )
