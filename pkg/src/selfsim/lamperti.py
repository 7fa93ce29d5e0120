"""Time-change machinery between self-similar and stationary processes.

A self-similar process V and a stationary process U are linked by the pair
of transforms

    forward:  u(t) = e^{-tH} v(e^t)        (t on the log-time axis)
    inverse:  v(s) = s^H u(log s), v(0) = 0 (s on the physical axis)

On a finite grid j/n the package works with the exponential subsampling
sequences

    a_j = V(floor(n^{j/n}) / n)   and   b_j = n^{1 - j/n},  j = 0..n,

whose weighted squares approximate the second moment of the stationary
series.  ``j_threshold`` is the smallest index beyond which consecutive
subsampling indices are guaranteed distinct.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .simulate import SamplePath

#: Snap tolerance: n^{j/n} within this distance of an integer is treated as
#: that integer before flooring (guards against 4**0.5 = 1.9999999...).
INTEGER_SNAP = 1e-9


@dataclass
class TimedSeries:
    """A finite series with strictly increasing time labels."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.times.shape != self.values.shape or self.times.ndim != 1:
            raise ValueError("times and values must be 1-D and equally long")
        if self.times.size > 1 and not np.all(np.diff(self.times) > 0.0):
            raise ValueError("times must be strictly increasing")


@dataclass
class SubsampledSeries:
    """The paired sequences (a, b) of the exponential subsampling.

    ``exponents`` stores 1 - j/n so that weights b_j^{2H} can be evaluated
    as a single power n**(2H * exponents) without cascading pow error.
    """

    n: int
    a: np.ndarray
    b: np.ndarray
    exponents: np.ndarray
    indices: np.ndarray
    j_threshold: int

    def weights(self, exponent: float) -> np.ndarray:
        """b_j ** exponent, evaluated as one power of n per entry."""
        return float(self.n) ** (exponent * self.exponents)


def subsample_indices(n: int) -> np.ndarray:
    """floor(n^{j/n}) for j = 0..n, with the near-integer snap guard."""
    j = np.arange(n + 1, dtype=float)
    t = float(n) ** (j / n)
    nearest = np.round(t)
    t = np.where(np.abs(t - nearest) < INTEGER_SNAP, nearest, t)
    return np.floor(t).astype(np.int64)


def j_threshold(n: int) -> int:
    """Smallest integer J with n^{(j+1)/n} - n^{j/n} >= 1 for all j >= J.

    Computed as ceil(-n * log_n(n^{1/n} - 1)), clamped into [0, n]; values
    within the snap tolerance of an integer are snapped before the ceiling.
    """
    root = float(n) ** (1.0 / n) - 1.0
    raw = -n * np.log(root) / np.log(n)
    nearest = np.round(raw)
    if abs(raw - nearest) < INTEGER_SNAP:
        raw = nearest
    return int(np.clip(np.ceil(raw), 0, n))


def build_subsample(path: SamplePath) -> SubsampledSeries:
    """Extract (a, b) and the distinctness threshold from a sample path.

    Duplicate indices below the threshold are kept; the estimation sums
    deliberately run over all j = 0..n.
    """
    n = path.n
    if n < 2:
        raise ValueError(f"grid size must be >= 2, got {n}")
    idx = subsample_indices(n)
    exps = 1.0 - np.arange(n + 1, dtype=float) / n
    return SubsampledSeries(
        n=n,
        a=path.values[idx],
        b=float(n) ** exps,
        exponents=exps,
        indices=idx,
        j_threshold=j_threshold(n),
    )


def lamperti_forward(series: TimedSeries, H: float) -> TimedSeries:
    """Map samples of V at physical times e^t to the stationary series.

    ``series.times`` are log-time labels t; ``series.values`` are V(e^t).
    Returns e^{-tH} V(e^t) on the same time labels.
    """
    return TimedSeries(
        times=series.times.copy(),
        values=np.exp(-H * series.times) * series.values,
    )


def lamperti_inverse(series: TimedSeries, H: float, times=None) -> TimedSeries:
    """Map a stationary series back to the self-similar one.

    Without ``times`` this is the exact algebraic inverse of
    :func:`lamperti_forward`: values e^{tH} u(t) on the same log-time
    labels.  With ``times`` (physical, >= 0) the values s^H u(log s) are
    returned at the requested instants, with the convention that s = 0
    maps to 0; each positive s must hit an existing sample (interpolation
    is out of scope).
    """
    if times is None:
        return TimedSeries(
            times=series.times.copy(),
            values=np.exp(H * series.times) * series.values,
        )
    req = np.asarray(times, dtype=float)
    out = np.empty_like(req)
    for i, s in enumerate(req):
        if s == 0.0:
            out[i] = 0.0
            continue
        if s < 0.0:
            raise ValueError(f"physical time must be >= 0, got {s}")
        hits = np.nonzero(np.isclose(series.times, np.log(s), atol=1e-12))[0]
        if hits.size == 0:
            raise ValueError(f"no sample at log-time log({s}) = {np.log(s)}")
        out[i] = s ** H * series.values[hits[0]]
    return TimedSeries(times=req, values=out)


def stationary_series(path: SamplePath, H: float) -> TimedSeries:
    """Grid approximation of the stationary series at times j/n.

    The value at j/n is a_j * b_j^H, realising n^{-H(j/n - 1)} V(n^{j/n - 1})
    from on-grid data via the floor approximation of the subsampling.
    """
    if not 0.0 < H < 1.0:
        raise ValueError(f"H must lie in (0, 1), got {H}")
    sub = build_subsample(path)
    times = np.arange(path.n + 1, dtype=float) / path.n
    return TimedSeries(times=times, values=sub.a * sub.weights(H))
