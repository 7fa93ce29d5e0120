"""Exact-in-distribution sampling of the four process families on j/n grids.

Two samplers are provided:

* a circulant-embedding (FFT) sampler for fBm, which synthesises the
  stationary increment sequence and cumulates it;
* a dense Cholesky sampler that works for every family directly from the
  covariance matrix, exact in distribution at O(n^3) factorisation cost.

All randomness flows through :class:`RngStream`, a counter-based Philox
stream addressed by (master_seed, stream_index).  Normal variates are
produced by inverse-CDF transform of 53-bit uniforms so that identical
streams give bit-identical paths on every platform.
"""

from __future__ import annotations

import functools
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri

from .kernels import Family, KernelSpec, cov_matrix, fgn_autocov

#: Relative tolerance on negative circulant eigenvalues before clipping warns.
NEG_EIGENVALUE_TOL = 1e-10

#: Jitter escalation ladder for Cholesky factorisation, scaled by mean(diag).
JITTER_LADDER = (0.0, 1e-12, 1e-10, 1e-8)


class SimulationError(RuntimeError):
    """Raised when a sample path cannot be produced."""


@dataclass(frozen=True)
class RngStream:
    """Addressable substream of a counter-based generator.

    Distinct (master_seed, stream_index) pairs give statistically
    independent, reproducible streams.
    """

    master_seed: int
    stream_index: int = 0

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(self.master_seed, spawn_key=(self.stream_index,))
        return np.random.Generator(np.random.Philox(seq))

    def substream(self, offset: int) -> "RngStream":
        return RngStream(self.master_seed, self.stream_index + offset)

    def normals(self, size: int) -> np.ndarray:
        """Standard normals via inverse CDF of mid-point 53-bit uniforms."""
        gen = self.generator()
        u = (gen.integers(0, 1 << 53, size=size, dtype=np.uint64) + 0.5) / (1 << 53)
        return ndtri(u)


@dataclass
class SamplePath:
    """Values of V(j/n) for j = 0..n, with provenance.

    ``spec`` is None for ingested real-world data, in which case values[0]
    is a zero placeholder that no estimator reads through the subsampling
    sequence (floor indices start at 1).
    """

    n: int
    values: np.ndarray
    spec: KernelSpec | None = None
    seed: int | None = None
    stream_index: int | None = field(default=None, repr=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.n + 1,):
            raise ValueError(
                f"expected {self.n + 1} values for grid size {self.n}, "
                f"got {self.values.shape}"
            )

    @classmethod
    def from_observations(cls, observations) -> "SamplePath":
        """Wrap n raw observations as V(j/n), j = 1..n, with V(0) slot zeroed."""
        obs = np.asarray(observations, dtype=float)
        if obs.ndim != 1 or obs.size < 2:
            raise ValueError("need a 1-D array of at least 2 observations")
        return cls(n=obs.size, values=np.concatenate([[0.0], obs]))


def _embedding_size(n: int) -> int:
    m = 1
    while m < 2 * (n - 1):
        m *= 2
    return m


@functools.lru_cache(maxsize=32)
def _circulant_sqrt_eigs(H: float, sigma2: float, n: int) -> np.ndarray:
    """sqrt of circulant eigenvalues for the length-n increment sequence."""
    m = _embedding_size(n)
    lags = np.arange(m // 2 + 1)
    row = fgn_autocov(H, sigma2, lags, n)
    circ = np.concatenate([row, row[-2:0:-1]])
    eigs = np.fft.fft(circ).real
    floor = -NEG_EIGENVALUE_TOL * eigs.max()
    if eigs.min() < floor:
        clipped = -eigs[eigs < 0.0].sum()
        warnings.warn(
            f"circulant embedding for H={H}, n={n} clipped negative "
            f"eigenvalue mass {clipped:.3e}; sampling is approximate",
            RuntimeWarning,
            stacklevel=3,
        )
    np.clip(eigs, 0.0, None, out=eigs)
    return np.sqrt(eigs)


def simulate_fbm_circulant(
    H: float, sigma2: float, n: int, rng: RngStream
) -> SamplePath:
    """Sample an fBm path on j/n, j = 0..n, by circulant embedding.

    The stationary increment sequence is generated exactly (given a
    nonnegative embedding spectrum) and cumulated; values[0] = 0.
    """
    if n < 2:
        raise SimulationError(f"grid size must be >= 2, got {n}")
    spec = KernelSpec(Family.FBM, H=H, sigma2=sigma2)
    sq = _circulant_sqrt_eigs(H, sigma2, n)
    m = sq.size
    half = m // 2
    z = rng.normals(m)
    w = np.empty(m, dtype=complex)
    w[0] = sq[0] * z[0] / np.sqrt(m)
    w[half] = sq[half] * z[half] / np.sqrt(m)
    w[1:half] = sq[1:half] * (z[1:half] + 1j * z[half + 1 :]) / np.sqrt(2 * m)
    w[half + 1 :] = np.conj(w[half - 1 : 0 : -1])
    increments = np.fft.fft(w).real[:n]
    values = np.concatenate([[0.0], np.cumsum(increments)])
    return SamplePath(
        n=n, values=values, spec=spec, seed=rng.master_seed,
        stream_index=rng.stream_index,
    )


@functools.lru_cache(maxsize=4)
def _cholesky_factor(spec: KernelSpec, n: int) -> np.ndarray:
    """Lower Cholesky factor of cov_matrix(spec, n) with jitter escalation."""
    cmat = cov_matrix(spec, n)
    bump = np.mean(np.diag(cmat))
    for delta in JITTER_LADDER:
        try:
            return np.linalg.cholesky(
                cmat if delta == 0.0 else cmat + delta * bump * np.eye(n)
            )
        except np.linalg.LinAlgError:
            continue
    raise SimulationError(
        f"covariance matrix for {spec} at n={n} is not positive definite "
        f"even after jitter {JITTER_LADDER[-1]:g}*mean(diag)"
    )


def simulate_cholesky(spec: KernelSpec, n: int, rng: RngStream) -> SamplePath:
    """Sample any family exactly via the dense Cholesky factor.

    Factors are cached per (spec, n); repeated calls with the same
    configuration cost one matrix-vector product each.
    """
    if n < 2:
        raise SimulationError(f"grid size must be >= 2, got {n}")
    lower = _cholesky_factor(spec, n)
    z = rng.normals(n)
    values = np.concatenate([[0.0], lower @ z])
    return SamplePath(
        n=n, values=values, spec=spec, seed=rng.master_seed,
        stream_index=rng.stream_index,
    )


def sample_path(
    spec: KernelSpec, n: int, rng: RngStream, method: str = "auto"
) -> SamplePath:
    """Dispatch to the default sampler for the family.

    method='auto' uses the circulant sampler for fBm and Cholesky for the
    other families; method='cholesky' forces dense sampling for any family.
    """
    if method not in ("auto", "cholesky", "circulant"):
        raise ValueError(f"unknown simulation method {method!r}")
    if method == "circulant" and spec.family is not Family.FBM:
        raise SimulationError("circulant sampling is only exact for fBm")
    if method == "cholesky" or spec.family is not Family.FBM:
        return simulate_cholesky(spec, n, rng)
    return simulate_fbm_circulant(spec.H, spec.sigma2, n, rng)


def write_path_csv(path: SamplePath, destination) -> None:
    """Write the path as ``t,value`` rows, 17 significant digits, LF endings."""
    lines = ["t,value\n"]
    for j in range(path.n + 1):
        lines.append(f"{j / path.n:.17g},{path.values[j]:.17g}\n")
    if hasattr(destination, "write"):
        destination.write("".join(lines))
    else:
        with open(destination, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("".join(lines))


def read_path_csv(source) -> SamplePath:
    """Read a ``t,value`` CSV produced by :func:`write_path_csv`."""
    if hasattr(source, "read"):
        rows = source.read().splitlines()
    else:
        with open(source, "r", encoding="utf-8") as fh:
            rows = fh.read().splitlines()
    rows = [r for r in rows if r.strip()]
    if not rows or rows[0].strip().lower() != "t,value":
        raise ValueError("expected a CSV with header 't,value'")
    values = [float(r.split(",")[1]) for r in rows[1:]]
    if len(values) < 3:
        raise ValueError("path file must contain at least 3 grid points")
    return SamplePath(n=len(values) - 1, values=np.asarray(values))
