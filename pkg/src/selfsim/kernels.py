"""Covariance kernels of the four self-similar Gaussian process families.

The four families -- fractional (fBm), subfractional (sfBm), bifractional
(bfBm) and trifractional (tfBm) Brownian motion -- are zero-mean Gaussian
processes on [0, infinity) with V(0) = 0 and closed-form covariances.  A
:class:`KernelSpec` pins down the family and its parameters and is the single
source of truth for covariance evaluation everywhere else in the package.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np


class Family(enum.Enum):
    """Process family selector."""

    FBM = "fbm"
    SFBM = "sfbm"
    BFBM = "bfbm"
    TFBM = "tfbm"


#: Families parameterised by (H, K); the others ignore K.
TWO_PARAMETER_FAMILIES = frozenset({Family.BFBM, Family.TFBM})


class ParameterError(ValueError):
    """Raised when kernel parameters are outside their admissible domain."""


@dataclass(frozen=True)
class KernelSpec:
    """Process family plus parameters (H, K, sigma2).

    Parameters
    ----------
    family : Family
        One of FBM, SFBM, BFBM, TFBM.
    H : float
        Principal roughness parameter, in (0, 1).
    K : float
        Second parameter for bfBm (0 < K <= 1) and tfBm (0 < K < 1).
        Ignored for fBm/sfBm (kept at 1.0).
    sigma2 : float
        Variance scale, > 0.
    """

    family: Family
    H: float
    K: float = 1.0
    sigma2: float = 1.0

    def __post_init__(self):
        if not isinstance(self.family, Family):
            object.__setattr__(self, "family", Family(self.family))
        if not 0.0 < self.H < 1.0:
            raise ParameterError(f"H must lie in (0, 1), got {self.H}")
        if self.sigma2 <= 0.0:
            raise ParameterError(f"sigma2 must be positive, got {self.sigma2}")
        if self.family is Family.BFBM and not 0.0 < self.K <= 1.0:
            raise ParameterError(f"bfBm requires K in (0, 1], got {self.K}")
        if self.family is Family.TFBM and not 0.0 < self.K < 1.0:
            raise ParameterError(f"tfBm requires K in (0, 1), got {self.K}")
        if self.family in (Family.FBM, Family.SFBM) and self.K != 1.0:
            object.__setattr__(self, "K", 1.0)

    def self_similarity_index(self) -> float:
        """The scaling exponent: H for fBm/sfBm, H*K for bfBm/tfBm."""
        if self.family in TWO_PARAMETER_FAMILIES:
            return self.H * self.K
        return self.H


def _kernel(spec: KernelSpec, lo, hi):
    """Evaluate the covariance on canonically ordered arguments lo <= hi.

    numpy's power gives 0.0**p == 0.0 for p > 0, which is the convention
    needed at lo == hi; V(0) = 0 makes the covariance identically zero at
    lo == 0, which is enforced exactly rather than left to cancellation
    (the two-parameter kernels cancel only to roundoff there).
    """
    H, K, s2 = spec.H, spec.K, spec.sigma2
    d = hi - lo
    if spec.family is Family.FBM:
        out = 0.5 * s2 * (hi ** (2 * H) + lo ** (2 * H) - d ** (2 * H))
    elif spec.family is Family.SFBM:
        out = s2 * (
            hi ** (2 * H)
            + lo ** (2 * H)
            - 0.5 * ((hi + lo) ** (2 * H) + d ** (2 * H))
        )
    elif spec.family is Family.BFBM:
        out = (s2 / 2.0 ** K) * (
            (hi ** (2 * H) + lo ** (2 * H)) ** K - d ** (2 * H * K)
        )
    else:  # TFBM
        out = s2 * (
            hi ** (2 * H * K)
            + lo ** (2 * H * K)
            - (hi ** (2 * H) + lo ** (2 * H)) ** K
        )
    return np.where(lo == 0.0, 0.0, out)


def cov(spec: KernelSpec, s: float, t: float) -> float:
    """Covariance Cov(V(s), V(t)) of the process defined by ``spec``.

    Arguments are sorted before evaluation so that cov(spec, s, t) and
    cov(spec, t, s) are bit-identical.
    """
    if s < 0.0 or t < 0.0:
        raise ParameterError("covariance arguments must be nonnegative")
    lo, hi = (s, t) if s <= t else (t, s)
    return float(_kernel(spec, lo, hi))


def fgn_autocov(H: float, sigma2: float, k, n: int):
    """Autocovariance of fBm increments on the grid j/n at integer lag k.

    Returns ``sigma2/(2 n^{2H}) * (|k+1|^{2H} - 2|k|^{2H} + |k-1|^{2H})``,
    the covariance of V((j+k+1)/n) - V((j+k)/n) with V((j+1)/n) - V(j/n).
    Accepts scalar or array lags.
    """
    if not 0.0 < H < 1.0:
        raise ParameterError(f"H must lie in (0, 1), got {H}")
    k = np.asarray(k, dtype=float)
    twoH = 2.0 * H
    val = (
        sigma2
        / (2.0 * float(n) ** twoH)
        * (
            np.abs(k + 1.0) ** twoH
            - 2.0 * np.abs(k) ** twoH
            + np.abs(k - 1.0) ** twoH
        )
    )
    return val if val.ndim else float(val)


def cov_matrix(spec: KernelSpec, n: int) -> np.ndarray:
    """Dense covariance matrix of (V(1/n), ..., V(n/n)).

    The grid deliberately excludes t = 0: V(0) = 0 almost surely, so the
    corresponding row and column would be identically zero and break
    Cholesky factorisation.  Callers prepend the known zero sample.
    """
    if n < 2:
        raise ParameterError(f"grid size must be >= 2, got {n}")
    t = np.arange(1, n + 1, dtype=float) / n
    s_grid, t_grid = np.meshgrid(t, t, indexing="ij")
    lo = np.minimum(s_grid, t_grid)
    hi = np.maximum(s_grid, t_grid)
    full = _kernel(spec, lo, hi)
    # canonical ordering already makes this symmetric; mirroring the upper
    # triangle makes it exact by construction regardless
    upper = np.triu(full)
    return upper + np.triu(full, 1).T
