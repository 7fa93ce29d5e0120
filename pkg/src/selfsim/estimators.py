"""scikit-learn style front end for the index estimators.

Each class wraps one estimation algorithm behind the familiar
``fit(X) -> self`` protocol with trailing-underscore attributes, so the
estimators compose with pipelines, ``clone`` and ``get_params`` like any
other sklearn-compatible component.  ``X`` is a one-dimensional series of
path values on a uniform grid; pass the full path including the t = 0
sample when you have it (simulated data), or raw observations otherwise.

    >>> from selfsim.estimators import KurtosisLamperti
    >>> est = KurtosisLamperti().fit(values)
    >>> est.index_
    0.51...
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from .estimate import (
    Algorithm,
    estimate_known_sigma,
    estimate_kurtosis,
    estimate_qv,
    estimate_sfbm,
    estimate_tfbm,
)
from .simulate import SamplePath


def validate_series(X, min_length: int = 9) -> np.ndarray:
    """Coerce X to a finite 1-D float array of at least ``min_length`` points."""
    arr = np.asarray(X, dtype=float)
    if arr.ndim == 2 and 1 in arr.shape:
        arr = arr.ravel()
    if arr.ndim != 1:
        raise ValueError(f"expected a 1-D series, got shape {arr.shape}")
    if arr.size < min_length:
        raise ValueError(
            f"series too short: need at least {min_length} points, got {arr.size}"
        )
    if not np.all(np.isfinite(arr)):
        raise ValueError("series contains non-finite values")
    return arr


def _as_path(X, assume_origin: bool) -> SamplePath:
    arr = validate_series(X)
    if assume_origin:
        return SamplePath(n=arr.size - 1, values=arr)
    return SamplePath.from_observations(arr)


class _IndexEstimatorBase(BaseEstimator):
    """Shared fit plumbing; subclasses provide ``_estimate``.

    Parameters
    ----------
    assume_origin : bool
        If True (default) X[0] is taken to be the t = 0 sample of the
        path; if False, X holds raw observations at j/n, j = 1..n.
    """

    def __init__(self, assume_origin: bool = True):
        self.assume_origin = assume_origin

    def _estimate(self, path: SamplePath):
        raise NotImplementedError

    def fit(self, X, y=None):
        result = self._estimate(_as_path(X, self.assume_origin))
        self.result_ = result
        self.index_ = result.index_estimate
        self.h_ = result.h_component
        self.k_ = result.k_component
        self.warnings_ = list(result.warnings)
        self.n_features_in_ = 1
        return self

    def fit_estimate(self, X) -> float:
        """Convenience: fit and return the index estimate."""
        return self.fit(X).index_


class KnownSigmaLamperti(_IndexEstimatorBase):
    """Index estimator for a known variance scale Var(V(1)) = sigma2."""

    algorithm = Algorithm.KNOWN_SIGMA

    def __init__(self, sigma2: float = 1.0, assume_origin: bool = True):
        super().__init__(assume_origin=assume_origin)
        self.sigma2 = sigma2

    def _estimate(self, path):
        return estimate_known_sigma(path, self.sigma2)


class KurtosisLamperti(_IndexEstimatorBase):
    """Scale-free index estimator (unknown variance)."""

    algorithm = Algorithm.KURTOSIS

    def _estimate(self, path):
        return estimate_kurtosis(path)


class SubfractionalLamperti(_IndexEstimatorBase):
    """Index estimator for subfractional paths with unit variance scale."""

    algorithm = Algorithm.SFBM_KNOWN

    def _estimate(self, path):
        return estimate_sfbm(path)


class TrifractionalLamperti(_IndexEstimatorBase):
    """(H, K) estimator for trifractional paths; ``index_`` is H*K."""

    algorithm = Algorithm.TFBM_KNOWN

    def _estimate(self, path):
        return estimate_tfbm(path)


class QuadraticVariations(_IndexEstimatorBase):
    """Two-scale quadratic-variations baseline."""

    algorithm = Algorithm.QV

    def _estimate(self, path):
        return estimate_qv(path)
