"""Self-similarity index estimators built on the exponential subsampling.

Five algorithms:

* ``estimate_known_sigma``  -- root of the second-moment equation when the
  variance scale sigma^2 of V(1) is known (fBm, bfBm tables);
* ``estimate_kurtosis``     -- scale-free argmin of the empirical kurtosis
  of the subsampled stationary series (works for every family);
* ``estimate_sfbm``         -- second-moment equation with the subfractional
  variance target 2 - 2^{2H-1} built in;
* ``estimate_tfbm``         -- two-parameter (H, K) estimation for the
  trifractional family; see the function docstring for how the
  non-identifiability of the single equation is resolved;
* ``estimate_qv``           -- the classic two-scale quadratic-variations
  baseline.

All estimators accept any :class:`~selfsim.simulate.SamplePath`, including
ingested real-world series (spec None).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .lamperti import SubsampledSeries, build_subsample
from .numeric import (
    BracketError,
    SolveMethod,
    SolveReport,
    grid_then_brent,
    halley_solve,
)
from .simulate import SamplePath

#: Open-interval clipping for root brackets and for Brent scan intervals.
ROOT_EPS = 1e-6
BRENT_EPS = 1e-4


class Algorithm(enum.Enum):
    KNOWN_SIGMA = "known-sigma"
    KURTOSIS = "kurtosis"
    SFBM_KNOWN = "sfbm"
    TFBM_KNOWN = "tfbm"
    QV = "qv"


class DegenerateDataError(ValueError):
    """Input series carries no usable variation for the requested estimator."""


class EstimationError(RuntimeError):
    """Estimation failed for a non-degenerate input."""


@dataclass
class EstimateResult:
    """A point estimate of the self-similarity index plus diagnostics."""

    index_estimate: float
    algorithm: Algorithm
    h_component: float | None = None
    k_component: float | None = None
    report: SolveReport | None = None
    warnings: list[str] = field(default_factory=list)


def _canonical_squares(sub: SubsampledSeries) -> np.ndarray:
    """a_j^2 rescaled by an exact power of two so max is O(1).

    Pure power-of-two scaling is lossless, which makes the scale-free
    kurtosis statistic bit-identical under dyadic rescaling of the path.
    """
    peak = float(np.max(np.abs(sub.a)))
    if peak == 0.0:
        raise DegenerateDataError("subsampled series is identically zero")
    scaled = np.ldexp(sub.a, -math.frexp(peak)[1])
    return scaled * scaled


def f_known_sigma(sub: SubsampledSeries, H: float, sigma2: float) -> float:
    """Second-moment objective: mean_j a_j^2 b_j^{2H} - sigma2."""
    a2 = sub.a * sub.a
    return float(np.sum(a2 * sub.weights(2.0 * H)) / (sub.n + 1) - sigma2)


def f_known_sigma_derivs(
    sub: SubsampledSeries, H: float, sigma2: float
) -> tuple[float, float, float]:
    """(f, df/dH, d2f/dH2) of :func:`f_known_sigma`, sharing one weight pass."""
    a2 = sub.a * sub.a
    w = sub.weights(2.0 * H)
    scale = 2.0 * math.log(sub.n)
    terms = a2 * w / (sub.n + 1)
    val = float(np.sum(terms)) - sigma2
    d1 = scale * float(np.sum(terms * sub.exponents))
    d2 = scale * scale * float(np.sum(terms * sub.exponents * sub.exponents))
    return val, d1, d2


def kurtosis_stat(sub: SubsampledSeries, H: float) -> float:
    """Empirical kurtosis (n+1) sum a^4 b^{4H} / (sum a^2 b^{2H})^2.

    Always >= 1 by Cauchy-Schwarz; equals n+1 when a single a_j carries
    all the mass.
    """
    q = _canonical_squares(sub) * sub.weights(2.0 * H)
    total = float(np.sum(q))
    return (sub.n + 1) * float(np.sum(q * q)) / (total * total)


def _require_estimable(path: SamplePath) -> None:
    if path.n < 8:
        raise ValueError(
            f"estimation needs a grid of at least 8 points, got n={path.n}"
        )


def _monotone_root(sub, derivs, algorithm, boundary_hint) -> EstimateResult:
    """Shared driver: bracket on (eps, 1-eps), Halley solve, boundary fallback."""
    lo, hi = ROOT_EPS, 1.0 - ROOT_EPS
    flo, fhi = derivs(lo)[0], derivs(hi)[0]
    warnings_: list[str] = []
    if flo * fhi > 0.0:
        # monotone objective with no interior root: report the better endpoint
        endpoint, resid = (lo, abs(flo)) if abs(flo) < abs(fhi) else (hi, abs(fhi))
        warnings_.append(
            f"no sign change of {boundary_hint} on ({lo:g}, {hi:g}); "
            f"returning boundary estimate {endpoint:g}"
        )
        report = SolveReport(endpoint, 2, resid, SolveMethod.HALLEY, (lo, hi))
        return EstimateResult(
            index_estimate=endpoint,
            algorithm=algorithm,
            report=report,
            warnings=warnings_,
        )
    report = halley_solve(derivs, (lo, hi), tol=1e-10)
    return EstimateResult(
        index_estimate=report.root_or_argmin,
        algorithm=algorithm,
        report=report,
        warnings=warnings_,
    )


def estimate_known_sigma(path: SamplePath, sigma2: float) -> EstimateResult:
    """Estimate the index when Var(V(1)) = sigma2 is known.

    The objective mean_j a_j^2 b_j^{2H} - sigma2 is strictly increasing in
    H whenever the path is not identically zero, so the bracketed root is
    unique.  Exactly scale-equivariant: scaling the path by c together with
    sigma2 by c^2 gives the same estimate.
    """
    if sigma2 <= 0.0:
        raise ValueError(f"sigma2 must be positive, got {sigma2}")
    _require_estimable(path)
    sub = build_subsample(path)
    if not np.any(sub.a):
        raise DegenerateDataError("subsampled series is identically zero")

    def derivs(H):
        return f_known_sigma_derivs(sub, H, sigma2)

    return _monotone_root(sub, derivs, Algorithm.KNOWN_SIGMA, "the moment equation")


def estimate_sfbm(path: SamplePath) -> EstimateResult:
    """Estimate H for a subfractional path with unit variance scale.

    The variance of V(1) is 2 - 2^{2H-1} here, so the target moves with H.
    The objective stays strictly increasing (the sum grows in H while the
    target falls), hence the root is unique when bracketed.
    """
    _require_estimable(path)
    sub = build_subsample(path)
    if not np.any(sub.a):
        raise DegenerateDataError("subsampled series is identically zero")
    a2 = sub.a * sub.a
    scale = 2.0 * math.log(sub.n)
    log2_ = math.log(2.0)

    def derivs(H):
        w = sub.weights(2.0 * H)
        terms = a2 * w / (sub.n + 1)
        target = 2.0 ** (2.0 * H - 1.0)
        val = float(np.sum(terms)) - (2.0 - target)
        d1 = scale * float(np.sum(terms * sub.exponents)) + target * 2.0 * log2_
        d2 = (
            scale * scale * float(np.sum(terms * sub.exponents ** 2))
            + target * (2.0 * log2_) ** 2
        )
        return val, d1, d2

    return _monotone_root(sub, derivs, Algorithm.SFBM_KNOWN, "the subfractional equation")


def _kurtosis_argmin(sub: SubsampledSeries) -> tuple[SolveReport, list[str]]:
    """Grid scan (101 points) then Brent on the bracketing subinterval."""
    a2 = _canonical_squares(sub)

    def kappa(H):
        q = a2 * sub.weights(2.0 * H)
        total = float(np.sum(q))
        return (sub.n + 1) * float(np.sum(q * q)) / (total * total)

    lo, hi = BRENT_EPS, 1.0 - BRENT_EPS
    report = grid_then_brent(kappa, (lo, hi), tol=1e-8, points=101)
    warnings_: list[str] = []
    step = (hi - lo) / 100.0
    if report.root_or_argmin <= lo + step or report.root_or_argmin >= hi - step:
        warnings_.append(
            f"kurtosis argmin {report.root_or_argmin:g} sits at the edge of "
            f"({lo:g}, {hi:g})"
        )
    return report, warnings_


def estimate_kurtosis(path: SamplePath) -> EstimateResult:
    """Estimate the index without knowing the variance scale.

    Minimises the empirical kurtosis of the subsampled stationary series
    over H.  The statistic is invariant under rescaling of the path; the
    implementation normalises by an exact power of two, so dyadic
    rescaling gives bit-identical results.
    """
    _require_estimable(path)
    sub = build_subsample(path)
    if np.ptp(path.values[1:]) == 0.0:
        raise DegenerateDataError(
            "constant series: the kurtosis objective is monotone to the boundary"
        )
    report, warnings_ = _kurtosis_argmin(sub)
    return EstimateResult(
        index_estimate=report.root_or_argmin,
        algorithm=Algorithm.KURTOSIS,
        report=report,
        warnings=warnings_,
    )


def _tfbm_moment(sub: SubsampledSeries, product: float) -> float:
    """mean_j a_j^2 b_j^{2 HK}; depends on (H, K) only through HK."""
    a2 = sub.a * sub.a
    return float(np.sum(a2 * sub.weights(2.0 * product)) / (sub.n + 1))


def tfbm_residual(sub: SubsampledSeries, H: float, K: float) -> float:
    """Equation residual mean_j a_j^2 b_j^{2HK} - (2 - 2^K)."""
    return _tfbm_moment(sub, H * K) - (2.0 - 2.0 ** K)


def tfbm_solution_curve(
    path: SamplePath, grid_points: int = 99
) -> list[tuple[float, float, float]]:
    """Near-zero-residual (H, K, residual) triples along the solution set.

    For each K on the grid whose residual changes sign in H, the root is
    refined; the returned list is the diagnostic view of the whole
    non-identifiable solution curve.
    """
    sub = build_subsample(path)
    curve = []
    for i in range(1, grid_points + 1):
        K = i / (grid_points + 1.0)
        target = 2.0 - 2.0 ** K
        lo, hi = ROOT_EPS, 1.0 - ROOT_EPS
        r_lo = _tfbm_moment(sub, lo * K) - target
        r_hi = _tfbm_moment(sub, hi * K) - target
        if r_lo * r_hi > 0.0:
            continue
        scale = 2.0 * math.log(sub.n) * K
        a2 = sub.a * sub.a

        def derivs(H, K=K, target=target):
            w = sub.weights(2.0 * H * K)
            terms = a2 * w / (sub.n + 1)
            val = float(np.sum(terms)) - target
            d1 = scale * float(np.sum(terms * sub.exponents))
            d2 = scale * scale * float(np.sum(terms * sub.exponents ** 2))
            return val, d1, d2

        root = halley_solve(derivs, (lo, hi), tol=1e-10)
        curve.append((root.root_or_argmin, K, root.residual))
    return curve


def estimate_tfbm(path: SamplePath) -> EstimateResult:
    """Estimate (H, K) and the index HK for a trifractional path.

    The single moment equation determines only a curve of (H, K) pairs:
    the subsample statistic depends on the pair through the product
    P = H*K alone, so the equation factorises as F(P) = 2 - 2^K.  The
    implementation resolves the indeterminacy in two deterministic stages:

    1. the scale-free kurtosis stage estimates the identifiable product P;
    2. the equation then pins K = log2(2 - F(P)) uniquely, and H = P/K.

    When H would leave (0, 1) it is clipped and K re-solved on the
    boundary so the equation still holds; such results carry a boundary
    warning.  A non-identifiability note is always attached, and the full
    solution curve is available from :func:`tfbm_solution_curve`.
    """
    _require_estimable(path)
    sub = build_subsample(path)
    if np.ptp(path.values[1:]) == 0.0:
        raise DegenerateDataError(
            "constant series: the kurtosis stage is monotone to the boundary"
        )
    stage1, warnings_ = _kurtosis_argmin(sub)
    warnings_.append(
        "tfbm (H, K) split is not identified by the moment equation alone; "
        "K is pinned by the equation at the kurtosis product estimate"
    )
    product = stage1.root_or_argmin
    v_hat = _tfbm_moment(sub, product)
    lo, hi = ROOT_EPS, 1.0 - ROOT_EPS
    g_lo, g_hi = 2.0 - 2.0 ** hi, 2.0 - 2.0 ** lo
    iterations = stage1.iterations

    if not g_lo < v_hat < g_hi:
        side = "below" if v_hat <= g_lo else "above"
        warnings_.append(
            f"moment statistic {v_hat:g} falls {side} the representable "
            f"variance range; (H, K) components unavailable"
        )
        report = SolveReport(
            product, iterations, float("nan"), stage1.method, (lo, hi)
        )
        return EstimateResult(
            index_estimate=product,
            algorithm=Algorithm.TFBM_KNOWN,
            report=report,
            warnings=warnings_,
        )

    k_hat = float(np.log2(2.0 - v_hat))
    h_hat = product / k_hat
    if h_hat >= hi:
        # re-solve K on the H boundary so the equation keeps holding
        h_hat = hi
        a2 = sub.a * sub.a
        logn2 = 2.0 * math.log(sub.n)
        log2_ = math.log(2.0)

        def derivs(K):
            w = sub.weights(2.0 * h_hat * K)
            terms = a2 * w / (sub.n + 1)
            val = float(np.sum(terms)) - (2.0 - 2.0 ** K)
            d1 = (
                logn2 * h_hat * float(np.sum(terms * sub.exponents))
                + 2.0 ** K * log2_
            )
            d2 = (
                (logn2 * h_hat) ** 2 * float(np.sum(terms * sub.exponents ** 2))
                + 2.0 ** K * log2_ * log2_
            )
            return val, d1, d2

        try:
            boundary = halley_solve(derivs, (lo, hi), tol=1e-10)
            k_hat = boundary.root_or_argmin
            iterations += boundary.iterations
        except BracketError:
            k_hat = min(max(k_hat, lo), hi)
        warnings_.append("H clipped to the upper boundary; K re-solved there")
    elif h_hat <= lo:
        h_hat = lo
        warnings_.append("H clipped to the lower boundary")

    residual = abs(tfbm_residual(sub, h_hat, k_hat))
    report = SolveReport(
        h_hat * k_hat, iterations, residual, stage1.method, (lo, hi)
    )
    return EstimateResult(
        index_estimate=h_hat * k_hat,
        algorithm=Algorithm.TFBM_KNOWN,
        h_component=h_hat,
        k_component=k_hat,
        report=report,
        warnings=warnings_,
    )


def estimate_qv(path: SamplePath) -> EstimateResult:
    """Two-scale quadratic-variations baseline.

    H = 0.5 * log2(V2 / V1) with V1 the sum of squared unit-step increments
    and V2 the overlapping two-step analogue; the ratio concentrates at
    2^{2H} for fBm.  Estimates outside (0, 1) are clipped with a warning.
    """
    _require_estimable(path)
    v = path.values
    d1 = np.diff(v)
    v1 = float(np.sum(d1 * d1))
    if v1 == 0.0:
        raise DegenerateDataError("path has zero quadratic variation")
    d2 = v[2:] - v[:-2]
    v2 = float(np.sum(d2 * d2))
    warnings_: list[str] = []
    lo, hi = ROOT_EPS, 1.0 - ROOT_EPS
    if v2 == 0.0:
        estimate = lo
        warnings_.append("two-step variation is zero; estimate clipped to the lower boundary")
    else:
        estimate = 0.5 * math.log2(v2 / v1)
        if not lo < estimate < hi:
            clipped = min(max(estimate, lo), hi)
            warnings_.append(
                f"raw estimate {estimate:g} outside (0, 1); clipped to {clipped:g}"
            )
            estimate = clipped
    return EstimateResult(
        index_estimate=estimate,
        algorithm=Algorithm.QV,
        warnings=warnings_,
    )


#: CLI/harness-facing dispatch of algorithm tokens.
def run_algorithm(
    algorithm: Algorithm, path: SamplePath, sigma2: float | None = None
) -> EstimateResult:
    if algorithm is Algorithm.KNOWN_SIGMA:
        if sigma2 is None:
            raise ValueError("the known-sigma algorithm requires sigma2")
        return estimate_known_sigma(path, sigma2)
    if algorithm is Algorithm.KURTOSIS:
        return estimate_kurtosis(path)
    if algorithm is Algorithm.SFBM_KNOWN:
        return estimate_sfbm(path)
    if algorithm is Algorithm.TFBM_KNOWN:
        return estimate_tfbm(path)
    if algorithm is Algorithm.QV:
        return estimate_qv(path)
    raise ValueError(f"unknown algorithm {algorithm!r}")
