"""Scalar solver primitives: safeguarded Halley root-finding and bounded
Brent minimisation.

Both solvers are deterministic and report their work through
:class:`SolveReport` so estimators can surface iteration counts and
residuals.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Tuple

#: Default tolerances, overridable per call.
ROOT_TOL = 1e-10
MIN_TOL = 1e-8

_GOLDEN = 0.5 * (3.0 - math.sqrt(5.0))
_TINY_DENOM = 1e-300
_MAX_HALLEY_ITER = 100
_MAX_BRENT_ITER = 200


class SolveMethod(enum.Enum):
    HALLEY = "halley"
    BISECTION_FALLBACK = "bisection_fallback"
    BRENT = "brent"
    GRID_REFINE = "grid_refine"


class BracketError(ValueError):
    """Raised when a root bracket carries no sign change."""


@dataclass
class SolveReport:
    root_or_argmin: float
    iterations: int
    residual: float
    method: SolveMethod
    bracket: Tuple[float, float]


def halley_solve(
    f: Callable[[float], Tuple[float, float, float]],
    bracket: Tuple[float, float],
    tol: float = ROOT_TOL,
) -> SolveReport:
    """Find the root of f inside ``bracket`` by safeguarded Halley iteration.

    Parameters
    ----------
    f : callable
        Returns (value, first derivative, second derivative) at a point.
    bracket : (lo, hi)
        Must carry a sign change: f(lo) * f(hi) <= 0.
    tol : float
        Convergence on |f| or on the relative step size.

    The Halley update x - 2 f f' / (2 f'^2 - f f'') is accepted only while
    it stays inside the maintained sign-change interval; otherwise a single
    bisection step is taken.  After 100 iterations the solver falls back to
    pure bisection.
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    if not lo < hi:
        raise BracketError(f"bracket must satisfy lo < hi, got {bracket}")
    flo = f(lo)[0]
    fhi = f(hi)[0]
    iterations = 2
    if flo == 0.0:
        return SolveReport(lo, iterations, 0.0, SolveMethod.HALLEY, (lo, hi))
    if fhi == 0.0:
        return SolveReport(hi, iterations, 0.0, SolveMethod.HALLEY, (lo, hi))
    if flo * fhi > 0.0:
        raise BracketError(
            f"no sign change on [{lo}, {hi}]: f(lo)={flo:g}, f(hi)={fhi:g}"
        )

    a, b, fa = lo, hi, flo
    x = 0.5 * (a + b)
    method = SolveMethod.HALLEY
    for _ in range(_MAX_HALLEY_ITER):
        fx, d1, d2 = f(x)
        iterations += 1
        if abs(fx) <= tol:
            return SolveReport(x, iterations, abs(fx), method, (lo, hi))
        # shrink the sign-change interval around x
        if fa * fx <= 0.0:
            b = x
        else:
            a, fa = x, fx
        denom = 2.0 * d1 * d1 - fx * d2
        if abs(denom) < _TINY_DENOM:
            x_new = 0.5 * (a + b)
        else:
            step = 2.0 * fx * d1 / denom
            x_new = x - step
            if not a < x_new < b:
                x_new = 0.5 * (a + b)
            elif abs(step) <= tol * max(1.0, abs(x_new)):
                return SolveReport(
                    x_new, iterations, abs(fx), method, (lo, hi)
                )
        x = x_new

    # pure bisection to convergence
    method = SolveMethod.BISECTION_FALLBACK
    while b - a > tol * max(1.0, abs(a)):
        x = 0.5 * (a + b)
        fx = f(x)[0]
        iterations += 1
        if abs(fx) <= tol:
            break
        if fa * fx <= 0.0:
            b = x
        else:
            a, fa = x, fx
    x = 0.5 * (a + b)
    return SolveReport(x, iterations, abs(f(x)[0]), method, (lo, hi))


def brent_minimize(
    g: Callable[[float], float],
    interval: Tuple[float, float],
    tol: float = MIN_TOL,
) -> SolveReport:
    """Minimise g on ``interval`` by the golden-section/parabolic hybrid.

    Classic bounded Brent: every trial point lies strictly inside the
    interval, and the parabolic step is accepted only when it is well
    behaved; otherwise golden section is used.  Always returns the best
    point seen.
    """
    lo, hi = float(interval[0]), float(interval[1])
    if not lo < hi:
        raise ValueError(f"interval must satisfy lo < hi, got {interval}")
    sqrt_eps = math.sqrt(2.220446049250313e-16)

    a, b = lo, hi
    x = w = v = a + _GOLDEN * (b - a)
    fx = fw = fv = g(x)
    iterations = 1
    d = e = 0.0
    while iterations < _MAX_BRENT_ITER:
        m = 0.5 * (a + b)
        tol1 = sqrt_eps * abs(x) + tol / 3.0
        tol2 = 2.0 * tol1
        if abs(x - m) <= tol2 - 0.5 * (b - a):
            break
        use_golden = True
        if abs(e) > tol1:
            # fit a parabola through (x, w, v)
            r = (x - w) * (fx - fv)
            q = (x - v) * (fx - fw)
            p = (x - v) * q - (x - w) * r
            q = 2.0 * (q - r)
            if q > 0.0:
                p = -p
            q = abs(q)
            e_prev, e = e, d
            if (
                abs(p) < abs(0.5 * q * e_prev)
                and p > q * (a - x)
                and p < q * (b - x)
            ):
                d = p / q
                u = x + d
                if u - a < tol2 or b - u < tol2:
                    d = tol1 if x < m else -tol1
                use_golden = False
        if use_golden:
            e = (b if x < m else a) - x
            d = _GOLDEN * e
        u = x + (d if abs(d) >= tol1 else (tol1 if d > 0.0 else -tol1))
        fu = g(u)
        iterations += 1
        if fu <= fx:
            if u < x:
                b = x
            else:
                a = x
            v, fv, w, fw, x, fx = w, fw, x, fx, u, fu
        else:
            if u < x:
                a = u
            else:
                b = u
            if fu <= fw or w == x:
                v, fv, w, fw = w, fw, u, fu
            elif fu <= fv or v == x or v == w:
                v, fv = u, fu
    return SolveReport(
        x, iterations, float("nan"), SolveMethod.BRENT, (lo, hi)
    )


def grid_then_brent(
    g: Callable[[float], float],
    interval: Tuple[float, float],
    tol: float = MIN_TOL,
    points: int = 101,
) -> SolveReport:
    """Coarse grid scan followed by Brent on the bracketing subinterval.

    Protects against multimodal objectives: the scan selects the globally
    best grid cell before the local minimiser refines it.
    """
    lo, hi = float(interval[0]), float(interval[1])
    xs = [lo + (hi - lo) * i / (points - 1) for i in range(points)]
    vals = [g(x) for x in xs]
    best = min(range(points), key=lambda i: (vals[i], i))
    sub_lo = xs[max(best - 1, 0)]
    sub_hi = xs[min(best + 1, points - 1)]
    inner = brent_minimize(g, (sub_lo, sub_hi), tol=tol)
    return SolveReport(
        inner.root_or_argmin,
        inner.iterations + points,
        float("nan"),
        SolveMethod.GRID_REFINE,
        (lo, hi),
    )
