"""Singular limits at the endpoints and the endpoint-slope polynomials.

The limit at the left end, lim_{u->0+} h(u)/u^alpha, decides existence:
infinite means no front for any speed. Its mirror at the right end,
lim_{u->1-} -h(u)/(1-u)^alpha in [-inf, 0], fixes the unique start slope
for backward shooting. Both are taken from an analytic override when the
problem file provides one, and extrapolated along the dyadic ladder
u_k = 2^-k (resp. 1 - 2^-k), k = 10..40, otherwise.

Also here: the function M(t) = t^(alpha+1) - beta*t^alpha + gamma on t >= 0,
whose minimum has a closed form and whose nonnegative roots are the only
admissible endpoint slopes dz/du(0); and the unique start slope at u = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import LimitInfiniteError, NoLimitError
from .model import ProblemSpec

__all__ = ["SingularLimit", "EtaRoots", "StartSlope",
           "singular_limit_zero", "singular_limit_one",
           "m_value", "m_min", "eta_roots", "eta1_slope"]

_K_RANGE = range(10, 41)          # dyadic ladder exponents
_HUGE = 1e8                       # outright divergence threshold
_GROWTH_SLOPE = 0.1               # log2 growth per rung that flags divergence
_SPREAD_TOL = 1e-2                # relative spread tolerated in the tail
_TINY = 1e-300


@dataclass(frozen=True)
class SingularLimit:
    value: float                     # may be +-inf
    side: str                        # "zero" or "one"
    provenance: str                  # "analytic-override" or "extrapolated"
    diagnostics: tuple[float, ...]   # raw ratios along the ladder
    warning: Optional[str] = None

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.value)


def _aitken(seq: np.ndarray) -> np.ndarray:
    """Aitken delta-squared acceleration; falls back to the raw value where
    the second difference is negligible."""
    out = []
    for k in range(len(seq) - 2):
        d1 = seq[k + 1] - seq[k]
        d2 = seq[k + 2] - seq[k + 1]
        den = d2 - d1
        if abs(den) < 1e-15 * max(1.0, abs(seq[k + 2])):
            out.append(seq[k + 2])
        else:
            out.append(seq[k + 2] - d2 * d2 / den)
    return np.asarray(out)


def _extract_limit(ratios: np.ndarray, sign: int, side: str) -> float:
    """Limit of the ladder values; sign = +1 for the [0, inf] side, -1 for
    the [-inf, 0] side. Raises NoLimitError on an oscillating tail."""
    mags = np.abs(ratios)

    tail5 = mags[-5:]
    if np.all(tail5 > _HUGE) and np.all(np.diff(tail5) > 0):
        return sign * math.inf
    # Sustained geometric growth also means divergence: slow power-law
    # blow-ups (e.g. like u^(-1/2)) never reach the hard threshold on this
    # ladder but double every few rungs.
    tail9 = np.maximum(mags[-9:], _TINY)
    slopes = np.log2(tail9[1:] / tail9[:-1])
    if np.median(slopes) >= _GROWTH_SLOPE and tail9[-1] > 4.0 * tail9[0] \
            and np.all(np.diff(mags[-5:]) >= 0):
        return sign * math.inf

    acc = _aitken(ratios[-14:])
    tail = acc[-5:]
    spread = float(np.max(tail) - np.min(tail))
    scale = max(1.0, abs(float(np.median(tail))))
    if spread / scale > _SPREAD_TOL:
        raise NoLimitError(
            f"ratio tail at the {side} end oscillates (spread {spread:.3g} "
            f"over scale {scale:.3g}); the limit, if it exists, cannot be "
            "extracted numerically")
    value = float(tail[-1])
    if abs(value) < 1e-12:
        value = 0.0
    # h > 0 pins the sign; tiny excursions past zero are roundoff
    if sign > 0:
        value = max(value, 0.0)
    else:
        value = min(value, 0.0)
    return value


def _ladder(ratio_at: Callable[[int], float]) -> np.ndarray:
    return np.array([ratio_at(k) for k in _K_RANGE], dtype=float)


def _limit_with_override(side: str, override: Optional[float],
                         ratio_at: Callable[[int], float], sign: int) -> SingularLimit:
    ratios = _ladder(ratio_at)
    if override is not None:
        warning = None
        try:
            est = _extract_limit(ratios, sign, side)
        except NoLimitError:
            est = None
        if est is not None and not (math.isinf(override) and math.isinf(est)):
            denom = max(1.0, abs(override)) if math.isfinite(override) else math.inf
            if math.isinf(override) != math.isinf(est) or \
                    (math.isfinite(override) and abs(est - override) / denom > 1e-3):
                warning = (f"analytic override {override!r} at the {side} end "
                           f"disagrees with the extrapolated value {est!r}; "
                           "the override wins, check it for typos")
        return SingularLimit(override, side, "analytic-override",
                             tuple(ratios), warning)
    return SingularLimit(_extract_limit(ratios, sign, side), side,
                         "extrapolated", tuple(ratios))


def singular_limit_zero(spec: ProblemSpec) -> SingularLimit:
    """lim_{u->0+} h(u)/u^alpha in [0, +inf]."""
    a = spec.alpha

    def ratio_at(k: int) -> float:
        u = 2.0 ** -k
        return spec.h_fn(u) / u ** a

    return _limit_with_override("zero", spec.h0_override, ratio_at, +1)


def singular_limit_one(spec: ProblemSpec) -> SingularLimit:
    """lim_{u->1-} -h(u)/(1-u)^alpha in [-inf, 0]."""
    a = spec.alpha

    def ratio_at(k: int) -> float:
        v = 2.0 ** -k
        return -spec.h_fn(1.0 - v) / v ** a

    return _limit_with_override("one", spec.h1_override, ratio_at, -1)


# --------------------------------------------------------- slope polynomials

def m_value(alpha: float, beta: float, gamma: float, t):
    """M(t) = t^(alpha+1) - beta t^alpha + gamma, vector-friendly."""
    t = np.asarray(t, dtype=float)
    return t ** (alpha + 1) - beta * t ** alpha + gamma


def m_min(alpha: float, beta: float, gamma: float) -> tuple[float, float]:
    """Closed-form (argmin, min) of M on t >= 0.

    For beta > 0 the minimum sits at alpha*beta/(alpha+1); for beta <= 0
    the function is nondecreasing and the minimum is M(0) = gamma.
    """
    if beta <= 0:
        return 0.0, gamma
    argmin = alpha * beta / (alpha + 1.0)
    mv = gamma - alpha ** alpha * beta ** (alpha + 1) / (alpha + 1.0) ** (alpha + 1)
    return argmin, mv


@dataclass(frozen=True)
class EtaRoots:
    alpha: float
    beta: float
    gamma: float
    roots: tuple[float, ...]     # distinct nonnegative roots, sorted
    double_root: bool
    argmin: float
    min_value: float


def _refine_root(fun, dfun, lo: float, hi: float) -> float:
    """Bracketed bisection to width 1e-13, then three safeguarded Newton
    polish steps (Newton alone can escape the bracket near double roots)."""
    flo = fun(lo)
    for _ in range(200):
        if hi - lo <= 1e-13:
            break
        mid = 0.5 * (lo + hi)
        fm = fun(mid)
        if fm == 0.0:
            lo = hi = mid
            break
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    t = 0.5 * (lo + hi)
    for _ in range(3):
        try:
            d = dfun(t)
        except (ValueError, ZeroDivisionError, OverflowError):
            break
        if d == 0.0 or not math.isfinite(d):
            break
        step = fun(t) / d
        nxt = min(max(t - step, lo), hi)
        if nxt == t:
            break
        t = nxt
    return t


def _polish_left_root(alpha: float, beta: float, gamma: float,
                      start: float) -> float:
    """Fixed-point polish t <- (gamma/(beta - t))^(1/alpha) for the left
    root. Contracting below the argmin and monotone from below, it stays
    accurate even when the root is orders of magnitude below the absolute
    bisection width (small alpha makes the polynomial extremely steep
    there, which ruins Newton's residual)."""
    t = min(start, (gamma / beta) ** (1.0 / alpha))
    for _ in range(100):
        nxt = (gamma / (beta - t)) ** (1.0 / alpha)
        if abs(nxt - t) <= 1e-16 * max(nxt, 1e-300):
            return nxt
        t = nxt
    return t


def eta_roots(alpha: float, beta: float, gamma: float) -> EtaRoots:
    """All nonnegative solutions of t^(alpha+1) - beta t^alpha + gamma = 0.

    Empty when the minimum of M is positive; one double root when it
    vanishes (within the dead-band); two simple roots when it is negative,
    bracketed on [0, argmin] and [argmin, beta].
    """
    alpha, beta, gamma = float(alpha), float(beta), float(gamma)
    argmin, mv = m_min(alpha, beta, gamma)
    deadband = 1e-12 * max(1.0, gamma)

    if gamma == 0.0:
        # t^alpha (t - beta): 0 is always a root, beta joins it when positive
        if beta > 0:
            return EtaRoots(alpha, beta, gamma, (0.0, beta), False, argmin, mv)
        return EtaRoots(alpha, beta, gamma, (0.0,), beta == 0.0, argmin, mv)

    if mv > deadband:
        return EtaRoots(alpha, beta, gamma, (), False, argmin, mv)
    if abs(mv) <= deadband:
        return EtaRoots(alpha, beta, gamma, (argmin,), True, argmin, mv)

    def fun(t: float) -> float:
        return t ** (alpha + 1) - beta * t ** alpha + gamma

    def dfun(t: float) -> float:
        return (alpha + 1) * t ** alpha - alpha * beta * t ** (alpha - 1)

    r1 = _refine_root(fun, dfun, 0.0, argmin)
    fp = _polish_left_root(alpha, beta, gamma, r1)
    if 0.0 < fp < argmin and abs(fun(fp)) < abs(fun(r1)):
        r1 = fp
    r2 = _refine_root(fun, dfun, argmin, beta)   # M(beta) = gamma > 0
    return EtaRoots(alpha, beta, gamma, (r1, r2), False, argmin, mv)


@dataclass(frozen=True)
class StartSlope:
    value: float
    degenerate: bool     # right-end limit vanished: root choice not unique


def eta1_slope(alpha: float, c: float, spec: ProblemSpec,
               h1: Optional[SingularLimit] = None) -> StartSlope:
    """Magnitude of the start slope |dz/du| at u = 1 for backward shooting.

    With q = -lim_{u->1-} h(u)... strictly negative, the slope is the unique
    positive root of s^(alpha+1) + (c g(1) - f(1)) s^alpha - q = 0 (single
    sign change). A vanishing limit is the degenerate case: the root set of
    the right-end polynomial is {0} plus possibly -(c g(1) - f(1)).
    """
    if h1 is None:
        h1 = singular_limit_one(spec)
    if math.isinf(h1.value):
        raise LimitInfiniteError(
            "right-end limit is -infinite: linear start undefined "
            "(shooting falls back to the dominant-balance start)")
    q = -h1.value
    b1 = c * spec.g_fn(1.0) - spec.f_fn(1.0)
    if q <= 1e-12:
        return StartSlope(max(0.0, -b1), True)

    def fun(s: float) -> float:
        return s ** (alpha + 1) + b1 * s ** alpha - q

    def dfun(s: float) -> float:
        return (alpha + 1) * s ** alpha + alpha * b1 * s ** (alpha - 1)

    hi = max(1.0, 2.0 * abs(b1), (2.0 * q) ** (1.0 / (alpha + 1)))
    while fun(hi) <= 0:
        hi *= 2.0
    return StartSlope(_refine_root(fun, dfun, 0.0, hi), False)
