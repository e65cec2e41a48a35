"""Mean-value constants and the two-sided estimate for the critical speed.

With the averaged integrals

    G0 = inf_(0,1) (1/u) int_0^u g,   F0 = sup_(0,1) (1/u) int_0^u f,
    H0 = sup_(0,1) (1/u) int_0^u h(s)/s^alpha ds,

the critical speed c* is sandwiched between

    f(0)/g(0) + (alpha+1)/g(0) * (h0/alpha^alpha)^(1/(alpha+1))      (lower)
    F0/G0     + (alpha+1)/G0   * (H0/alpha^alpha)^(1/(alpha+1))      (upper)

where h0 is the left-end singular limit. The extrema are searched on a
uniform grid and polished by golden section; the u -> 0+ limits of the
curves (f(0), g(0), h0) and the u = 1 values are included as candidates
since the curves extend continuously to both endpoints.

Everything here is pure; results embed into the CLI JSON report.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.integrate import quad

from . import asymptotics as asy
from .errors import BoundsInconsistentError, ExistenceFailsError, SingularDivergenceError
from .model import ProblemSpec, running_integral

__all__ = ["SpeedBounds", "mean_value_curve", "constants", "estimate",
           "certify_existence"]

_GAUSS_X, _GAUSS_W = np.polynomial.legendre.leggauss(15)


@dataclass(frozen=True)
class SpeedBounds:
    f0: float
    g0: float
    F0: float
    G0: float
    H0: float
    h0_alpha: float
    lower: float
    upper: float
    quadrature_error_estimate: float
    # where the winning extrema sit (0.0 encodes the u -> 0+ limit)
    u_at_F0: float = 0.0
    u_at_G0: float = 0.0
    u_at_H0: float = 0.0

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in (
            "f0", "g0", "F0", "G0", "H0", "h0_alpha", "lower", "upper",
            "quadrature_error_estimate", "u_at_F0", "u_at_G0", "u_at_H0")}


# ------------------------------------------------------------------ mean value

def mean_value_curve(w: Callable[[float], float], u: float,
                     singular_power: float = 0.0,
                     limit_at_zero: Optional[float] = None) -> float:
    """(1/u) * int_0^u w(s)/s^p ds by adaptive quadrature.

    The Gauss-Kronrod rule is open, so the integrand is never sampled at
    s = 0; for p > 0 the finite limit of w(s)/s^p there is still required
    and is extrapolated along the dyadic ladder unless supplied.
    """
    if not (0.0 < u <= 1.0):
        raise ValueError("u must lie in (0, 1]")
    p = float(singular_power)
    if p > 0 and limit_at_zero is None:
        ratios = np.array([w(2.0 ** -k) / 2.0 ** (-k * p) for k in range(10, 41)])
        limit_at_zero = asy._extract_limit(ratios, +1, "zero")
    if limit_at_zero is not None and math.isinf(limit_at_zero):
        raise SingularDivergenceError(
            "integrand diverges at the open endpoint s = 0")

    if p == 0:
        integrand = w
    else:
        def integrand(s: float) -> float:
            return w(s) / s ** p

    value, _ = quad(integrand, 0.0, u, epsabs=1e-10, epsrel=1e-12, limit=200)
    return value / u


def _gauss_panel(fn_vec, a: float, b: float) -> float:
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    return half * float(np.dot(_GAUSS_W, fn_vec(mid + half * _GAUSS_X)))


def _golden(fn, a: float, b: float, tol: float) -> tuple[float, float]:
    """Golden-section minimum of fn on [a, b] to bracket width tol."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fn(c), fn(d)
    best = min((fc, c), (fd, d))
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fn(d)
        best = min(best, (fc, c), (fd, d))
    return best[1], best[0]


class _Curve:
    """Mean-value curve u -> (1/u) int_0^u w, backed by cumulative values on
    a grid plus local Gauss panels for off-grid evaluations."""

    def __init__(self, w_vec, grid: np.ndarray, cum: np.ndarray, limit0: float):
        self.w_vec = w_vec
        self.grid = grid
        self.cum = cum
        self.limit0 = limit0
        with np.errstate(divide="ignore", invalid="ignore"):
            vals = cum / grid
        vals[0] = limit0
        self.node_values = vals

    def __call__(self, u: float) -> float:
        if u <= 0.0:
            return self.limit0
        j = int(np.searchsorted(self.grid, u, side="right")) - 1
        j = min(max(j, 0), len(self.grid) - 2)
        c = self.cum[j] + _gauss_panel(self.w_vec, self.grid[j], u)
        return c / u

    def extremum(self, kind: str, tol: float) -> tuple[float, float]:
        """(u, value) of the sup ('max') or inf ('min') including the u->0
        limit and u = 1 as candidates."""
        sign = -1.0 if kind == "max" else 1.0
        vals = sign * self.node_values
        i = int(np.argmin(vals))
        best_u, best_v = float(self.grid[i]), float(vals[i])
        if 0 < i < len(self.grid) - 1:
            lo, hi = float(self.grid[i - 1]), float(self.grid[i + 1])
        elif i == len(self.grid) - 1:
            lo, hi = float(self.grid[i - 1]), 1.0
        else:
            return best_u, sign * best_v        # the limit candidate wins
        u, v = _golden(lambda x: sign * self(x), lo, hi, tol)
        if v < best_v:
            best_u, best_v = u, v
        return best_u, sign * best_v


def _h_ratio_vec(spec: ProblemSpec, h0_value: float):
    a = spec.alpha

    def fn(s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        out = np.empty_like(s)
        pos = s > 0.0
        out[pos] = spec.h_vec(s[pos]) / s[pos] ** a
        out[~pos] = h0_value
        return out

    return fn


def constants(spec: ProblemSpec,
              h0: Optional[asy.SingularLimit] = None) -> SpeedBounds:
    """F0, G0, H0 and the endpoint data; lower/upper are filled by estimate().

    Requires a finite left-end limit (H0's integrand must extend
    continuously to 0).
    """
    if h0 is None:
        h0 = asy.singular_limit_zero(spec)
    if math.isinf(h0.value):
        raise SingularDivergenceError(
            "h(u)/u^alpha diverges at 0; the mean-value integrand has no "
            "finite endpoint limit")
    num = spec.numerics
    grid = np.linspace(0.0, 1.0, num.extremum_points)

    f0 = float(spec.f_fn(0.0))
    g0 = float(spec.g_fn(0.0))
    hr_vec = _h_ratio_vec(spec, h0.value)

    cum_f, err_f = running_integral(spec.f_vec, grid, num.quad_tol)
    cum_g, err_g = running_integral(spec.g_vec, grid, num.quad_tol)
    cum_h, err_h = running_integral(hr_vec, grid, num.quad_tol)

    curve_f = _Curve(spec.f_vec, grid, cum_f, f0)
    curve_g = _Curve(spec.g_vec, grid, cum_g, g0)
    curve_h = _Curve(hr_vec, grid, cum_h, h0.value)

    uF, F0 = curve_f.extremum("max", num.golden_tol)
    uG, G0 = curve_g.extremum("min", num.golden_tol)
    uH, H0 = curve_h.extremum("max", num.golden_tol)

    if not (G0 > 0.0):
        raise BoundsInconsistentError(
            f"computed G0 = {G0:.6g} <= 0 contradicts the standing "
            "hypotheses on g; check the problem definition")

    return SpeedBounds(
        f0=f0, g0=g0, F0=F0, G0=G0, H0=H0, h0_alpha=h0.value,
        lower=math.nan, upper=math.nan,
        quadrature_error_estimate=max(err_f, err_g, err_h),
        u_at_F0=uF, u_at_G0=uG, u_at_H0=uH)


def estimate(spec: ProblemSpec,
             h0: Optional[asy.SingularLimit] = None) -> SpeedBounds:
    """Two-sided bracket for the critical speed.

    Raises ExistenceFailsError when the left-end limit is infinite (no
    front exists for any speed).
    """
    if h0 is None:
        h0 = asy.singular_limit_zero(spec)
    if math.isinf(h0.value):
        raise ExistenceFailsError(
            "h(u)/u^alpha -> infinity at 0: no travelling front exists "
            "for any wave speed")
    base = constants(spec, h0)
    a = spec.alpha
    aa = a ** a
    lower = base.f0 / base.g0 + (a + 1.0) / base.g0 * (h0.value / aa) ** (1.0 / (a + 1.0))
    upper = base.F0 / base.G0 + (a + 1.0) / base.G0 * (base.H0 / aa) ** (1.0 / (a + 1.0))
    if lower > upper + 1e-9:
        raise BoundsInconsistentError(
            f"lower bound {lower:.9g} exceeds upper bound {upper:.9g}; "
            "the estimate is outside its effective regime")
    return SpeedBounds(
        f0=base.f0, g0=base.g0, F0=base.F0, G0=base.G0, H0=base.H0,
        h0_alpha=h0.value, lower=lower, upper=upper,
        quadrature_error_estimate=base.quadrature_error_estimate,
        u_at_F0=base.u_at_F0, u_at_G0=base.u_at_G0, u_at_H0=base.u_at_H0)


def certify_existence(spec: ProblemSpec, c: float,
                      bounds: Optional[SpeedBounds] = None) -> Optional[float]:
    """Slope L of a linear lower solution proving existence at speed c.

    For c strictly above the upper bound, M(t) = t^(a+1) - (c G0 - F0) t^a
    + H0 has a negative minimum; its argmin L makes psi(u) = L u a valid
    certificate. Returns None when c <= upper (no certificate guaranteed).
    """
    if bounds is None or math.isnan(bounds.upper):
        bounds = estimate(spec)
    if not (c > bounds.upper):
        return None
    beta = c * bounds.G0 - bounds.F0
    gamma = bounds.H0
    argmin, mv = asy.m_min(spec.alpha, beta, gamma)
    if mv >= 0.0:
        return None
    return argmin
