"""Backward shooting for dz/du = c g(u) - f(u) - h(u)/z^alpha.

The trajectory starts on the right-end asymptote just below u = 1 and is
integrated backward to u_min with an adaptive embedded Dormand-Prince 5(4)
pair. Backward is the attracting direction, so the start detail washes out
and the computed trajectory is the unique candidate solution: it either
connects to zero at the left end (a solution) or levels off at a positive
value (the speed is subcritical).

Start condition at u = 1 - delta:
  * right-end limit finite and negative: z = s*delta with s the unique
    positive root of the right-end slope polynomial;
  * limit -infinite: the linear start is invalid and the dominant balance
    dz/du ~ -h/z^alpha gives z = ((alpha+1) * int_{1-delta}^1 h)^(1/(alpha+1));
  * limit zero with zero slope: the trajectory is slaved to the
    quasi-static branch z = (h(u)/(c g(1) - f(1)))^(1/alpha), which is
    explicit-stiff arbitrarily close to u = 1 (step cost grows like
    1/(1-u)), so the start is placed at the deepest dyadic offset whose
    stiffness fits a fixed step budget and seeded on that branch.
The last two verify insensitivity by re-running at half the offset: the
branch toward u = 1 is strongly attracting in backward time, so a seed
detail that matters signals an untrustworthy start and is surfaced.

Near u_min the singular quotient is evaluated as (h(u)/u^alpha)*(u/z)^alpha;
both factors stay finite on connecting trajectories.

shoot() is a pure function; concurrent shots at different speeds share no
mutable state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicSpline, PchipInterpolator

from . import asymptotics as asy
from .errors import (AmbiguousClassificationError, LimitInfiniteError,
                     NoSolutionError, StartSensitivityError,
                     StartUndefinedError, StepUnderflowError,
                     ZeroCrossingError)
from .model import ProblemSpec

__all__ = ["Trajectory", "shoot", "solve", "compare_upper",
           "volterra_residual", "sample_deviation"]

CONNECTS = "ConnectsToZero"
POSITIVE_LIMIT = "PositiveLimit"

_MIN_STEP = 1e-14          # hard floor before StepUnderflowError
_SING_SWITCH = 1e-3        # below this u, use the factored singular quotient
_START_DEV_TOL = 1e-7      # delta-halving insensitivity threshold
_MAX_STEPS = 2_000_000     # accepted-step budget per integration

_GAUSS15_X, _GAUSS15_W = np.polynomial.legendre.leggauss(15)

# Dormand-Prince 5(4) tableau (FSAL)
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200,
       187 / 2100, 1 / 40)
_E = tuple(b5 - b4 for b5, b4 in zip(_B5, _B4))


class _StageOutOfDomain(Exception):
    """Internal: a stage left z <= 0 or produced a non-finite value."""


@dataclass
class Trajectory:
    c: float
    us: np.ndarray                  # strictly descending from 1 - delta
    zs: np.ndarray                  # positive everywhere
    dzs: np.ndarray                 # right-hand side at the samples
    classification: str             # CONNECTS or POSITIVE_LIMIT
    z_at_umin: float
    slope_at_zero: Optional[float]  # fitted z/u over the last decade
    matched_root: Optional[float]   # left-end polynomial root matched by it
    slope_at_one: float             # start slope magnitude (inf for balance)
    start_kind: str                 # "linear" | "balance" | "quasistatic"
    eta0: asy.EtaRoots
    u_min_used: float
    stats: dict = field(default_factory=dict)
    warnings: tuple[str, ...] = ()

    def z_of(self, u) -> np.ndarray:
        """Monotone-cubic interpolant of the samples (positivity-preserving)."""
        interp = PchipInterpolator(self.us[::-1], self.zs[::-1], extrapolate=False)
        return interp(u)

    def metadata(self) -> dict:
        return {
            "c": self.c,
            "classification": self.classification,
            "z_at_umin": self.z_at_umin,
            "u_min": self.u_min_used,
            "slope_at_zero": self.slope_at_zero,
            "matched_root": self.matched_root,
            "slope_at_one": ("infinite" if math.isinf(self.slope_at_one)
                             else self.slope_at_one),
            "start_kind": self.start_kind,
            "eta0_roots": list(self.eta0.roots),
            "samples": int(len(self.us)),
            "stats": dict(self.stats),
            "warnings": list(self.warnings),
        }

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("u,z,dz\n")
            for u, z, dz in zip(self.us, self.zs, self.dzs):
                fh.write(f"{float(u)!r},{float(z)!r},{float(dz)!r}\n")


# ------------------------------------------------------------------ integrator

def _integrate(rhs: Callable[[float, float], float], u0: float, z0: float,
               u_end: float, *, rtol: float, atol: float,
               step_cap: Callable[[float], float],
               guard_positive: bool = True,
               stop_when: Optional[Callable[[float, float], bool]] = None):
    """Adaptive DP5(4) from (u0, z0) to u_end (either direction).

    Returns (us, zs, dzs, stats). Steps whose stages leave the domain are
    rejected and retried smaller; an accepted nonpositive z aborts.
    stop_when, checked on accepted steps, ends the sweep early (recorded
    in stats["early_stop"]).
    """
    direction = 1.0 if u_end > u0 else -1.0
    u, z = u0, z0
    us = [u]
    zs = [z]
    try:
        k1 = rhs(u, z)
    except _StageOutOfDomain:
        raise ZeroCrossingError(u) from None
    dzs = [k1]
    stats = {"steps": 0, "rejected": 0, "min_step": math.inf, "rhs_evals": 1,
             "early_stop": False}
    h = direction * min(step_cap(u0), abs(u_end - u0))

    while (u_end - u) * direction > 0.0:
        if stats["steps"] + stats["rejected"] > _MAX_STEPS:
            raise StepUnderflowError(
                f"step budget {_MAX_STEPS} exhausted at u = {u:.6g}; "
                "the problem is too stiff for the explicit integrator")
        h_mag = min(abs(h), step_cap(u), abs(u_end - u))
        if h_mag < _MIN_STEP:
            raise StepUnderflowError(
                f"step {h_mag:.3g} below {_MIN_STEP:g} at u = {u:.6g}")
        h = direction * h_mag

        try:
            k = [k1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]
            for i in range(1, 7):
                zi = z + h * sum(a * k[j] for j, a in enumerate(_A[i]))
                if guard_positive and zi <= 0.0:
                    raise _StageOutOfDomain
                k[i] = rhs(u + _C[i] * h, zi)
            stats["rhs_evals"] += 6
        except _StageOutOfDomain:
            stats["rejected"] += 1
            h *= 0.5
            if abs(h) < _MIN_STEP:
                raise ZeroCrossingError(u) from None
            continue

        z_new = z + h * sum(b * ki for b, ki in zip(_B5, k))
        err = abs(h) * abs(sum(e * ki for e, ki in zip(_E, k)))
        tol = atol + rtol * max(abs(z), abs(z_new))

        if not math.isfinite(z_new) or not math.isfinite(err):
            stats["rejected"] += 1
            h *= 0.2
            continue

        if err <= tol:
            if guard_positive and z_new <= 0.0:
                stats["rejected"] += 1
                h *= 0.5
                if abs(h) < _MIN_STEP:
                    raise ZeroCrossingError(u + h)
                continue
            u += h
            z = z_new
            k1 = k[6]          # FSAL
            us.append(u)
            zs.append(z)
            dzs.append(k1)
            stats["steps"] += 1
            stats["min_step"] = min(stats["min_step"], abs(h))
            if stop_when is not None and stop_when(u, z):
                stats["early_stop"] = True
                break
            factor = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * (tol / err) ** 0.2))
            h *= factor
        else:
            stats["rejected"] += 1
            h *= max(0.2, 0.9 * (tol / err) ** 0.25)

    return np.asarray(us), np.asarray(zs), np.asarray(dzs), stats


# --------------------------------------------------------------------- shoot

def _make_rhs(spec: ProblemSpec, c: float) -> Callable[[float, float], float]:
    a = spec.alpha
    f_fn, g_fn, h_fn = spec.f_fn, spec.g_fn, spec.h_fn

    def rhs(u: float, z: float) -> float:
        if z <= 0.0:
            raise _StageOutOfDomain
        if u <= 0.0:
            return c * g_fn(0.0) - f_fn(0.0)
        if u < _SING_SWITCH:
            quot = (h_fn(u) / u ** a) * (u / z) ** a
        else:
            quot = h_fn(u) / z ** a
        val = c * g_fn(u) - f_fn(u) - quot
        if not math.isfinite(val):
            raise _StageOutOfDomain
        return val

    return rhs


_QS_STEP_BUDGET = 5000.0


def _quasistatic_offset(spec: ProblemSpec, b1: float) -> float:
    """Deepest dyadic 1-u offset whose stiff layer fits the step budget.

    On the quasi-static branch the Jacobian is alpha*b1/z, so an explicit
    sweep from offset delta costs about alpha*b1*delta/z(1-delta) steps.
    """
    a = spec.alpha
    best = 0.25
    for k in range(2, 41):
        delta = 2.0 ** -k
        hval = spec.h_fn(1.0 - delta)
        if hval <= 0.0:
            break
        z_qs = (hval / b1) ** (1.0 / a)
        if a * b1 * delta / z_qs > _QS_STEP_BUDGET:
            break
        best = delta
    return best


def _start_state(spec: ProblemSpec, c: float, delta: float,
                 h1: asy.SingularLimit) -> tuple[float, float, float, str]:
    """(start u, start z, slope magnitude at 1, start kind)."""
    a = spec.alpha
    if math.isinf(h1.value):
        # dominant balance: z^(alpha+1)/(alpha+1) ~ int_u^1 h
        xs = 1.0 - delta + delta * (_GAUSS15_X + 1.0) / 2.0
        ws = _GAUSS15_W * delta / 2.0
        integral = float(np.dot(ws, spec.h_vec(xs)))
        z0 = ((a + 1.0) * integral) ** (1.0 / (a + 1.0))
        return 1.0 - delta, z0, math.inf, "balance"
    slope = asy.eta1_slope(a, c, spec, h1)
    if slope.value > 0.0:
        return 1.0 - delta, slope.value * delta, slope.value, "linear"
    b1 = c * spec.g_fn(1.0) - spec.f_fn(1.0)
    if b1 <= 1e-12:
        raise StartUndefinedError(
            "right-end limit and c g(1) - f(1) both vanish: no usable "
            "asymptotic start at u = 1")
    d = _quasistatic_offset(spec, b1)
    z0 = (spec.h_fn(1.0 - d) / b1) ** (1.0 / a)
    return 1.0 - d, z0, 0.0, "quasistatic"


def _fit_slope(us: np.ndarray, zs: np.ndarray, u_hi: float) -> Optional[float]:
    """Least-squares slope of z through the origin on samples with u <= u_hi."""
    sel = us <= u_hi
    if np.count_nonzero(sel) < 2:
        return None
    u = us[sel]
    z = zs[sel]
    return float(np.dot(u, z) / np.dot(u, u))


def _match_root(fit: float, roots: tuple[float, ...], rtol: float):
    """(matched root or None, inside-corridor flag).

    A positive root matches within rtol relative; the zero root (present
    exactly when the left-end limit vanishes) matches when the fit is zero
    on the scale of the root separation.
    """
    scale = max([1.0] + [abs(r) for r in roots])
    best = None
    best_d = math.inf
    for r in roots:
        d = abs(fit - r)
        tol = rtol * (scale if r == 0.0 else max(abs(r), 1e-2))
        if d <= tol and d < best_d:
            best, best_d = r, d
    corridor = False
    if len(roots) == 2:
        pad = rtol * max(abs(roots[1]), 1e-2)
        corridor = roots[0] - pad <= fit <= roots[1] + pad
    return best, corridor


def shoot(spec: ProblemSpec, c: float, *,
          u_min: Optional[float] = None,
          limits: Optional[tuple[asy.SingularLimit, asy.SingularLimit]] = None,
          ) -> Trajectory:
    """Integrate backward from u = 1 and classify the outcome.

    ConnectsToZero requires z(u_min) below the threshold AND the fitted
    slope z/u over the last decade consistent with the left-end polynomial
    root set (membership, not a particular root: which root is selected is
    recorded, not asserted). An endpoint between the decision regions
    triggers up to three decade-deeper retries before being reported as
    ambiguous.
    """
    num = spec.numerics
    if u_min is None:
        u_min = num.u_min
    if limits is None:
        h0 = asy.singular_limit_zero(spec)
        h1 = asy.singular_limit_one(spec)
    else:
        h0, h1 = limits
    if math.isinf(h0.value):
        raise LimitInfiniteError(
            "left-end limit infinite: no trajectory can connect (and no "
            "front exists for any speed)")
    if not math.isfinite(c):
        raise ValueError("c must be finite")

    rhs = _make_rhs(spec, c)
    u_start, z0, slope_one, start_kind = _start_state(
        spec, c, num.delta_start, h1)

    beta0 = c * spec.g_fn(0.0) - spec.f_fn(0.0)
    eta0 = asy.eta_roots(spec.alpha, beta0, h0.value)

    # A connection with slope exactly zero rides a branch slaved to h that
    # is explicit-stiff all the way down (step cost ~ 1/u); once z/u is
    # zero on the root-separation scale the verdict is already decided.
    stop_when = None
    if eta0.roots and eta0.roots[0] == 0.0:
        coef = 0.125 * num.slope_match_rtol * max(1.0, eta0.roots[-1])

        def stop_when(u: float, z: float) -> bool:
            return u <= 1e-3 and z <= coef * u

    def run(u0: float, z0_: float, u_stop: float):
        delta_ = 1.0 - u0

        def step_cap(u: float) -> float:
            return min(num.max_step,
                       max(u / 3.0, u_stop / 10.0),
                       max((1.0 - u) / 3.0, delta_ / 8.0))

        return _integrate(rhs, u0, z0_, u_stop,
                          rtol=num.rtol, atol=num.atol, step_cap=step_cap,
                          stop_when=stop_when)

    us, zs, dzs, stats = run(u_start, z0, u_min)

    warnings = []
    for lim in (h0, h1):
        if lim.warning:
            warnings.append(lim.warning)

    if start_kind != "linear":
        # right-end root set is degenerate: check the start detail washes out
        delta_half = 0.5 * (1.0 - u_start)
        if start_kind == "balance":
            _, z0_half, _, _ = _start_state(spec, c, delta_half, h1)
        else:
            b1 = c * spec.g_fn(1.0) - spec.f_fn(1.0)
            z0_half = (spec.h_fn(1.0 - delta_half) / b1) ** (1.0 / spec.alpha)
        us2, zs2, _, _ = run(1.0 - delta_half, z0_half, u_min)
        dev = sample_deviation((us, zs), (us2, zs2))
        if dev > _START_DEV_TOL:
            raise StartSensitivityError(
                f"halving the start offset moved the trajectory by {dev:.3g} "
                f"(tolerance {_START_DEV_TOL:g}); the start condition is "
                "not trustworthy for this problem")

    def classify(us_, zs_, umin_):
        z_end = float(zs_[-1])
        fit = _fit_slope(us_, zs_, 10.0 * umin_)
        if stats["early_stop"]:
            # fired only on the slaved slope-zero branch: z/u vanished on
            # the root-separation scale while still far above u_min
            return CONNECTS, fit, 0.0
        # decay of z across the last decade: ~0.1 on a linear descent,
        # ~1 on a plateau (a positive limit, however small)
        z_decade = float(np.interp(10.0 * umin_, us_[::-1], zs_[::-1]))
        decay = z_end / z_decade if z_decade > 0 else 1.0
        if z_end > 10.0 * num.tol_zero:
            return POSITIVE_LIMIT, fit, None
        if fit is not None:
            root, corridor = _match_root(fit, eta0.roots, num.slope_match_rtol)
            if z_end < num.tol_zero and root is not None:
                return CONNECTS, fit, root
            if z_end < num.tol_zero and corridor:
                # between two pinched roots: the descent toward the smaller
                # root is logarithmically slow near the threshold speed but
                # still consistent with a connecting trajectory
                return CONNECTS, fit, None
            sigma_end = z_end / umin_
            sigma_prev = z_decade / (10.0 * umin_)
            if z_end < num.tol_zero and eta0.double_root:
                # the approach to a double root is logarithmic; z/u rising
                # toward it while bounded above can only converge there
                top = eta0.roots[0]
                if sigma_prev * (1.0 - 1e-3) <= sigma_end \
                        <= top * (1.0 + num.slope_match_rtol):
                    return CONNECTS, fit, top
            if decay >= 0.5:
                # levelled off below the threshold: a subcritical hair
                return POSITIVE_LIMIT, fit, None
            # in the asymptotic regime the slope ratio z/u above the upper
            # root moves strictly away from it in backward time, so such a
            # trajectory can never connect
            if umin_ <= 1e-4 and sigma_end > 1.02 * sigma_prev:
                if not eta0.roots:
                    return POSITIVE_LIMIT, fit, None
                top = eta0.roots[-1]
                if sigma_end > top + num.slope_match_rtol * max(top, 1e-2):
                    return POSITIVE_LIMIT, fit, None
        return None, fit, None

    u_min_used = float(us[-1])
    verdict, fit, root = classify(us, zs, u_min_used)
    # near the threshold speed trajectories linger between the decision
    # regions; each refinement goes one decade deeper and is cheap
    retries = 0
    while verdict is None and retries < 3:
        retries += 1
        u_min_used /= 10.0
        us3, zs3, dzs3, stats3 = _integrate(
            rhs, float(us[-1]), float(zs[-1]), u_min_used,
            rtol=num.rtol, atol=num.atol,
            step_cap=lambda u: min(num.max_step, max(u / 3.0, u_min_used / 10.0)))
        us = np.concatenate([us, us3[1:]])
        zs = np.concatenate([zs, zs3[1:]])
        dzs = np.concatenate([dzs, dzs3[1:]])
        for key in ("steps", "rejected", "rhs_evals"):
            stats[key] += stats3[key]
        stats["min_step"] = min(stats["min_step"], stats3["min_step"])
        verdict, fit, root = classify(us, zs, u_min_used)
    if verdict is None:
        raise AmbiguousClassificationError(
            f"z({u_min_used:g}) = {zs[-1]:.3g} sits between the "
            f"connection thresholds even after refinement "
            f"(fitted slope {fit!r}, roots {eta0.roots})")

    connects = verdict == CONNECTS
    return Trajectory(
        c=c, us=us, zs=zs, dzs=dzs,
        classification=verdict,
        z_at_umin=float(zs[-1]),
        slope_at_zero=fit if connects else None,
        matched_root=root,
        slope_at_one=slope_one,
        start_kind=start_kind,
        eta0=eta0,
        u_min_used=u_min_used,
        stats=stats,
        warnings=tuple(warnings))


def solve(spec: ProblemSpec, c: float) -> Trajectory:
    """The unique solution at speed c, or a refusal.

    Raises NoSolutionError with reason LimitInfinite when the left-end
    limit diverges (no front for any speed) and with reason Subcritical
    when the trajectory levels off at a positive value.
    """
    h0 = asy.singular_limit_zero(spec)
    if math.isinf(h0.value):
        raise NoSolutionError(NoSolutionError.LIMIT_INFINITE,
                              "h(u)/u^alpha -> infinity at 0")
    h1 = asy.singular_limit_one(spec)
    traj = shoot(spec, c, limits=(h0, h1))
    if traj.classification != CONNECTS:
        raise NoSolutionError(
            NoSolutionError.SUBCRITICAL,
            f"z levels off at {traj.z_at_umin:.3g}: c = {c:g} is below the "
            "critical speed")
    return traj


def compare_upper(spec: ProblemSpec, c: float, base: Trajectory,
                  margin: float, u0: float = 0.3,
                  u_end: Optional[float] = None) -> bool:
    """Order check against an upper solution (classical comparison).

    Integrates y forward from (u0, z(u0)) with the right-hand side raised
    by margin; by construction y is an upper solution, so the base
    trajectory must stay below it: returns whether z(u) <= y(u) + 1e-8 up
    to u_end (default: the top of the base trajectory).
    """
    if margin < 0:
        raise ValueError("margin must be >= 0")
    num = spec.numerics
    if u_end is None:
        u_end = float(base.us[0])
    rhs = _make_rhs(spec, c)

    def rhs_up(u: float, y: float) -> float:
        return rhs(u, y) + margin

    base_z = CubicSpline(base.us[::-1], base.zs[::-1], extrapolate=False)
    y0 = float(base_z(u0))

    def step_cap(u: float) -> float:
        return min(num.max_step, max((1.0 - u) / 3.0, num.delta_start / 8.0))

    try:
        us, ys, _, _ = _integrate(rhs_up, u0, y0, u_end,
                                  rtol=num.rtol, atol=num.atol,
                                  step_cap=step_cap)
    except ZeroCrossingError:
        return False        # y dipped to zero while z stays positive
    z_on = base_z(us)
    ok = np.isfinite(z_on)
    return bool(np.all(z_on[ok] <= ys[ok] + 1e-8))


def sample_deviation(a, b, lo: float = 0.05, hi: float = 0.95,
                     n: int = 181) -> float:
    """Max |z_a - z_b| on a probe grid, comparing through cubic splines.

    The two sample sets land on different abscissae, so a low-order
    interpolant would report its own error rather than the trajectories'
    distance. Accepts Trajectory objects or (us, zs) pairs.
    """
    probe = np.linspace(lo, hi, n)

    def spline(t):
        us, zs = (t.us, t.zs) if isinstance(t, Trajectory) else t
        return CubicSpline(us[::-1], zs[::-1])

    return float(np.max(np.abs(spline(a)(probe) - spline(b)(probe))))


def volterra_residual(traj: Trajectory, spec: ProblemSpec,
                      lo: float = 0.1, hi: float = 0.9) -> float:
    """Deviation of the samples from the integral form of the equation.

    Independently of the stepper, the right-hand side is integrated along
    the monotone-cubic interpolant with per-interval Gauss panels; the
    residual is the spread of z(u) - cumulative integral over [lo, hi].
    """
    rhs = _make_rhs(spec, traj.c)
    us = traj.us[::-1]
    zs = traj.zs[::-1]
    sel = (us >= lo) & (us <= hi)
    u = us[sel]
    z = zs[sel]
    interp = PchipInterpolator(us, zs)
    gx, gw = np.polynomial.legendre.leggauss(7)
    cum = np.zeros_like(u)
    for i in range(len(u) - 1):
        a, b = u[i], u[i + 1]
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        nodes = mid + half * gx
        vals = [rhs(float(x), float(interp(x))) for x in nodes]
        cum[i + 1] = cum[i] + half * float(np.dot(gw, vals))
    r = z - z[0] - cum
    return float(np.max(r) - np.min(r))
