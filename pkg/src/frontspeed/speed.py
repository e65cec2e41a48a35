"""Critical speed by bisection of the shooting classifier.

The analytic bracket comes from the two-sided estimate; connection is a
monotone property of c (speeds at and above the threshold admit the front,
speeds below do not), so plain bisection on the boolean classifier is
robust: roughly twenty shots resolve the threshold to 1e-6. When the two
analytic bounds already coincide within the bisection tolerance the
threshold is pinned without firing a single shot.

Bisection is sequential in c; each shot is pure, and independent problems
can be processed concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from . import asymptotics as asy
from . import bounds as bnd
from . import shooting as sht
from .errors import BracketFailureError, ExistenceFailsError, NoSolutionError
from .model import ProblemSpec

__all__ = ["SpeedResult", "Admissibility", "critical_speed", "admissible"]


@dataclass
class SpeedResult:
    c_star: float
    bounds: bnd.SpeedBounds
    tolerance: float
    iterations: int
    bracket_history: list[tuple[float, float]] = field(default_factory=list)
    coinciding: bool = False
    # final-bracket shots: upper endpoint connects, lower endpoint does not
    certificate_super: Optional[sht.Trajectory] = None
    certificate_sub: Optional[sht.Trajectory] = None
    warnings: tuple[str, ...] = ()

    def metadata(self) -> dict:
        return {
            "c_star": self.c_star,
            "tolerance": self.tolerance,
            "iterations": self.iterations,
            "coinciding_bounds": self.coinciding,
            "bracket_history": [list(b) for b in self.bracket_history],
            "bounds": self.bounds.as_dict(),
            "certificate_super_c": None if self.certificate_super is None
                                   else self.certificate_super.c,
            "certificate_sub_c": None if self.certificate_sub is None
                                 else self.certificate_sub.c,
            "warnings": list(self.warnings),
        }


def critical_speed(spec: ProblemSpec, tol_c: Optional[float] = None) -> SpeedResult:
    """Threshold speed c*: fronts exist exactly for c >= c*.

    Raises ExistenceFailsError when the left-end limit diverges and
    BracketFailureError when the classifier contradicts monotonicity on
    the bracket (always a numerical or problem-definition failure worth
    surfacing, never auto-repaired).
    """
    if tol_c is None:
        tol_c = spec.numerics.tol_c
    h0 = asy.singular_limit_zero(spec)
    if math.isinf(h0.value):
        raise ExistenceFailsError(
            "h(u)/u^alpha -> infinity at 0: no front exists for any speed")
    est = bnd.estimate(spec, h0)
    lower, upper = est.lower, est.upper
    warnings = [h0.warning] if h0.warning else []

    if upper - lower <= tol_c:
        # the analytic sandwich already pins the threshold
        c_star = 0.5 * (lower + upper)
        return SpeedResult(c_star=c_star, bounds=est, tolerance=tol_c,
                           iterations=0, bracket_history=[(lower, upper)],
                           coinciding=True, warnings=tuple(warnings))

    h1 = asy.singular_limit_one(spec)
    limits = (h0, h1)

    def shot(c: float) -> sht.Trajectory:
        return sht.shoot(spec, c, limits=limits)

    history = [(lower, upper)]
    t_hi = shot(upper)
    iterations = 1
    if t_hi.classification != sht.CONNECTS:
        # guaranteed above the upper bound; a miss here is a tolerance
        # failure, so the bracket extends once
        extended = upper + 1.0
        t_hi = shot(extended)
        iterations += 1
        if t_hi.classification != sht.CONNECTS:
            raise BracketFailureError(
                f"no connection at c = {upper!r} nor at {extended!r}, "
                "contradicting the upper bound; integrator tolerances "
                "are not sufficient for this problem")
        warnings.append(
            f"no connection at the analytic upper bound {upper!r}; "
            "bracket extended once")
        hi = extended
    else:
        hi = upper

    t_lo = shot(lower)
    iterations += 1
    lo = lower
    if t_lo.classification == sht.CONNECTS:
        # threshold sits at the lower bound itself
        return SpeedResult(c_star=lower, bounds=est, tolerance=tol_c,
                           iterations=iterations,
                           bracket_history=history + [(lower, lower)],
                           certificate_super=t_lo,
                           warnings=tuple(warnings))

    while hi - lo > tol_c:
        mid = 0.5 * (lo + hi)
        t_mid = shot(mid)
        iterations += 1
        if t_mid.classification == sht.CONNECTS:
            hi, t_hi = mid, t_mid
        else:
            lo, t_lo = mid, t_mid
        history.append((lo, hi))

    return SpeedResult(c_star=0.5 * (lo + hi), bounds=est, tolerance=tol_c,
                       iterations=iterations, bracket_history=history,
                       certificate_super=t_hi, certificate_sub=t_lo,
                       warnings=tuple(warnings))


@dataclass
class Admissibility:
    c: float
    admissible: bool
    reason: Optional[str] = None             # refusal reason when not admissible
    trajectory: Optional[sht.Trajectory] = None
    certificate_slope: Optional[float] = None  # linear lower-solution slope

    def metadata(self) -> dict:
        return {
            "c": self.c,
            "admissible": self.admissible,
            "reason": self.reason,
            "certificate_slope": self.certificate_slope,
        }


def admissible(spec: ProblemSpec, c: float) -> Admissibility:
    """Whether speed c admits a front, with the evidence bundled.

    On success the evidence is the trajectory itself plus, for c above the
    analytic upper bound, the linear lower-solution slope that certifies
    existence independently of the shooting.
    """
    try:
        traj = sht.solve(spec, c)
    except NoSolutionError as exc:
        return Admissibility(c=c, admissible=False, reason=exc.reason)
    cert = None
    try:
        cert = bnd.certify_existence(spec, c)
    except ExistenceFailsError:        # unreachable after a successful solve
        cert = None
    return Admissibility(c=c, admissible=True, trajectory=traj,
                         certificate_slope=cert)
