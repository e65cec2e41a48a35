"""Exception hierarchy shared by all frontspeed modules.

The CLI maps these onto its exit-code contract:
2 = problem validation / parse failure, 3 = singular-limit failure,
4 = no solution at the requested speed, 5 = numerical failure.
"""

from __future__ import annotations


class FrontspeedError(Exception):
    """Base class for all errors raised by this package."""


# ---------------------------------------------------------------- expressions

class ExprError(FrontspeedError):
    """Base class for expression parsing/evaluation errors."""


class ExprSyntaxError(ExprError):
    def __init__(self, message: str, source: str, position: int):
        super().__init__(f"{message} at position {position} in {source!r}")
        self.source = source
        self.position = position


class UnknownIdentifierError(ExprSyntaxError):
    pass


class EvalDomainError(ExprError):
    """Evaluation left the real domain (log of a negative, 0/0, overflow...).

    Carries the offending sub-expression and the input at which it failed.
    """

    def __init__(self, message: str, subexpr: str, u: float):
        super().__init__(f"{message} in {subexpr!r} at u={u!r}")
        self.subexpr = subexpr
        self.u = u


# ---------------------------------------------------------------------- model

class ProblemFileError(FrontspeedError):
    """Malformed problem file (TOML syntax, unknown keys, bad types)."""


class ValidationError(FrontspeedError):
    """One or more standing hypotheses fail on the validation grid."""

    def __init__(self, violations):
        self.violations = list(violations)
        lines = "; ".join(str(v) for v in self.violations)
        super().__init__(f"problem violates standing hypotheses: {lines}")


# ---------------------------------------------------------------- asymptotics

class NoLimitError(FrontspeedError):
    """The sampled ratio tail oscillates: no limit can be extracted."""


class LimitInfiniteError(FrontspeedError):
    """An operation required a finite singular limit but it is infinite."""


class SingularDivergenceError(FrontspeedError):
    """Integrand of a mean-value curve diverges at the open endpoint."""


# ------------------------------------------------------------------- shooting

class ShootingError(FrontspeedError):
    """Base class for integration failures during shooting."""


class StartUndefinedError(ShootingError):
    """No valid asymptotic start condition at u = 1."""


class StepUnderflowError(ShootingError):
    """Adaptive step fell below the hard floor before reaching u_min."""


class ZeroCrossingError(ShootingError):
    """Numerical z hit zero at an interior u (tolerance failure)."""

    def __init__(self, u: float):
        super().__init__(f"z crossed zero at interior u={u:.6g}; "
                         "tighten tolerances (this is not a solution)")
        self.u = u


class AmbiguousClassificationError(ShootingError):
    """Trajectory endpoint sits between the classification thresholds even
    after one u_min refinement."""


class StartSensitivityError(ShootingError):
    """Halving the start offset moved the trajectory more than tolerated."""


# ---------------------------------------------------------------------- speed

class ExistenceFailsError(FrontspeedError):
    """h(u)/u^alpha diverges at 0: no front exists for any speed."""


class BracketFailureError(FrontspeedError):
    """The shooting classifier was non-monotone on the bisection bracket."""


class BoundsInconsistentError(FrontspeedError):
    """Computed lower bound exceeds the upper bound beyond tolerance."""


class NoSolutionError(FrontspeedError):
    """solve() refused: the requested speed admits no front."""

    SUBCRITICAL = "Subcritical"
    LIMIT_INFINITE = "LimitInfinite"

    def __init__(self, reason: str, detail: str = ""):
        self.reason = reason
        msg = f"no solution: {reason}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


# ---------------------------------------------------------------------- front

class NotASolutionError(FrontspeedError):
    """Profile reconstruction needs a trajectory that connects to zero."""


class ReductionUnsupportedError(FrontspeedError):
    """alpha != 1 reconstruction refused without the explicit opt-in."""


# ------------------------------------------------------------------- pdecheck

class StabilityViolationError(FrontspeedError):
    """Simulation config breaks the explicit-scheme stability bound."""


class FrontLostError(FrontspeedError):
    """The tracked level crossing left the domain before final time."""


class UnreliableFitError(FrontspeedError):
    """Front-speed fit residual too large; measurement refused."""
