"""Solver toolkit for the doubly singular boundary value problem

    dz/du = c g(u) - f(u) - h(u)/z^alpha,   z(0+) = z(1-) = 0,  z > 0 on (0,1),

the first-order reduction behind monotone travelling fronts of
reaction-diffusion-convection equations: existence verdicts, certified
two-sided bounds and bisection for the critical wave speed, the unique
profile z(u) at admissible speeds, travelling-wave reconstruction u(t),
and an independent PDE cross-check.
"""

from .errors import FrontspeedError, NoSolutionError, ValidationError
from .model import Numerics, ProblemSpec, load, loads, problem, serialize, validate
from .asymptotics import (SingularLimit, eta1_slope, eta_roots, m_min,
                          singular_limit_one, singular_limit_zero)
from .bounds import SpeedBounds, certify_existence, constants, estimate, mean_value_curve
from .shooting import Trajectory, compare_upper, shoot, solve, volterra_residual
from .speed import Admissibility, SpeedResult, admissible, critical_speed
from .front import WaveProfile, reconstruct
from .pdecheck import SimConfig, SpeedMeasurement, simulate

__all__ = [
    "FrontspeedError", "NoSolutionError", "ValidationError",
    "Numerics", "ProblemSpec", "load", "loads", "problem", "serialize", "validate",
    "SingularLimit", "singular_limit_zero", "singular_limit_one",
    "m_min", "eta_roots", "eta1_slope",
    "SpeedBounds", "mean_value_curve", "constants", "estimate", "certify_existence",
    "Trajectory", "shoot", "solve", "compare_upper", "volterra_residual",
    "SpeedResult", "Admissibility", "critical_speed", "admissible",
    "WaveProfile", "reconstruct",
    "SimConfig", "SpeedMeasurement", "simulate",
]

__version__ = "0.1.0"
