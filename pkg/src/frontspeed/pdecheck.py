"""Independent validation by direct PDE simulation.

For the classical restriction (alpha = 1, D = 1, g = 1) the underlying
reaction-diffusion-convection equation is

    v_t = v_xx + rho(v) - f(v) v_x,         rho = h,

and a step initial condition develops a front whose asymptotic speed is
measured and compared against the critical speed from the shooting side.
The scheme is a plain explicit one: central second difference for the
diffusion, first-order upwinding for the convection, Neumann boundaries.
Desk-scale by design; the comparison band in the acceptance suite is 5%.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import expr as ex
from .errors import (FrontLostError, StabilityViolationError,
                     UnreliableFitError, ValidationError)
from .model import ProblemSpec, Violation

__all__ = ["SimConfig", "SpeedMeasurement", "simulate"]

_STABILITY_SAFETY = 0.9


@dataclass(frozen=True)
class SimConfig:
    domain_length: float = 300.0
    dx: float = 0.1
    dt: Optional[float] = None        # None: set from the stability bound
    t_final: float = 100.0
    level: float = 0.5                # tracked crossing v = level
    x0: float = 50.0                  # initial step position (v = 1 left of it)
    snapshots: int = 201              # crossing-position samples over [0, T]

    def resolved_dt(self) -> float:
        bound = _STABILITY_SAFETY * self.dx ** 2 / 2.0
        if self.dt is None:
            return bound
        return self.dt


@dataclass
class SpeedMeasurement:
    speed: float
    slope_stderr: float               # standard error of the fitted slope
    rms_residual: float               # rms of the position-fit residuals
    times: np.ndarray = field(repr=False)
    positions: np.ndarray = field(repr=False)
    fit_window: tuple[int, int] = (0, 0)
    dx: float = 0.0
    dt: float = 0.0
    final_x: np.ndarray = field(default=None, repr=False)
    final_v: np.ndarray = field(default=None, repr=False)

    def metadata(self) -> dict:
        return {
            "speed": self.speed,
            "slope_stderr": self.slope_stderr,
            "rms_residual": self.rms_residual,
            "dx": self.dx,
            "dt": self.dt,
            "fit_window": list(self.fit_window),
            "n_positions": int(len(self.times)),
        }

    def write_snapshot_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("x,v\n")
            for x, v in zip(self.final_x, self.final_v):
                fh.write(f"{float(x)!r},{float(v)!r}\n")


def _check_preconditions(spec: ProblemSpec) -> None:
    violations = []
    if spec.alpha != 1.0:
        violations.append(Violation(
            "alpha = 1 for the PDE check", math.nan, f"alpha = {spec.alpha!r}"))
    grid = np.linspace(0.0, 1.0, 257)
    if np.max(np.abs(spec.g_vec(grid) - 1.0)) > 1e-12:
        violations.append(Violation(
            "g == 1 for the PDE check", math.nan,
            "the accumulation term must be trivial for this validator"))
    if spec.d is not None:
        d_vals = ex.compile_vector(spec.d)(grid)
        if np.max(np.abs(d_vals - 1.0)) > 1e-12:
            violations.append(Violation(
                "D == 1 for the PDE check", math.nan,
                "nonconstant diffusion is outside the validator's scope"))
    if violations:
        raise ValidationError(violations)


def simulate(spec: ProblemSpec, cfg: SimConfig = SimConfig()) -> SpeedMeasurement:
    """Run the explicit scheme and fit the front speed.

    The crossing of the tracked level is located by linear interpolation at
    each snapshot; the speed is a least-squares line through the positions
    in the second half of the run (the first half is start-up transient).
    Raises StabilityViolationError for configs breaking the explicit
    bounds, FrontLostError when the crossing leaves the domain, and
    UnreliableFitError when the slope's standard error exceeds 5% of it.
    """
    _check_preconditions(spec)
    if not (0.1 < cfg.level < 0.9):
        raise ValidationError([Violation(
            "tracked level inside (0.1, 0.9)", cfg.level, f"level = {cfg.level!r}")])

    dx = cfg.dx
    dt = cfg.resolved_dt()
    if dt > _STABILITY_SAFETY * dx * dx / 2.0 + 1e-15:
        raise StabilityViolationError(
            f"dt = {dt:g} exceeds the diffusive bound "
            f"{_STABILITY_SAFETY * dx * dx / 2.0:g}")

    n = int(round(cfg.domain_length / dx)) + 1
    x = np.linspace(0.0, cfg.domain_length, n)
    v = np.where(x < cfg.x0, 1.0, 0.0)

    f_vec = spec.f_vec
    rho_vec = spec.h_vec            # h = D*rho with D = 1
    probe = np.linspace(0.0, 1.0, 257)
    f_probe = f_vec(probe)
    advect = bool(np.max(np.abs(f_probe)) > 1e-15)
    if advect:
        cfl = float(np.max(np.abs(f_probe))) * dt / dx
        if cfl > _STABILITY_SAFETY:
            raise StabilityViolationError(
                f"advective CFL {cfl:.3g} exceeds {_STABILITY_SAFETY}")

    n_steps = int(math.ceil(cfg.t_final / dt))
    snap_every = max(1, n_steps // max(1, cfg.snapshots - 1))

    times = []
    positions = []
    inv_dx2 = 1.0 / (dx * dx)
    inv_dx = 1.0 / dx

    def crossing(vv: np.ndarray) -> float:
        above = np.nonzero(vv >= cfg.level)[0]
        if above.size == 0:
            raise FrontLostError("the tracked level vanished from the domain")
        i = int(above[-1])
        if i >= n - 1:
            raise FrontLostError("the front reached the right boundary")
        v1, v2 = vv[i], vv[i + 1]
        frac = (v1 - cfg.level) / (v1 - v2) if v1 != v2 else 0.0
        return float(x[i] + frac * dx)

    step = 0
    while step <= n_steps:
        if step % snap_every == 0 or step == n_steps:
            pos = crossing(v)
            if pos > cfg.domain_length - 5 * dx:
                raise FrontLostError(
                    f"front at x = {pos:.3g} is about to exit the domain "
                    f"before t_final; enlarge the domain or shorten the run")
            times.append(step * dt)
            positions.append(pos)
        if step == n_steps:
            break
        lap = np.empty_like(v)
        lap[1:-1] = (v[2:] - 2.0 * v[1:-1] + v[:-2]) * inv_dx2
        lap[0] = 2.0 * (v[1] - v[0]) * inv_dx2        # Neumann walls
        lap[-1] = 2.0 * (v[-2] - v[-1]) * inv_dx2
        rhs = lap + rho_vec(np.clip(v, 0.0, 1.0))
        if advect:
            wind = f_vec(np.clip(v, 0.0, 1.0))
            back = np.empty_like(v)
            back[1:] = (v[1:] - v[:-1]) * inv_dx
            back[0] = 0.0
            fwd = np.empty_like(v)
            fwd[:-1] = (v[1:] - v[:-1]) * inv_dx
            fwd[-1] = 0.0
            rhs -= wind * np.where(wind > 0.0, back, fwd)
        v = v + dt * rhs
        step += 1

    times = np.asarray(times)
    positions = np.asarray(positions)
    start = len(times) // 2
    t_fit = times[start:]
    x_fit = positions[start:]
    slope, intercept = np.polyfit(t_fit, x_fit, 1)
    resid = x_fit - (slope * t_fit + intercept)
    dof = max(1, len(t_fit) - 2)
    stderr = math.sqrt(float(np.sum(resid ** 2)) / dof /
                       float(np.sum((t_fit - t_fit.mean()) ** 2)))
    rms = math.sqrt(float(np.mean(resid ** 2)))
    # floor keeps legitimate zero-speed measurements (no reaction) reportable
    if stderr > 0.05 * max(abs(slope), 0.01):
        raise UnreliableFitError(
            f"slope standard error {stderr:.3g} exceeds 5% of the fitted "
            f"speed {slope:.3g}; measurement refused")
    return SpeedMeasurement(
        speed=float(slope), slope_stderr=stderr, rms_residual=rms,
        times=times, positions=positions, fit_window=(start, len(times)),
        dx=dx, dt=dt, final_x=x, final_v=v)
