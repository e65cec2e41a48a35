"""Problem definition, file loading, and validation of the standing hypotheses.

A problem instance is the data (alpha, f, g, h) of the first-order equation

    dz/du = c*g(u) - f(u) - h(u)/z^alpha        on (0, 1),  z(0+) = z(1-) = 0,

where h may be given directly or as the product D*rho. The standing
hypotheses checked here: alpha > 0; h(0) = h(1) = 0 with h > 0 inside (0,1);
g(0) > 0 and the running integral of g positive on (0, 1].

Problem files are TOML with a [problem] section and an optional [numerics]
section; see the README for the exact field names. Unknown keys are errors.

ProblemSpec is immutable after construction and all operations here are
pure, so specs can be shared freely across threads.
"""

from __future__ import annotations

import io
import json
import math
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Callable, Optional

import numpy as np
from scipy.integrate import cumulative_simpson

from . import expr as ex
from .errors import EvalDomainError, ProblemFileError, ValidationError

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

__all__ = ["Numerics", "ProblemSpec", "Violation", "problem", "load", "loads",
           "validate", "serialize"]


@dataclass(frozen=True)
class Numerics:
    """Resolution and tolerance knobs, all overridable per problem file."""

    validation_points: int = 2001     # interior grid points for hypothesis checks
    endpoint_tol: float = 1e-12       # |h(0)|, |h(1)| absolute tolerance
    quad_tol: float = 1e-10           # requested absolute quadrature error
    integral_margin: float = 1e-9     # tolerated quadrature noise in positivity
    extremum_points: int = 4097       # search grid for the mean-value extrema
    golden_tol: float = 1e-10         # golden-section bracket width
    delta_start: float = 1e-6         # start offset below u = 1
    u_min: float = 1e-8               # backward integration endpoint
    tol_zero: float = 1e-7            # connection threshold on z(u_min)
    rtol: float = 1e-10               # integrator relative tolerance
    atol: float = 1e-12               # integrator absolute tolerance
    max_step: float = 5e-3            # integrator step cap away from endpoints
    slope_match_rtol: float = 5e-3    # fitted slope vs endpoint-polynomial roots
    tol_c: float = 1e-6               # bisection bracket width for c*
    eps_prof: float = 1e-4            # wave-profile truncation at u = eps, 1-eps


@dataclass(frozen=True)
class Violation:
    hypothesis: str
    witness: float
    detail: str

    def __str__(self) -> str:
        return f"{self.hypothesis}: {self.detail} (u = {self.witness:.6g})"


@dataclass(frozen=True)
class ProblemSpec:
    alpha: float
    f: ex.Expr
    g: ex.Expr
    h: ex.Expr
    f_src: str
    g_src: str
    h_src: str
    d: Optional[ex.Expr] = None
    rho: Optional[ex.Expr] = None
    d_src: Optional[str] = None
    rho_src: Optional[str] = None
    h0_override: Optional[float] = None   # value of lim h(u)/u^alpha, may be inf
    h1_override: Optional[float] = None   # value of lim -h(u)/(1-u)^alpha, may be -inf
    numerics: Numerics = field(default_factory=Numerics)
    warnings: tuple[str, ...] = ()

    # compiled fast paths, filled in __post_init__
    f_fn: Callable[[float], float] = field(init=False, repr=False, compare=False)
    g_fn: Callable[[float], float] = field(init=False, repr=False, compare=False)
    h_fn: Callable[[float], float] = field(init=False, repr=False, compare=False)
    f_vec: Callable = field(init=False, repr=False, compare=False)
    g_vec: Callable = field(init=False, repr=False, compare=False)
    h_vec: Callable = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        for name in ("f", "g", "h"):
            node = getattr(self, name)
            object.__setattr__(self, f"{name}_fn", ex.compile_scalar(node))
            object.__setattr__(self, f"{name}_vec", ex.compile_vector(node))

    def with_numerics(self, **overrides) -> "ProblemSpec":
        """Copy of this spec with some numerics fields replaced."""
        num = dict(self.numerics.__dict__)
        unknown = set(overrides) - set(num)
        if unknown:
            raise ProblemFileError(f"unknown numerics keys: {sorted(unknown)}")
        num.update(overrides)
        return ProblemSpec(
            alpha=self.alpha, f=self.f, g=self.g, h=self.h,
            f_src=self.f_src, g_src=self.g_src, h_src=self.h_src,
            d=self.d, rho=self.rho, d_src=self.d_src, rho_src=self.rho_src,
            h0_override=self.h0_override, h1_override=self.h1_override,
            numerics=Numerics(**num), warnings=self.warnings)


# --------------------------------------------------------------- construction

def problem(alpha: float, f: str, g: str, h: str | None = None, *,
            d: str | None = None, rho: str | None = None,
            h0_override: float | None = None, h1_override: float | None = None,
            numerics: Numerics | None = None,
            check: bool = True) -> ProblemSpec:
    """Build a ProblemSpec from expression strings and validate it."""
    if h is not None and (d is not None or rho is not None):
        raise ProblemFileError("give either h or the pair (D, rho), not both")
    if h is None:
        if d is None or rho is None:
            raise ProblemFileError("h missing: give h or both of D and rho")
        d_node = ex.parse(d)
        rho_node = ex.parse(rho)
        h_node = ex.BinOp("*", d_node, rho_node)
        h_src = f"({d}) * ({rho})"
    else:
        d_node = ex.parse(d) if d is not None else None
        rho_node = None
        h_node = ex.parse(h)
        h_src = h
        d = None
        rho = None
    if h0_override is not None and not (h0_override >= 0):
        raise ProblemFileError("h0_alpha_override must be >= 0 (or infinite)")
    if h1_override is not None and not (h1_override <= 0):
        raise ProblemFileError("h1_alpha_override must be <= 0 (or neg_infinite)")
    spec = ProblemSpec(
        alpha=float(alpha),
        f=ex.parse(f), g=ex.parse(g), h=h_node,
        f_src=f, g_src=g, h_src=h_src,
        d=d_node, rho=rho_node, d_src=d, rho_src=rho,
        h0_override=h0_override, h1_override=h1_override,
        numerics=numerics or Numerics())
    if check:
        violations, warnings = _check(spec)
        if violations:
            raise ValidationError(violations)
        spec = ProblemSpec(
            alpha=spec.alpha, f=spec.f, g=spec.g, h=spec.h,
            f_src=spec.f_src, g_src=spec.g_src, h_src=spec.h_src,
            d=spec.d, rho=spec.rho, d_src=spec.d_src, rho_src=spec.rho_src,
            h0_override=spec.h0_override, h1_override=spec.h1_override,
            numerics=spec.numerics, warnings=tuple(warnings))
    return spec


_PROBLEM_KEYS = {"alpha", "f", "g", "h", "D", "rho",
                 "h0_alpha_override", "h1_alpha_override"}


def _parse_override(value, key: str, sign: int) -> float:
    if isinstance(value, str):
        word = value.strip().lower()
        if sign > 0 and word in ("infinite", "inf"):
            return math.inf
        if sign < 0 and word in ("neg_infinite", "-inf"):
            return -math.inf
        raise ProblemFileError(f"{key}: unrecognised value {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    raise ProblemFileError(f"{key}: expected number or string, got {type(value).__name__}")


def loads(text: str, *, check: bool = True) -> ProblemSpec:
    """Parse a problem file from a string."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ProblemFileError(f"invalid problem file: {exc}") from None
    unknown_sections = set(doc) - {"problem", "numerics"}
    if unknown_sections:
        raise ProblemFileError(f"unknown sections: {sorted(unknown_sections)}")
    if "problem" not in doc:
        raise ProblemFileError("missing [problem] section")
    prob = doc["problem"]
    unknown = set(prob) - _PROBLEM_KEYS
    if unknown:
        raise ProblemFileError(f"unknown [problem] keys: {sorted(unknown)}")
    for key in ("alpha", "f", "g"):
        if key not in prob:
            raise ProblemFileError(f"missing [problem] key {key!r}")
    if "h" in prob and ("D" in prob or "rho" in prob):
        raise ProblemFileError("give either h or the pair (D, rho), not both")
    if "h" not in prob and not ("D" in prob and "rho" in prob):
        raise ProblemFileError("h missing: give h or both of D and rho")

    num_kwargs = {}
    if "numerics" in doc:
        valid = {f.name for f in fields(Numerics)}
        unknown = set(doc["numerics"]) - valid
        if unknown:
            raise ProblemFileError(f"unknown [numerics] keys: {sorted(unknown)}")
        for key, val in doc["numerics"].items():
            if not isinstance(val, (int, float)):
                raise ProblemFileError(f"[numerics] {key}: expected a number")
            num_kwargs[key] = int(val) if key.endswith("_points") else float(val)

    h0 = prob.get("h0_alpha_override")
    h1 = prob.get("h1_alpha_override")
    return problem(
        alpha=float(prob["alpha"]),
        f=str(prob["f"]), g=str(prob["g"]),
        h=str(prob["h"]) if "h" in prob else None,
        d=str(prob["D"]) if "D" in prob else None,
        rho=str(prob["rho"]) if "rho" in prob else None,
        h0_override=None if h0 is None else _parse_override(h0, "h0_alpha_override", +1),
        h1_override=None if h1 is None else _parse_override(h1, "h1_alpha_override", -1),
        numerics=Numerics(**num_kwargs),
        check=check)


def load(path) -> ProblemSpec:
    """Load and validate a problem file."""
    text = Path(path).read_text(encoding="utf-8")
    return loads(text)


def serialize(spec: ProblemSpec) -> str:
    """Render a spec back to problem-file text (loadable by load/loads)."""
    out = io.StringIO()
    out.write("[problem]\n")
    out.write(f"alpha = {spec.alpha!r}\n")
    out.write(f"f = {json.dumps(spec.f_src)}\n")
    out.write(f"g = {json.dumps(spec.g_src)}\n")
    if spec.d_src is not None:
        out.write(f"D = {json.dumps(spec.d_src)}\n")
        out.write(f"rho = {json.dumps(spec.rho_src)}\n")
    else:
        out.write(f"h = {json.dumps(spec.h_src)}\n")
    if spec.h0_override is not None:
        val = '"infinite"' if math.isinf(spec.h0_override) else repr(spec.h0_override)
        out.write(f"h0_alpha_override = {val}\n")
    if spec.h1_override is not None:
        val = '"neg_infinite"' if math.isinf(spec.h1_override) else repr(spec.h1_override)
        out.write(f"h1_alpha_override = {val}\n")
    out.write("\n[numerics]\n")
    for fld in fields(Numerics):
        out.write(f"{fld.name} = {getattr(spec.numerics, fld.name)!r}\n")
    return out.getvalue()


# ----------------------------------------------------------------- validation

def running_integral(fn_vec, grid: np.ndarray, tol: float) -> tuple[np.ndarray, float]:
    """Cumulative integral of fn from 0 at every grid node.

    Composite Simpson on dyadically refined copies of the grid until two
    refinements agree within tol everywhere; returns the cumulative values
    and the final disagreement as the error estimate.
    """
    n_cells = len(grid) - 1
    prev = None
    err = math.inf
    for mult in (4, 8, 16, 32):
        fine = np.linspace(grid[0], grid[-1], n_cells * mult + 1)
        vals = fn_vec(fine)
        cum = cumulative_simpson(vals, x=fine, initial=0.0)
        cur = cum[::mult]
        if prev is not None:
            err = float(np.max(np.abs(cur - prev)))
            if err < tol:
                return cur, err
        prev = cur
    return prev, err


def _check(spec: ProblemSpec) -> tuple[list[Violation], list[str]]:
    violations: list[Violation] = []
    warnings: list[str] = []
    num = spec.numerics

    if not (spec.alpha > 0):
        violations.append(Violation("alpha > 0", math.nan,
                                    f"alpha = {spec.alpha!r}"))
        return violations, warnings

    grid = np.linspace(0.0, 1.0, num.validation_points + 2)
    h_vals = spec.h_vec(grid)

    for u_end, label in ((0.0, "h(0) = 0"), (1.0, "h(1) = 0")):
        val = float(spec.h_fn(u_end))
        if abs(val) > num.endpoint_tol:
            violations.append(Violation(label, u_end, f"h({u_end:g}) = {val:.6g}"))

    interior = h_vals[1:-1]
    bad = np.nonzero(interior <= 0.0)[0]
    if bad.size:
        k = int(bad[0]) + 1
        violations.append(Violation("h > 0 on (0,1)", float(grid[k]),
                                    f"h({grid[k]:.6g}) = {interior[bad[0]]:.6g}"))

    g0 = float(spec.g_fn(0.0))
    if not (g0 > 0):
        violations.append(Violation("g(0) > 0", 0.0, f"g(0) = {g0:.6g}"))

    cum, _ = running_integral(spec.g_vec, grid, num.quad_tol)
    cum_interior = cum[1:]          # grid u in (0, 1]
    low = np.nonzero(cum_interior <= -num.integral_margin)[0]
    if low.size:
        k = int(low[0]) + 1
        violations.append(Violation(
            "integral of g positive on (0,1]", float(grid[k]),
            f"integral up to {grid[k]:.6g} = {cum[k]:.6g}"))
    else:
        tight = np.nonzero(np.abs(cum_interior) < num.integral_margin)[0]
        if tight.size:
            k = int(tight[0]) + 1
            warnings.append(
                f"running integral of g at u = {grid[k]:.6g} is "
                f"{cum[k]:.3g}, within quadrature noise of zero; "
                "strict positivity cannot be decided numerically")
    return violations, warnings


def validate(spec: ProblemSpec) -> list[Violation]:
    """Re-check the standing hypotheses; empty list iff all hold on the grid.

    EvalDomainError raised by the user expressions propagates with location.
    """
    violations, _ = _check(spec)
    return violations
