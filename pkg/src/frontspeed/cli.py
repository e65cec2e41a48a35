"""Command-line surface: analyze | speed | solve | profile | simulate | report.

Exit codes: 0 success, 2 problem validation or parse failure, 3 singular
limit extraction failure, 4 no solution at the requested speed (or no
front for any speed), 5 numerical failure.

JSON (--json) is the machine interface; the default human table is
formatting over the same report. The report command writes the full
bundle: report.json, the delimited outputs, and matplotlib figures
rendered alongside them. All tolerances live in the problem file's
[numerics] section; the --tol flag wins over the file where it applies
(speed and report: the bisection width; solve and profile: the
integrator's relative error; elsewhere it is accepted but has no effect).
"""

from __future__ import annotations

import functools
import math
import sys
import time
from pathlib import Path

import click

from . import asymptotics as asy
from . import bounds as bnd
from . import front as frt
from . import model
from . import pdecheck as pde
from . import report as rpt
from . import shooting as sht
from . import speed as spd
from .errors import (EvalDomainError, ExistenceFailsError, ExprSyntaxError,
                     FrontspeedError, NoLimitError, NoSolutionError,
                     ProblemFileError, ValidationError)

EXIT_VALIDATION = 2
EXIT_LIMIT = 3
EXIT_NO_SOLUTION = 4
EXIT_NUMERICAL = 5


def _exit_code(exc: Exception) -> int:
    if isinstance(exc, (ProblemFileError, ValidationError, ExprSyntaxError,
                        FileNotFoundError)):
        return EXIT_VALIDATION
    if isinstance(exc, NoLimitError):
        return EXIT_LIMIT
    if isinstance(exc, (NoSolutionError, ExistenceFailsError)):
        return EXIT_NO_SOLUTION
    return EXIT_NUMERICAL


def _guarded(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (FrontspeedError, FileNotFoundError, EvalDomainError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(_exit_code(exc))
    return wrapper


def _common(fn):
    fn = click.option("--json", "as_json", is_flag=True,
                      help="Emit the JSON report on stdout.")(fn)
    fn = click.option("--out", type=click.Path(dir_okay=False), default=None,
                      help="Output path (CSV for data commands, JSON report "
                           "for analyze/speed).")(fn)
    fn = click.option("--tol", type=float, default=None,
                      help="Principal tolerance override for this command.")(fn)
    fn = click.option("--quiet", is_flag=True,
                      help="Suppress the stdout report.")(fn)
    fn = click.option("--plot", is_flag=True,
                      help="Render a figure next to the written output.")(fn)
    return fn


def _emit(report: dict, as_json: bool, quiet: bool) -> None:
    if quiet:
        return
    if as_json:
        click.echo(rpt.report_json(report), nl=False)
    else:
        click.echo(rpt.render_human(report), nl=False)


def _write_json(report: dict, out) -> None:
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(rpt.report_json(report), encoding="utf-8")


def _prepare_out(out) -> Path:
    path = Path(out)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _fig_path(out) -> str:
    return str(Path(out).with_suffix(".png"))


def _limits_for_report(spec):
    """Both endpoint limits for the report; the right end may legitimately
    fail to extrapolate without invalidating the requested computation."""
    h0 = asy.singular_limit_zero(spec)
    try:
        h1 = asy.singular_limit_one(spec)
    except NoLimitError:
        h1 = None
    return h0, h1


@click.group()
def cli() -> None:
    """Critical wave speeds and profiles for doubly singular first-order
    boundary value problems."""


@cli.command()
@click.argument("problem_file", type=click.Path(exists=True, dir_okay=False))
@_common
@_guarded
def analyze(problem_file, as_json, out, tol, quiet, plot) -> None:
    """Singular limits, speed bounds, and the existence verdict."""
    t0 = time.perf_counter()
    spec = model.load(problem_file)
    h0 = asy.singular_limit_zero(spec)
    h1 = asy.singular_limit_one(spec)
    warnings = tuple(w for w in (h0.warning, h1.warning) if w)
    if math.isinf(h0.value):
        bounds = None
        verdict = rpt.VERDICT_NONE
    else:
        bounds = bnd.estimate(spec, h0)
        verdict = rpt.VERDICT_EXISTS
    files = {}
    if plot and bounds is not None and out:
        fig = _fig_path(out)
        rpt.plot_mean_curves(spec, bounds, fig)
        files["mean_curves_png"] = fig
    report = rpt.build_report(spec, source=str(problem_file), h0=h0, h1=h1,
                              bounds=bounds, verdict=verdict, files=files,
                              warnings=warnings,
                              timing=time.perf_counter() - t0)
    _write_json(report, out)
    _emit(report, as_json, quiet)


@cli.command()
@click.argument("problem_file", type=click.Path(exists=True, dir_okay=False))
@_common
@_guarded
def speed(problem_file, as_json, out, tol, quiet, plot) -> None:
    """Critical speed c* by bisection inside the analytic bracket."""
    t0 = time.perf_counter()
    spec = model.load(problem_file)
    result = spd.critical_speed(spec, tol_c=tol)
    h0, h1 = _limits_for_report(spec)
    files = {}
    if plot and out and not result.coinciding:
        fig = _fig_path(out)
        rpt.plot_bracket(result, fig)
        files["bracket_png"] = fig
    report = rpt.build_report(spec, source=str(problem_file), h0=h0, h1=h1,
                              bounds=result.bounds,
                              verdict=rpt.VERDICT_EXISTS,
                              speed_result=result, files=files,
                              warnings=result.warnings,
                              timing=time.perf_counter() - t0)
    _write_json(report, out)
    _emit(report, as_json, quiet)


@cli.command()
@click.argument("problem_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--c", "c_value", type=float, required=True,
              help="Wave speed to solve at.")
@_common
@_guarded
def solve(problem_file, c_value, as_json, out, tol, quiet, plot) -> None:
    """Unique profile z(u) at a given speed; CSV columns u,z,dz."""
    t0 = time.perf_counter()
    spec = model.load(problem_file)
    if tol is not None:
        spec = spec.with_numerics(rtol=tol)
    traj = sht.solve(spec, c_value)
    h0, h1 = _limits_for_report(spec)
    files = {}
    if out:
        path = _prepare_out(out)
        traj.write_csv(path)
        files["solution_csv"] = str(path)
        if plot:
            fig = _fig_path(out)
            rpt.plot_trajectory(traj, fig)
            files["solution_png"] = fig
    report = rpt.build_report(spec, source=str(problem_file), h0=h0, h1=h1,
                              solution=traj, files=files,
                              warnings=traj.warnings,
                              timing=time.perf_counter() - t0)
    _emit(report, as_json, quiet)


@cli.command()
@click.argument("problem_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--c", "c_value", type=float, required=True,
              help="Wave speed to reconstruct at.")
@click.option("--normalize-at", type=float, default=0.5, show_default=True,
              help="u value pinned to t = 0.")
@click.option("--experimental-reduction", is_flag=True,
              help="Apply the classical z = -D u' formula even for "
                   "alpha != 1 (heuristic).")
@_common
@_guarded
def profile(problem_file, c_value, normalize_at, experimental_reduction,
            as_json, out, tol, quiet, plot) -> None:
    """Travelling-wave profile u(t); CSV columns t,u."""
    t0 = time.perf_counter()
    spec = model.load(problem_file)
    if tol is not None:
        spec = spec.with_numerics(rtol=tol)
    traj = sht.solve(spec, c_value)
    prof = frt.reconstruct(traj, spec, normalize_at=normalize_at,
                           allow_experimental=experimental_reduction)
    files = {}
    if out:
        path = _prepare_out(out)
        prof.write_csv(path)
        files["profile_csv"] = str(path)
        if plot:
            fig = _fig_path(out)
            rpt.plot_profile(prof, fig)
            files["profile_png"] = fig
    report = rpt.build_report(spec, source=str(problem_file), solution=traj,
                              profile=prof, files=files,
                              warnings=traj.warnings,
                              timing=time.perf_counter() - t0)
    _emit(report, as_json, quiet)


def _load_sim_config(path) -> pde.SimConfig:
    if path is None:
        return pde.SimConfig()
    import sys as _sys
    if _sys.version_info >= (3, 11):
        import tomllib
    else:
        import tomli as tomllib
    try:
        doc = tomllib.loads(Path(path).read_text(encoding="utf-8"))
    except tomllib.TOMLDecodeError as exc:
        raise ProblemFileError(f"invalid simulation config: {exc}") from None
    valid = set(pde.SimConfig.__dataclass_fields__)
    unknown = set(doc) - valid
    if unknown:
        raise ProblemFileError(f"unknown simulation keys: {sorted(unknown)}")
    if "snapshots" in doc:
        doc["snapshots"] = int(doc["snapshots"])
    return pde.SimConfig(**doc)


@cli.command()
@click.argument("problem_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--sim-config", type=click.Path(exists=True, dir_okay=False),
              default=None, help="TOML with SimConfig overrides.")
@_common
@_guarded
def simulate(problem_file, sim_config, as_json, out, tol, quiet, plot) -> None:
    """Direct PDE front-speed measurement; CSV columns x,v (final snapshot)."""
    t0 = time.perf_counter()
    spec = model.load(problem_file)
    cfg = _load_sim_config(sim_config)
    meas = pde.simulate(spec, cfg)
    files = {}
    if out:
        path = _prepare_out(out)
        meas.write_snapshot_csv(path)
        files["snapshot_csv"] = str(path)
        if plot:
            fig = _fig_path(out)
            rpt.plot_simulation(meas, fig)
            files["simulation_png"] = fig
    report = rpt.build_report(spec, source=str(problem_file),
                              measurement=meas, files=files,
                              timing=time.perf_counter() - t0)
    _emit(report, as_json, quiet)


@cli.command("report")
@click.argument("problem_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_dir", type=click.Path(file_okay=False),
              required=True, help="Directory for the report bundle.")
@click.option("--c", "c_value", type=float, default=None,
              help="Speed for the solution/profile pages "
                   "(default: c* + 0.5).")
@click.option("--tol", type=float, default=None,
              help="Bisection tolerance for the critical speed.")
@click.option("--json", "as_json", is_flag=True,
              help="Emit the JSON report on stdout.")
@click.option("--quiet", is_flag=True, help="Suppress the stdout report.")
@_guarded
def report_cmd(problem_file, out_dir, c_value, tol, as_json, quiet) -> None:
    """Full bundle: JSON report, CSV outputs, and figures in one directory."""
    t0 = time.perf_counter()
    outp = Path(out_dir)
    outp.mkdir(parents=True, exist_ok=True)
    spec = model.load(problem_file)
    h0 = asy.singular_limit_zero(spec)
    h1 = asy.singular_limit_one(spec)
    warnings = [w for w in (h0.warning, h1.warning) if w]
    files: dict = {}

    if math.isinf(h0.value):
        report = rpt.build_report(spec, source=str(problem_file), h0=h0, h1=h1,
                                  verdict=rpt.VERDICT_NONE, files=files,
                                  warnings=tuple(warnings),
                                  timing=time.perf_counter() - t0)
        (outp / "report.json").write_text(rpt.report_json(report), "utf-8")
        files["report_json"] = str(outp / "report.json")
        _emit(report, as_json, quiet)
        return

    result = spd.critical_speed(spec, tol_c=tol)
    warnings.extend(result.warnings)
    fig = str(outp / "mean_curves.png")
    rpt.plot_mean_curves(spec, result.bounds, fig)
    files["mean_curves_png"] = fig
    if not result.coinciding:
        fig = str(outp / "bracket.png")
        rpt.plot_bracket(result, fig)
        files["bracket_png"] = fig

    c_solve = result.c_star + 0.5 if c_value is None else c_value
    traj = sht.solve(spec, c_solve)
    csv = outp / "solution.csv"
    traj.write_csv(csv)
    files["solution_csv"] = str(csv)
    fig = str(outp / "solution.png")
    rpt.plot_trajectory(traj, fig)
    files["solution_png"] = fig

    prof = None
    if spec.alpha == 1.0:
        prof = frt.reconstruct(traj, spec)
        csv = outp / "profile.csv"
        prof.write_csv(csv)
        files["profile_csv"] = str(csv)
        fig = str(outp / "profile.png")
        rpt.plot_profile(prof, fig)
        files["profile_png"] = fig
    else:
        warnings.append("profile page skipped: reconstruction needs alpha = 1")

    report = rpt.build_report(spec, source=str(problem_file), h0=h0, h1=h1,
                              bounds=result.bounds,
                              verdict=rpt.VERDICT_EXISTS, speed_result=result,
                              solution=traj, profile=prof, files=files,
                              warnings=tuple(warnings),
                              timing=time.perf_counter() - t0)
    (outp / "report.json").write_text(rpt.report_json(report), "utf-8")
    _emit(report, as_json, quiet)


def main() -> None:
    cli()


if __name__ == "__main__":
    main()
