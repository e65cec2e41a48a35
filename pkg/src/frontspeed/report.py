"""Report assembly and figure rendering.

One Report dict is the single source of truth: the JSON machine interface
serialises it verbatim (deterministically: sorted keys, repr floats) and
the human-readable table is formatting over the same data. Figures are
matplotlib renderings written next to the delimited output; they are
produced only on request and matplotlib is imported lazily so that plain
CSV/JSON runs never touch it.
"""

from __future__ import annotations

import json
import math
from typing import Optional

import numpy as np

from . import asymptotics as asy
from . import bounds as bnd
from .model import ProblemSpec, running_integral

__all__ = ["build_report", "report_json", "render_human",
           "plot_trajectory", "plot_profile", "plot_mean_curves",
           "plot_bracket", "plot_simulation"]

VERDICT_EXISTS = "FrontsExistAboveCStar"
VERDICT_NONE = "NoFrontsForAnyC"


def _limit_entry(lim: Optional[asy.SingularLimit]) -> Optional[dict]:
    if lim is None:
        return None
    if math.isinf(lim.value):
        value = "infinite" if lim.value > 0 else "neg_infinite"
    else:
        value = lim.value
    return {"value": value, "provenance": lim.provenance}


def build_report(spec: ProblemSpec, *, source: Optional[str] = None,
                 h0: Optional[asy.SingularLimit] = None,
                 h1: Optional[asy.SingularLimit] = None,
                 bounds: Optional[bnd.SpeedBounds] = None,
                 verdict: Optional[str] = None,
                 speed_result=None, solution=None, profile=None,
                 measurement=None, admissibility=None,
                 files: Optional[dict] = None,
                 warnings: tuple[str, ...] = (),
                 timing: Optional[float] = None) -> dict:
    report: dict = {
        "problem": {
            "alpha": spec.alpha,
            "f": spec.f_src,
            "g": spec.g_src,
            "h": spec.h_src,
            "D": spec.d_src,
            "rho": spec.rho_src,
            "source": source,
        },
        "limits": {
            "h0_alpha": _limit_entry(h0),
            "h1_alpha": _limit_entry(h1),
        },
        "bounds": None if bounds is None or math.isnan(bounds.lower)
                  else bounds.as_dict(),
        "verdict": verdict,
        "warnings": sorted(set(spec.warnings) | set(warnings)),
        "files": files or {},
    }
    if speed_result is not None:
        report["speed"] = speed_result.metadata()
    if solution is not None:
        report["solution"] = solution.metadata()
    if profile is not None:
        report["profile"] = profile.metadata()
    if measurement is not None:
        report["simulation"] = measurement.metadata()
    if admissibility is not None:
        report["admissibility"] = admissibility.metadata()
    if timing is not None:
        report["timing"] = timing
    return report


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.9g}"
    return str(x)


def render_human(report: dict) -> str:
    lines = []
    p = report["problem"]
    hdr = f"alpha = {_fmt(p['alpha'])}   f = {p['f']}   g = {p['g']}   h = {p['h']}"
    lines.append(hdr)
    lines.append("-" * len(hdr))
    lims = report["limits"]
    if lims["h0_alpha"] is not None:
        e = lims["h0_alpha"]
        lines.append(f"limit at 0   : {_fmt(e['value'])}  ({e['provenance']})")
    if lims["h1_alpha"] is not None:
        e = lims["h1_alpha"]
        lines.append(f"limit at 1   : {_fmt(e['value'])}  ({e['provenance']})")
    if report.get("bounds"):
        b = report["bounds"]
        lines.append(f"constants    : F0 = {_fmt(b['F0'])}  G0 = {_fmt(b['G0'])}"
                     f"  H0 = {_fmt(b['H0'])}")
        lines.append(f"speed bounds : {_fmt(b['lower'])} <= c* <= {_fmt(b['upper'])}")
    if report.get("verdict"):
        lines.append(f"verdict      : {report['verdict']}")
    if "speed" in report:
        s = report["speed"]
        how = "coinciding bounds" if s["coinciding_bounds"] else \
              f"bisection, {s['iterations']} shots"
        lines.append(f"critical c*  : {_fmt(s['c_star'])}  ({how}, "
                     f"tol {_fmt(s['tolerance'])})")
    if "admissibility" in report:
        a = report["admissibility"]
        word = "admissible" if a["admissible"] else f"refused ({a['reason']})"
        lines.append(f"speed c = {_fmt(a['c'])}: {word}")
        if a.get("certificate_slope") is not None:
            lines.append(f"existence certificate: linear lower solution, "
                         f"slope {_fmt(a['certificate_slope'])}")
    if "solution" in report:
        s = report["solution"]
        lines.append(f"solution     : {s['classification']} at c = {_fmt(s['c'])}, "
                     f"{s['samples']} samples, start {s['start_kind']}")
    if "profile" in report:
        s = report["profile"]
        lines.append(f"profile      : {s['samples']} samples, t in "
                     f"[{_fmt(s['t_range'][0])}, {_fmt(s['t_range'][1])}]")
    if "simulation" in report:
        s = report["simulation"]
        lines.append(f"measured speed: {_fmt(s['speed'])} "
                     f"(slope stderr {_fmt(s['slope_stderr'])})")
    for w in report.get("warnings", []):
        lines.append(f"warning      : {w}")
    for name, path in sorted(report.get("files", {}).items()):
        lines.append(f"wrote {name}: {path}")
    return "\n".join(lines) + "\n"


# -------------------------------------------------------------------- figures

def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def plot_trajectory(traj, path, exact=None) -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    ax.plot(traj.us, traj.zs, lw=1.2, label=f"z(u), c = {traj.c:.6g}")
    if exact is not None:
        ax.plot(traj.us, exact(traj.us), "--", lw=1.0, label="reference")
    ax.set_xlabel("u")
    ax.set_ylabel("z")
    ax.set_title(f"{traj.classification} (start: {traj.start_kind})")
    ax.legend(frameon=False)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def plot_profile(prof, path) -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    ax.plot(prof.ts, prof.us, lw=1.2)
    ax.axhline(prof.normalized_at, color="0.7", lw=0.6)
    ax.axvline(0.0, color="0.7", lw=0.6)
    ax.set_xlabel("t")
    ax.set_ylabel("u")
    ax.set_title(f"travelling front, c = {prof.c:.6g}")
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def plot_mean_curves(spec: ProblemSpec, bounds_: bnd.SpeedBounds, path,
                     n: int = 513) -> None:
    plt = _pyplot()
    grid = np.linspace(0.0, 1.0, n)
    tol = spec.numerics.quad_tol
    cf, _ = running_integral(spec.f_vec, grid, tol)
    cg, _ = running_integral(spec.g_vec, grid, tol)
    hr = bnd._h_ratio_vec(spec, bounds_.h0_alpha)
    ch, _ = running_integral(hr, grid, tol)
    with np.errstate(divide="ignore", invalid="ignore"):
        F = cf / grid
        G = cg / grid
        H = ch / grid
    F[0], G[0], H[0] = bounds_.f0, bounds_.g0, bounds_.h0_alpha
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    ax.plot(grid, F, label="mean of f")
    ax.plot(grid, G, label="mean of g")
    ax.plot(grid, H, label="mean of h/u^a")
    for val, uat, mark in ((bounds_.F0, bounds_.u_at_F0, "^"),
                           (bounds_.G0, bounds_.u_at_G0, "v"),
                           (bounds_.H0, bounds_.u_at_H0, "^")):
        ax.plot([uat], [val], mark, color="k", ms=5)
    ax.set_xlabel("u")
    ax.set_ylabel("running mean")
    ax.set_title(f"bounds: {bounds_.lower:.6g} <= c* <= {bounds_.upper:.6g}")
    ax.legend(frameon=False)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def plot_bracket(result, path) -> None:
    plt = _pyplot()
    hist = np.asarray(result.bracket_history, dtype=float)
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    ax.plot(hist[:, 0], marker=".", label="bracket low")
    ax.plot(hist[:, 1], marker=".", label="bracket high")
    ax.axhline(result.c_star, color="0.6", lw=0.8, label=f"c* = {result.c_star:.8g}")
    ax.set_xlabel("bisection step")
    ax.set_ylabel("c")
    ax.legend(frameon=False)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def plot_simulation(meas, path) -> None:
    plt = _pyplot()
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9.6, 4.0))
    ax1.plot(meas.times, meas.positions, ".", ms=3, label="level crossing")
    lo, hi = meas.fit_window
    tfit = meas.times[lo:hi]
    ax1.plot(tfit, meas.positions[lo] + meas.speed * (tfit - meas.times[lo]),
             "-", lw=1.0, label=f"fit: {meas.speed:.4g}")
    ax1.set_xlabel("time")
    ax1.set_ylabel("front position")
    ax1.legend(frameon=False)
    ax2.plot(meas.final_x, meas.final_v, lw=1.0)
    ax2.set_xlabel("x")
    ax2.set_ylabel("v")
    ax2.set_title("final snapshot")
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
