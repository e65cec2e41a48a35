"""Travelling-wave profile u(t) from a connecting trajectory z(u).

In the classical case (alpha = 1) the trajectory is z = -D(u) u', so the
wave variable is recovered by quadrature:

    t(u) = - int_{u_ref}^{u} D(s) / z(s) ds,        t(u_ref) = 0.

The profile is heteroclinic, so t diverges logarithmically at u = 0 and
u = 1 and the table is truncated at [eps, 1 - eps]. For alpha != 1 no
principled inverse map from z back to u' is available; applying the
classical formula anyway is an explicitly experimental opt-in.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.interpolate import PchipInterpolator

from . import expr as ex
from .errors import NotASolutionError, ReductionUnsupportedError
from .model import ProblemSpec
from .shooting import CONNECTS, Trajectory

__all__ = ["WaveProfile", "reconstruct"]

_GAUSS7_X, _GAUSS7_W = np.polynomial.legendre.leggauss(7)


@dataclass
class WaveProfile:
    ts: np.ndarray            # strictly increasing
    us: np.ndarray            # strictly decreasing, within (0, 1)
    c: float
    normalized_at: float      # u value pinned to t = 0
    diffusion_src: str        # the D used in the quadrature

    def metadata(self) -> dict:
        return {
            "c": self.c,
            "normalized_at": self.normalized_at,
            "diffusion": self.diffusion_src,
            "samples": int(len(self.ts)),
            "t_range": [float(self.ts[0]), float(self.ts[-1])],
        }

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("t,u\n")
            for t, u in zip(self.ts, self.us):
                fh.write(f"{float(t)!r},{float(u)!r}\n")


def reconstruct(traj: Trajectory, spec: ProblemSpec,
                eps_prof: Optional[float] = None,
                normalize_at: float = 0.5,
                allow_experimental: bool = False) -> WaveProfile:
    """Wave profile from a connecting trajectory.

    Monotone-cubic interpolation of the samples keeps z positive, hence
    t(u) strictly monotone; the integral is accumulated with per-interval
    Gauss panels over the sample grid.
    """
    if traj.classification != CONNECTS:
        raise NotASolutionError(
            "the trajectory does not connect to zero; there is no front "
            "to reconstruct at this speed")
    if spec.alpha != 1.0 and not allow_experimental:
        raise ReductionUnsupportedError(
            "the mapping from z back to u' is only available for alpha = 1; "
            "pass allow_experimental=True to apply the classical formula "
            "anyway (results are heuristic)")
    if not (0.0 < normalize_at < 1.0):
        raise ValueError("normalize_at must lie in (0, 1)")
    if eps_prof is None:
        eps_prof = spec.numerics.eps_prof

    if spec.d is not None:
        d_fn = ex.compile_vector(spec.d)
        d_src = spec.d_src
    else:
        d_fn = lambda s: np.ones_like(s)    # noqa: E731 - canonical constant D
        d_src = "1"

    us_asc = traj.us[::-1]
    zs_asc = traj.zs[::-1]
    z_interp = PchipInterpolator(us_asc, zs_asc)

    lo = max(eps_prof, float(us_asc[0]))
    hi = min(1.0 - eps_prof, float(us_asc[-1]))
    if not (lo < normalize_at < hi):
        raise ValueError(
            f"normalization point {normalize_at} outside the profile "
            f"range [{lo:.3g}, {hi:.3g}]")
    sel = (us_asc > lo) & (us_asc < hi)
    grid = np.concatenate([[lo], us_asc[sel], [hi]])

    # cumulative integral of D/z over the ascending grid
    a = grid[:-1]
    b = grid[1:]
    mid = 0.5 * (a + b)[:, None]
    half = 0.5 * (b - a)[:, None]
    nodes = mid + half * _GAUSS7_X[None, :]
    flat = nodes.ravel()
    vals = (d_fn(flat) / z_interp(flat)).reshape(nodes.shape)
    panels = (half[:, 0]) * (vals @ _GAUSS7_W)
    cum = np.concatenate([[0.0], np.cumsum(panels)])

    # t(u) = -int_{ref}^{u} D/z: decreasing in u; pin t(normalize_at) = 0
    t_of_grid = -cum
    t_ref = float(np.interp(normalize_at, grid, t_of_grid))
    ts = t_of_grid - t_ref

    # order by increasing t (decreasing u)
    ts = ts[::-1].copy()
    us_out = grid[::-1].copy()
    if not (np.all(np.diff(ts) > 0) and np.all(np.diff(us_out) < 0)):
        raise NotASolutionError(
            "reconstructed wave variable is not strictly monotone; the "
            "trajectory samples are inconsistent")
    return WaveProfile(ts=ts, us=us_out, c=traj.c,
                       normalized_at=normalize_at, diffusion_src=d_src)
