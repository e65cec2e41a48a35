import math

import numpy as np
import pytest

from frontspeed import front, model, shooting
from frontspeed.errors import NotASolutionError, ReductionUnsupportedError

C_EXACT = 5 / math.sqrt(6)


def exact_profile(t):
    return (1.0 + (math.sqrt(2) - 1) * np.exp(np.asarray(t) / math.sqrt(6))) ** -2


def test_fisher_profile_matches_closed_form(fisher):
    traj = shooting.shoot(fisher, C_EXACT)
    prof = front.reconstruct(traj, fisher)
    assert np.max(np.abs(prof.us - exact_profile(prof.ts))) < 1e-4
    assert np.interp(0.0, prof.ts, prof.us) == pytest.approx(0.5, abs=1e-5)


def test_profile_monotone(fisher):
    traj = shooting.shoot(fisher, C_EXACT)
    prof = front.reconstruct(traj, fisher)
    assert np.all(np.diff(prof.ts) > 0)
    assert np.all(np.diff(prof.us) < 0)
    assert np.all((prof.us > 0) & (prof.us < 1))


def test_constant_z_gives_linear_t(fisher):
    # synthetic trajectory with z == zeta: t(u) = (1/2 - u)/zeta
    zeta = 0.4
    us = np.linspace(0.999, 1e-4, 400)
    traj = shooting.Trajectory(
        c=1.0, us=us, zs=np.full_like(us, zeta), dzs=np.zeros_like(us),
        classification=shooting.CONNECTS, z_at_umin=zeta,
        slope_at_zero=None, matched_root=None, slope_at_one=0.0,
        start_kind="linear", eta0=None, u_min_used=1e-4)
    prof = front.reconstruct(traj, fisher)
    expected = (0.5 - prof.us) / zeta
    assert np.max(np.abs(prof.ts - expected)) < 1e-9


def test_derivative_roundtrip(fisher):
    # u'(t) = -z(u(t)) checked at interior points by centered differences
    traj = shooting.shoot(fisher, C_EXACT)
    prof = front.reconstruct(traj, fisher)
    sel = (prof.us > 0.05) & (prof.us < 0.95)
    dudt = np.gradient(prof.us, prof.ts)
    z_on = traj.z_of(prof.us)
    rel = np.abs(dudt[sel] + z_on[sel]) / np.abs(z_on[sel])
    assert np.max(rel) < 1e-4


def test_translation_covariance(fisher):
    traj = shooting.shoot(fisher, C_EXACT)
    a = front.reconstruct(traj, fisher, normalize_at=0.5)
    b = front.reconstruct(traj, fisher, normalize_at=0.25)
    shift = np.interp(a.us[::-1], b.us[::-1], b.ts[::-1])[::-1] - a.ts
    assert np.max(shift) - np.min(shift) < 1e-8


def test_rejects_positive_limit(fisher):
    traj = shooting.shoot(fisher, 1.0)
    with pytest.raises(NotASolutionError):
        front.reconstruct(traj, fisher)


def test_rejects_alpha_not_one(example1):
    traj = shooting.shoot(example1, 2.5)
    with pytest.raises(ReductionUnsupportedError):
        front.reconstruct(traj, example1)
    prof = front.reconstruct(traj, example1, allow_experimental=True)
    assert np.all(np.diff(prof.ts) > 0)


def test_nonconstant_diffusion():
    # h given as D*rho: the quadrature must weight by D
    spec = model.problem(1.0, "0", "1", None, d="1+u", rho="u*(1-u)")
    traj = shooting.solve(spec, 3.2)
    prof = front.reconstruct(traj, spec)
    assert prof.diffusion_src == "1+u"
    # dt = -D/z du at the normalization point
    i = int(np.argmin(np.abs(prof.us - 0.5)))
    dt = prof.ts[i + 1] - prof.ts[i - 1]
    du = prof.us[i + 1] - prof.us[i - 1]
    d_over_z = 1.5 / float(traj.z_of(0.5))
    assert dt / du == pytest.approx(-d_over_z, rel=1e-3)


def test_csv_format(tmp_path, fisher):
    traj = shooting.shoot(fisher, C_EXACT)
    prof = front.reconstruct(traj, fisher)
    out = tmp_path / "p.csv"
    prof.write_csv(out)
    lines = out.read_text().splitlines()
    assert lines[0] == "t,u"
    assert len(lines) == len(prof.ts) + 1
