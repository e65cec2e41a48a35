import math

import numpy as np
import pytest

from frontspeed import model, shooting
from frontspeed.errors import NoSolutionError, StepUnderflowError

C_EXACT = 5 / math.sqrt(6)


def exact_fisher_z(u):
    return math.sqrt(2 / 3) * u * (1 - np.sqrt(u))


def test_fisher_subcritical_positive_limit(fisher):
    # eta0 is rootless for c < 2, so no slope can exist at the left end
    traj = shooting.shoot(fisher, 1.0)
    assert traj.classification == shooting.POSITIVE_LIMIT
    assert traj.eta0.roots == ()
    assert traj.z_at_umin > 10 * fisher.numerics.tol_zero
    assert traj.slope_at_zero is None


def test_fisher_exact_solution(fisher):
    traj = shooting.shoot(fisher, C_EXACT)
    assert traj.classification == shooting.CONNECTS
    assert traj.slope_at_zero == pytest.approx(math.sqrt(2 / 3), rel=5e-3)
    sel = (traj.us >= 1e-3) & (traj.us <= 0.999)
    dev = np.max(np.abs(traj.zs[sel] - exact_fisher_z(traj.us[sel])))
    assert dev < 1e-6
    # start slope is the unique positive right-end root
    assert traj.slope_at_one == pytest.approx(1 / math.sqrt(6), rel=1e-10)


def test_sample_order_and_positivity(fisher):
    traj = shooting.shoot(fisher, C_EXACT)
    assert np.all(np.diff(traj.us) < 0)
    assert np.all(traj.zs > 0)


def window_min(traj):
    from scipy.interpolate import CubicSpline
    probe = np.linspace(0.25, 0.75, 501)
    return float(np.min(CubicSpline(traj.us[::-1], traj.zs[::-1])(probe)))


def test_interior_positivity_invariant(gallery):
    # interior minimum strictly positive, stable under halved tolerances
    for entry in gallery[:3]:
        spec = entry.spec
        traj = shooting.shoot(spec, entry.c_star + 0.4)
        m1 = window_min(traj)
        assert m1 > 0
        tight = spec.with_numerics(rtol=spec.numerics.rtol / 2,
                                   atol=spec.numerics.atol / 2)
        m2 = window_min(shooting.shoot(tight, entry.c_star + 0.4))
        assert abs(m1 - m2) < 1e-6


def test_uniqueness_under_start_offset(fisher, example2):
    for spec, c in ((fisher, C_EXACT), (example2, 3.0)):
        a = shooting.shoot(spec, c)
        b = shooting.shoot(spec.with_numerics(delta_start=2.5e-7), c)
        assert shooting.sample_deviation(a, b) < 1e-7


def test_volterra_residual(fisher, example2, example1):
    for spec, c in ((fisher, C_EXACT), (fisher, 3.0), (example2, 3.0),
                    (example1, 2.5)):
        traj = shooting.shoot(spec, c)
        assert shooting.volterra_residual(traj, spec) < 1e-6


def test_volterra_residual_subcritical(fisher):
    traj = shooting.shoot(fisher, 1.0)
    assert shooting.volterra_residual(traj, fisher) < 1e-6


def test_solve_refusals(fisher):
    nofront = model.problem(1.0, "0", "1", "sqrt(u)*(1-u)")
    with pytest.raises(NoSolutionError) as exc:
        shooting.solve(nofront, 5.0)
    assert exc.value.reason == NoSolutionError.LIMIT_INFINITE
    with pytest.raises(NoSolutionError) as exc:
        shooting.solve(fisher, 1.0)
    assert exc.value.reason == NoSolutionError.SUBCRITICAL


def test_slope_zero_connection():
    # h vanishing to second order at 0: the connecting slope is the zero
    # root and the sweep ends early on the slaved branch
    spec = model.problem(1.0, "0", "1", "u^2*(1-u)^2")
    traj = shooting.shoot(spec, 1.0)
    assert traj.classification == shooting.CONNECTS
    assert traj.matched_root == 0.0
    assert traj.eta0.roots[0] == 0.0
    assert traj.stats["early_stop"]
    sub = shooting.shoot(spec, 0.4)
    assert sub.classification == shooting.POSITIVE_LIMIT


def test_solve_example1(example1):
    traj = shooting.solve(example1, 2.5)
    assert traj.classification == shooting.CONNECTS
    assert traj.start_kind == "balance"
    assert np.all(traj.zs > 0)
    # endpoints head to zero on both sides
    assert traj.zs[0] < 1e-3 and traj.z_at_umin < 1e-6


def test_example2_subcritical(example2):
    with pytest.raises(NoSolutionError):
        shooting.solve(example2, 1.0)


def test_compare_upper(fisher, example2):
    base = shooting.shoot(fisher, C_EXACT)
    assert shooting.compare_upper(fisher, C_EXACT, base, 0.1, u0=0.3)
    base2 = shooting.shoot(example2, 5.0)
    assert shooting.compare_upper(example2, 5.0, base2, 0.05, u0=0.5)


def test_compare_upper_zero_margin(fisher):
    # y integrates the same equation from the same point: equality within
    # 1e-8 over a range where forward error growth stays below that
    base = shooting.shoot(fisher, C_EXACT)
    assert shooting.compare_upper(fisher, C_EXACT, base, 0.0, u0=0.3, u_end=0.9)


def test_step_underflow_surfaces():
    with pytest.raises(StepUnderflowError):
        shooting._integrate(lambda u, z: 1.0, 1.0, 1.0, 0.0,
                            rtol=1e-10, atol=1e-12,
                            step_cap=lambda u: 1e-15)


def test_csv_export(tmp_path, fisher):
    traj = shooting.shoot(fisher, C_EXACT)
    out = tmp_path / "z.csv"
    traj.write_csv(out)
    lines = out.read_text().splitlines()
    assert lines[0] == "u,z,dz"
    u0, z0, dz0 = (float(x) for x in lines[1].split(","))
    assert u0 == traj.us[0] and z0 == traj.zs[0] and dz0 == traj.dzs[0]


def test_metadata_serializable(example1):
    import json
    traj = shooting.shoot(example1, 2.5)
    text = json.dumps(traj.metadata())
    assert "balance" in text
