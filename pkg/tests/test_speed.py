import math

import pytest

from frontspeed import model, shooting, speed
from frontspeed.errors import ExistenceFailsError


def test_example1_coinciding_zero_shots(example1):
    r = speed.critical_speed(example1)
    assert r.coinciding and r.iterations == 0
    assert r.c_star == pytest.approx(3 * 4 ** (-1 / 3), abs=1e-10)


def test_fisher_coinciding(fisher):
    r = speed.critical_speed(fisher)
    assert r.coinciding
    assert r.c_star == pytest.approx(2.0, abs=1e-10)


def test_example2_bisection(example2):
    r = speed.critical_speed(example2)
    assert not r.coinciding
    assert 2.0 < r.c_star < 5.0
    # phi*u*(1-u) solves the equation at c = sqrt(5) exactly, so the
    # threshold is sqrt(5); the bisection must land inside its bracket
    assert r.c_star == pytest.approx(math.sqrt(5.0), abs=2e-6)
    assert r.certificate_super.classification == shooting.CONNECTS
    assert r.certificate_sub.classification == shooting.POSITIVE_LIMIT


def test_example2_exact_solution_oracle(example2):
    # verify the sqrt(5) claim by substitution before trusting it above
    phi = (1 + math.sqrt(5)) / 2
    c = math.sqrt(5.0)
    for u in (0.1, 0.3, 0.5, 0.7, 0.9):
        z = phi * u * (1 - u)
        dz = phi * (1 - 2 * u)
        rhs = c * (1 - u) - u - u * (1 - u) / z
        assert dz == pytest.approx(rhs, abs=1e-12)


def test_bitwise_idempotence(example2):
    a = speed.critical_speed(example2)
    b = speed.critical_speed(example2)
    assert a.c_star == b.c_star
    assert a.bracket_history == b.bracket_history


def test_tolerance_convergence(gallery):
    for entry in gallery:
        a = speed.critical_speed(entry.spec, tol_c=1e-5)
        b = speed.critical_speed(entry.spec, tol_c=1e-6)
        assert abs(a.c_star - b.c_star) <= 1e-5, entry.name


def test_half_line_property(fisher, example2):
    for spec in (fisher, example2):
        c_star = speed.critical_speed(spec).c_star
        for k in range(1, 11):
            a = speed.admissible(spec, c_star + 0.1 * k)
            assert a.admissible, f"c = c* + {0.1 * k:.1f} refused"


def test_threshold_at_lower_bound():
    # the lower estimate is attained here: the shot at it already connects
    spec = model.problem(1.0, "u^2", "1+u/2", "u*(1-u)*(1+u)/2")
    r = speed.critical_speed(spec)
    assert r.c_star == pytest.approx(math.sqrt(2.0), abs=1e-9)
    assert r.certificate_super is not None


def test_admissible_evidence(example2):
    a = speed.admissible(example2, 6.0)
    assert a.admissible
    assert a.trajectory.classification == shooting.CONNECTS
    assert a.certificate_slope == pytest.approx(1.25, abs=1e-9)
    b = speed.admissible(example2, 1.0)
    assert not b.admissible and b.reason == "Subcritical"


def test_admissible_nonexistence():
    spec = model.problem(1.0, "0", "1", "sqrt(u)*(1-u)")
    for c in (0.0, 5.0, 50.0):
        a = speed.admissible(spec, c)
        assert not a.admissible
        assert a.reason == "LimitInfinite"
    with pytest.raises(ExistenceFailsError):
        speed.critical_speed(spec)


def test_speed_result_metadata(example2):
    import json
    r = speed.critical_speed(example2)
    doc = json.loads(json.dumps(r.metadata()))
    assert doc["c_star"] == r.c_star
    assert doc["bounds"]["lower"] == pytest.approx(2.0)
