import math

import numpy as np
import pytest

from frontspeed import expr, model
from frontspeed.errors import ProblemFileError, ValidationError

from conftest import PROBLEM_DIR


def test_load_example1_file():
    spec = model.load(PROBLEM_DIR / "example1.toml")
    assert spec.alpha == 2.0
    assert spec.g_fn(0.0) == 1.0
    assert spec.h_fn(0.5) == 0.125
    assert spec.warnings == ()


def test_negative_h_rejected():
    with pytest.raises(ValidationError) as exc:
        model.problem(1.0, "0", "1", "u*(u-1)")
    (v,) = [v for v in exc.value.violations if "h > 0" in v.hypothesis]
    assert 0 < v.witness < 1


def test_negative_g_rejected():
    with pytest.raises(ValidationError) as exc:
        model.problem(1.0, "0", "-1", "u*(1-u)")
    hypotheses = {v.hypothesis for v in exc.value.violations}
    assert "g(0) > 0" in hypotheses


def test_alpha_positive_required():
    with pytest.raises(ValidationError):
        model.problem(0.0, "0", "1", "u*(1-u)")
    with pytest.raises(ValidationError):
        model.problem(-1.0, "0", "1", "u*(1-u)")


def test_validate_example2_clean(example2):
    assert model.validate(example2) == []


def test_h_endpoint_violation():
    spec = model.problem(1.0, "0", "1", "u*(1-u)+0.1", check=False)
    violations = model.validate(spec)
    names = {v.hypothesis for v in violations}
    assert "h(0) = 0" in names and "h(1) = 0" in names
    # soundness: each violation re-evaluates as a true violation
    for v in violations:
        assert abs(spec.h_fn(v.witness)) > spec.numerics.endpoint_tol


def test_sign_changing_g_passes_with_warning():
    spec = model.problem(1.0, "0", "1-2*u", "u*(1-u)")
    assert model.validate(spec) == []
    assert any("strict positivity" in w for w in spec.warnings)


def test_genuine_integral_violation():
    # integral of g goes clearly negative inside (0, 1)
    with pytest.raises(ValidationError) as exc:
        model.problem(1.0, "0", "1-4*u", "u*(1-u)")
    assert any("integral of g" in v.hypothesis for v in exc.value.violations)


def test_violation_soundness_on_interior_h():
    with pytest.raises(ValidationError) as exc:
        model.problem(1.0, "0", "1", "u*(u-1)")
    v = [v for v in exc.value.violations if "h > 0" in v.hypothesis][0]
    spec = model.problem(1.0, "0", "1", "u*(u-1)", check=False)
    assert spec.h_fn(v.witness) <= 0


def test_d_rho_product():
    spec = model.problem(1.0, "0", "1", None, d="1+u", rho="u*(1-u)")
    assert spec.h_fn(0.5) == pytest.approx(1.5 * 0.25)
    assert spec.d_src == "1+u"


def test_h_and_d_rho_conflict():
    with pytest.raises(ProblemFileError):
        model.problem(1.0, "0", "1", "u*(1-u)", d="1", rho="u*(1-u)")
    with pytest.raises(ProblemFileError):
        model.problem(1.0, "0", "1", None, d="1")


def test_unknown_keys_rejected():
    with pytest.raises(ProblemFileError):
        model.loads('[problem]\nalpha=1.0\nf="0"\ng="1"\nh="u*(1-u)"\nbogus=1\n')
    with pytest.raises(ProblemFileError):
        model.loads('[problem]\nalpha=1.0\nf="0"\ng="1"\nh="u*(1-u)"\n'
                    '[numerics]\nnope=2\n')
    with pytest.raises(ProblemFileError):
        model.loads('[warp]\nx=1\n')


def test_overrides_parse():
    spec = model.loads(
        '[problem]\nalpha=1.0\nf="0"\ng="1"\nh="u*(1-u)"\n'
        'h0_alpha_override = 1.0\nh1_alpha_override = "neg_infinite"\n')
    assert spec.h0_override == 1.0
    assert spec.h1_override == -math.inf
    with pytest.raises(ProblemFileError):
        model.loads('[problem]\nalpha=1.0\nf="0"\ng="1"\nh="u*(1-u)"\n'
                    'h0_alpha_override = -2.0\n')


def test_numerics_overrides():
    spec = model.loads(
        '[problem]\nalpha=1.0\nf="0"\ng="1"\nh="u*(1-u)"\n'
        '[numerics]\ntol_c = 1e-4\nvalidation_points = 501\n')
    assert spec.numerics.tol_c == 1e-4
    assert spec.numerics.validation_points == 501


def test_serialize_roundtrip(example2):
    text = model.serialize(example2)
    again = model.loads(text)
    us = np.linspace(0.0, 1.0, 101)
    for name in ("f_vec", "g_vec", "h_vec"):
        np.testing.assert_array_equal(getattr(example2, name)(us),
                                      getattr(again, name)(us))
    assert again.alpha == example2.alpha
    assert again.numerics == example2.numerics


def test_with_numerics(fisher):
    tweaked = fisher.with_numerics(tol_c=1e-4)
    assert tweaked.numerics.tol_c == 1e-4
    assert fisher.numerics.tol_c == 1e-6
    with pytest.raises(ProblemFileError):
        fisher.with_numerics(bogus=1)


def test_spec_immutable(fisher):
    with pytest.raises(Exception):
        fisher.alpha = 3.0
