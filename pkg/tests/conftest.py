import math
from dataclasses import dataclass
from pathlib import Path

import pytest

from frontspeed import model
from frontspeed.speed import critical_speed

PROBLEM_DIR = Path(__file__).resolve().parent.parent / "problems"


@pytest.fixture(scope="session")
def example1():
    return model.problem(2.0, "0", "u+1", "u^2*(1-u)")


@pytest.fixture(scope="session")
def example2():
    return model.problem(1.0, "u", "1-u", "u*(1-u)")


@pytest.fixture(scope="session")
def fisher():
    return model.problem(1.0, "0", "1", "u*(1-u)")


@dataclass
class GalleryEntry:
    name: str
    spec: model.ProblemSpec
    c_star: float


def _build_gallery():
    entries = [
        ("fisher", model.problem(1.0, "0", "1", "u*(1-u)")),
        ("example2", model.problem(1.0, "u", "1-u", "u*(1-u)")),
        ("fisher_drift", model.problem(1.0, "0.5", "1", "u*(1-u)")),
        ("example1", model.problem(2.0, "0", "u+1", "u^2*(1-u)")),
        ("cubic_alpha2", model.problem(2.0, "0", "1", "u^2*(1-u)")),
        ("sqrt_alpha_half", model.problem(0.5, "0", "1", "sqrt(u)*(1-u)")),
        ("mixed", model.problem(1.0, "u^2", "1+u/2", "u*(1-u)*(1+u)/2")),
    ]
    out = []
    for name, spec in entries:
        result = critical_speed(spec)
        out.append(GalleryEntry(name, spec, result.c_star))
    return out


@pytest.fixture(scope="session")
def gallery():
    """Seven problems spanning linear, balance, and quasi-static starts,
    coinciding and bisected thresholds, with their computed c*."""
    return _build_gallery()
