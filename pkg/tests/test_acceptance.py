"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s` to see the lines and the
per-criterion wall times.
"""

import math
import time
from contextlib import contextmanager

import numpy as np
import pytest

from frontspeed import (asymptotics, bounds, model, pdecheck, shooting, speed)
from frontspeed.errors import NoSolutionError

C_EXACT = 5 / math.sqrt(6)


@contextmanager
def criterion(number, description, budget=None):
    t0 = time.perf_counter()
    try:
        yield
    except BaseException:
        print(f"ACCEPTANCE {number} FAIL: {description}")
        raise
    dt = time.perf_counter() - t0
    if budget is not None:
        assert dt < budget, f"criterion {number} took {dt:.2f}s (budget {budget}s)"
    print(f"ACCEPTANCE {number} PASS ({dt:.2f}s): {description}")


def test_criterion_1_example1_speed():
    with criterion(1, "example 1: c* = 1.8898816 within 1e-5, coinciding "
                      "bounds within 1e-8, under 1 s", budget=1.0):
        spec = model.load("problems/example1.toml")
        result = speed.critical_speed(spec)
        assert abs(result.c_star - 1.8898816) < 1e-5
        assert abs(result.bounds.upper - result.bounds.lower) < 1e-8


def test_criterion_2_example2_bracket():
    with criterion(2, "example 2: bounds exactly [2, 5] within 1e-8, "
                      "bisected c* strictly inside, stable to 1e-5 under "
                      "refinement, under 10 s", budget=10.0):
        spec = model.load("problems/example2.toml")
        est = bounds.estimate(spec)
        assert abs(est.lower - 2.0) < 1e-8
        assert abs(est.upper - 5.0) < 1e-8
        result = speed.critical_speed(spec, tol_c=1e-6)
        assert 2.0 < result.c_star < 5.0
        refined = speed.critical_speed(spec, tol_c=1e-7)
        assert abs(result.c_star - refined.c_star) <= 1e-5
        # cross-check: phi*u*(1-u) solves the equation at c = sqrt(5)
        assert abs(result.c_star - math.sqrt(5.0)) < 2e-6


def test_criterion_3_fisher_exact_profile():
    with criterion(3, "Fisher at c = 5/sqrt(6): z matches "
                      "sqrt(2/3)*u*(1-sqrt(u)) within 1e-5 on [1e-3, 0.999], "
                      "under 1 s", budget=1.0):
        spec = model.load("problems/fisher.toml")
        traj = shooting.solve(spec, C_EXACT)
        sel = (traj.us >= 1e-3) & (traj.us <= 0.999)
        exact = math.sqrt(2 / 3) * traj.us[sel] * (1 - np.sqrt(traj.us[sel]))
        assert np.max(np.abs(traj.zs[sel] - exact)) < 1e-5


def test_criterion_4_fisher_cstar():
    with criterion(4, "Fisher: coinciding bounds give c* = 2 within 1e-8"):
        spec = model.load("problems/fisher.toml")
        result = speed.critical_speed(spec)
        assert result.coinciding
        assert abs(result.c_star - 2.0) < 1e-8


def test_criterion_5_nonexistence():
    with criterion(5, "h = sqrt(u)(1-u), alpha = 1: verdict NoFrontsForAnyC "
                      "and solve refuses at c in {0, 5, 50}"):
        spec = model.load("problems/no_front.toml")
        lim = asymptotics.singular_limit_zero(spec)
        assert lim.value == math.inf
        for c in (0.0, 5.0, 50.0):
            with pytest.raises(NoSolutionError) as exc:
                shooting.solve(spec, c)
            assert exc.value.reason == NoSolutionError.LIMIT_INFINITE


def test_criterion_6_slope_law(gallery):
    with criterion(6, "slope law: 7 problems x 3 supercritical speeds, "
                      "fitted left slope within 5e-3 relative of a root, "
                      "under 30 s", budget=30.0):
        assert len(gallery) >= 6
        checked = 0
        for entry in gallery:
            for dc in (0.25, 0.5, 1.0):
                traj = shooting.shoot(entry.spec, entry.c_star + dc)
                assert traj.classification == shooting.CONNECTS, \
                    f"{entry.name} at c* + {dc}"
                assert traj.matched_root is not None, \
                    f"{entry.name} at c* + {dc}: slope {traj.slope_at_zero}"
                root = traj.matched_root
                assert abs(traj.slope_at_zero - root) <= 5e-3 * max(abs(root), 1e-2)
                checked += 1
        assert checked == 3 * len(gallery)


def test_criterion_7_minimum_property():
    with criterion(7, "closed-form minimum vs dense-grid minimum within "
                      "1e-8 and sign law, 10^4 random samples"):
        rng = np.random.default_rng(42)
        n = 10_000
        alphas = rng.uniform(0.01, 4.0, n)
        betas = rng.uniform(-5.0, 5.0, n)
        gammas = rng.uniform(0.0, 5.0, n)
        grid_n = 4097
        j = np.arange(grid_n)
        for k in range(n):
            a, b, g = alphas[k], betas[k], gammas[k]
            argmin, mv = asymptotics.m_min(a, b, g)
            t_hi = max(2.0 * b, 1.0)
            ts = t_hi * j / (grid_n - 1)
            vals = ts ** (a + 1) - b * ts ** a + g
            i = int(np.argmin(vals))
            best = float(vals[i])
            if 0 < i < grid_n - 1:
                y1, y2, y3 = vals[i - 1], vals[i], vals[i + 1]
                den = y1 - 2 * y2 + y3
                if den > 0:
                    t_star = ts[i] + 0.5 * (ts[1] - ts[0]) * (y1 - y3) / den
                    t_star = min(max(t_star, ts[i - 1]), ts[i + 1])
                    best = min(best, float(t_star ** (a + 1)
                                           - b * t_star ** a + g))
            assert abs(best - mv) < 1e-8, (a, b, g)
            # sign of the minimum equals the sign of the closed expression
            expression = (a + 1) * (g / a ** a) ** (1 / (a + 1)) - b
            if abs(mv) > 1e-12:
                assert mv * expression > 0, (a, b, g)


def test_criterion_8_half_line_and_uniqueness(gallery):
    with criterion(8, "monotone classifier on a 50-point c-grid per gallery "
                      "problem; start-offset perturbation below 1e-7"):
        for entry in gallery:
            est = bounds.estimate(entry.spec)
            grid = np.linspace(est.lower - 1.0, est.upper + 1.0, 50)
            flags = [shooting.shoot(entry.spec, float(c)).classification
                     == shooting.CONNECTS for c in grid]
            assert not flags[0] and flags[-1], entry.name
            transitions = sum(1 for a, b in zip(flags, flags[1:]) if a != b)
            assert transitions == 1, f"{entry.name}: non-monotone classifier"
        for entry in gallery:
            if entry.name == "sqrt_alpha_half":
                # quasi-static start: the offset-halving check runs inside
                # every shot and raises on sensitivity
                shooting.shoot(entry.spec, entry.c_star + 0.5)
                continue
            a = shooting.shoot(entry.spec, entry.c_star + 0.5)
            quarter = entry.spec.numerics.delta_start / 4
            b = shooting.shoot(entry.spec.with_numerics(delta_start=quarter),
                               entry.c_star + 0.5)
            assert shooting.sample_deviation(a, b) < 1e-7, entry.name


def test_criterion_9_comparison_suite(gallery):
    with criterion(9, "upper-solution comparison holds on 20 randomized "
                      "(problem, c, u0, margin) cases"):
        rng = np.random.default_rng(7)
        for k in range(20):
            entry = gallery[int(rng.integers(0, len(gallery)))]
            c = entry.c_star + float(rng.uniform(0.2, 1.0))
            u0 = float(rng.uniform(0.2, 0.7))
            margin = float(rng.uniform(0.01, 0.5))
            base = shooting.shoot(entry.spec, c)
            assert base.classification == shooting.CONNECTS
            assert shooting.compare_upper(entry.spec, c, base, margin, u0), \
                (entry.name, c, u0, margin)


def test_criterion_10_pde_cross_validation():
    with criterion(10, "PDE measurement within 5% of 2 in under 60 s; "
                       "grid halving moves it by under 2%", budget=150.0):
        spec = model.load("problems/fisher.toml")
        t0 = time.perf_counter()
        m = pdecheck.simulate(spec)
        assert time.perf_counter() - t0 < 60.0
        assert abs(m.speed - 2.0) / 2.0 < 0.05
        half = pdecheck.SimConfig(dx=0.05)
        m2 = pdecheck.simulate(spec, half)
        assert abs(m2.speed - m.speed) / abs(m.speed) < 0.02
