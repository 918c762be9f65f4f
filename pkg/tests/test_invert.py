"""Local/global solving, lift traces, and perturbation margins."""

from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.optimize import brentq

from finvert.certify import CERTIFIED, REFUTED, Weight
from finvert.invert import (
    Combiner,
    LiftFailure,
    NonConvergence,
    additive_combiner,
    check_combiner,
    global_invert,
    lip_estimate,
    local_invert,
    perturbation_certificate,
)
from finvert.norms import LpNorm
from finvert.pseudojac import MapUnderStudy
from finvert.registry import lookup


def _sin_map():
    return lookup("sin-perturbed-identity").obj


def _sin_value(x: float) -> float:
    return x + 0.5 * math.sin(x)


def test_local_invert_matches_scalar_root():
    f = _sin_map()
    y = 1.2
    # independent root by bracketing bisection on the scalar equation
    oracle = brentq(lambda x: _sin_value(x) - y, 0.0, 2.0, xtol=1e-14)
    sol = local_invert(f, np.array([0.0]), np.array([y]), trust_radius=2.0)
    assert sol[0] == pytest.approx(oracle, abs=1e-9)
    assert abs(_sin_value(sol[0]) - y) <= 1e-9


def test_local_invert_respects_trust_ball():
    f = _sin_map()
    with pytest.raises(NonConvergence) as info:
        local_invert(f, np.array([0.0]), np.array([10.0]), trust_radius=1.0)
    err = info.value
    assert err.best_residual > 0
    assert np.linalg.norm(err.best_x) <= 1.0 + 1e-9


def test_global_invert_matches_scalar_root():
    f = _sin_map()
    y = 10.0
    oracle = brentq(lambda x: _sin_value(x) - y, 8.0, 12.0, xtol=1e-14)
    sol, trace = global_invert(f, np.array([0.0]), np.array([y]), seed=0)
    assert sol[0] == pytest.approx(oracle, abs=1e-7)
    assert trace.success
    ts = [row["t"] for row in trace.rows]
    assert ts == sorted(ts)
    assert ts[-1] == 1.0
    assert trace.min_weight_product is None


def test_global_invert_weight_monitoring():
    f = _sin_map()
    w = Weight(breakpoints=(0.0,), values=(2.0,))
    sol, trace = global_invert(
        f, np.array([0.0]), np.array([10.0]), weight=w, seed=0
    )
    # rate >= 1/2 everywhere and omega = 2, so the product stays near or
    # above 1 up to local sampling slack
    assert trace.min_weight_product is not None
    assert trace.min_weight_product >= 0.9


def test_global_invert_validates_path_endpoints():
    f = _sin_map()
    with pytest.raises(ValueError):
        global_invert(
            f, np.array([0.0]), np.array([2.0]),
            path=lambda t: np.array([1.0 + t]), seed=0,
        )
    with pytest.raises(ValueError):
        global_invert(
            f, np.array([0.0]), np.array([2.0]),
            path=lambda t: np.array([t]), seed=0,
        )


def test_lift_failure_at_image_boundary():
    # |x| = -1 has no solution; the straight path from 0 to -1 leaves the
    # image at t = 0+, so the lift must stall early with a usable trace
    f = lookup("abs-kink").obj
    with pytest.raises(LiftFailure) as info:
        global_invert(f, np.array([1.0]), np.array([-1.0]), seed=0)
    trace = info.value.trace
    assert not trace.success
    assert trace.t_reached <= 0.55


def test_trace_csv_schema_round_trips():
    f = _sin_map()
    _, trace = global_invert(f, np.array([0.0]), np.array([3.0]), seed=0)
    text = trace.csv_text()
    lines = text.strip().splitlines()
    assert lines[0] == "t,x0,step,newton_iters,index_estimate"
    parsed = [line.split(",") for line in lines[1:]]
    assert len(parsed) == len(trace.rows)
    for fields, row in zip(parsed, trace.rows):
        assert float(fields[0]) == row["t"]
        assert float(fields[1]) == row["x"][0]
        assert int(fields[3]) == row["newton_iters"]


def test_circle_cover_lift_follows_loops():
    f = lookup("circle-cover").obj
    path = lambda t: np.array(
        [math.cos(4 * math.pi * t), math.sin(4 * math.pi * t)]
    )
    sol, trace = global_invert(
        f, np.array([0.0]), np.array([1.0, 0.0]), path=path, seed=0
    )
    # two full loops lift to 4*pi upstairs, not back to 0
    assert sol[0] == pytest.approx(4 * math.pi, abs=1e-6)


def test_lip_estimate_of_half_sine():
    g = MapUnderStudy(
        name="half-sine",
        dim_in=1,
        dim_out=1,
        eval=lambda x: 0.5 * np.sin(np.asarray(x, dtype=float)),
        jacobian=lambda x: np.array([[0.5 * math.cos(float(x[0]))]]),
    )
    val = lip_estimate(g, np.array([0.0]), seed=0)
    # |g'| peaks at exactly 1/2 at the center; chord sampling approaches
    # it from below
    assert val <= 0.5 + 1e-9
    assert val == pytest.approx(0.5, abs=1e-3)


def test_check_combiner_accepts_addition_rejects_scaling():
    ok, report = check_combiner(additive_combiner(), LpNorm(2, 2), seed=0)
    assert ok
    assert report["worst_symmetry_defect"] <= 1e-12
    skewed = Combiner(name="skewed", apply=lambda a, b: a + 2.0 * b)
    ok_bad, _ = check_combiner(skewed, LpNorm(2, 2), seed=0)
    assert not ok_bad


def _half_sine_map():
    return MapUnderStudy(
        name="half-sine",
        dim_in=1,
        dim_out=1,
        eval=lambda x: 0.5 * np.sin(np.asarray(x, dtype=float)),
        jacobian=lambda x: np.array([[0.5 * math.cos(float(x[0]))]]),
    )


def test_perturbation_certificate_tight_case_certifies():
    # identity (rate 1) + half sine (Lipschitz 1/2) against omega = 2:
    # the margin 1 - 1/2 - 1/2 = 0 sits exactly at the boundary, which the
    # slack accepts; inverse growth must respect the factor omega
    f = lookup("identity:1").obj
    cert = perturbation_certificate(
        f,
        _half_sine_map(),
        additive_combiner(),
        Weight(breakpoints=(0.0,), values=(2.0,)),
        seed=0,
    )
    assert cert.verdict == CERTIFIED
    assert cert.numbers["worst_margin_raw"] >= -5e-3
    assert cert.numbers["worst_inverse_ratio_vs_bound"] <= 1.0 + 5e-2
    assert "Thm 7.1" in cert.theorem_tags
    assert "Cor 7.2" in cert.theorem_tags  # additive combination
    assert "Cor 7.3" in cert.theorem_tags  # the base map is the identity


def test_perturbation_certificate_refutes_oversized_perturbation():
    f = lookup("identity:1").obj
    big = MapUnderStudy(
        name="double",
        dim_in=1,
        dim_out=1,
        eval=lambda x: 2.0 * np.asarray(x, dtype=float),
        jacobian=lambda x: np.array([[2.0]]),
    )
    cert = perturbation_certificate(
        f,
        big,
        additive_combiner(),
        Weight(breakpoints=(0.0,), values=(2.0,)),
        seed=0,
    )
    # margin 1 - 2 - 1/2 is hopeless
    assert cert.verdict == REFUTED
    assert cert.numbers["worst_margin_raw"] < -1.0


def test_perturbation_certificate_rejects_broken_combiner():
    f = lookup("identity:1").obj
    skewed = Combiner(name="skewed", apply=lambda a, b: a + 2.0 * b)
    cert = perturbation_certificate(
        f,
        _half_sine_map(),
        skewed,
        Weight(breakpoints=(0.0,), values=(2.0,)),
        seed=0,
    )
    assert cert.verdict == REFUTED
