"""Catalog entries: construction, stated ground truth, and helpers."""

from __future__ import annotations

import json
import math

import numpy as np
import pytest

from finvert.linop import LinOp, banach_constant
from finvert.norms import LpNorm
from finvert.pseudojac import regularity_index
from finvert.registry import (
    RegistryEntry,
    available_names,
    great_arc_path,
    lookup,
)


def test_every_advertised_name_builds():
    for name in available_names():
        if name.endswith(":<...>"):
            continue
        entry = lookup(name)
        assert isinstance(entry, RegistryEntry)
        assert entry.name == name
        assert entry.kind in {"map", "manifold", "weight", "combiner"}


def test_parametric_names_build():
    for name in (
        "identity:3",
        "linear:[[2,0],[0,3]]",
        "euclidean:2:l1",
        "euclidean:3:lp:3",
        "weight:const:2.5",
    ):
        assert lookup(name).name == name


def test_unknown_name_lists_catalog():
    with pytest.raises(KeyError) as info:
        lookup("no-such-entry")
    msg = str(info.value)
    assert "abs-kink" in msg and "torus" in msg


def test_lookup_returns_fresh_entries():
    a = lookup("sin-perturbed-identity")
    b = lookup("sin-perturbed-identity")
    assert a is not b
    assert a.obj is not b.obj


# --- ground truth re-derived by the recipes stated in each entry's notes ---


def test_linear_ground_truth_is_svd():
    rows = [[2, 1], [0, 3]]
    entry = lookup(f"linear:{json.dumps(rows)}")
    svals = np.linalg.svd(np.array(rows, dtype=float), compute_uv=False)
    assert entry.ground_truth["regularity_index"] == pytest.approx(
        svals[-1], rel=1e-12
    )
    assert entry.ground_truth["operator_norm"] == pytest.approx(
        svals[0], rel=1e-12
    )
    # and the live computation agrees with the recorded value
    T = LinOp(np.array(rows, dtype=float), LpNorm(2, 2), LpNorm(2, 2))
    assert banach_constant(T, seed=0) == pytest.approx(svals[-1], rel=1e-9)


def test_kink_ground_truth_from_interval_slopes():
    entry = lookup("kink-23")
    # slopes of 2x + |x| are exactly {1, 3}; the hull over any kink
    # neighbourhood is [1, 3], whose smallest magnitude is 1
    f = entry.obj
    slopes = {float(f.jacobian(np.array([s]))[0, 0]) for s in (-1e-3, 1e-3)}
    assert slopes == {1.0, 3.0}
    assert entry.ground_truth["index_at_0"] == 1.0
    assert entry.ground_truth["lipschitz"] == 3.0
    value, _ = regularity_index(f, np.array([0.0]), R_schedule=[1.0, 0.5], seed=0)
    assert value == pytest.approx(1.0, abs=1e-9)


def test_abs_ground_truth_hull_contains_zero():
    entry = lookup("abs-kink")
    f = entry.obj
    slopes = {float(f.jacobian(np.array([s]))[0, 0]) for s in (-1e-3, 1e-3)}
    assert slopes == {-1.0, 1.0}
    # midpoint of -1 and 1 is 0, so the hull index vanishes at the kink
    assert entry.ground_truth["index_at_0"] == 0.0
    assert entry.ground_truth["index_away_from_0"] == 1.0


def test_sin_ground_truth_closed_forms():
    entry = lookup("sin-perturbed-identity")
    # derivative 1 + 0.5 cos x has range [1/2, 3/2] and value 3/2 at 0
    assert entry.ground_truth["index_at_0"] == 1.5
    assert entry.ground_truth["global_rate_floor"] == 0.5
    assert entry.ground_truth["lipschitz"] == 1.5
    f = entry.obj
    ders = [
        float(f.jacobian(np.array([x]))[0, 0])
        for x in np.linspace(-10, 10, 2001)
    ]
    assert min(ders) >= 0.5 - 1e-12
    assert max(ders) <= 1.5 + 1e-12
    assert float(f.jacobian(np.array([0.0]))[0, 0]) == 1.5


def test_cube_ground_truth():
    entry = lookup("cube")
    f = entry.obj
    assert float(f.jacobian(np.array([0.0]))[0, 0]) == 0.0
    assert float(f.jacobian(np.array([1.0]))[0, 0]) == pytest.approx(3.0)
    assert entry.ground_truth["index_at_0"] == 0.0
    assert entry.ground_truth["index_at_1"] == 3.0


def test_weight_linear_steps_integral():
    entry = lookup("weight:linear-steps")
    w = entry.obj
    # piecewise-constant reciprocal integral: 1/1 on [0,1) + 1/2 on [1,2)
    assert w.integral_inverse(2.0) == pytest.approx(1.5, rel=1e-12)
    assert entry.ground_truth["integral_inverse_at_2"] == 1.5
    assert w.omega(0.5) == 1.0 and w.omega(1.5) == 2.0


def test_weight_const_integral():
    entry = lookup("weight:const:2.5")
    w = entry.obj
    assert w.omega(7.3) == 2.5
    assert w.integral_inverse(1.0) == pytest.approx(0.4, rel=1e-12)
    assert entry.ground_truth["integral_inverse_at_1"] == pytest.approx(0.4)


def test_identity_entry_rates_are_one():
    entry = lookup("identity:4")
    f = entry.obj
    x = np.array([0.3, -1.2, 0.0, 2.0])
    assert np.allclose(f.eval(x), x)
    assert np.allclose(f.jacobian(x), np.eye(4))
    assert entry.ground_truth["regularity_index"] == 1.0


# --- circle machinery ---


def test_circle_cover_fiber_spacing():
    entry = lookup("circle-cover")
    f = entry.obj
    spacing = entry.ground_truth["fiber_spacing"]
    assert spacing == pytest.approx(2 * math.pi, rel=1e-15)
    y = f.eval(np.array([0.7]))
    assert np.allclose(f.eval(np.array([0.7 + spacing])), y, atol=1e-12)
    assert not np.allclose(f.eval(np.array([0.7 + 0.5 * spacing])), y)


def test_circle_cover_velocity_is_unit():
    f = lookup("circle-cover").obj
    for ang in np.linspace(0, 2 * math.pi, 17):
        col = f.jacobian(np.array([ang]))[:, 0]
        assert np.linalg.norm(col) == pytest.approx(1.0, rel=1e-12)


def test_circle_cover_local_model_is_unit_rate():
    entry = lookup("circle-cover")
    local = entry.extras["local_model"]
    assert local.dim_in == local.dim_out == 1
    assert float(local.jacobian(np.array([0.0]))[0, 0]) == 1.0


def test_circle_target_parser():
    parser = lookup("circle-cover").extras["target_parser"]
    y = parser([math.pi / 3])
    assert np.allclose(y, [0.5, math.sqrt(3) / 2], atol=1e-12)
    y2 = parser([0.0, 1.0])
    assert np.allclose(y2, [0.0, 1.0])
    with pytest.raises(ValueError):
        parser([0.5, 0.5])  # off the circle
    with pytest.raises(ValueError):
        parser([1.0, 0.0, 0.0])  # wrong arity


def test_great_arc_path_endpoints_and_shortness():
    f = lookup("circle-cover").obj
    x0 = np.array([0.1])
    target = np.array([math.cos(2.0), math.sin(2.0)])
    path = great_arc_path(f, x0, target)
    assert np.allclose(path(0.0), f.eval(x0), atol=0)
    assert np.allclose(path(1.0), target, atol=1e-12)
    # the arc stays short: total variation under the sampled chords is
    # below pi + rounding, never the long way round
    ts = np.linspace(0, 1, 201)
    pts = [path(t) for t in ts]
    total = sum(
        float(np.linalg.norm(b - a)) for a, b in zip(pts, pts[1:])
    )
    assert total <= math.pi + 1e-6


def test_circle_warp_angle_model_matches_point_map():
    entry = lookup("circle-warp")
    warp = entry.obj
    angle_map = entry.extras["angle_map"]
    for ang in np.linspace(-3, 3, 13):
        p = np.array([math.cos(ang), math.sin(ang)])
        q = warp(p)
        expect = angle_map(ang)
        assert np.allclose(
            q, [math.cos(expect), math.sin(expect)], atol=1e-12
        )
    rate = entry.extras["angle_rate"]
    vals = [rate(a) for a in np.linspace(0, 2 * math.pi, 721)]
    assert min(vals) == pytest.approx(entry.ground_truth["rate_min"], abs=1e-4)
    assert max(vals) == pytest.approx(entry.ground_truth["rate_max"], abs=1e-4)


# --- manifold entries cover their model sets ---


def test_circle_atlas_covers_everything():
    M = lookup("circle").obj
    assert M.dim == 1
    assert len(M.atlas) == 2
    for ang in np.linspace(0, 2 * math.pi, 721):
        p = np.array([math.cos(ang), math.sin(ang)])
        assert any(c.contains(p) for c in M.atlas), f"angle {ang} uncovered"
    assert M.smooth_norm


def test_torus_atlas_covers_everything():
    M = lookup("torus").obj
    assert M.dim == 2
    assert len(M.atlas) == 3
    angles = list(np.linspace(0, 2 * math.pi, 44, endpoint=False))
    angles += [0.0, math.pi, 3 * math.pi / 2]
    for a in angles:
        for b in angles:
            p = np.array([a, b])
            assert any(c.contains(p) for c in M.atlas), f"({a},{b}) uncovered"


def test_conformal1d_distance_ground_truth():
    from finvert.manifold import finsler_distance

    entry = lookup("conformal1d")
    M = entry.obj
    # integral of (1+|u|) du from 0 to 1 = 1 + 1/2
    length, _ = finsler_distance(np.array([0.0]), np.array([1.0]), M)
    assert length == pytest.approx(entry.ground_truth["distance_0_1"], rel=1e-6)


def test_flags_mark_smoothness_of_parametric_spaces():
    assert lookup("euclidean:3:l2").flags["smooth_norm"]
    assert lookup("euclidean:3:lp:3").flags["smooth_norm"]
    assert not lookup("euclidean:3:l1").flags["smooth_norm"]
    assert not lookup("euclidean:3:linf").flags["smooth_norm"]


def test_combiner_entry_is_well_behaved():
    from finvert.invert import check_combiner

    entry = lookup("combiner:add")
    ok, _ = check_combiner(entry.obj, LpNorm(2, 2), seed=0)
    assert ok


def test_notes_explain_each_ground_truth_key():
    for name in available_names():
        if name.endswith(":<...>"):
            continue
        entry = lookup(name)
        if not entry.ground_truth:
            continue
        for key in entry.ground_truth:
            assert key in entry.notes, f"{name}: no recipe for {key}"
            assert len(entry.notes[key]) > 10
