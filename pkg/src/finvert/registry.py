"""Named library of benchmark maps, spaces, weights, and combiners.

Every entry carries its object plus a ``ground_truth`` dict of reference
values and a ``notes`` dict explaining, in one line each, how the value is
obtained independently of this package (closed-form derivative ranges,
singular values, elementary integrals).  Tests re-derive those values from
the stated recipes rather than trusting the numbers stored here.

Names are stable strings.  Static names are listed in ``available_names``;
parametric families use a ``prefix:payload`` syntax, e.g. ``identity:3``,
``linear:[[2,0],[0,3]]``, ``euclidean:2:linf``, ``weight:const:2``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .certify import Weight
from .invert import Combiner, additive_combiner
from .manifold import Chart, FinslerStructure, flat_structure
from .norms import LpNorm, Norm, WeightedLpNorm, parse_norm
from .pseudojac import MapUnderStudy

__all__ = [
    "RegistryEntry",
    "lookup",
    "available_names",
    "static_map_names",
    "great_arc_path",
]

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class RegistryEntry:
    """A named object plus reference values and how to re-derive them."""

    name: str
    kind: str  # "map" | "manifold" | "weight" | "combiner"
    obj: object
    ground_truth: dict = field(default_factory=dict)
    notes: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("map", "manifold", "weight", "combiner"):
            raise ValueError(f"unknown registry kind {self.kind!r}")


# ---------------------------------------------------------------------------
# maps
# ---------------------------------------------------------------------------


def _identity_map(name: str, payload: str) -> RegistryEntry:
    try:
        n = int(payload)
    except ValueError as exc:
        raise ValueError(f"identity dimension must be an integer: {name!r}") from exc
    if n < 1:
        raise ValueError(f"identity dimension must be >= 1, got {n}")
    fmap = MapUnderStudy(
        name=name,
        dim_in=n,
        dim_out=n,
        eval=lambda x: np.asarray(x, dtype=float).copy(),
        jacobian=lambda x, _n=n: np.eye(_n),
        lipschitz_hint=1.0,
    )
    return RegistryEntry(
        name=name,
        kind="map",
        obj=fmap,
        ground_truth={"regularity_index": 1.0, "injectivity_index": 1.0},
        notes={
            "regularity_index": "the unit operator moves every direction at rate exactly 1",
            "injectivity_index": "same operator, same rate, read from the domain side",
        },
        flags={"square": True, "analytic_jacobian": True},
    )


def _linear_map(name: str, payload: str) -> RegistryEntry:
    try:
        rows = json.loads(payload)
        mat = np.asarray(rows, dtype=float)
    except (json.JSONDecodeError, ValueError) as exc:
        raise ValueError(
            f"linear payload must be a JSON matrix (rows of numbers): {name!r}"
        ) from exc
    if mat.ndim != 2:
        raise ValueError(f"linear payload must be 2-dimensional, got shape {mat.shape}")
    m, n = mat.shape
    sing = np.linalg.svd(mat, compute_uv=False)
    smin = float(sing[-1]) if m <= n else 0.0
    fmap = MapUnderStudy(
        name=name,
        dim_in=n,
        dim_out=m,
        eval=lambda x, _A=mat: _A @ np.asarray(x, dtype=float),
        jacobian=lambda x, _A=mat: _A,
        lipschitz_hint=float(sing[0]),
    )
    return RegistryEntry(
        name=name,
        kind="map",
        obj=fmap,
        ground_truth={
            "regularity_index": smin,
            "injectivity_index": float(sing[-1]) if m >= n else 0.0,
            "operator_norm": float(sing[0]),
        },
        notes={
            "regularity_index": "smallest singular value when rows <= cols, else 0 (numpy SVD)",
            "injectivity_index": "smallest singular value when rows >= cols, else 0 (numpy SVD)",
            "operator_norm": "largest singular value (numpy SVD)",
        },
        flags={"square": m == n, "analytic_jacobian": True},
    )


def _abs_kink() -> RegistryEntry:
    fmap = MapUnderStudy(
        name="abs-kink",
        dim_in=1,
        dim_out=1,
        eval=lambda x: np.abs(np.asarray(x, dtype=float)),
        jacobian=lambda x: np.array([[1.0 if x[0] >= 0 else -1.0]]),
        lipschitz_hint=1.0,
    )
    return RegistryEntry(
        name="abs-kink",
        kind="map",
        obj=fmap,
        ground_truth={"index_at_0": 0.0, "index_away_from_0": 1.0, "lipschitz": 1.0},
        notes={
            "index_at_0": "slopes near 0 are {-1, +1}; their interval [-1, 1] contains 0",
            "index_away_from_0": "away from 0 the slope is constant with magnitude 1",
            "lipschitz": "|a| - |b| is bounded by |a - b| with equality on rays",
        },
        flags={"square": True, "analytic_jacobian": True},
    )


def _kink_23() -> RegistryEntry:
    fmap = MapUnderStudy(
        name="kink-23",
        dim_in=1,
        dim_out=1,
        eval=lambda x: 2.0 * np.asarray(x, dtype=float)
        + np.abs(np.asarray(x, dtype=float)),
        jacobian=lambda x: np.array([[3.0 if x[0] >= 0 else 1.0]]),
        lipschitz_hint=3.0,
    )
    return RegistryEntry(
        name="kink-23",
        kind="map",
        obj=fmap,
        ground_truth={
            "index_at_0": 1.0,
            "injectivity_at_0": 1.0,
            "lipschitz": 3.0,
        },
        notes={
            "index_at_0": "slopes near 0 are {1, 3}; the interval [1, 3] sits at distance 1 from 0",
            "injectivity_at_0": "in one dimension injection and surjection rates coincide",
            "lipschitz": "largest slope magnitude is 3",
        },
        flags={"square": True, "analytic_jacobian": True},
    )


def _sin_perturbed_identity() -> RegistryEntry:
    fmap = MapUnderStudy(
        name="sin-perturbed-identity",
        dim_in=1,
        dim_out=1,
        eval=lambda x: np.asarray(x, dtype=float)
        + 0.5 * np.sin(np.asarray(x, dtype=float)),
        jacobian=lambda x: np.array([[1.0 + 0.5 * math.cos(float(x[0]))]]),
        lipschitz_hint=1.5,
    )
    return RegistryEntry(
        name="sin-perturbed-identity",
        kind="map",
        obj=fmap,
        ground_truth={
            "index_at_0": 1.5,
            "global_rate_floor": 0.5,
            "lipschitz": 1.5,
        },
        notes={
            "index_at_0": "derivative 1 + cos(x)/2 equals 3/2 at 0 and shrinks as the ball grows",
            "global_rate_floor": "1 + cos(x)/2 ranges over [1/2, 3/2]; the floor is 1/2",
            "lipschitz": "the same range gives the ceiling 3/2",
        },
        flags={"square": True, "analytic_jacobian": True},
    )


def _cube() -> RegistryEntry:
    fmap = MapUnderStudy(
        name="cube",
        dim_in=1,
        dim_out=1,
        eval=lambda x: np.asarray(x, dtype=float) ** 3,
        jacobian=lambda x: np.array([[3.0 * float(x[0]) ** 2]]),
    )
    return RegistryEntry(
        name="cube",
        kind="map",
        obj=fmap,
        ground_truth={"index_at_0": 0.0, "index_at_1": 3.0},
        notes={
            "index_at_0": "derivative 3x^2 vanishes at 0, so every ball around 0 has rate arbitrarily near 0",
            "index_at_1": "derivative at 1 is 3; shrinking balls converge to it",
        },
        flags={"square": True, "analytic_jacobian": True},
    )


def great_arc_path(
    fmap: MapUnderStudy, x0: np.ndarray, y: np.ndarray
) -> Callable[[float], np.ndarray]:
    """Shortest-arc target curve on the unit circle from f(x0) to y."""
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    a0 = float(x0[0])
    tau = math.atan2(float(y[1]), float(y[0]))
    delta = math.remainder(tau - a0, _TWO_PI)

    def path(t: float) -> np.ndarray:
        ang = a0 + delta * float(t)
        return np.array([math.cos(ang), math.sin(ang)])

    return path


def _circle_target_parser(values: list[float]) -> np.ndarray:
    if len(values) == 1:
        ang = float(values[0])
        return np.array([math.cos(ang), math.sin(ang)])
    if len(values) == 2:
        y = np.asarray(values, dtype=float)
        r = float(np.linalg.norm(y))
        if abs(r - 1.0) > 1e-6:
            raise ValueError(
                f"circle target must lie on the unit circle; |target| = {r:g}"
            )
        return y / r
    raise ValueError("circle target takes one angle or two coordinates")


def _circle_cover() -> RegistryEntry:
    fmap = MapUnderStudy(
        name="circle-cover",
        dim_in=1,
        dim_out=2,
        eval=lambda x: np.array([math.cos(float(x[0])), math.sin(float(x[0]))]),
        jacobian=lambda x: np.array(
            [[-math.sin(float(x[0]))], [math.cos(float(x[0]))]]
        ),
        lipschitz_hint=1.0,
    )
    local_model = MapUnderStudy(
        name="circle-cover:chart-view",
        dim_in=1,
        dim_out=1,
        eval=lambda x: np.asarray(x, dtype=float).copy(),
        jacobian=lambda x: np.array([[1.0]]),
        lipschitz_hint=1.0,
    )
    return RegistryEntry(
        name="circle-cover",
        kind="map",
        obj=fmap,
        ground_truth={
            "injectivity_index": 1.0,
            "chart_rate": 1.0,
            "fiber_spacing": _TWO_PI,
        },
        notes={
            "injectivity_index": "the velocity (-sin, cos) has unit euclidean length at every angle",
            "chart_rate": "in any pair of angle charts the map reads as a rigid shift with derivative 1",
            "fiber_spacing": "preimages of a fixed point differ by whole turns of length 2*pi",
        },
        flags={"square": False, "analytic_jacobian": True},
        extras={
            "target_manifold": "circle",
            "path_factory": great_arc_path,
            "local_model": local_model,
            "target_parser": _circle_target_parser,
        },
    )


def _circle_warp_angle(theta: float) -> float:
    return theta + 0.3 * math.sin(theta)


def _circle_warp_point(p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    # On the unit circle sin(theta) is just the second coordinate, so the
    # warp rotates p by the angle 0.3 * p[1].
    a = 0.3 * float(p[1])
    c, s = math.cos(a), math.sin(a)
    return np.array([c * p[0] - s * p[1], s * p[0] + c * p[1]])


def _circle_warp() -> RegistryEntry:
    return RegistryEntry(
        name="circle-warp",
        kind="map",
        obj=_circle_warp_point,
        ground_truth={"rate_min": 0.7, "rate_max": 1.3},
        notes={
            "rate_min": "angle derivative 1 + 0.3*cos(theta) attains its minimum 0.7 at theta = pi",
            "rate_max": "the same derivative attains its maximum 1.3 at theta = 0",
        },
        flags={"square": True, "analytic_jacobian": False},
        extras={
            "manifold": "circle",
            "angle_map": _circle_warp_angle,
            "angle_rate": lambda theta: 1.0 + 0.3 * math.cos(theta),
        },
    )


# ---------------------------------------------------------------------------
# manifolds
# ---------------------------------------------------------------------------


def _euclidean(name: str, payload: str) -> RegistryEntry:
    parts = payload.split(":", 1)
    if len(parts) != 2:
        raise ValueError(
            f"euclidean entry needs dimension and norm, e.g. euclidean:2:linf; got {name!r}"
        )
    n = int(parts[0])
    norm = parse_norm(parts[1], n)
    smooth = isinstance(norm, (LpNorm, WeightedLpNorm)) and 1.0 < norm.p < math.inf
    M = flat_structure(n, norm, name=name)
    M.smooth_norm = smooth
    return RegistryEntry(
        name=name,
        kind="manifold",
        obj=M,
        ground_truth={"dim": float(n)},
        notes={"dim": "declared in the name"},
        flags={"complete": True, "simply_connected": True, "smooth_norm": smooth},
    )


def _conformal1d() -> RegistryEntry:
    ident = Chart(
        name="identity",
        forward=lambda p: np.atleast_1d(np.asarray(p, dtype=float)),
        inverse=lambda u: np.atleast_1d(np.asarray(u, dtype=float)),
        d_forward=lambda p: np.eye(1),
        domain_predicate=lambda u: True,
    )
    M = FinslerStructure(
        name="conformal1d",
        dim=1,
        atlas=[ident],
        norm_field=lambda c, u: WeightedLpNorm(
            np.array([1.0 + abs(float(u[0]))]), 2.0
        ),
        smooth_norm=True,
    )
    return RegistryEntry(
        name="conformal1d",
        kind="manifold",
        obj=M,
        ground_truth={"distance_0_1": 1.5},
        notes={
            "distance_0_1": "the line integral of (1 + u) from 0 to 1 is 3/2",
        },
        flags={"complete": True, "simply_connected": True, "smooth_norm": True},
    )


def _on_unit_circle(p: np.ndarray) -> np.ndarray:
    p = np.atleast_1d(np.asarray(p, dtype=float))
    if p.shape != (2,):
        raise ValueError(f"circle points live in R^2, got shape {p.shape}")
    r = float(np.hypot(p[0], p[1]))
    if abs(r - 1.0) > 1e-8:
        raise ValueError(f"point is off the unit circle by {abs(r - 1.0):.3e}")
    return p


def _circle_manifold() -> RegistryEntry:
    limit = 0.75 * math.pi

    def fwd_a(p: np.ndarray) -> np.ndarray:
        q = _on_unit_circle(p)
        return np.array([math.atan2(q[1], q[0])])

    def fwd_b(p: np.ndarray) -> np.ndarray:
        q = _on_unit_circle(p)
        return np.array([math.atan2(-q[1], -q[0])])

    chart_a = Chart(
        name="angle-from-east",
        forward=fwd_a,
        inverse=lambda u: np.array([math.cos(float(u[0])), math.sin(float(u[0]))]),
        d_forward=lambda p: np.array([[-p[1], p[0]]]),
        domain_predicate=lambda u: abs(float(u[0])) < limit,
    )
    chart_b = Chart(
        name="angle-from-west",
        forward=fwd_b,
        inverse=lambda u: np.array(
            [-math.cos(float(u[0])), -math.sin(float(u[0]))]
        ),
        d_forward=lambda p: np.array([[-p[1], p[0]]]),
        domain_predicate=lambda u: abs(float(u[0])) < limit,
    )
    M = FinslerStructure(
        name="circle",
        dim=1,
        atlas=[chart_a, chart_b],
        norm_field=lambda c, u: LpNorm(1, 2),
        smooth_norm=True,
    )
    return RegistryEntry(
        name="circle",
        kind="manifold",
        obj=M,
        ground_truth={"diameter": math.pi, "total_length": _TWO_PI},
        notes={
            "diameter": "antipodal points are half a turn apart",
            "total_length": "the unit circle has circumference 2*pi",
        },
        flags={"complete": True, "simply_connected": False, "smooth_norm": True},
    )


def _wrap_to_pi(x: np.ndarray) -> np.ndarray:
    return np.mod(np.asarray(x, dtype=float) + math.pi, _TWO_PI) - math.pi


def _torus_chart(label: str, center: np.ndarray) -> Chart:
    return Chart(
        name=label,
        forward=lambda p, c=center: _wrap_to_pi(np.asarray(p, dtype=float) - c),
        inverse=lambda u, c=center: np.mod(np.asarray(u, dtype=float) + c, _TWO_PI),
        d_forward=lambda p: np.eye(2),
        domain_predicate=lambda u: bool(np.max(np.abs(u)) < math.pi),
    )


def _torus() -> RegistryEntry:
    # Two square charts cannot cover a torus; three shifted copies do,
    # because a point would need a coordinate equal to each of the three
    # distinct seam values and only two coordinates are available.
    charts = [
        _torus_chart("square-at-center", np.array([math.pi, math.pi])),
        _torus_chart("square-at-corner", np.array([0.0, 0.0])),
        _torus_chart("square-at-diagonal", np.array([math.pi / 2, math.pi / 2])),
    ]
    M = FinslerStructure(
        name="torus",
        dim=2,
        atlas=charts,
        norm_field=lambda c, u: LpNorm(2, 2),
        smooth_norm=True,
    )
    return RegistryEntry(
        name="torus",
        kind="manifold",
        obj=M,
        ground_truth={"short_loop": _TWO_PI, "diameter": math.pi * math.sqrt(2.0)},
        notes={
            "short_loop": "each coordinate circle has length 2*pi",
            "diameter": "the farthest point sits at (pi, pi) in flat coordinates",
        },
        flags={"complete": True, "simply_connected": False, "smooth_norm": True},
    )


# ---------------------------------------------------------------------------
# weights and combiners
# ---------------------------------------------------------------------------


def _weight_const(name: str, payload: str) -> RegistryEntry:
    c = float(payload)
    if c <= 0:
        raise ValueError(f"constant weight must be positive, got {c}")
    return RegistryEntry(
        name=name,
        kind="weight",
        obj=Weight(breakpoints=(0.0,), values=(c,)),
        ground_truth={"value_everywhere": c, "integral_inverse_at_1": 1.0 / c},
        notes={
            "value_everywhere": "declared in the name",
            "integral_inverse_at_1": "integral of the constant 1/c over [0, 1]",
        },
    )


def _weight_linear_steps() -> RegistryEntry:
    breakpoints = tuple(float(k) for k in range(10))
    values = tuple(float(k + 1) for k in range(10))
    truth = 1.0 + 0.5  # 1/1 over [0,1) plus 1/2 over [1,2)
    return RegistryEntry(
        name="weight:linear-steps",
        kind="weight",
        obj=Weight(breakpoints=breakpoints, values=values),
        ground_truth={"integral_inverse_at_2": truth},
        notes={
            "integral_inverse_at_2": "1/1 over [0,1) plus 1/2 over [1,2) sums to 3/2",
        },
    )


def _combiner_add() -> RegistryEntry:
    return RegistryEntry(
        name="combiner:add",
        kind="combiner",
        obj=additive_combiner(),
        notes={"identity": "vector addition satisfies the exchange rules exactly"},
    )


# ---------------------------------------------------------------------------
# lookup
# ---------------------------------------------------------------------------

_STATIC: dict[str, Callable[[], RegistryEntry]] = {
    "abs-kink": _abs_kink,
    "kink-23": _kink_23,
    "sin-perturbed-identity": _sin_perturbed_identity,
    "cube": _cube,
    "circle-cover": _circle_cover,
    "circle-warp": _circle_warp,
    "conformal1d": _conformal1d,
    "circle": _circle_manifold,
    "torus": _torus,
    "weight:linear-steps": _weight_linear_steps,
    "combiner:add": _combiner_add,
}

_PARAMETRIC: dict[str, Callable[[str, str], RegistryEntry]] = {
    "identity": _identity_map,
    "linear": _linear_map,
    "euclidean": _euclidean,
    "weight:const": _weight_const,
}


def static_map_names() -> list[str]:
    """Names of the concrete benchmark maps (no parametric families)."""
    return [
        name
        for name, builder in _STATIC.items()
        if builder().kind == "map"
    ]


def available_names() -> list[str]:
    names = sorted(_STATIC)
    names += [f"{p}:<...>" for p in sorted(_PARAMETRIC)]
    return names


def lookup(name: str) -> RegistryEntry:
    """Build a fresh entry for ``name``; raises KeyError for unknown names."""
    name = name.strip()
    if name in _STATIC:
        return _STATIC[name]()
    best = None
    for prefix in _PARAMETRIC:
        if name.startswith(prefix + ":"):
            if best is None or len(prefix) > len(best):
                best = prefix
    if best is not None:
        return _PARAMETRIC[best](name, name[len(best) + 1 :])
    raise KeyError(
        f"unknown registry name {name!r}; available: {', '.join(available_names())}"
    )
