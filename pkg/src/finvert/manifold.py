"""Charted spaces with a norm field: lengths, distances, local flatness.

A space is described by an atlas of charts plus a ``norm_field`` giving,
for each chart and each coordinate point, the norm measuring coordinate
tangent vectors there.  Path length integrates that field along piecewise
linear coordinate paths; distance is the infimum over such paths, which we
approach from above by coordinate-descent on waypoint positions.

``bilipschitz_check`` probes the radius on which coordinate straight-line
geometry and intrinsic distance agree to a factor (1 + eps): that radius is
where flat-space certificates transfer to the charted setting.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .norms import LpNorm, Norm
from .pseudojac import MapUnderStudy

__all__ = [
    "Chart",
    "FinslerStructure",
    "PolyPath",
    "NoCommonChartError",
    "finsler_length",
    "finsler_distance",
    "bilipschitz_check",
    "chart_representative",
    "norm_comparability",
]


class NoCommonChartError(ValueError):
    """Two points share no chart, so no coordinate path can join them."""


@dataclass
class Chart:
    """A coordinate system: forward maps points to coordinates.

    ``domain_predicate`` accepts *coordinate* vectors and delimits the open
    set on which the chart is a homeomorphism.  ``d_forward`` returns the
    derivative matrix of ``forward`` at a point of the space.
    """

    name: str
    forward: Callable[[np.ndarray], np.ndarray]
    inverse: Callable[[np.ndarray], np.ndarray]
    d_forward: Callable[[np.ndarray], np.ndarray]
    domain_predicate: Callable[[np.ndarray], bool]

    def contains(self, point: np.ndarray) -> bool:
        try:
            u = np.atleast_1d(np.asarray(self.forward(point), dtype=float))
        except (ValueError, FloatingPointError):
            return False
        return bool(self.domain_predicate(u)) and np.all(np.isfinite(u))

    def coords(self, point: np.ndarray) -> np.ndarray:
        u = np.atleast_1d(np.asarray(self.forward(point), dtype=float))
        if not self.domain_predicate(u):
            raise ValueError(
                f"point {np.asarray(point).tolist()} falls outside chart "
                f"{self.name!r}"
            )
        return u

    def d_inverse(self, coords: np.ndarray) -> np.ndarray:
        """Derivative of the inverse chart at coordinate point ``coords``.

        For charts on embedded submanifolds the forward derivative is a wide
        matrix; its pseudo-inverse restricted to the tangent space is the
        derivative of the inverse parametrization.
        """
        p = self.inverse(np.atleast_1d(np.asarray(coords, dtype=float)))
        d = np.atleast_2d(self.d_forward(p))
        if d.shape[0] == d.shape[1]:
            return np.linalg.inv(d)
        return np.linalg.pinv(d)


@dataclass
class FinslerStructure:
    """An atlas plus a chart-expressed norm field on coordinate tangents."""

    name: str
    dim: int
    atlas: list[Chart]
    norm_field: Callable[[Chart, np.ndarray], Norm]
    smooth_norm: bool = True

    def charts_containing(self, point: np.ndarray) -> list[Chart]:
        return [c for c in self.atlas if c.contains(point)]

    def chart_of(self, point: np.ndarray) -> Chart:
        charts = self.charts_containing(point)
        if not charts:
            raise ValueError(
                f"point {np.asarray(point).tolist()} lies in no chart of "
                f"{self.name!r}"
            )
        return charts[0]


def flat_structure(dim: int, norm: Optional[Norm] = None, name: str = "euclidean") -> FinslerStructure:
    """Single-chart flat space with a constant norm field."""
    norm = norm if norm is not None else LpNorm(dim, 2)
    ident = Chart(
        name="identity",
        forward=lambda p: np.atleast_1d(np.asarray(p, dtype=float)),
        inverse=lambda u: np.atleast_1d(np.asarray(u, dtype=float)),
        d_forward=lambda p: np.eye(dim),
        domain_predicate=lambda u: True,
    )
    return FinslerStructure(
        name=name, dim=dim, atlas=[ident], norm_field=lambda c, u: norm
    )


@dataclass
class PolyPath:
    """A piecewise linear path recorded in a single chart."""

    chart: Chart
    waypoints: list[np.ndarray]

    def __post_init__(self):
        if len(self.waypoints) < 2:
            raise ValueError("a path needs at least two waypoints")
        self.waypoints = [
            np.atleast_1d(np.asarray(w, dtype=float)) for w in self.waypoints
        ]


def finsler_length(
    path: PolyPath, M: FinslerStructure, subdivisions: int = 64
) -> float:
    """Length of a coordinate polyline under the norm field.

    Each segment is split into ``subdivisions`` pieces and the field is
    read at piece midpoints (composite midpoint rule, error O(h^2) for a
    smooth field along the segment).
    """
    if subdivisions < 1:
        raise ValueError(f"subdivisions must be >= 1, got {subdivisions}")
    chart = path.chart
    total = 0.0
    for a, b in zip(path.waypoints, path.waypoints[1:]):
        for w in (a, b):
            if not chart.domain_predicate(w):
                raise ValueError(
                    f"waypoint {w.tolist()} leaves the domain of chart "
                    f"{chart.name!r}"
                )
        delta = (b - a) / subdivisions
        for j in range(subdivisions):
            mid = a + (j + 0.5) * delta
            if not chart.domain_predicate(mid):
                raise ValueError(
                    f"segment through {mid.tolist()} leaves the domain of "
                    f"chart {chart.name!r}"
                )
            total += M.norm_field(chart, mid).eval(delta)
    return total


def finsler_distance(
    u: np.ndarray,
    u_prime: np.ndarray,
    M: FinslerStructure,
    mesh: int = 8,
    sweeps: int = 3,
    subdivisions: int = 16,
) -> tuple[float, PolyPath]:
    """Upper bound on intrinsic distance, with the realizing path.

    Starts from the coordinate chord in each common chart and relaxes the
    interior waypoints by per-coordinate pattern search; the initial chord
    is always a candidate, so the bound never exceeds the chord length.
    """
    charts = [c for c in M.atlas if c.contains(u) and c.contains(u_prime)]
    if not charts:
        raise NoCommonChartError(
            f"points {np.asarray(u).tolist()} and {np.asarray(u_prime).tolist()} "
            f"share no chart of {M.name!r}; split the path"
        )
    best_len, best_path = np.inf, None
    for chart in charts:
        a, b = chart.coords(u), chart.coords(u_prime)
        pts = [a + (b - a) * k / (mesh + 1) for k in range(mesh + 2)]
        path = PolyPath(chart, pts)
        length = finsler_length(path, M, subdivisions)
        scale = max(1e-6, float(np.linalg.norm(b - a)) / (mesh + 1))
        step = 0.5 * scale
        for _ in range(sweeps):
            for i in range(1, mesh + 1):
                for k in range(M.dim):
                    for s in (step, -step):
                        trial = [w.copy() for w in path.waypoints]
                        trial[i][k] += s
                        cand = PolyPath(chart, trial)
                        try:
                            cl = finsler_length(cand, M, subdivisions)
                        except ValueError:
                            continue
                        if cl < length - 1e-15:
                            path, length = cand, cl
            step *= 0.5
        if length < best_len:
            best_len, best_path = length, path
    return float(best_len), best_path


@dataclass
class BilipschitzReport:
    """Outcome of probing flat-versus-intrinsic agreement per radius."""

    eps: float
    rows: list[dict]
    passed_radius: Optional[float]


def bilipschitz_check(
    M: FinslerStructure,
    x: np.ndarray,
    eps: float,
    trial_radius: float,
    pairs: int = 12,
    levels: int = 5,
    seed: int = 0,
) -> BilipschitzReport:
    """Largest trial radius where chart chords match distances to (1+eps).

    For sampled pairs in the coordinate ball of each radius the check is
    two-sided: the distance upper bound must not exceed (1+eps) times the
    base-point chord, and the field must not dip below 1/(1+eps) of the
    base-point norm anywhere in the sampled region (which lower-bounds any
    path length by that same factor of the chord).
    """
    if eps <= 0 or trial_radius <= 0:
        raise ValueError("eps and trial_radius must be positive")
    chart = M.chart_of(x)
    x_hat = chart.coords(x)
    base_norm = M.norm_field(chart, x_hat)
    rng = np.random.default_rng(seed)
    offsets = []
    while len(offsets) < 2 * pairs:
        d = rng.standard_normal(M.dim)
        ln = base_norm.eval(d)
        if ln > 1e-12:
            offsets.append(d / ln * rng.uniform() ** (1.0 / M.dim))
    offsets = np.array(offsets)
    dirs = []
    while len(dirs) < 8:
        d = rng.standard_normal(M.dim)
        ln = base_norm.eval(d)
        if ln > 1e-12:
            dirs.append(d / ln)

    rows = []
    passed_radius = None
    for level in range(levels):
        radius = trial_radius * 0.5 ** level
        worst_upper = 0.0
        lower_factor = np.inf
        ok = True
        # field dip over the sampled 2r-region
        for off in offsets:
            p = x_hat + 2.0 * radius * off
            if not chart.domain_predicate(p):
                continue
            npt = M.norm_field(chart, p)
            for w in dirs:
                ratio = npt.eval(w) / base_norm.eval(w)
                lower_factor = min(lower_factor, ratio)
        for i in range(pairs):
            ua = x_hat + radius * offsets[2 * i]
            ub = x_hat + radius * offsets[2 * i + 1]
            if not (chart.domain_predicate(ua) and chart.domain_predicate(ub)):
                continue
            chord = base_norm.eval(ub - ua)
            if chord < 1e-14:
                continue
            d_up, _ = finsler_distance(
                chart.inverse(ua), chart.inverse(ub), M, mesh=4, sweeps=2
            )
            worst_upper = max(worst_upper, d_up / chord)
        if worst_upper > 1.0 + eps or lower_factor < 1.0 / (1.0 + eps):
            ok = False
        rows.append(
            {
                "radius": radius,
                "worst_upper_ratio": worst_upper,
                "lower_factor": float(lower_factor),
                "passed": ok,
            }
        )
        if ok and passed_radius is None:
            passed_radius = radius
    return BilipschitzReport(eps=eps, rows=rows, passed_radius=passed_radius)


def chart_representative(
    fmap: Callable[[np.ndarray], np.ndarray],
    M_in: FinslerStructure,
    M_out: FinslerStructure,
    chart_in: Chart,
    chart_out: Chart,
    base_point: np.ndarray,
    name: str = "chart-rep",
) -> tuple[MapUnderStudy, np.ndarray]:
    """Coordinate representative of a map between charted spaces.

    Freezes the norm field at the base point (input) and its image (output),
    which is exactly what pointwise regularity indices need; invariance of
    those indices under change of chart is the conjugation identity checked
    in the linop layer.  Returns the representative and the base coordinates.
    """
    x_hat = chart_in.coords(base_point)
    y_hat = chart_out.coords(fmap(base_point))

    def rep(u: np.ndarray) -> np.ndarray:
        return chart_out.coords(fmap(chart_in.inverse(u)))

    f_rep = MapUnderStudy(
        name=name,
        dim_in=M_in.dim,
        dim_out=M_out.dim,
        eval=rep,
        norm_in=M_in.norm_field(chart_in, x_hat),
        norm_out=M_out.norm_field(chart_out, y_hat),
    )
    return f_rep, x_hat


def norm_comparability(
    norm: Norm, samples: int = 64, seed: int = 0
) -> float:
    """Smallest m with ||v||_2 / m <= norm(v) <= m ||v||_2 over samples."""
    rng = np.random.default_rng(seed)
    m = 1.0
    for _ in range(samples):
        v = rng.standard_normal(norm.dim)
        l2 = np.linalg.norm(v)
        if l2 < 1e-12:
            continue
        r = norm.eval(v) / l2
        m = max(m, r, 1.0 / r)
    return float(m)
