"""Norms on finite-dimensional real spaces, with exact duals.

Four families are supported:

* ``LpNorm``       -- the classical p-norms, 1 <= p <= inf.
* ``WeightedLpNorm`` -- diagonal rescalings ||diag(w) v||_p with positive weights.
* ``PolyhedralNorm`` -- gauge of a symmetric polytope given by its vertices.
* ``MappedNorm``   -- pullback ||A v|| of another norm through an invertible
  matrix; produced when operators are transported between coordinate systems.

Every norm evaluates exactly (closed form for the Lp families, a max over
facet functionals for polyhedral balls) and knows its exact dual norm:
conjugate exponents for Lp, inverse weights for weighted Lp, and the polar
polytope for polyhedral balls.  Duality identities that the rest of the
package leans on:

    dual of ||diag(w) .||_p   is  ||diag(1/w) .||_q      (1/p + 1/q = 1)
    dual of gauge(conv V)     is  y -> max_i <y, V_i>
    dual of v -> N(A v)       is  y -> N*(A^{-T} y)
"""

from __future__ import annotations

import itertools
import math
from typing import Optional, Sequence

import numpy as np

__all__ = [
    "Norm",
    "LpNorm",
    "WeightedLpNorm",
    "PolyhedralNorm",
    "MappedNorm",
    "parse_norm",
    "sample_unit_sphere",
    "derive_seed",
]

# Vertex/facet enumerations of curved balls are refused; for the flat (p in
# {1, inf}) families the 2^n sign patterns are only enumerated up to this
# dimension.
_MAX_ENUM_DIM = 12


def derive_seed(seed: int, *key: int) -> int:
    """Derive an independent child seed from ``seed`` and an integer key path.

    Deterministic across runs and platforms (numpy's SeedSequence spreading),
    so that e.g. the sample cloud for radius index 2 never changes when the
    schedule in front of it does.
    """
    ss = np.random.SeedSequence((int(seed),) + tuple(int(k) for k in key))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


class Norm:
    """A norm on R^dim.  Subclasses implement ``eval`` and ``dual_eval``."""

    dim: int
    smooth: bool

    # -- evaluation ------------------------------------------------------

    def eval(self, v: np.ndarray) -> float:
        raise NotImplementedError

    def dual_eval(self, y: np.ndarray) -> float:
        raise NotImplementedError

    def dual(self) -> "Norm":
        """The dual norm as a Norm object (exact, not sampled)."""
        raise NotImplementedError

    # -- structure probes (None when not applicable) ---------------------

    def euclidean_factor(self) -> Optional[np.ndarray]:
        """Matrix A with ||v|| = ||A v||_2, if this norm is an inner-product
        norm in disguise.  Enables exact singular-value computations."""
        return None

    def facet_functionals(self) -> Optional[np.ndarray]:
        """Rows a_j with ||v|| = max_j <a_j, v>, if the unit ball is a
        polytope (and the enumeration is tractable)."""
        return None

    def unit_ball_vertices(self) -> Optional[np.ndarray]:
        """Extreme points of the unit ball, if it is a polytope."""
        return None

    # -- misc ------------------------------------------------------------

    def config_string(self) -> str:
        raise NotImplementedError

    def _check_dim(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.shape != (self.dim,):
            raise ValueError(
                f"vector of shape {v.shape} passed to {self!r} on R^{self.dim}"
            )
        return v


def _sign_patterns(n: int) -> np.ndarray:
    return np.array(list(itertools.product((-1.0, 1.0), repeat=n)))


class LpNorm(Norm):
    """The p-norm on R^dim, p in [1, inf]."""

    def __init__(self, dim: int, p: float):
        if dim < 1:
            raise ValueError(f"norm dimension must be >= 1, got {dim}")
        if not (p >= 1.0):
            raise ValueError(f"p-norm requires p >= 1, got {p}")
        self.dim = int(dim)
        self.p = float(p)
        self.smooth = 1.0 < p < math.inf

    def eval(self, v: np.ndarray) -> float:
        v = self._check_dim(v)
        if self.p == math.inf:
            return float(np.max(np.abs(v)))
        if self.p == 1.0:
            return float(np.sum(np.abs(v)))
        if self.p == 2.0:
            return float(np.linalg.norm(v))
        return float(np.sum(np.abs(v) ** self.p) ** (1.0 / self.p))

    def dual_eval(self, y: np.ndarray) -> float:
        return self.dual().eval(y)

    def dual(self) -> "LpNorm":
        return LpNorm(self.dim, _conjugate(self.p))

    def euclidean_factor(self) -> Optional[np.ndarray]:
        return np.eye(self.dim) if self.p == 2.0 else None

    def facet_functionals(self) -> Optional[np.ndarray]:
        if self.p == math.inf:
            return np.vstack([np.eye(self.dim), -np.eye(self.dim)])
        if self.p == 1.0 and self.dim <= _MAX_ENUM_DIM:
            return _sign_patterns(self.dim)
        return None

    def unit_ball_vertices(self) -> Optional[np.ndarray]:
        if self.p == 1.0:
            return np.vstack([np.eye(self.dim), -np.eye(self.dim)])
        if self.p == math.inf and self.dim <= _MAX_ENUM_DIM:
            return _sign_patterns(self.dim)
        return None

    def config_string(self) -> str:
        if self.p == 1.0:
            return "l1"
        if self.p == 2.0:
            return "l2"
        if self.p == math.inf:
            return "linf"
        return f"lp:{self.p:g}"

    def __repr__(self) -> str:
        return f"LpNorm(dim={self.dim}, p={self.p:g})"


class WeightedLpNorm(Norm):
    """||v|| = ||diag(w) v||_p with strictly positive weights w."""

    def __init__(self, weights: Sequence[float], p: float):
        w = np.asarray(weights, dtype=float)
        if w.ndim != 1 or w.size < 1:
            raise ValueError("weights must be a nonempty 1-d sequence")
        if np.any(w <= 0):
            bad = int(np.argmin(w))
            raise ValueError(
                f"weight[{bad}] = {w[bad]} is not positive; all weights must be > 0"
            )
        if not (p >= 1.0):
            raise ValueError(f"p-norm requires p >= 1, got {p}")
        self.weights = w
        self.dim = int(w.size)
        self.p = float(p)
        self.smooth = 1.0 < p < math.inf
        self._base = LpNorm(self.dim, self.p)

    def eval(self, v: np.ndarray) -> float:
        v = self._check_dim(v)
        return self._base.eval(self.weights * v)

    def dual_eval(self, y: np.ndarray) -> float:
        y = self._check_dim(y)
        return LpNorm(self.dim, _conjugate(self.p)).eval(y / self.weights)

    def dual(self) -> "WeightedLpNorm":
        return WeightedLpNorm(1.0 / self.weights, _conjugate(self.p))

    def euclidean_factor(self) -> Optional[np.ndarray]:
        return np.diag(self.weights) if self.p == 2.0 else None

    def facet_functionals(self) -> Optional[np.ndarray]:
        if self.p == math.inf:
            eye = np.diag(self.weights)
            return np.vstack([eye, -eye])
        if self.p == 1.0 and self.dim <= _MAX_ENUM_DIM:
            return _sign_patterns(self.dim) * self.weights
        return None

    def unit_ball_vertices(self) -> Optional[np.ndarray]:
        if self.p == 1.0:
            eye = np.diag(1.0 / self.weights)
            return np.vstack([eye, -eye])
        if self.p == math.inf and self.dim <= _MAX_ENUM_DIM:
            return _sign_patterns(self.dim) / self.weights
        return None

    def config_string(self) -> str:
        wtxt = ",".join(f"{w:g}" for w in self.weights)
        return f"wlp:{wtxt}:{self.p:g}"

    def __repr__(self) -> str:
        return f"WeightedLpNorm(weights={self.weights.tolist()}, p={self.p:g})"


class PolyhedralNorm(Norm):
    """Gauge of the convex hull of a symmetric, spanning vertex set.

    ``eval`` is the exact maximum over the facet functionals of the hull
    (computed once via the convex hull of the vertices); ``dual_eval`` is the
    exact maximum of <y, V_i> over the vertices.  The dual norm's unit ball
    is the polar polytope, whose vertices are this ball's facet functionals.
    """

    def __init__(self, vertices: np.ndarray, _facets: Optional[np.ndarray] = None):
        V = np.asarray(vertices, dtype=float)
        if V.ndim != 2 or V.shape[0] < 2:
            raise ValueError("vertices must be a (k, n) array with k >= 2")
        self.dim = int(V.shape[1])
        if np.linalg.matrix_rank(V) < self.dim:
            raise ValueError(
                f"polyhedral vertex set does not span R^{self.dim}; "
                "the gauge would be infinite off its span"
            )
        for i, vert in enumerate(V):
            gap = np.min(np.linalg.norm(V + vert, axis=1))
            if gap > 1e-12 * max(1.0, float(np.linalg.norm(vert))):
                raise ValueError(
                    f"vertex {vert.tolist()} (row {i}) has no mirror image: "
                    "a norm's unit ball must be symmetric"
                )
        self.vertices = V
        self.smooth = False
        self._facets_arr = (
            np.asarray(_facets, dtype=float) if _facets is not None else None
        )

    def _facets(self) -> np.ndarray:
        if self._facets_arr is None:
            if self.dim == 1:
                a = float(np.max(np.abs(self.vertices)))
                self._facets_arr = np.array([[1.0 / a], [-1.0 / a]])
            else:
                from scipy.spatial import ConvexHull

                hull = ConvexHull(self.vertices)
                # rows of hull.equations are [a, b] with a.x + b <= 0 inside;
                # 0 interior => b < 0, so the gauge facet is a / (-b).
                eqs = hull.equations
                self._facets_arr = eqs[:, :-1] / (-eqs[:, -1:])
        return self._facets_arr

    def eval(self, v: np.ndarray) -> float:
        v = self._check_dim(v)
        return float(max(np.max(self._facets() @ v), 0.0))

    def dual_eval(self, y: np.ndarray) -> float:
        y = self._check_dim(y)
        return float(max(np.max(self.vertices @ y), 0.0))

    def dual(self) -> "PolyhedralNorm":
        # polar duality: facets <-> vertices
        return PolyhedralNorm(self._facets(), _facets=self.vertices)

    def facet_functionals(self) -> np.ndarray:
        return self._facets()

    def unit_ball_vertices(self) -> np.ndarray:
        return self.vertices

    def config_string(self) -> str:
        vtxt = ";".join(",".join(f"{c:g}" for c in vert) for vert in self.vertices)
        return f"poly:{vtxt}"

    def __repr__(self) -> str:
        return f"PolyhedralNorm({self.vertices.shape[0]} vertices in R^{self.dim})"


class MappedNorm(Norm):
    """||v|| = base(A v) for an invertible matrix A (a pullback norm)."""

    def __init__(self, base: Norm, matrix: np.ndarray):
        A = np.asarray(matrix, dtype=float)
        if A.shape != (base.dim, base.dim):
            raise ValueError(
                f"mapping matrix shape {A.shape} does not match base norm on "
                f"R^{base.dim}"
            )
        if abs(np.linalg.det(A)) < 1e-300:
            raise ValueError("mapping matrix is singular; pullback is not a norm")
        self.base = base
        self.matrix = A
        self._inv_T = np.linalg.inv(A).T
        self.dim = base.dim
        self.smooth = base.smooth

    def eval(self, v: np.ndarray) -> float:
        v = self._check_dim(v)
        return self.base.eval(self.matrix @ v)

    def dual_eval(self, y: np.ndarray) -> float:
        y = self._check_dim(y)
        return self.base.dual_eval(self._inv_T @ y)

    def dual(self) -> "MappedNorm":
        return MappedNorm(self.base.dual(), self._inv_T)

    def euclidean_factor(self) -> Optional[np.ndarray]:
        F = self.base.euclidean_factor()
        return None if F is None else F @ self.matrix

    def facet_functionals(self) -> Optional[np.ndarray]:
        F = self.base.facet_functionals()
        return None if F is None else F @ self.matrix

    def unit_ball_vertices(self) -> Optional[np.ndarray]:
        # ball = A^{-1} (base ball), so each vertex row becomes A^{-1} v
        V = self.base.unit_ball_vertices()
        return None if V is None else V @ self._inv_T

    def config_string(self) -> str:
        raise ValueError("mapped norms have no flat config string")

    def __repr__(self) -> str:
        return f"MappedNorm(base={self.base!r})"


def _conjugate(p: float) -> float:
    if p == 1.0:
        return math.inf
    if p == math.inf:
        return 1.0
    return p / (p - 1.0)


def parse_norm(text: str, dim: int) -> Norm:
    """Build a norm from a config string.

    Accepted forms: ``l1`` | ``l2`` | ``linf`` | ``lp:<p>`` |
    ``wlp:<w1,...,wn>:<p>`` | ``poly:<x,y;x,y;...>`` (vertex list).
    """
    text = text.strip()
    if text in ("l1", "l2", "linf"):
        p = {"l1": 1.0, "l2": 2.0, "linf": math.inf}[text]
        return LpNorm(dim, p)
    if text.startswith("lp:"):
        return LpNorm(dim, _parse_exponent(text[3:], text))
    if text.startswith("wlp:"):
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(
                f"bad weighted norm {text!r}; expected wlp:<w1,...,wn>:<p>"
            )
        weights = _parse_floats(parts[1], text)
        if len(weights) != dim:
            raise ValueError(
                f"norm {text!r} has {len(weights)} weights but the space has "
                f"dimension {dim}"
            )
        return WeightedLpNorm(weights, _parse_exponent(parts[2], text))
    if text.startswith("poly:"):
        rows = [_parse_floats(chunk, text) for chunk in text[5:].split(";") if chunk]
        if not rows:
            raise ValueError(f"norm {text!r} lists no vertices")
        widths = {len(r) for r in rows}
        if widths != {dim}:
            raise ValueError(
                f"norm {text!r} has vertices of dimension {sorted(widths)} but "
                f"the space has dimension {dim}"
            )
        return PolyhedralNorm(np.array(rows))
    raise ValueError(
        f"unknown norm spec {text!r}; expected l1, l2, linf, lp:<p>, "
        "wlp:<weights>:<p>, or poly:<vertices>"
    )


def _parse_exponent(chunk: str, whole: str) -> float:
    try:
        p = math.inf if chunk.strip() in ("inf", "Inf") else float(chunk)
    except ValueError as exc:
        raise ValueError(f"bad exponent {chunk!r} in norm spec {whole!r}") from exc
    return p


def _parse_floats(chunk: str, whole: str) -> list[float]:
    try:
        return [float(c) for c in chunk.split(",")]
    except ValueError as exc:
        raise ValueError(f"bad number list {chunk!r} in norm spec {whole!r}") from exc


def sample_unit_sphere(
    norm: Norm, count: int, seed: int, dual: bool = False
) -> np.ndarray:
    """Deterministic points on the unit sphere of ``norm`` (or its dual).

    The first ``2*dim`` points are the normalized signed basis directions
    e_1, -e_1, e_2, -e_2, ...; the rest are seeded Gaussian directions
    rescaled to the sphere.  The sequence for a given seed is prefix-stable:
    asking for more points never changes the points already produced.
    """
    if count < 0:
        raise ValueError(f"sample count must be >= 0, got {count}")
    n = norm.dim
    length = norm.dual_eval if dual else norm.eval
    points = []
    for i in range(n):
        for s in (1.0, -1.0):
            if len(points) >= count:
                break
            e = np.zeros(n)
            e[i] = s
            points.append(e / length(e))
    rng = np.random.default_rng(seed)
    while len(points) < count:
        g = rng.standard_normal(n)
        ln = length(g)
        if ln > 1e-12:
            points.append(g / ln)
    return np.array(points).reshape(count, n)
