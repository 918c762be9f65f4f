"""Sampled generalized Jacobians and their regularity indices.

A locally Lipschitz map is differentiable almost everywhere, so the
derivative cloud collected at random points near x captures (up to
sampling) the convex set of limiting Jacobians at x.  Two scalar indices
summarize how invertible that cloud is:

    regularity_index   = sup_R  min over the hull of surjection rates
    injectivity_index  = sup_R  min over the hull of injection rates

Positive indices certify, respectively, that targets near f(x) are covered
at a definite rate and that f cannot collapse nearby points together.  The
sup over the shrinking radius schedule is monotone because the hull can
only lose members as the ball shrinks.

The defining inequality for a candidate derivative set S at x reads: for
every functional y* and direction v, the upper one-sided derivative of
t |-> <y*, f(x + t v)> at 0+ is at most max_{T in S} <y*, T v>.
``check_pseudojacobian`` tests it on sampled functional/direction pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .linop import LinOp, banach_constant, dual_banach_constant
from .norms import LpNorm, Norm, derive_seed, sample_unit_sphere

__all__ = [
    "MapUnderStudy",
    "OperatorSet",
    "HullPoint",
    "PseudoJacobianReport",
    "clarke_sample",
    "check_pseudojacobian",
    "hull_min_constant",
    "regularity_index",
    "injectivity_index",
]

_EPS_CBRT = float(np.cbrt(np.finfo(float).eps))
# relative jitter applied to ball samples so that kink loci of measure zero
# are avoided almost surely
_JITTER = 1e-6


@dataclass
class MapUnderStudy:
    """A locally Lipschitz map f : R^dim_in -> R^dim_out under fixed norms.

    ``jacobian``, when given, must return the (dim_out, dim_in) derivative
    matrix at points where f is differentiable (almost every point); when
    absent, central finite differences are used.
    """

    name: str
    dim_in: int
    dim_out: int
    eval: Callable[[np.ndarray], np.ndarray]
    jacobian: Optional[Callable[[np.ndarray], np.ndarray]] = None
    norm_in: Norm = None
    norm_out: Norm = None
    lipschitz_hint: Optional[float] = None
    domain_box: Optional[tuple[np.ndarray, np.ndarray]] = None

    def __post_init__(self):
        if self.norm_in is None:
            self.norm_in = LpNorm(self.dim_in, 2)
        if self.norm_out is None:
            self.norm_out = LpNorm(self.dim_out, 2)
        if self.norm_in.dim != self.dim_in:
            raise ValueError(
                f"map {self.name!r}: domain norm lives on R^{self.norm_in.dim} "
                f"but dim_in = {self.dim_in}"
            )
        if self.norm_out.dim != self.dim_out:
            raise ValueError(
                f"map {self.name!r}: codomain norm lives on R^{self.norm_out.dim} "
                f"but dim_out = {self.dim_out}"
            )

    def value(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.atleast_1d(np.asarray(self.eval(x), dtype=float))
        if out.shape != (self.dim_out,):
            raise ValueError(
                f"map {self.name!r} returned shape {out.shape}, "
                f"expected ({self.dim_out},)"
            )
        return out

    def jacobian_at(self, x: np.ndarray, fd_step: Optional[float] = None) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if self.jacobian is not None:
            J = np.asarray(self.jacobian(x), dtype=float)
            return J.reshape(self.dim_out, self.dim_in)
        h = fd_step if fd_step is not None else default_fd_step(x)
        J = np.empty((self.dim_out, self.dim_in))
        for j in range(self.dim_in):
            e = np.zeros(self.dim_in)
            e[j] = h
            J[:, j] = (self.value(x + e) - self.value(x - e)) / (2 * h)
        return J

    def with_norms(self, norm_in: Norm, norm_out: Norm) -> "MapUnderStudy":
        return MapUnderStudy(
            name=self.name,
            dim_in=self.dim_in,
            dim_out=self.dim_out,
            eval=self.eval,
            jacobian=self.jacobian,
            norm_in=norm_in,
            norm_out=norm_out,
            lipschitz_hint=self.lipschitz_hint,
            domain_box=self.domain_box,
        )


def default_fd_step(x: np.ndarray) -> float:
    return _EPS_CBRT * max(1.0, float(np.linalg.norm(np.atleast_1d(x))))


@dataclass
class OperatorSet:
    """Derivative cloud sampled in a ball: the raw material for the hull."""

    center: np.ndarray
    radius: float
    ops: list[LinOp]
    sample_points: np.ndarray
    seed: int

    def __len__(self) -> int:
        return len(self.ops)

    def matrices(self) -> np.ndarray:
        return np.array([op.matrix for op in self.ops])

    @property
    def norm_in(self) -> Norm:
        return self.ops[0].norm_in

    @property
    def norm_out(self) -> Norm:
        return self.ops[0].norm_out


@dataclass(frozen=True)
class HullPoint:
    """Convex weights selecting a member of the hull of an OperatorSet."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "weights", w)
        if w.ndim != 1 or np.any(w < -1e-12) or abs(w.sum() - 1.0) > 1e-9:
            raise ValueError(
                f"hull weights must be a convex combination, got {w.tolist()}"
            )

    def combine(self, S: OperatorSet) -> LinOp:
        M = np.tensordot(self.weights, S.matrices(), axes=(0, 0))
        return LinOp(M, S.norm_in, S.norm_out)


def sample_in_ball(
    norm: Norm, center: np.ndarray, radius: float, count: int, rng: np.random.Generator
) -> np.ndarray:
    """Points of the ball {d <= radius} around center, jittered slightly."""
    n = norm.dim
    pts = np.empty((count, n))
    for i in range(count):
        d = rng.standard_normal(n)
        ln = norm.eval(d)
        while ln < 1e-12:
            d = rng.standard_normal(n)
            ln = norm.eval(d)
        r = radius * rng.uniform() ** (1.0 / n)
        pts[i] = center + (r / ln) * d + radius * _JITTER * rng.standard_normal(n)
    return pts


def clarke_sample(
    f: MapUnderStudy,
    x: np.ndarray,
    R: float,
    count: int = 40,
    fd_step: Optional[float] = None,
    seed: int = 0,
) -> OperatorSet:
    """Sample Jacobians at ``count`` points of the R-ball around x."""
    if R <= 0:
        raise ValueError(f"sampling radius must be positive, got {R}")
    if count < 1:
        raise ValueError(f"sample count must be >= 1, got {count}")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    rng = np.random.default_rng(seed)
    pts = sample_in_ball(f.norm_in, x, R, count, rng)
    ops = []
    for pt in pts:
        J = f.jacobian_at(pt, fd_step=fd_step)
        if not np.all(np.isfinite(J)):
            raise ValueError(
                f"map {f.name!r}: non-finite derivative at sample point "
                f"{pt.tolist()}"
            )
        ops.append(LinOp(J, f.norm_in, f.norm_out))
    return OperatorSet(center=x, radius=R, ops=ops, sample_points=pts, seed=seed)


@dataclass
class PseudoJacobianReport:
    """Outcome of testing the defining inequality on sampled pairs."""

    passed: bool
    worst_margin: float
    checks: list[dict] = field(default_factory=list)
    violations: list[dict] = field(default_factory=list)


def check_pseudojacobian(
    f: MapUnderStudy,
    x: np.ndarray,
    S: OperatorSet,
    dirs: Optional[np.ndarray] = None,
    functionals: Optional[np.ndarray] = None,
    steps: Optional[Sequence[float]] = None,
    tol: float = 1e-4,
    seed: int = 0,
) -> PseudoJacobianReport:
    """Test whether S dominates the one-sided derivatives of f at x.

    For each pair (y*, v) the upper one-sided derivative of <y*, f(x + t v)>
    is estimated as the max of forward difference quotients over a ladder of
    step sizes, and compared against max_{T in S} <y*, T v>.  A pair whose
    margin (bound minus derivative estimate) drops below -tol is recorded as
    a violation; an empty violation list is a pass.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if dirs is None:
        dirs = sample_unit_sphere(f.norm_in, 2 * f.dim_in + 6, derive_seed(seed, 1))
    if functionals is None:
        functionals = sample_unit_sphere(
            f.norm_out, 2 * f.dim_out + 6, derive_seed(seed, 2), dual=True
        )
    if steps is None:
        scale = max(1.0, float(np.linalg.norm(x)))
        steps = [scale * 10.0 ** (-k) for k in range(2, 8)]
    fx = f.value(x)
    mats = S.matrices()
    checks, violations = [], []
    worst = math.inf
    for y_star in np.atleast_2d(functionals):
        for v in np.atleast_2d(dirs):
            quots = [
                (y_star @ (f.value(x + t * v) - fx)) / t for t in steps
            ]
            dini = float(np.max(quots))
            bound = float(np.max(mats @ v @ y_star)) if mats.ndim == 3 else float(
                np.max([y_star @ (M @ v) for M in mats])
            )
            margin = bound - dini
            rec = {
                "functional": y_star.tolist(),
                "direction": v.tolist(),
                "dini_upper": dini,
                "hull_bound": bound,
                "margin": margin,
            }
            checks.append(rec)
            worst = min(worst, margin)
            if margin < -tol:
                violations.append(rec)
    return PseudoJacobianReport(
        passed=not violations,
        worst_margin=worst,
        checks=checks,
        violations=violations,
    )


def hull_min_constant(
    S: OperatorSet,
    which: str = "surjection",
    restarts: int = 20,
    seed: int = 0,
    sphere_count: int = 64,
) -> tuple[float, HullPoint]:
    """Minimize the chosen rate over the convex hull of the sampled cloud.

    Scalar clouds are handled exactly by interval arithmetic (the hull of
    scalars is an interval, and the rate is proportional to distance from
    0).  Otherwise the minimum over convex weights is approached by
    evaluating all vertices, seeded interior points, and multiplicative-
    weight descent runs from the best starts; the returned value never
    exceeds any candidate evaluated along the way.
    """
    if which not in ("surjection", "injection"):
        raise ValueError(f"which must be 'surjection' or 'injection', got {which!r}")
    k = len(S)
    if k == 0:
        raise ValueError("cannot minimize over the hull of an empty operator set")
    m, n = S.ops[0].shape
    if m == 1 and n == 1:
        return _interval_exact(S, which)

    batch_value = _hull_batch_evaluator(S, which, sphere_count, seed)

    rng = np.random.default_rng(derive_seed(seed, 3))
    cands = np.vstack(
        [np.eye(k), rng.dirichlet(np.ones(k), size=min(4 * k, 120))]
    )
    vals = batch_value(cands)
    best_i = int(np.argmin(vals))
    best_val, best_w = float(vals[best_i]), cands[best_i]

    order = np.argsort(vals)
    h = 1e-6
    eye = np.eye(k)
    for idx in order[:restarts]:
        w = np.maximum(cands[idx], 1e-9)
        w /= w.sum()
        val = float(batch_value(w[None, :])[0])
        eta = 0.5
        for _ in range(50):
            probes = w[None, :] + h * eye
            probes /= probes.sum(axis=1, keepdims=True)
            grad = (batch_value(probes) - val) / h
            trial = w * np.exp(-eta * grad / max(1e-12, np.abs(grad).max()))
            trial /= trial.sum()
            tval = float(batch_value(trial[None, :])[0])
            if tval < val - 1e-14:
                w, val = trial, tval
                if val < best_val:
                    best_val, best_w = val, w.copy()
            else:
                eta *= 0.5
                if eta < 1e-4:
                    break
            if val <= 1e-14:
                break
        if best_val <= 1e-14:
            break
    return max(best_val, 0.0), HullPoint(best_w)


def _hull_batch_evaluator(S: OperatorSet, which: str, sphere_count: int, seed: int):
    """Rate evaluator over batches of hull weights, vectorized when the
    norms reduce to the Euclidean case (then each rate is a smallest
    singular value and whole batches go through one stacked SVD)."""
    mats = S.matrices()
    m, n = S.ops[0].shape
    F_in = S.norm_in.euclidean_factor()
    F_out = S.norm_out.euclidean_factor()
    if F_in is not None and F_out is not None:
        reduced = np.einsum("ab,kbc,cd->kad", F_out, mats, np.linalg.inv(F_in))
        degenerate = (m > n) if which == "surjection" else (n > m)

        def batch_value(W: np.ndarray) -> np.ndarray:
            if degenerate:
                return np.zeros(W.shape[0])
            Ms = np.tensordot(W, reduced, axes=(1, 0))
            s = np.linalg.svd(Ms, compute_uv=False)
            return s[..., -1]

        return batch_value

    rate = banach_constant if which == "surjection" else dual_banach_constant

    def batch_value(W: np.ndarray) -> np.ndarray:
        out = np.empty(W.shape[0])
        for i, w in enumerate(W):
            M = np.tensordot(w, mats, axes=(0, 0))
            out[i] = rate(
                LinOp(M, S.norm_in, S.norm_out), sphere_count=sphere_count, seed=seed
            )
        return out

    return batch_value


def _interval_exact(S: OperatorSet, which: str) -> tuple[float, HullPoint]:
    t = S.matrices().reshape(-1)
    if which == "surjection":
        kappa = S.norm_in.dual_eval(np.ones(1)) / S.norm_out.dual_eval(np.ones(1))
    else:
        kappa = S.norm_out.eval(np.ones(1)) / S.norm_in.eval(np.ones(1))
    i_min, i_max = int(np.argmin(t)), int(np.argmax(t))
    a, b = t[i_min], t[i_max]
    k = len(t)
    if a <= 0.0 <= b:
        w = np.zeros(k)
        if b > a:
            w[i_min] = b / (b - a)
            w[i_max] += 1.0 - b / (b - a)
        else:
            w[i_min] = 1.0
        return 0.0, HullPoint(w)
    j = int(np.argmin(np.abs(t)))
    w = np.zeros(k)
    w[j] = 1.0
    return float(kappa * abs(t[j])), HullPoint(w)


def _index(
    f: MapUnderStudy,
    x: np.ndarray,
    R_schedule: Sequence[float],
    count: int,
    seed: int,
    which: str,
) -> tuple[float, list[dict]]:
    R_schedule = [float(R) for R in R_schedule]
    if not R_schedule or any(R <= 0 for R in R_schedule):
        raise ValueError(f"radius schedule must be positive, got {R_schedule}")
    if any(b >= a for a, b in zip(R_schedule, R_schedule[1:])):
        raise ValueError(
            f"radius schedule must be strictly decreasing, got {R_schedule}"
        )
    table = []
    best = 0.0
    for i, R in enumerate(R_schedule):
        sub_seed = derive_seed(seed, i)
        S = clarke_sample(f, x, R, count=count, seed=sub_seed)
        val, witness = hull_min_constant(S, which=which, seed=sub_seed)
        table.append({"R": R, "value": val, "samples": count})
        best = max(best, val)
    return best, table


def regularity_index(
    f: MapUnderStudy,
    x: np.ndarray,
    R_schedule: Sequence[float] = (0.5, 0.1, 0.02),
    count: int = 40,
    seed: int = 0,
) -> tuple[float, list[dict]]:
    """Best surjection rate of the sampled hull over a shrinking schedule.

    Returns (value, table); the table rows record the rate found at each
    radius, which should be nondecreasing as the radius shrinks (up to
    sampling noise) since smaller balls produce smaller hulls.
    """
    return _index(f, x, R_schedule, count, seed, "surjection")


def injectivity_index(
    f: MapUnderStudy,
    x: np.ndarray,
    R_schedule: Sequence[float] = (0.5, 0.1, 0.02),
    count: int = 40,
    seed: int = 0,
) -> tuple[float, list[dict]]:
    """Best injection rate of the sampled hull over a shrinking schedule."""
    return _index(f, x, R_schedule, count, seed, "injection")
