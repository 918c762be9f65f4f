"""Linear operators between normed spaces and their regularity rates.

For T : (R^n, N_in) -> (R^m, N_out) the two quantities of interest are

    banach_constant(T)      = inf { N_in*(T^T y) : N_out*(y) = 1 }
    dual_banach_constant(T) = inf { N_out(T u)   : N_in(u)   = 1 }

The first is positive exactly when T is onto and equals the rate at which
T carries balls onto balls: T(B_in) contains banach_constant(T) * B_out.
The second is positive exactly when T is injective with closed range.  For
an isomorphism both agree and equal 1 / ||T^{-1}||.

Three computation routes, tried in order:

* exact-by-SVD when both norms are inner-product norms (possibly rescaled);
* exact vertex enumeration when the relevant unit balls are polytopes in
  dimension <= 8 (the minimum of a norm h over the unit sphere of g equals
  1 / max { g(w) : w vertex of the polytope {h <= 1} });
* seeded multi-start projected descent over the relevant sphere otherwise.
  The sampled route never returns more than the best candidate it touched,
  so refining the sample can only lower the answer.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .norms import MappedNorm, Norm, sample_unit_sphere

__all__ = [
    "LinOp",
    "banach_constant",
    "dual_banach_constant",
    "regularity_modulus",
    "transport_operator",
]

# largest dimension for which the polyhedral exact route enumerates vertices
_POLY_EXACT_DIM = 8
# rank decisions below this relative singular-value threshold return exact 0
_RANK_RTOL = 1e-12


@dataclass(frozen=True)
class LinOp:
    """A matrix together with the norms of its domain and codomain."""

    matrix: np.ndarray
    norm_in: Norm
    norm_out: Norm

    def __post_init__(self):
        M = np.asarray(self.matrix, dtype=float)
        object.__setattr__(self, "matrix", M)
        if M.ndim != 2:
            raise ValueError(f"operator matrix must be 2-d, got shape {M.shape}")
        m, n = M.shape
        if self.norm_in.dim != n:
            raise ValueError(
                f"matrix has {n} columns but the domain norm lives on "
                f"R^{self.norm_in.dim}"
            )
        if self.norm_out.dim != m:
            raise ValueError(
                f"matrix has {m} rows but the codomain norm lives on "
                f"R^{self.norm_out.dim}"
            )

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    def apply(self, v: np.ndarray) -> np.ndarray:
        return self.matrix @ v

    def matrix_rows(self) -> list[list[float]]:
        """Row-major nested lists, the form used in JSON reports."""
        return [[float(x) for x in row] for row in self.matrix]


def _rank(M: np.ndarray) -> int:
    s = np.linalg.svd(M, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > s[0] * _RANK_RTOL))


def banach_constant(T: LinOp, sphere_count: int = 200, seed: int = 0) -> float:
    """Surjection rate of T; exactly 0.0 whenever T is not onto."""
    m, n = T.shape
    if _rank(T.matrix) < m:
        return 0.0
    exact = _euclidean_exact(T, dual_side=False)
    if exact is not None:
        return exact
    exact = _polyhedral_exact(
        objective_functionals=_dual_in_functionals(T),
        matrix_T=T.matrix.T,
        sphere_norm_eval=T.norm_out.dual_eval,
        sphere_dim=m,
    )
    if exact is not None:
        return exact
    return _sampled_min(
        objective=lambda y: T.norm_in.dual_eval(T.matrix.T @ y),
        sphere_norm=T.norm_out,
        dual_sphere=True,
        dim=m,
        sphere_count=sphere_count,
        seed=seed,
    )


def dual_banach_constant(T: LinOp, sphere_count: int = 200, seed: int = 0) -> float:
    """Injection rate of T; exactly 0.0 whenever T has a kernel."""
    m, n = T.shape
    if _rank(T.matrix) < n:
        return 0.0
    exact = _euclidean_exact(T, dual_side=True)
    if exact is not None:
        return exact
    exact = _polyhedral_exact(
        objective_functionals=T.norm_out.facet_functionals(),
        matrix_T=T.matrix,
        sphere_norm_eval=T.norm_in.eval,
        sphere_dim=n,
    )
    if exact is not None:
        return exact
    return _sampled_min(
        objective=lambda u: T.norm_out.eval(T.matrix @ u),
        sphere_norm=T.norm_in,
        dual_sphere=False,
        dim=n,
        sphere_count=sphere_count,
        seed=seed,
    )


def regularity_modulus(T: LinOp, **kw) -> float:
    """1 / banach_constant(T) (inf when the rate is 0): the sharp local bound
    on how far preimages move per unit of target motion."""
    c = banach_constant(T, **kw)
    return float("inf") if c == 0.0 else 1.0 / c


# ---------------------------------------------------------------------------
# exact routes


def _euclidean_exact(T: LinOp, dual_side: bool) -> Optional[float]:
    F_in = T.norm_in.euclidean_factor()
    F_out = T.norm_out.euclidean_factor()
    if F_in is None or F_out is None:
        return None
    M = F_out @ T.matrix @ np.linalg.inv(F_in)
    m, n = M.shape
    if dual_side:
        if n > m:
            return 0.0
    else:
        if m > n:
            return 0.0
    s = np.linalg.svd(M, compute_uv=False)
    return float(s[-1])


def _dual_in_functionals(T: LinOp) -> Optional[np.ndarray]:
    # facets of the dual-domain norm; exact for l1/linf/weighted/polyhedral
    try:
        return T.norm_in.dual().facet_functionals()
    except (ValueError, NotImplementedError):
        return None


def _polyhedral_exact(
    objective_functionals: Optional[np.ndarray],
    matrix_T: np.ndarray,
    sphere_norm_eval,
    sphere_dim: int,
) -> Optional[float]:
    """min over the g-sphere of h, where h(w) = max_j <a_j, M w>.

    Equals 1 / max { g(w) : w a vertex of the polytope { h <= 1 } }.  The
    polytope's facets are <M^T a_j, w> <= 1; its vertices come from the
    halfspace-intersection dual.  Only used when h is a genuine norm (full
    rank was checked by the caller) in small dimension.
    """
    if objective_functionals is None or sphere_dim > _POLY_EXACT_DIM:
        return None
    C = objective_functionals @ matrix_T  # rows: functionals acting on w
    if sphere_dim == 1:
        h = float(np.max(np.abs(C)))
        return h / sphere_norm_eval(np.ones(1))
    from scipy.spatial import HalfspaceIntersection

    halfspaces = np.hstack([C, -np.ones((C.shape[0], 1))])
    try:
        hs = HalfspaceIntersection(halfspaces, np.zeros(sphere_dim))
    except Exception:
        return None
    best = max(sphere_norm_eval(w) for w in hs.intersections)
    return 1.0 / best


# ---------------------------------------------------------------------------
# sampled route


def _sampled_min(
    objective,
    sphere_norm: Norm,
    dual_sphere: bool,
    dim: int,
    sphere_count: int,
    seed: int,
    restarts: int = 20,
    iters: int = 50,
) -> float:
    length = sphere_norm.dual_eval if dual_sphere else sphere_norm.eval
    candidates = sample_unit_sphere(sphere_norm, sphere_count, seed, dual=dual_sphere)
    values = np.array([objective(y) for y in candidates])
    best = float(np.min(values))
    order = np.argsort(values)
    h = 1e-6
    for idx in order[:restarts]:
        y = candidates[idx].copy()
        val = values[idx]
        step = 0.1
        for _ in range(iters):
            grad = np.zeros(dim)
            for k in range(dim):
                e = np.zeros(dim)
                e[k] = h
                grad[k] = (objective(y + e) - objective(y - e)) / (2 * h)
            gn = np.linalg.norm(grad)
            if gn < 1e-14:
                break
            trial = y - step * grad / gn
            ln = length(trial)
            if ln < 1e-12:
                break
            trial /= ln
            tval = objective(trial)
            if tval < val:
                y, val = trial, tval
                best = min(best, val)
            else:
                step *= 0.5
                if step < 1e-10:
                    break
    return max(best, 0.0)


# ---------------------------------------------------------------------------
# transport between coordinate systems


def transport_operator(
    T: LinOp,
    dphi_inv: np.ndarray,
    dpsi_inv: np.ndarray,
    eps_iso: float = 1e-8,
) -> LinOp:
    """Conjugate a coordinate-system operator by chart derivatives.

    ``dphi_inv`` and ``dpsi_inv`` are the derivatives of the inverse input /
    output charts, carrying coordinate tangents to intrinsic tangents.  The
    result is the operator

        dpsi_inv @ T @ dphi_inv^{-1}

    whose domain and codomain norms are the originals seen through the same
    change of variables.  Both regularity rates are invariant under this
    conjugation by construction (the change of variables is an isometry), so
    rates may be computed in whichever coordinates are cheapest.
    """
    A = np.asarray(dphi_inv, dtype=float)
    B = np.asarray(dpsi_inv, dtype=float)
    _require_invertible(A, "input-chart derivative dphi_inv", eps_iso)
    _require_invertible(B, "output-chart derivative dpsi_inv", eps_iso)
    A_inv = np.linalg.inv(A)
    B_inv = np.linalg.inv(B)
    return LinOp(
        matrix=B @ T.matrix @ A_inv,
        norm_in=MappedNorm(T.norm_in, A_inv),
        norm_out=MappedNorm(T.norm_out, B_inv),
    )


def _require_invertible(M: np.ndarray, what: str, eps_iso: float) -> None:
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"{what} must be square, got shape {M.shape}")
    s = np.linalg.svd(M, compute_uv=False)
    if s.size == 0 or s[-1] <= eps_iso * max(1.0, s[0]):
        raise ValueError(
            f"{what} is singular to tolerance {eps_iso:g} "
            f"(smallest singular value {0.0 if s.size == 0 else s[-1]:.3e})"
        )
