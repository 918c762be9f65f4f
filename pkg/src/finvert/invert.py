"""Local and global inverse computation by damped Newton and path lifting.

``local_invert`` runs a trust-region damped Newton iteration whose model
operator is the nearest member of a freshly sampled derivative cloud at the
current iterate, so kinks are handled by whichever smooth piece the iterate
sits on.  ``global_invert`` lifts a target-space path back through the map:
it advances along the path in increments bounded by the locally certified
rate (increment <= step_safety * rate * trust_radius, the budget on which
each Newton solve is guaranteed to stay well-posed), halving on failure and
declaring a lift failure when the increment underflows — which is precisely
the diagnostic that the rate collapsed along the way.

``perturbation_certificate`` covers the combined map sigma(f, g): if the
surjection rate of f beats the Lipschitz rate of g by at least the
reciprocal weight at every sampled point, the combination inherits an
inverse with weight-controlled growth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .certify import (
    CERTIFIED,
    INCONCLUSIVE,
    REFUTED,
    Certificate,
    Weight,
)
from .norms import derive_seed, sample_unit_sphere
from .pseudojac import (
    MapUnderStudy,
    clarke_sample,
    hull_min_constant,
    regularity_index,
    sample_in_ball,
)

__all__ = [
    "NonConvergence",
    "LiftFailure",
    "LiftTrace",
    "Combiner",
    "additive_combiner",
    "check_combiner",
    "local_invert",
    "global_invert",
    "lip_estimate",
    "perturbation_certificate",
]

_DT_UNDERFLOW = 1e-12


class NonConvergence(RuntimeError):
    """Newton failed; carries the best iterate and residual seen."""

    def __init__(self, message: str, best_x: np.ndarray, best_residual: float,
                 iterations: int):
        super().__init__(
            f"{message} (best residual {best_residual:.3e} after "
            f"{iterations} iterations)"
        )
        self.best_x = best_x
        self.best_residual = best_residual
        self.iterations = iterations


class LiftFailure(RuntimeError):
    """Path lifting stalled; carries the trace up to the stall."""

    def __init__(self, message: str, trace: "LiftTrace"):
        super().__init__(message)
        self.trace = trace


@dataclass
class LiftTrace:
    """Step-by-step record of a lift: one row per accepted continuation step."""

    dim: int
    rows: list[dict] = field(default_factory=list)
    success: bool = False
    min_weight_product: Optional[float] = None

    def add(self, t: float, x: np.ndarray, step: float, newton_iters: int,
            index_estimate: float) -> None:
        self.rows.append(
            {
                "t": float(t),
                "x": [float(c) for c in np.atleast_1d(x)],
                "step": float(step),
                "newton_iters": int(newton_iters),
                "index_estimate": float(index_estimate),
            }
        )

    @property
    def t_reached(self) -> float:
        return self.rows[-1]["t"] if self.rows else 0.0

    def final_point(self) -> np.ndarray:
        if not self.rows:
            raise ValueError("empty lift trace has no final point")
        return np.array(self.rows[-1]["x"])

    def csv_text(self) -> str:
        cols = [f"x{i}" for i in range(self.dim)]
        lines = ["t," + ",".join(cols) + ",step,newton_iters,index_estimate"]
        for row in self.rows:
            xs = ",".join(repr(c) for c in row["x"])
            lines.append(
                f"{row['t']!r},{xs},{row['step']!r},{row['newton_iters']}"
                f",{row['index_estimate']!r}"
            )
        return "\n".join(lines) + "\n"


def _model_operator(f: MapUnderStudy, x: np.ndarray, seed: int) -> np.ndarray:
    """Jacobian at the sampled point nearest x (3 jittered probes)."""
    radius = 1e-7 * max(1.0, float(np.linalg.norm(x)))
    S = clarke_sample(f, x, R=radius, count=3, seed=seed)
    dists = [f.norm_in.eval(p - x) for p in S.sample_points]
    return S.ops[int(np.argmin(dists))].matrix


def _newton(
    f: MapUnderStudy,
    x0: np.ndarray,
    y: np.ndarray,
    trust_radius: float,
    tol: float,
    max_iter: int,
    seed: int,
) -> tuple[np.ndarray, int]:
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    x = x0.copy()
    res_vec = y - f.value(x)
    res = f.norm_out.eval(res_vec)
    best_x, best_res = x.copy(), res
    for it in range(max_iter):
        if res <= tol:
            return x, it
        J = _model_operator(f, x, derive_seed(seed, 7, it))
        step, *_ = np.linalg.lstsq(J, res_vec, rcond=None)
        lam = 1.0
        moved = False
        for _ in range(14):
            cand = x + lam * step
            off = f.norm_in.eval(cand - x0)
            if off > trust_radius:
                cand = x0 + (cand - x0) * (trust_radius / off)
            cand_vec = y - f.value(cand)
            cand_res = f.norm_out.eval(cand_vec)
            if cand_res < res * (1.0 - 1e-4 * lam) or cand_res <= tol:
                x, res_vec, res = cand, cand_vec, cand_res
                moved = True
                break
            lam *= 0.5
        if res < best_res:
            best_x, best_res = x.copy(), res
        if not moved:
            raise NonConvergence(
                "damped Newton stalled inside the trust region",
                best_x, best_res, it + 1,
            )
    if res <= tol:
        return x, max_iter
    raise NonConvergence(
        "damped Newton exceeded the iteration budget", best_x, best_res, max_iter
    )


def local_invert(
    f: MapUnderStudy,
    x0: np.ndarray,
    y: np.ndarray,
    trust_radius: float = 1.0,
    tol: float = 1e-10,
    max_iter: int = 50,
    seed: int = 0,
) -> np.ndarray:
    """Solve f(x) = y near x0, never leaving the trust ball around x0."""
    if trust_radius <= 0:
        raise ValueError(f"trust_radius must be positive, got {trust_radius}")
    x, _ = _newton(f, x0, y, trust_radius, tol, max_iter, seed)
    return x


# Interior probe offsets for estimating the variation of a target path over
# a candidate substep.  The endpoint chord alone is blind to closed loops
# (path returns to its start); the irrational offsets prevent any
# integer-frequency loop from aliasing all probes back to the endpoints.
_VARIATION_OFFSETS = (
    0.0,
    1.0 / 7.0,
    0.25,
    1.0 / 3.0,
    0.5,
    1.0 / math.sqrt(2.0),
    0.75,
    1.0 / math.sqrt(1.2),
    1.0,
)


def _path_variation(p, t: float, dt: float, norm_out) -> float:
    """Chord-sum lower bound for the variation of p over [t, t + dt]."""
    pts = [p(t + o * dt) for o in _VARIATION_OFFSETS]
    return float(
        sum(norm_out.eval(b - a) for a, b in zip(pts, pts[1:]))
    )


def global_invert(
    f: MapUnderStudy,
    x0: np.ndarray,
    y: np.ndarray,
    weight: Optional[Weight] = None,
    x_star: Optional[np.ndarray] = None,
    step_safety: float = 0.5,
    tol: float = 1e-8,
    trust_radius: float = 1.0,
    path: Optional[Callable[[float], np.ndarray]] = None,
    seed: int = 0,
    max_steps: int = 20000,
    index_count: int = 8,
) -> tuple[np.ndarray, LiftTrace]:
    """Invert y by lifting a target path from f(x0), rate-bounded steps.

    The default path is the straight segment from f(x0) to y; a callable
    path (with path(0) = f(x0) and path(1) = y) lifts e.g. winding targets.
    When a weight is supplied, the product rate * weight(distance to the
    anchor x_star) is monitored along the lift and its minimum reported in
    the trace: dipping below 1 flags where the weighted covering hypothesis
    failed, without aborting the lift.
    """
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    anchor = x0 if x_star is None else np.atleast_1d(np.asarray(x_star, dtype=float))
    fx0 = f.value(x0)
    if path is None:
        p = lambda t: fx0 + t * (y - fx0)
    else:
        p = lambda t: np.atleast_1d(np.asarray(path(t), dtype=float))
        start_gap = f.norm_out.eval(p(0.0) - fx0)
        if start_gap > 1e-6 * (1.0 + f.norm_out.eval(fx0)):
            raise ValueError(
                f"path(0) misses f(x0) by {start_gap:.3e}; the lift must "
                "start on the image"
            )
        end_gap = f.norm_out.eval(p(1.0) - y)
        if end_gap > 1e-6 * (1.0 + f.norm_out.eval(y)):
            raise ValueError(
                f"path(1) misses the target by {end_gap:.3e}"
            )
    trace = LiftTrace(dim=f.dim_in)
    t, q = 0.0, x0.copy()
    dt = 1.0
    min_wprod = math.inf
    for step_i in range(max_steps):
        if t >= 1.0:
            break
        sub = derive_seed(seed, 11, step_i)
        radius = 1e-3 * max(1.0, float(np.linalg.norm(q)))
        S = clarke_sample(f, q, R=radius, count=index_count, seed=sub)
        # Tall derivatives (curve-like images) have surjection rate zero by
        # dimension count; the injection rate is the modulus that governs
        # tracking a target curve inside the image.
        which = "surjection" if f.dim_in >= f.dim_out else "injection"
        # A coarse hull search suffices here: c_hat only sizes the next
        # step, and any inaccuracy is absorbed by the halving retry loop.
        c_hat, _ = hull_min_constant(
            S, which=which, seed=sub, restarts=4, sphere_count=16
        )
        if weight is not None:
            wprod = c_hat * weight.omega(f.norm_in.eval(q - anchor))
            min_wprod = min(min_wprod, wprod)
        cap = step_safety * c_hat * trust_radius
        dt = min(2.0 * dt, 1.0 - t)
        while dt > _DT_UNDERFLOW and _path_variation(p, t, dt, f.norm_out) > cap:
            dt *= 0.5
        accepted = False
        while dt > _DT_UNDERFLOW:
            try:
                q_next, iters = _newton(
                    f, q, p(t + dt), trust_radius, min(tol, 1e-9), 30,
                    derive_seed(seed, 13, step_i),
                )
            except NonConvergence:
                dt *= 0.5
                continue
            inc = f.norm_out.eval(p(t + dt) - p(t))
            t, q = t + dt, q_next
            trace.add(t, q, inc, iters, c_hat)
            accepted = True
            break
        if not accepted:
            trace.min_weight_product = None if weight is None else float(min_wprod)
            raise LiftFailure(
                f"lift step underflowed at t = {t:.6f} (local rate "
                f"estimate {c_hat:.3e}); the rate collapsed along the path",
                trace,
            )
    else:
        trace.min_weight_product = None if weight is None else float(min_wprod)
        raise LiftFailure(f"lift exceeded {max_steps} steps", trace)
    x_final, iters = _newton(
        f, q, p(1.0), trust_radius, tol, 60, derive_seed(seed, 17)
    )
    trace.add(1.0, x_final, 0.0, iters, trace.rows[-1]["index_estimate"] if trace.rows else 0.0)
    trace.success = True
    trace.min_weight_product = None if weight is None else float(min_wprod)
    return x_final, trace


def lip_estimate(
    g: MapUnderStudy,
    x: np.ndarray,
    R_schedule: Sequence[float] = (0.5, 0.1, 0.02),
    pair_count: int = 200,
    seed: int = 0,
) -> float:
    """Local Lipschitz rate of g at x, sampled from below.

    For each radius, the largest displacement ratio over sampled pairs
    (random pairs in the ball plus short directional chords); the radius
    schedule then takes the smallest, matching the local definition.  This
    under-estimates the true rate — consumers guard accordingly.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    dirs = sample_unit_sphere(
        g.norm_in, max(2 * g.dim_in, 120), derive_seed(seed, 1)
    )
    best_over_R = math.inf
    for Ri, R in enumerate(R_schedule):
        rng = np.random.default_rng(derive_seed(seed, 2, Ri))
        worst = 0.0
        delta = 1e-3 * R
        gx = g.value(x)
        for d in dirs:
            ratio = g.norm_out.eval(g.value(x + delta * d) - gx) / delta
            worst = max(worst, ratio)
        pts = sample_in_ball(g.norm_in, x, R, pair_count, rng)
        for i in range(pair_count // 2):
            u, up = pts[2 * i], pts[2 * i + 1]
            sep = g.norm_in.eval(u - up)
            if sep < 1e-14:
                continue
            worst = max(worst, g.norm_out.eval(g.value(u) - g.value(up)) / sep)
        best_over_R = min(best_over_R, worst)
    return float(best_over_R)


# ---------------------------------------------------------------------------
# combiners and perturbation


@dataclass(frozen=True)
class Combiner:
    """A way of merging two target points into one (e.g. addition)."""

    name: str
    apply: Callable[[np.ndarray, np.ndarray], np.ndarray]


def additive_combiner() -> Combiner:
    return Combiner(name="add", apply=lambda y, z: np.asarray(y) + np.asarray(z))


def check_combiner(
    sigma: Combiner,
    norm,
    samples: int = 40,
    scale: float = 1.0,
    seed: int = 0,
    sym_tol: float = 1e-10,
    iso_rel_tol: float = 1e-6,
) -> tuple[bool, dict]:
    """Verify combiner symmetry and first-slot isometry on random samples."""
    rng = np.random.default_rng(seed)
    worst_sym, worst_iso = 0.0, 0.0
    for _ in range(samples):
        y = scale * rng.standard_normal(norm.dim)
        yp = scale * rng.standard_normal(norm.dim)
        z = scale * rng.standard_normal(norm.dim)
        sym = norm.eval(
            np.asarray(sigma.apply(y, z)) - np.asarray(sigma.apply(z, y))
        ) / max(1.0, scale)
        sep = norm.eval(y - yp)
        iso = abs(
            norm.eval(np.asarray(sigma.apply(y, z)) - np.asarray(sigma.apply(yp, z)))
            - sep
        ) / max(sep, 1e-12)
        worst_sym = max(worst_sym, sym)
        worst_iso = max(worst_iso, iso)
    ok = worst_sym <= sym_tol and worst_iso <= iso_rel_tol
    return ok, {
        "worst_symmetry_defect": worst_sym,
        "worst_isometry_defect": worst_iso,
        "samples": samples,
        "sym_tol": sym_tol,
        "iso_rel_tol": iso_rel_tol,
    }


def perturbation_certificate(
    f: MapUnderStudy,
    g: MapUnderStudy,
    sigma: Combiner,
    omega: Weight,
    x_star: Optional[np.ndarray] = None,
    sample_schedule: Sequence[float] = (0.5, 1.0, 2.0),
    per_radius: int = 6,
    seed: int = 0,
    margin_guard: float = 0.1,
    margin_slack: float = 5e-3,
    pair_count: int = 8,
    r_check: Optional[float] = None,
) -> Certificate:
    """Certify invertibility of sigma(f, g) by rate-versus-rate margins.

    At sampled points the surjection rate of f must beat the Lipschitz rate
    of g by at least 1/omega(distance to the anchor).  The verdict uses the
    raw sampled margin with a small slack (the hypothesis is routinely
    tight, e.g. at equality); the guarded margin, with the Lipschitz
    estimate inflated by ``margin_guard`` against its sampling bias, is
    reported alongside and flagged when it dips negative.  Margins that
    pass are then stress-tested constructively: sampled targets near the
    combined image are inverted by path lifting and inverse pair ratios
    are compared against the weight bound.
    """
    if f.dim_in != g.dim_in or f.dim_out != g.dim_out:
        raise ValueError(
            f"maps {f.name!r} and {g.name!r} must share dimensions to combine"
        )
    anchor = (
        np.zeros(f.dim_in)
        if x_star is None
        else np.atleast_1d(np.asarray(x_star, dtype=float))
    )
    provenance = {
        "seed": seed,
        "sample_schedule": list(sample_schedule),
        "per_radius": per_radius,
        "margin_guard": margin_guard,
        "margin_slack": margin_slack,
        "weight": {"breakpoints": omega.breakpoints, "values": omega.values},
        "combiner": sigma.name,
    }
    scale = 1.0 + float(
        f.norm_out.eval(f.value(anchor)) + g.norm_out.eval(g.value(anchor))
    )
    sigma_ok, sigma_report = check_combiner(
        sigma, f.norm_out, scale=scale, seed=derive_seed(seed, 1)
    )
    tags = ["Thm 7.1"]
    if sigma.name == "add":
        tags.append("Cor 7.2")
    if not sigma_ok:
        return Certificate(
            operation="perturbation",
            verdict=REFUTED,
            theorem_tags=tags,
            numbers={},
            witnesses={"combiner_report": sigma_report},
            hypotheses_checked=["combiner symmetry and first-slot isometry"],
            provenance=provenance,
        )

    F = _combined_map(f, g, sigma)

    pts = [anchor]
    for ri, radius in enumerate(sample_schedule):
        rng = np.random.default_rng(derive_seed(seed, 2, ri))
        pts += list(sample_in_ball(f.norm_in, anchor, radius, per_radius, rng))
    worst_raw = math.inf
    worst_guarded = math.inf
    witness_pt = None
    identity_like = f.dim_in == f.dim_out
    for pi, pt in enumerate(pts):
        pt = np.asarray(pt)
        c, _ = regularity_index(
            f, pt, R_schedule=(0.1, 0.02), count=24, seed=derive_seed(seed, 3, pi)
        )
        lip = lip_estimate(
            g, pt, R_schedule=(0.1, 0.02), pair_count=100,
            seed=derive_seed(seed, 4, pi),
        )
        need = 1.0 / omega.omega(f.norm_in.eval(pt - anchor))
        raw = c - lip - need
        guarded = c - lip * (1.0 + margin_guard) - need
        if raw < worst_raw:
            worst_raw, witness_pt = raw, pt
        worst_guarded = min(worst_guarded, guarded)
        if identity_like and np.linalg.norm(f.value(pt) - pt) > 1e-12 * (
            1.0 + np.linalg.norm(pt)
        ):
            identity_like = False
    if identity_like and sigma.name == "add":
        tags.append("Cor 7.3")
    numbers = {
        "worst_margin_raw": worst_raw,
        "worst_margin_guarded": worst_guarded,
        "margin_guard": margin_guard,
        "guard_satisfied": worst_guarded >= -margin_slack,
        "sample_points": len(pts),
    }
    if worst_raw < -margin_slack:
        return Certificate(
            operation="perturbation",
            verdict=REFUTED,
            theorem_tags=tags,
            numbers=numbers,
            witnesses={
                "margin_point": witness_pt,
                "margin": worst_raw,
            },
            hypotheses_checked=[
                "combiner symmetry and first-slot isometry",
                "rate of f minus rate of g exceeds the reciprocal weight",
            ],
            provenance=provenance,
        )

    r_max = float(max(sample_schedule) if r_check is None else r_check)
    varrho = omega.integral_inverse(r_max)
    numbers["r_check"] = r_max
    numbers["varrho"] = varrho
    F_anchor = F.value(anchor)
    rng = np.random.default_rng(derive_seed(seed, 5))
    targets = list(
        sample_in_ball(F.norm_out, F_anchor, 0.9 * varrho, 2 * pair_count, rng)
    )
    sols = []
    try:
        for ti, yt in enumerate(targets):
            sol, _ = global_invert(
                F, anchor, np.asarray(yt), tol=1e-9, seed=derive_seed(seed, 6, ti)
            )
            sols.append(sol)
    except (LiftFailure, NonConvergence) as exc:
        return Certificate(
            operation="perturbation",
            verdict=INCONCLUSIVE,
            theorem_tags=tags,
            numbers=numbers,
            witnesses={"failed_target": targets[len(sols)], "solver_message": str(exc)},
            hypotheses_checked=[
                "combiner symmetry and first-slot isometry",
                "rate of f minus rate of g exceeds the reciprocal weight",
            ],
            provenance=provenance,
        )
    worst_excess = 0.0
    for i in range(pair_count):
        y1, y2 = targets[2 * i], targets[2 * i + 1]
        x1, x2 = sols[2 * i], sols[2 * i + 1]
        sep = F.norm_out.eval(np.asarray(y1) - np.asarray(y2))
        if sep < 1e-12:
            continue
        ratio = F.norm_in.eval(x1 - x2) / sep
        bound = omega.omega(
            max(F.norm_in.eval(x1 - anchor), F.norm_in.eval(x2 - anchor))
        )
        worst_excess = max(worst_excess, ratio / bound)
    numbers["worst_inverse_ratio_vs_bound"] = worst_excess
    ok = worst_excess <= 1.0 + 5e-2
    return Certificate(
        operation="perturbation",
        verdict=CERTIFIED if ok else REFUTED,
        theorem_tags=tags,
        numbers=numbers,
        witnesses={} if ok else {"ratio_excess": worst_excess},
        hypotheses_checked=[
            "combiner symmetry and first-slot isometry",
            "rate of f minus rate of g exceeds the reciprocal weight",
            "inverse pair ratios respect the weight bound",
        ],
        hypotheses_asserted=[
            "margins sampled on the schedule hold everywhere",
        ],
        provenance=provenance,
    )


def _combined_map(f: MapUnderStudy, g: MapUnderStudy, sigma: Combiner) -> MapUnderStudy:
    jac = None
    if sigma.name == "add" and f.jacobian is not None and g.jacobian is not None:
        jac = lambda x: np.asarray(f.jacobian(x)) + np.asarray(g.jacobian(x))
    return MapUnderStudy(
        name=f"{sigma.name}({f.name},{g.name})",
        dim_in=f.dim_in,
        dim_out=f.dim_out,
        eval=lambda x: np.asarray(sigma.apply(f.value(x), g.value(x))),
        jacobian=jac,
        norm_in=f.norm_in,
        norm_out=f.norm_out,
    )
