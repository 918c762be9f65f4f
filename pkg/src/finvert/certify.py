"""Certificates: empirical verdicts about invertibility, with provenance.

Every procedure here returns (or contributes to) a ``Certificate``: a
verdict in {certified, refuted, inconclusive} together with the numbers
that drove it, machine-checkable witnesses, the hypotheses that were
actually tested versus merely asserted, and enough provenance (seeds,
schedules, tolerances) to reproduce the run bit for bit.

The theorem tags attached to certificates are citation keys into the
published inversion theory that the toolkit's claims rest on; the table
below says in plain language what each key stands for.  A certificate
quoting a tag asserts that the *hypotheses* of that result were checked
empirically at the stated tolerances — it is evidence, not proof.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .norms import Norm, derive_seed, sample_unit_sphere
from .linop import LinOp, dual_banach_constant
from .pseudojac import (
    HullPoint,
    MapUnderStudy,
    OperatorSet,
    clarke_sample,
    hull_min_constant,
    injectivity_index,
    regularity_index,
    sample_in_ball,
)

__all__ = [
    "CERTIFIED",
    "REFUTED",
    "INCONCLUSIVE",
    "THEOREM_TAGS",
    "Certificate",
    "Weight",
    "jf_regular_check",
    "dini_lower",
    "injectivity_margin_certificate",
    "cov_estimate_empirical",
    "radial_profile",
    "domain_radius",
    "ball_inclusion_certificate",
    "submersion_check",
    "weighted_covering_check",
    "combine_certificates",
]

CERTIFIED = "certified"
REFUTED = "refuted"
INCONCLUSIVE = "inconclusive"

# Citation keys -> the claim each one certifies.
THEOREM_TAGS = {
    "Prop 4.5": "regularity indices are invariant under change of chart",
    "Thm 4.8": "the hull's surjection rate lower-bounds the covering rate",
    "Thm 5.2": "a positive injection rate forces an expansion margin nearby",
    "Thm 5.4": "a regular derivative hull yields a Lipschitz local inverse",
    "Thm 6.1": "a pointwise-regular map covers its target and lifts paths",
    "Thm 6.3": "weighted rate control extends covering to unbounded regions",
    "Cor 6.5": "a divergent weighted-rate integral gives a global inverse",
    "Rem 6.6": "the integrated rate profile bounds the covered ball radius",
    "Cor 6.7": "a uniform rate alpha covers balls at ratio alpha",
    "Thm 6.8": "global invertibility via rates on compact target sets",
    "Thm 7.1": "rate-minus-perturbation margins certify combined maps",
    "Cor 7.2": "additive perturbations keep a globally Lipschitz inverse",
    "Cor 7.3": "perturbations of the identity below the weight threshold",
}

_VERSION = "finvert 0.1.0"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else repr(f)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


@dataclass
class Certificate:
    """A reproducible verdict with witnesses and provenance."""

    operation: str
    verdict: str
    theorem_tags: list[str] = field(default_factory=list)
    numbers: dict = field(default_factory=dict)
    witnesses: dict = field(default_factory=dict)
    hypotheses_checked: list[str] = field(default_factory=list)
    hypotheses_asserted: list[str] = field(default_factory=list)
    provenance: dict = field(default_factory=dict)
    components: list["Certificate"] = field(default_factory=list)
    timestamp: Optional[str] = None

    def __post_init__(self):
        if self.verdict not in (CERTIFIED, REFUTED, INCONCLUSIVE):
            raise ValueError(f"unknown verdict {self.verdict!r}")
        unknown = [t for t in self.theorem_tags if t not in THEOREM_TAGS]
        if unknown:
            raise ValueError(f"unknown theorem tags {unknown}")

    def tag_meanings(self) -> dict:
        return {t: THEOREM_TAGS[t] for t in self.theorem_tags}

    def to_json_dict(self, include_timestamp: bool = True) -> dict:
        d = {
            "operation": self.operation,
            "verdict": self.verdict,
            "theorem_tags": list(self.theorem_tags),
            "tag_meanings": self.tag_meanings(),
            "numbers": _jsonable(self.numbers),
            "witnesses": _jsonable(self.witnesses),
            "hypotheses_checked": list(self.hypotheses_checked),
            "hypotheses_asserted": list(self.hypotheses_asserted),
            "provenance": _jsonable(self.provenance),
        }
        if self.components:
            d["components"] = [
                c.to_json_dict(include_timestamp=include_timestamp)
                for c in self.components
            ]
        if include_timestamp and self.timestamp is not None:
            d["timestamp"] = self.timestamp
        return d

    def to_json(self, include_timestamp: bool = True) -> str:
        return json.dumps(
            self.to_json_dict(include_timestamp=include_timestamp),
            indent=2,
            sort_keys=True,
        )


def combine_certificates(operation: str, parts: Sequence[Certificate],
                         tags: Optional[Sequence[str]] = None) -> Certificate:
    """Fold component certificates into one report; the weakest verdict wins."""
    if not parts:
        raise ValueError("cannot combine zero certificates")
    rank = {CERTIFIED: 0, INCONCLUSIVE: 1, REFUTED: 2}
    verdict = max((p.verdict for p in parts), key=rank.get)
    seen: list[str] = []
    for p in parts:
        for t in p.theorem_tags:
            if t not in seen:
                seen.append(t)
    numbers = {}
    witnesses = {}
    for p in parts:
        numbers.update({f"{p.operation}.{k}": v for k, v in p.numbers.items()})
        if p.verdict != CERTIFIED and p.witnesses:
            witnesses[p.operation] = p.witnesses
    checked = [h for p in parts for h in p.hypotheses_checked]
    asserted = []
    for p in parts:
        for h in p.hypotheses_asserted:
            if h not in asserted:
                asserted.append(h)
    return Certificate(
        operation=operation,
        verdict=verdict,
        theorem_tags=list(tags) if tags is not None else seen,
        numbers=numbers,
        witnesses=witnesses,
        hypotheses_checked=checked,
        hypotheses_asserted=asserted,
        provenance={"combined_from": [p.operation for p in parts]},
        components=list(parts),
    )


# ---------------------------------------------------------------------------
# step weights


@dataclass(frozen=True)
class Weight:
    """Nondecreasing positive step function of the radius.

    ``breakpoints`` must start at 0 and increase; ``values[j]`` applies on
    [breakpoints[j], breakpoints[j+1]).  The reciprocal integral used by
    growth bounds is computed in closed form segment by segment; with a
    constant tail value the reciprocal integral always diverges, which is
    the hypothesis global statements need.
    """

    breakpoints: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        bp = tuple(float(b) for b in self.breakpoints)
        vals = tuple(float(v) for v in self.values)
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)
        if len(bp) != len(vals) or not bp:
            raise ValueError(
                f"weight needs matching nonempty breakpoints/values, got "
                f"{len(bp)} and {len(vals)}"
            )
        if bp[0] != 0.0:
            raise ValueError(f"weight breakpoints must start at 0, got {bp[0]}")
        if any(b >= c for b, c in zip(bp, bp[1:])):
            raise ValueError(f"weight breakpoints must increase, got {bp}")
        if any(v <= 0 for v in vals):
            raise ValueError(f"weight values must be positive, got {vals}")
        if any(v > w for v, w in zip(vals, vals[1:])):
            raise ValueError(f"weight values must be nondecreasing, got {vals}")

    def omega(self, rho: float) -> float:
        if rho < 0:
            raise ValueError(f"weight evaluated at negative radius {rho}")
        j = int(np.searchsorted(self.breakpoints, rho, side="right")) - 1
        return self.values[j]

    def integral_inverse(self, r: float) -> float:
        """Exact integral of 1/omega over [0, r]."""
        if r < 0:
            raise ValueError(f"integral up to negative radius {r}")
        total = 0.0
        for j, lo in enumerate(self.breakpoints):
            hi = self.breakpoints[j + 1] if j + 1 < len(self.breakpoints) else math.inf
            if lo >= r:
                break
            total += (min(hi, r) - lo) / self.values[j]
        return total

    def tail_diverges(self) -> bool:
        # constant positive tail value => the reciprocal integral diverges
        return True


# ---------------------------------------------------------------------------
# pointwise certificates


def jf_regular_check(
    f: MapUnderStudy,
    x: np.ndarray,
    R_schedule: Sequence[float] = (0.5, 0.1, 0.02),
    count: int = 40,
    seed: int = 0,
    tol: float = 1e-6,
    probe_count: int = 200,
) -> Certificate:
    """Certify that the sampled derivative hull at x is uniformly regular.

    Two things are checked: the surjection-rate index is positive, and no
    probed member of the hull (vertices, random mixtures, and the weights
    the injection-rate minimizer returns) is close to singular.  When both
    hold the surjection and injection indices must agree, and a Lipschitz
    local inverse with rate 1/index exists around x.
    """
    if f.dim_in != f.dim_out:
        raise ValueError(
            f"map {f.name!r} has dim_in={f.dim_in} != dim_out={f.dim_out}; "
            "hull regularity asks for isomorphisms, so dimensions must match"
        )
    x = np.atleast_1d(np.asarray(x, dtype=float))
    c_sur, table_sur = regularity_index(
        f, x, R_schedule=R_schedule, count=count, seed=derive_seed(seed, 1)
    )
    c_inj, table_inj = injectivity_index(
        f, x, R_schedule=R_schedule, count=count, seed=derive_seed(seed, 2)
    )
    S = clarke_sample(
        f, x, R=min(R_schedule), count=count, seed=derive_seed(seed, 3)
    )
    min_iso, iso_witness = _probe_isomorphisms(S, probe_count, derive_seed(seed, 4))

    numbers = {
        "regularity_index": c_sur,
        "injectivity_index": c_inj,
        "index_gap": abs(c_sur - c_inj),
        "min_isomorphism_rate": min_iso,
        "tolerance": tol,
    }
    provenance = {
        "seed": seed,
        "R_schedule": list(R_schedule),
        "count": count,
        "probe_count": probe_count,
        "tables": {"surjection": table_sur, "injection": table_inj},
        "package": _VERSION,
    }
    ok = c_sur > tol and c_inj > tol and min_iso > tol
    witnesses = {}
    if not ok:
        witnesses = {
            "hull_weights": iso_witness.weights if iso_witness else None,
            "least_regular_rate": min(min_iso, c_sur),
            "at_point": x,
        }
    return Certificate(
        operation="jf_regular_check",
        verdict=CERTIFIED if ok else REFUTED,
        theorem_tags=["Thm 4.8", "Thm 5.4"],
        numbers=numbers,
        witnesses=witnesses,
        hypotheses_checked=[
            "surjection-rate index positive on the radius schedule",
            "injection-rate index positive on the radius schedule",
            "all probed hull members are isomorphisms",
        ],
        hypotheses_asserted=["map is locally Lipschitz near the base point"],
        provenance=provenance,
    )


def _probe_isomorphisms(
    S: OperatorSet, probe_count: int, seed: int
) -> tuple[float, Optional[HullPoint]]:
    rng = np.random.default_rng(seed)
    k = len(S)
    weights = [np.eye(k)[i] for i in range(k)]
    weights += list(rng.dirichlet(np.ones(k), size=probe_count))
    val, wmin = hull_min_constant(S, which="injection", seed=seed)
    best, best_w = val, wmin
    for w in weights:
        hp = HullPoint(w)
        rate = dual_banach_constant(hp.combine(S))
        if rate < best:
            best, best_w = rate, hp
    return float(best), best_w


def dini_lower(
    f: MapUnderStudy,
    x: np.ndarray,
    dirs: Optional[np.ndarray] = None,
    steps: Optional[Sequence[float]] = None,
    seed: int = 0,
) -> float:
    """Sampled lower one-sided displacement rate at x.

    The minimum of ||f(x + t v) - f(x)|| / t over sampled unit directions
    and a ladder of step sizes.  Sampling can only miss smaller values, so
    this is an upper bound on the true lower limit; compare it against the
    injection-rate index as a sanity check.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if dirs is None:
        dirs = sample_unit_sphere(f.norm_in, 2 * f.dim_in + 6, derive_seed(seed, 1))
    if steps is None:
        scale = max(1.0, float(np.linalg.norm(x)))
        steps = [scale * 10.0 ** (-k) for k in range(2, 8)]
    fx = f.value(x)
    best = math.inf
    for v in np.atleast_2d(dirs):
        for t in steps:
            best = min(best, f.norm_out.eval(f.value(x + t * v) - fx) / t)
    return float(best)


def injectivity_margin_certificate(
    f: MapUnderStudy,
    x: np.ndarray,
    alpha: float,
    pair_count: int = 1000,
    seed: int = 0,
    radius: Optional[float] = None,
    R_schedule: Sequence[float] = (0.5, 0.1, 0.02),
    count: int = 40,
) -> Certificate:
    """Certify the expansion margin d(f(u), f(u')) >= alpha d(u, u').

    A margin alpha below the injection-rate index comes with a neighborhood
    on which the displacement of every pair is at least alpha times their
    separation; this samples pairs on the best radius from the index table
    and records the worst displacement ratio found.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    c_inj, table = injectivity_index(
        f, x, R_schedule=R_schedule, count=count, seed=derive_seed(seed, 1)
    )
    if alpha >= c_inj:
        return Certificate(
            operation="injectivity_margin",
            verdict=INCONCLUSIVE,
            theorem_tags=["Thm 5.2"],
            numbers={"alpha": alpha, "injectivity_index": c_inj},
            witnesses={"reason": "requested margin not below the index"},
            provenance={"seed": seed, "R_schedule": list(R_schedule)},
        )
    if radius is None:
        passing = [row["R"] for row in table if row["value"] > alpha]
        radius = max(passing) if passing else min(R_schedule)
    rng = np.random.default_rng(derive_seed(seed, 2))
    pts = sample_in_ball(f.norm_in, x, radius, 2 * pair_count, rng)
    worst = math.inf
    worst_pair = None
    for i in range(pair_count):
        u, up = pts[2 * i], pts[2 * i + 1]
        sep = f.norm_in.eval(u - up)
        if sep < 1e-14:
            continue
        ratio = f.norm_out.eval(f.value(u) - f.value(up)) / sep
        if ratio < worst:
            worst, worst_pair = ratio, (u, up)
    ok = worst >= alpha
    return Certificate(
        operation="injectivity_margin",
        verdict=CERTIFIED if ok else REFUTED,
        theorem_tags=["Thm 5.2"],
        numbers={
            "alpha": alpha,
            "injectivity_index": c_inj,
            "neighborhood_radius": radius,
            "min_pair_ratio": worst,
            "pairs": pair_count,
        },
        witnesses={} if ok else {"pair": [worst_pair[0], worst_pair[1]], "ratio": worst},
        hypotheses_checked=[
            "injection-rate index exceeds the requested margin",
            "sampled pair displacements meet the margin",
        ],
        provenance={
            "seed": seed,
            "R_schedule": list(R_schedule),
            "pair_count": pair_count,
            "package": _VERSION,
        },
    )


# ---------------------------------------------------------------------------
# covering rates and profiles


def cov_estimate_empirical(
    f: MapUnderStudy,
    x: np.ndarray,
    r_schedule: Sequence[float] = (0.1, 0.05, 0.02),
    target_count: int = 15,
    seed: int = 0,
    resolution: float = 1e-3,
    solver_tol: float = 1e-9,
) -> tuple[float, dict]:
    """Largest alpha with B(f(x), alpha r) solvable inside B(x, r), bisected.

    For each candidate alpha, boundary targets at distance alpha*r are
    attacked with the damped-Newton local solver constrained to the r-ball,
    for every r in the schedule; one unreachable target fails the alpha.
    Binary search then pins the threshold to the stated resolution.  This
    measures covering from below, so it should not fall more than sampling
    slack under the surjection-rate index.
    """
    from .invert import NonConvergence, local_invert

    x = np.atleast_1d(np.asarray(x, dtype=float))
    r_schedule = [float(r) for r in r_schedule]
    if any(r <= 0 for r in r_schedule):
        raise ValueError(f"r_schedule must be positive, got {r_schedule}")
    fx = f.value(x)
    dirs = sample_unit_sphere(
        f.norm_out, max(2 * f.dim_out, target_count), derive_seed(seed, 1), dual=False
    )
    slack = 1.0 + 1e-6

    def covered(alpha: float) -> bool:
        if alpha == 0.0:
            return True
        for ri, r in enumerate(r_schedule):
            for di, d in enumerate(dirs):
                y = fx + alpha * r * d
                try:
                    sol = local_invert(
                        f,
                        x,
                        y,
                        trust_radius=r * slack,
                        tol=solver_tol,
                        max_iter=60,
                        seed=derive_seed(seed, 2, ri, di),
                    )
                except NonConvergence:
                    return False
                if f.norm_in.eval(sol - x) > r * slack:
                    return False
        return True

    lo, hi = 0.0, 1.0
    if covered(hi):
        for _ in range(24):
            lo, hi = hi, hi * 2.0
            if not covered(hi):
                break
        else:
            raise ValueError(
                "empirical covering rate did not bracket below 2^24; "
                "the solver tolerance or schedule is suspect"
            )
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        if covered(mid):
            lo = mid
        else:
            hi = mid
    details = {
        "bracket": [lo, hi],
        "r_schedule": r_schedule,
        "targets_per_radius": len(dirs),
        "resolution": resolution,
        "seed": seed,
    }
    return float(lo), details


def radial_profile(
    f: MapUnderStudy,
    x_star: np.ndarray,
    rho_schedule: Sequence[float],
    per_shell_count: int = 6,
    seed: int = 0,
    index_R_schedule: Sequence[float] = (0.1, 0.02),
    index_count: int = 24,
) -> list[dict]:
    """Sampled infimum of the surjection-rate index over growing balls.

    Sample sets are nested across the schedule (each radius keeps all
    points of the smaller ones, plus fresh boundary probes and interior
    points), so the profile is nonincreasing by construction.  Each row
    carries rho, the running infimum, and the point achieving it.
    """
    x_star = np.atleast_1d(np.asarray(x_star, dtype=float))
    rho_schedule = [float(r) for r in rho_schedule]
    if not rho_schedule or any(r <= 0 for r in rho_schedule):
        raise ValueError(f"rho schedule must be positive, got {rho_schedule}")
    if any(a >= b for a, b in zip(rho_schedule, rho_schedule[1:])):
        raise ValueError(f"rho schedule must increase, got {rho_schedule}")

    def index_at(pt: np.ndarray, sub: int) -> float:
        val, _ = regularity_index(
            f,
            pt,
            R_schedule=index_R_schedule,
            count=index_count,
            seed=derive_seed(seed, 17, sub),
        )
        return val

    running = index_at(x_star, 0)
    witness = x_star
    rows = []
    counter = 1
    boundary_dirs = sample_unit_sphere(
        f.norm_in, 2 * f.dim_in, derive_seed(seed, 18)
    )
    for si, rho in enumerate(rho_schedule):
        rng = np.random.default_rng(derive_seed(seed, 19, si))
        pts = [x_star + rho * d for d in boundary_dirs]
        pts += list(sample_in_ball(f.norm_in, x_star, rho, per_shell_count, rng))
        for pt in pts:
            val = index_at(np.asarray(pt), counter)
            counter += 1
            if val < running:
                running, witness = val, np.asarray(pt)
        rows.append(
            {"rho": rho, "inf_index": float(running), "witness": witness.tolist()}
        )
    return rows


def domain_radius(profile_rows: Sequence[dict], r: float) -> float:
    """Under-estimate of the integrated rate profile over [0, r].

    The profile is nonincreasing, so charging each grid interval at its
    right endpoint's value gives a lower Riemann sum; the result is a sound
    radius for target-ball inclusion around the image of the center.
    """
    if r < 0:
        raise ValueError(f"radius must be >= 0, got {r}")
    if r == 0:
        return 0.0
    rows = sorted(profile_rows, key=lambda row: row["rho"])
    if not rows or rows[-1]["rho"] < r - 1e-12:
        top = rows[-1]["rho"] if rows else 0.0
        raise ValueError(
            f"profile covers [0, {top:g}] but the integral needs [0, {r:g}]; "
            "extend the rho schedule"
        )
    total = 0.0
    prev = 0.0
    floor = math.inf
    for row in rows:
        hi = min(float(row["rho"]), r)
        floor = min(floor, float(row["inf_index"]))
        if hi > prev:
            total += floor * (hi - prev)
            prev = hi
        if prev >= r:
            break
    return float(total)


def ball_inclusion_certificate(
    f: MapUnderStudy,
    x_star: np.ndarray,
    r: float,
    target_count: int = 12,
    seed: int = 0,
    rho_schedule: Optional[Sequence[float]] = None,
    safety: float = 0.98,
    tol: float = 1e-8,
    per_shell_count: int = 6,
    profile_rows: Optional[Sequence[dict]] = None,
) -> Certificate:
    """Certify that f(B(x*, r)) contains the ball of the integrated profile.

    Computes the rate profile on [0, r], integrates it to a sound radius
    varrho, then demands constructive evidence: every sampled target within
    safety * varrho of f(x*) must actually be inverted by path lifting, with
    residual below tol and the preimage inside B(x*, r).  A target whose
    preimage lands outside refutes; a target the lift cannot reach leaves
    the verdict inconclusive.
    """
    from .invert import LiftFailure, NonConvergence, global_invert

    x_star = np.atleast_1d(np.asarray(x_star, dtype=float))
    if r <= 0:
        raise ValueError(f"ball radius must be positive, got {r}")
    if profile_rows is not None:
        rows = list(profile_rows)
        rho_schedule = [row["rho"] for row in rows]
    else:
        if rho_schedule is None:
            rho_schedule = list(np.linspace(r / 12.0, r, 12))
        rows = radial_profile(
            f,
            x_star,
            rho_schedule,
            per_shell_count=per_shell_count,
            seed=derive_seed(seed, 1),
        )
    varrho = domain_radius(rows, r)
    provenance = {
        "seed": seed,
        "rho_schedule": list(rho_schedule),
        "safety": safety,
        "tol": tol,
        "package": _VERSION,
    }
    numbers = {
        "r": r,
        "varrho": varrho,
        "claimed_radius": safety * varrho,
        "profile_min": rows[-1]["inf_index"],
    }
    if varrho <= 0.0:
        return Certificate(
            operation="ball_inclusion",
            verdict=REFUTED,
            theorem_tags=["Thm 6.1", "Rem 6.6"],
            numbers=numbers,
            witnesses={
                "reason": "rate profile integrates to zero on [0, r]",
                "profile_witness": rows[-1]["witness"],
            },
            hypotheses_checked=["integrated rate profile is positive"],
            provenance=provenance,
        )
    fx = f.value(x_star)
    dirs = sample_unit_sphere(
        f.norm_out, max(2 * f.dim_out, target_count), derive_seed(seed, 2)
    )
    factors = [1.0] * len(dirs) + [0.5, 0.25]
    dirs = list(dirs) + list(dirs[:2])
    worst_res, worst_dist = 0.0, 0.0
    for ti, (d, fac) in enumerate(zip(dirs, factors)):
        y = fx + safety * varrho * fac * np.asarray(d)
        try:
            sol, trace = global_invert(
                f, x_star, y, tol=tol, seed=derive_seed(seed, 3, ti)
            )
        except (LiftFailure, NonConvergence) as exc:
            return Certificate(
                operation="ball_inclusion",
                verdict=INCONCLUSIVE,
                theorem_tags=["Thm 6.1", "Rem 6.6"],
                numbers=numbers,
                witnesses={
                    "unreachable_target": y,
                    "solver_message": str(exc),
                },
                hypotheses_checked=["integrated rate profile is positive"],
                provenance=provenance,
            )
        res = f.norm_out.eval(f.value(sol) - y)
        dist = f.norm_in.eval(sol - x_star)
        worst_res = max(worst_res, res)
        worst_dist = max(worst_dist, dist)
        if dist > r * (1.0 + 1e-9):
            numbers.update({"worst_residual": worst_res, "worst_distance": worst_dist})
            return Certificate(
                operation="ball_inclusion",
                verdict=REFUTED,
                theorem_tags=["Thm 6.1", "Rem 6.6"],
                numbers=numbers,
                witnesses={"target": y, "preimage": sol, "distance": dist},
                hypotheses_checked=[
                    "integrated rate profile is positive",
                    "sampled targets invert inside the source ball",
                ],
                provenance=provenance,
            )
    numbers.update({"worst_residual": worst_res, "worst_distance": worst_dist})
    return Certificate(
        operation="ball_inclusion",
        verdict=CERTIFIED,
        theorem_tags=["Thm 6.1", "Rem 6.6"],
        numbers=numbers,
        witnesses={},
        hypotheses_checked=[
            "integrated rate profile is positive",
            "sampled targets invert inside the source ball with residual <= tol",
        ],
        hypotheses_asserted=["map is locally Lipschitz on the source ball"],
        provenance=provenance,
    )


def submersion_check(
    f: MapUnderStudy,
    K_sample: Sequence[np.ndarray],
    preimage_count: int = 3,
    seed: int = 0,
    starts: Optional[Sequence[np.ndarray]] = None,
    tol: float = 1e-6,
    index_R_schedule: Sequence[float] = (0.1, 0.02),
    index_count: int = 24,
) -> Certificate:
    """Check the rate floor over the preimages of a compact target sample.

    Global statements need the surjection-rate index bounded below on
    f^{-1}(K) for compact K.  This hunts preimages of each sampled target
    by multi-start damped Newton, evaluates the index at each one, and
    reports the floor alpha_K.  Targets with no preimage found leave the
    verdict inconclusive rather than silently passing.
    """
    from .invert import NonConvergence, local_invert

    K = [np.atleast_1d(np.asarray(y, dtype=float)) for y in K_sample]
    if not K:
        raise ValueError("K_sample must contain at least one target")
    scale = 1.0 + max(float(np.linalg.norm(y)) for y in K)
    if starts is None:
        rng = np.random.default_rng(derive_seed(seed, 1))
        starts = [np.zeros(f.dim_in)] + list(
            sample_in_ball(f.norm_in, np.zeros(f.dim_in), 2.0 * scale, 8, rng)
        )
    alpha_K = math.inf
    floor_witness = None
    unresolved = []
    preimages_found = 0
    for yi, y in enumerate(K):
        found: list[np.ndarray] = []
        for si, start in enumerate(starts):
            if len(found) >= preimage_count:
                break
            try:
                sol = local_invert(
                    f,
                    np.asarray(start, dtype=float),
                    y,
                    trust_radius=4.0 * scale,
                    tol=1e-9,
                    max_iter=120,
                    seed=derive_seed(seed, 2, yi, si),
                )
            except NonConvergence:
                continue
            if all(f.norm_in.eval(sol - g) > 1e-6 * scale for g in found):
                found.append(sol)
        if not found:
            unresolved.append(y)
            continue
        preimages_found += len(found)
        for pi, pre in enumerate(found):
            val, _ = regularity_index(
                f,
                pre,
                R_schedule=index_R_schedule,
                count=index_count,
                seed=derive_seed(seed, 3, yi, pi),
            )
            if val < alpha_K:
                alpha_K, floor_witness = val, pre
    numbers = {
        "alpha_K": 0.0 if math.isinf(alpha_K) else alpha_K,
        "targets": len(K),
        "preimages_found": preimages_found,
        "unresolved_targets": len(unresolved),
        "tolerance": tol,
    }
    provenance = {
        "seed": seed,
        "starts": len(starts),
        "index_R_schedule": list(index_R_schedule),
        "package": _VERSION,
    }
    tags = ["Thm 6.1", "Thm 6.8"]
    if unresolved:
        return Certificate(
            operation="submersion_check",
            verdict=INCONCLUSIVE,
            theorem_tags=tags,
            numbers=numbers,
            witnesses={"targets_without_preimage": unresolved},
            hypotheses_checked=["preimage search over the start cloud"],
            provenance=provenance,
        )
    ok = alpha_K > tol
    return Certificate(
        operation="submersion_check",
        verdict=CERTIFIED if ok else REFUTED,
        theorem_tags=tags,
        numbers=numbers,
        witnesses={} if ok else {"collapse_point": floor_witness, "rate": alpha_K},
        hypotheses_checked=[
            "every sampled target has a located preimage",
            "surjection-rate index positive at every located preimage",
        ],
        hypotheses_asserted=["located preimages exhaust the fibers over K"],
        provenance=provenance,
    )


def weighted_covering_check(
    f: MapUnderStudy,
    x_star: np.ndarray,
    weight: Weight,
    rho_schedule: Sequence[float],
    per_shell_count: int = 6,
    seed: int = 0,
    tol: float = 1e-9,
    profile_rows: Optional[Sequence[dict]] = None,
) -> Certificate:
    """Check rate * weight >= 1 along the sampled radial profile.

    With a nondecreasing weight whose reciprocal integral diverges, the
    product staying above 1 on every shell upgrades pointwise covering to a
    global inverse with weight-controlled Lipschitz growth.
    """
    if profile_rows is not None:
        rows = list(profile_rows)
        rho_schedule = [row["rho"] for row in rows]
    else:
        rows = radial_profile(
            f,
            np.atleast_1d(np.asarray(x_star, dtype=float)),
            rho_schedule,
            per_shell_count=per_shell_count,
            seed=derive_seed(seed, 1),
        )
    worst = math.inf
    worst_row = None
    for row in rows:
        prod = row["inf_index"] * weight.omega(row["rho"])
        if prod < worst:
            worst, worst_row = prod, row
    ok = worst >= 1.0 - tol
    return Certificate(
        operation="weighted_covering",
        verdict=CERTIFIED if ok else REFUTED,
        theorem_tags=["Thm 6.3", "Cor 6.5"],
        numbers={
            "min_rate_weight_product": worst,
            "at_rho": worst_row["rho"],
            "profile_min": rows[-1]["inf_index"],
        },
        witnesses={} if ok else {
            "rho": worst_row["rho"],
            "inf_index": worst_row["inf_index"],
            "omega": weight.omega(worst_row["rho"]),
            "profile_witness": worst_row["witness"],
        },
        hypotheses_checked=[
            "rate times weight stays above 1 on every sampled shell",
            "reciprocal weight integral diverges (constant tail)",
        ],
        hypotheses_asserted=[
            "weight is nondecreasing in the radius",
            "domain is complete; domain and target are connected and simply connected",
        ],
        provenance={
            "seed": seed,
            "rho_schedule": list(rho_schedule),
            "weight": {"breakpoints": weight.breakpoints, "values": weight.values},
            "package": _VERSION,
        },
    )
