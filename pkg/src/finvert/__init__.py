"""Invertibility certificates and solvers for locally Lipschitz maps.

The package measures how invertible a nonsmooth map is — through sampled
generalized-derivative hulls and their surjection/injection rates — and
turns positive rates into artifacts: certificates with explicit witnesses,
guaranteed image-ball radii, and actual inverses computed by lifting a
target path.  Norms are first-class (weighted, polyhedral, pulled back
through charts), so the same machinery runs on flat spaces and on simple
charted manifolds.
"""

from __future__ import annotations

from .certify import (
    CERTIFIED,
    INCONCLUSIVE,
    REFUTED,
    THEOREM_TAGS,
    Certificate,
    Weight,
    ball_inclusion_certificate,
    combine_certificates,
    cov_estimate_empirical,
    dini_lower,
    domain_radius,
    injectivity_margin_certificate,
    jf_regular_check,
    radial_profile,
    submersion_check,
    weighted_covering_check,
)
from .invert import (
    Combiner,
    LiftFailure,
    LiftTrace,
    NonConvergence,
    additive_combiner,
    check_combiner,
    global_invert,
    lip_estimate,
    local_invert,
    perturbation_certificate,
)
from .linop import (
    LinOp,
    banach_constant,
    dual_banach_constant,
    regularity_modulus,
    transport_operator,
)
from .manifold import (
    BilipschitzReport,
    Chart,
    FinslerStructure,
    NoCommonChartError,
    PolyPath,
    bilipschitz_check,
    chart_representative,
    finsler_distance,
    finsler_length,
    flat_structure,
    norm_comparability,
)
from .norms import (
    LpNorm,
    MappedNorm,
    Norm,
    PolyhedralNorm,
    WeightedLpNorm,
    derive_seed,
    parse_norm,
    sample_unit_sphere,
)
from .pseudojac import (
    HullPoint,
    MapUnderStudy,
    OperatorSet,
    PseudoJacobianReport,
    check_pseudojacobian,
    clarke_sample,
    hull_min_constant,
    injectivity_index,
    regularity_index,
)
from .registry import RegistryEntry, available_names, great_arc_path, lookup

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # norms
    "Norm", "LpNorm", "WeightedLpNorm", "PolyhedralNorm", "MappedNorm",
    "parse_norm", "sample_unit_sphere", "derive_seed",
    # linear operators
    "LinOp", "banach_constant", "dual_banach_constant", "regularity_modulus",
    "transport_operator",
    # derivative hulls
    "MapUnderStudy", "OperatorSet", "HullPoint", "PseudoJacobianReport",
    "clarke_sample", "check_pseudojacobian", "hull_min_constant",
    "regularity_index", "injectivity_index",
    # manifolds
    "Chart", "FinslerStructure", "PolyPath", "NoCommonChartError",
    "BilipschitzReport", "flat_structure", "finsler_length",
    "finsler_distance", "bilipschitz_check", "chart_representative",
    "norm_comparability",
    # certificates
    "CERTIFIED", "REFUTED", "INCONCLUSIVE", "THEOREM_TAGS", "Certificate",
    "Weight", "combine_certificates", "jf_regular_check", "dini_lower",
    "injectivity_margin_certificate", "cov_estimate_empirical",
    "radial_profile", "domain_radius", "ball_inclusion_certificate",
    "submersion_check", "weighted_covering_check",
    # solving
    "NonConvergence", "LiftFailure", "LiftTrace", "local_invert",
    "global_invert", "lip_estimate", "Combiner", "additive_combiner",
    "check_combiner", "perturbation_certificate",
    # registry
    "RegistryEntry", "lookup", "available_names", "great_arc_path",
]
