"""Desk-scale computational laboratory for rank-g Schottky groups."""

__version__ = "0.1.0"

from ._kernels import BACKEND
from .moebius import INFINITY, MoebiusMap, from_fixed_points_multiplier, projectively_equal
from .schottky import (
    Circle,
    CirclePairing,
    DegeneratePoint,
    SchottkyGroup,
    enumerate_reduced_words,
    is_admissible_for_disk,
    nested_disk,
    sample_limit_set,
    word_to_map,
)
from .dimension import (
    DimensionEstimate,
    box_counting,
    exponent_of_convergence,
    poincare_partial_sum,
    rectifiability_proxy,
    transfer_dimension,
)
from .curves import (
    GeneratingCurve,
    Piece,
    PolyCurve,
    build_quasicircle,
    classify_quasicircle,
    default_generating_curve,
    frechet_distance,
    is_invariant,
    is_simple,
    quasicircle_length_estimate,
)
from .classicality import (
    ClassicalCertificate,
    FailureReport,
    SingularityReport,
    classify_domain_sequence,
    deform_toward_classical,
    search_classical_generators,
    verify_classical_domain,
)

__all__ = [
    "BACKEND",
    "INFINITY",
    "MoebiusMap",
    "from_fixed_points_multiplier",
    "projectively_equal",
    "Circle",
    "CirclePairing",
    "DegeneratePoint",
    "SchottkyGroup",
    "enumerate_reduced_words",
    "is_admissible_for_disk",
    "nested_disk",
    "sample_limit_set",
    "word_to_map",
    "DimensionEstimate",
    "box_counting",
    "exponent_of_convergence",
    "poincare_partial_sum",
    "rectifiability_proxy",
    "transfer_dimension",
    "GeneratingCurve",
    "Piece",
    "PolyCurve",
    "build_quasicircle",
    "classify_quasicircle",
    "default_generating_curve",
    "frechet_distance",
    "is_invariant",
    "is_simple",
    "quasicircle_length_estimate",
    "ClassicalCertificate",
    "FailureReport",
    "SingularityReport",
    "classify_domain_sequence",
    "deform_toward_classical",
    "search_classical_generators",
    "verify_classical_domain",
]
