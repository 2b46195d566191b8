"""Gradient codes from balanced incomplete block designs.

Constructs codes from finite geometries and Paley designs, decodes
straggler-afflicted gradient sums in closed form, and measures how much
damage adversarially chosen stragglers can do.
"""
from .decoder import (
    DecodeResult,
    StragglerProfile,
    StragglerScenario,
    decode,
    decode_dual,
    decode_resolvable,
    decode_symmetric,
    oracle_decode,
    pg_error_formula,
    rank_one_update_inverse,
    straggler_profile,
    worst_case_error,
)
from .designs import (
    BIBDParams,
    Design,
    Resolution,
    affine_geometry,
    derive_or_residual,
    dual,
    hadamard_design,
    projective_geometry,
    verify_bibd,
)
from .galois import Field, field_new, projective_normalize
from .gradcode import (
    CodeKind,
    GradientCode,
    PlacementGraph,
    code_from_design,
    frc_code,
    placement_graph,
    uncoded_code,
)
from .straggler import (
    ThresholdReport,
    adversarial_threshold,
    expansion_constant,
    greedy_adversary,
    random_stragglers,
    spectral_summary,
    threshold_lower_bound,
)

__version__ = "0.1.0"
