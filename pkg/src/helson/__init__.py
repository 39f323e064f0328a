"""Multiplicative Hankel (Helson) matrices and the weak-product norm.

The library builds truncated operators M(alpha) = {alpha(nm)} from
generating sequences, computes certified operator norms, constructs
compact approximants as convex combinations of dilated operators, and
evaluates the weak-product (projective tensor) norm under Dirichlet
convolution with primal-dual certificates.
"""

from .errors import (
    ConvergenceError,
    DomainError,
    HelsonError,
    InvariantViolation,
)
from .sieve import (
    divisors,
    factor_pairs,
    is_smooth,
    set_sieve_limit,
    sieve_limit,
    smooth_indices,
    weighted_degree,
)
from .core import (
    DilationParam,
    HSSum,
    MultiIndex,
    Sequence,
    bilinear_pair,
    compose,
    dilate,
    dilation_hs_sum,
    dilation_weight,
    dirichlet_convolve,
    factorize,
    filter_smooth,
    load_sequence,
    save_sequence,
    sequence_from_triples,
    sequence_to_triples,
)
from .operator import (
    DENSE_CAP,
    DilatedSymbol,
    HelsonMatrix,
    apply,
    assemble,
    dilate_symbol,
    dilation_matrix,
    form,
    matrix_header,
    matrix_to_csv,
    save_matrix,
    symbol_value,
    truncation_indices,
)
from .spectral import (
    LowerBoundCheck,
    SpectralReport,
    l2_lower_bound_check,
    operator_norm,
    operator_norm_symbol,
    singular_values,
)
from .approx import (
    ApproxConfig,
    ApproxResult,
    ConvexWeights,
    DiagnosticTable,
    best_convex_approx,
    compactness_diagnostic,
    dilation_family,
    simplex_project,
)
from .weakprod import (
    DualityReport,
    GeometricDecay,
    Representation,
    XNormConfig,
    XNormResult,
    divisor_classes,
    duality_gap,
    refine_representation,
    rep_cost,
    representation_from_matrix,
    split_sequence,
    xnorm,
    xnorm_certificate_check,
)
from .fixtures import (
    DeltaSymbol,
    FileSymbol,
    MHilbertSymbol,
    PowerSymbol,
    RandomDecaySymbol,
    parse_fixture,
    parse_sequence_arg,
)

__version__ = "0.1.0"

__all__ = [
    "ApproxConfig",
    "ApproxResult",
    "ConvergenceError",
    "ConvexWeights",
    "DENSE_CAP",
    "DeltaSymbol",
    "DiagnosticTable",
    "DilatedSymbol",
    "DilationParam",
    "DomainError",
    "DualityReport",
    "FileSymbol",
    "GeometricDecay",
    "HSSum",
    "HelsonError",
    "HelsonMatrix",
    "InvariantViolation",
    "LowerBoundCheck",
    "MHilbertSymbol",
    "MultiIndex",
    "PowerSymbol",
    "RandomDecaySymbol",
    "Representation",
    "Sequence",
    "SpectralReport",
    "XNormConfig",
    "XNormResult",
    "apply",
    "assemble",
    "best_convex_approx",
    "bilinear_pair",
    "compactness_diagnostic",
    "compose",
    "dilate",
    "dilate_symbol",
    "dilation_family",
    "dilation_hs_sum",
    "dilation_matrix",
    "dilation_weight",
    "dirichlet_convolve",
    "divisor_classes",
    "divisors",
    "duality_gap",
    "factor_pairs",
    "factorize",
    "filter_smooth",
    "form",
    "is_smooth",
    "l2_lower_bound_check",
    "load_sequence",
    "matrix_header",
    "matrix_to_csv",
    "operator_norm",
    "operator_norm_symbol",
    "parse_fixture",
    "parse_sequence_arg",
    "refine_representation",
    "rep_cost",
    "representation_from_matrix",
    "save_matrix",
    "save_sequence",
    "sequence_from_triples",
    "sequence_to_triples",
    "set_sieve_limit",
    "sieve_limit",
    "simplex_project",
    "singular_values",
    "smooth_indices",
    "split_sequence",
    "symbol_value",
    "truncation_indices",
    "weighted_degree",
    "xnorm",
    "xnorm_certificate_check",
]
