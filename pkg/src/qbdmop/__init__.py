"""Invariant measures of quasi-birth-and-death processes.

The invariant measure of a block-tridiagonal chain is assembled from matrix
potential coefficients ``Pi_n``; the chain itself can be produced from a
weight matrix through its matrix-valued orthogonal polynomials.  Every step
runs on exact rationals (``fractions.Fraction``) or on floats.

Modules:
    matrix: small dense matrices over Fraction or float.
    model: block-tridiagonal models, validation, truncation, JSON I/O.
    potential: potential coefficients and their symmetry conditions.
    invariant: invariant vectors, stationarity residuals, truncation oracle.
    quadrature: Gauss-Jacobi rules on [0, 1].
    mop: moments, monic recurrences and stochastic normalization.
    example: the two-phase example family W(alpha, beta, k).
    cli: the ``qbdmop`` command.
"""

from .example import (
    GOLDEN,
    Classification,
    FamilyParams,
    PipelineRun,
    ParameterError,
    Recurrence,
    classify,
    delta_n,
    golden_blocks,
    golden_model,
    golden_norms,
    golden_pi_block,
    normalized_family,
    run_pipeline,
    weight_at,
    weight_spec,
)
from .invariant import (
    InvariantError,
    InvariantVector,
    brute_force_invariant,
    invariant_vector,
    normalize_truncated,
    rescaled_relative_error,
    stationarity_residual,
)
from .matrix import (
    DimensionError,
    Mat,
    MixedBackendError,
    NotPositiveDefiniteError,
    SingularMatrixError,
    cholesky,
    is_symmetric,
    ldlt,
    mat_inverse,
    mat_mul,
    parse_scalar,
    transpose,
)
from .model import (
    BlockTridiagonal,
    Kind,
    Level,
    LevelVector,
    ModelError,
    build_model,
    load_model,
    model_from_json,
    row_apply,
    truncate_lumped,
)
from .mop import (
    MopFamily,
    RecurrenceError,
    WeightError,
    WeightSpec,
    discretized_recurrence,
    evaluate_Q,
    monic_recurrence,
    moments,
    orthogonality_check,
    stochastic_normalize,
)
from .potential import (
    PotentialError,
    PotentialSequence,
    SymmetryReport,
    check_symmetry_conditions,
    potential_coefficients,
    symmetrizer,
)
from .quadrature import gauss_jacobi

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
