"""High-precision recurrence coefficients for hypergeometric-weight
discrete orthogonal polynomials, with numerical verification of the
nonlinear difference system, the Toda-type deformation flow, the sigma-form
ODE, the Riccati seed relation, and the large-n limit conjectures.

Two independent pipelines produce the same sequences: a moment-determinant
oracle (slow, self-checking) and the difference recursion (fast, fragile).
Everything else in the package measures how well they agree with each
other and with the identities they are supposed to satisfy.
"""

__version__ = "0.1.0"

from .asymptotics import StudyReport, limit_report, perturbation_study, precision_study
from .dpainleve import DPState, dp1_step, dp2_step, dp_residuals, iterate
from .errors import (
    DomainExceeded,
    HypopqError,
    InvalidCoeffs,
    InvalidParam,
    NonConvergent,
    PoleHit,
    PrecisionExhausted,
    SingularStep,
    SingularToPrecision,
    StepTooSmall,
)
from .numerics import (
    PrecisionCtx,
    bits_for_digits,
    central_derivative,
    default_step,
    digits_for_bits,
    sum_series,
)
from .oracle import (
    CoeffSeq,
    LadderSeq,
    XYSeq,
    coeffs_from_xy,
    coeffs_oracle,
    eval_orthonormal,
    hankel_det,
    ladder_residuals,
    ladder_sequences,
    structure_residual,
    xy_from_coeffs,
)
from .reporting import ResidualEntry, ResidualReport, normalized_residual
from .toda_sigma import (
    SigmaParams,
    Source,
    clear_cache,
    riccati_constant,
    riccati_residual,
    sigma_parameters,
    sigma_pvi_residual,
    sigma_value,
    toda_residuals,
)
from .weights import (
    Lattice,
    MomentTable,
    Params,
    hyp2f1,
    initial_xy,
    moment,
    potential_u,
    shifted_params,
    weight_sequence,
)

__all__ = [
    "CoeffSeq",
    "DPState",
    "DomainExceeded",
    "HypopqError",
    "InvalidCoeffs",
    "InvalidParam",
    "LadderSeq",
    "Lattice",
    "MomentTable",
    "NonConvergent",
    "Params",
    "PoleHit",
    "PrecisionCtx",
    "PrecisionExhausted",
    "ResidualEntry",
    "ResidualReport",
    "SigmaParams",
    "SingularStep",
    "SingularToPrecision",
    "Source",
    "StepTooSmall",
    "StudyReport",
    "XYSeq",
    "bits_for_digits",
    "central_derivative",
    "clear_cache",
    "coeffs_from_xy",
    "coeffs_oracle",
    "default_step",
    "digits_for_bits",
    "dp1_step",
    "dp2_step",
    "dp_residuals",
    "eval_orthonormal",
    "hankel_det",
    "hyp2f1",
    "initial_xy",
    "iterate",
    "ladder_residuals",
    "ladder_sequences",
    "limit_report",
    "moment",
    "normalized_residual",
    "perturbation_study",
    "potential_u",
    "precision_study",
    "riccati_constant",
    "riccati_residual",
    "shifted_params",
    "sigma_parameters",
    "sigma_pvi_residual",
    "sigma_value",
    "structure_residual",
    "sum_series",
    "toda_residuals",
    "weight_sequence",
    "xy_from_coeffs",
]
