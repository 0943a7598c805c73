"""Spectral tensor-train surrogates for black-box functions.

Builds low-rank tensor-train approximations of expensive multivariate
functions from adaptively sampled evaluations, then expands the cores in
orthonormal polynomial or interpolation bases for evaluation anywhere in the
domain.
"""

from .exceptions import (
    ConfigurationError,
    ConvergenceWarning,
    DomainError,
    FormatError,
    InvalidInputError,
    NumericalFailureError,
    RankCapError,
    ResourceLimitError,
    SpectralTTError,
)
from .tt import TTTensor, tt_svd, tt_round, tt_full, tt_norm_f, QuanticsMap
from .cross import CrossConfig, EvalLedger, dmrg_cross, cross_on_quantics, maxvol
from .quadrature import QuadratureRule, BasisSpec, gauss_rule, trapezoid_rule, eval_basis
from .stt import (
    GridSpec,
    Surrogate,
    ftt_projection_construct,
    ftt_projection_eval,
    ftt_interpolation_construct,
    ftt_interpolation_eval,
    save_surrogate,
    load_surrogate,
)
from .estimator import SpectralTTRegressor

__version__ = "0.1.0"

__all__ = [
    "SpectralTTError", "InvalidInputError", "ConfigurationError", "DomainError",
    "NumericalFailureError", "ResourceLimitError", "FormatError", "RankCapError",
    "ConvergenceWarning",
    "TTTensor", "tt_svd", "tt_round", "tt_full", "tt_norm_f", "QuanticsMap",
    "CrossConfig", "EvalLedger", "dmrg_cross", "cross_on_quantics", "maxvol",
    "QuadratureRule", "BasisSpec", "gauss_rule", "trapezoid_rule", "eval_basis",
    "GridSpec", "Surrogate",
    "ftt_projection_construct", "ftt_projection_eval",
    "ftt_interpolation_construct", "ftt_interpolation_eval",
    "save_surrogate", "load_surrogate",
    "SpectralTTRegressor",
]
