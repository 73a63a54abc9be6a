"""Multiplier and parametric-bootstrap goodness-of-fit tests with estimated parameters."""

from ._gofmult import (
    DegenerateData,
    DomainError,
    Error,
    NonConvergence,
    NumericalFailure,
    SingularInformation,
    Family,
    bvn_cdf,
    fit_mle,
    gradient_check,
    make_family,
    multiplier_test,
    mvt_cdf,
    parametric_bootstrap_test,
    __version__,
)

__all__ = [
    "DegenerateData",
    "DomainError",
    "Error",
    "NonConvergence",
    "NumericalFailure",
    "SingularInformation",
    "Family",
    "bvn_cdf",
    "fit_mle",
    "gradient_check",
    "make_family",
    "multiplier_test",
    "mvt_cdf",
    "parametric_bootstrap_test",
    "__version__",
]
