"""Value-function ODEs for Kullback-Leibler controlled Markov chains."""

from ._core import (
    ConvergenceError,
    DegeneracyError,
    DivergenceError,
    Error,
    FeasibilityError,
    IntegrationError,
    IoError,
    KLModel,
    ParameterError,
    ParseError,
    ReducibilityError,
    StructuralError,
    UsageError,
    ValidationError,
    fixed_point_residual,
    fundamental_matrix,
    integrate_brockett,
    integrate_kl,
    invariant_pmf,
    jacobian,
    kl_rate,
    load_model,
    lqr_coefficient_ode,
    model_to_json,
    newton_solve,
    parse_model,
    poisson_solve,
    riccati_oracle,
    symmetric_model,
    twist,
)

__all__ = [name for name in dir() if not name.startswith("_")]
