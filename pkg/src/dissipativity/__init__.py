"""Dissipativity of linear systems: KYP certificates, Lur'e factors, balances and LQ value functions."""

from .errors import (
    AlignmentError,
    ConfigError,
    ConvergenceError,
    DefinitenessError,
    DegenerateRateError,
    DimensionError,
    DissipativityError,
    DivergenceError,
    DomainError,
    EigensolverError,
    PreconditionError,
    SizeError,
    SpectralCompatibilityError,
    StabilizabilityError,
    UnsupportedCaseError,
)
from .kyp import (
    KypReport,
    LurePair,
    check_dissipative,
    dissipation_rate,
    kyp_matrix,
    lure_factor,
    pointwise_kyp_residual,
)
from .linalg import (
    PsdCertificate,
    check_psd,
    hermitian_sqrt,
    is_stabilizable,
    rank_revealing_factor,
    solve_care,
    solve_lyapunov,
)
from .lq import (
    OracleEstimate,
    ValueFunction,
    optimal_feedback,
    storage_dominance_check,
    value_decay_check,
    value_function,
    value_oracle,
)
from .systems import (
    QuadraticStorage,
    StateSpaceSystem,
    SupplyRate,
    internal_passivity_storage,
    make_impedance_supply,
    make_scattering_supply,
    supply_eval,
    supply_is_nonneg,
)
from .trajectories import (
    BalanceReport,
    ConstantInput,
    FeedbackInput,
    SampledInput,
    SineInput,
    Trajectory,
    ZeroInput,
    dissipation_balance,
    mollifier_kernel,
    mollify,
    simulate,
    supply_integral,
)

__version__ = "0.1.0"

__all__ = [
    "AlignmentError",
    "BalanceReport",
    "ConfigError",
    "ConstantInput",
    "ConvergenceError",
    "DefinitenessError",
    "DegenerateRateError",
    "DimensionError",
    "DissipativityError",
    "DivergenceError",
    "DomainError",
    "EigensolverError",
    "FeedbackInput",
    "KypReport",
    "LurePair",
    "OracleEstimate",
    "PreconditionError",
    "PsdCertificate",
    "QuadraticStorage",
    "SampledInput",
    "SineInput",
    "SizeError",
    "SpectralCompatibilityError",
    "StabilizabilityError",
    "StateSpaceSystem",
    "SupplyRate",
    "Trajectory",
    "UnsupportedCaseError",
    "ValueFunction",
    "ZeroInput",
    "check_dissipative",
    "check_psd",
    "dissipation_balance",
    "dissipation_rate",
    "hermitian_sqrt",
    "internal_passivity_storage",
    "is_stabilizable",
    "kyp_matrix",
    "lure_factor",
    "make_impedance_supply",
    "make_scattering_supply",
    "mollifier_kernel",
    "mollify",
    "optimal_feedback",
    "pointwise_kyp_residual",
    "rank_revealing_factor",
    "simulate",
    "solve_care",
    "solve_lyapunov",
    "storage_dominance_check",
    "supply_eval",
    "supply_integral",
    "supply_is_nonneg",
    "value_decay_check",
    "value_function",
    "value_oracle",
]
