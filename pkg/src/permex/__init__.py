"""Exact and asymptotic moments of subpermanent sums over random
permutation-sum matrices: exact rational expectations, a brute-force
oracle, Monte Carlo estimation, and the variational rate-function layer.
"""

from .asymptotics import (
    RateComponents,
    RatePoint,
    StationarySolution,
    analytic_solution,
    finite_rate_single,
    product_rate,
    rate_components,
    single_rate,
    single_rate_limit,
    solve_stationary,
    stationarity_residuals,
    stirling_f,
)
from .errors import (
    CapacityError,
    DomainError,
    InfeasiblePointError,
    PermexError,
    SolverError,
)
from .kernels import compiled_available
from .model import (
    EnsembleSpec,
    SquareMatrix,
    assemble_matrix,
    enumerate_tuples,
    sample_matrix,
    sample_matrices,
    sample_permutation,
    sample_stream,
    tuple_count,
)
from .moments import (
    ColorProfile,
    argmax_profile,
    expectation_perm,
    expectation_product,
    profile_iterator,
    term_value,
    validate_profile,
)
from .montecarlo import (
    MCEstimate,
    MomentEstimates,
    ScanRow,
    convergence_scan,
    estimate_moments,
)
from .permanents import (
    ExactMoment,
    MomentKey,
    SubpermanentVector,
    ensemble_average_bruteforce,
    permanent,
    subpermanent_bruteforce,
    subpermanent_profile,
)

__version__ = "0.1.0"

__all__ = [
    "CapacityError",
    "ColorProfile",
    "DomainError",
    "EnsembleSpec",
    "ExactMoment",
    "InfeasiblePointError",
    "MCEstimate",
    "MomentEstimates",
    "MomentKey",
    "PermexError",
    "RateComponents",
    "RatePoint",
    "ScanRow",
    "SolverError",
    "SquareMatrix",
    "StationarySolution",
    "SubpermanentVector",
    "analytic_solution",
    "argmax_profile",
    "assemble_matrix",
    "compiled_available",
    "convergence_scan",
    "ensemble_average_bruteforce",
    "enumerate_tuples",
    "estimate_moments",
    "expectation_perm",
    "expectation_product",
    "finite_rate_single",
    "permanent",
    "product_rate",
    "profile_iterator",
    "rate_components",
    "sample_matrices",
    "sample_matrix",
    "sample_permutation",
    "sample_stream",
    "single_rate",
    "single_rate_limit",
    "solve_stationary",
    "stationarity_residuals",
    "stirling_f",
    "subpermanent_bruteforce",
    "subpermanent_profile",
    "term_value",
    "tuple_count",
    "validate_profile",
    "__version__",
]
