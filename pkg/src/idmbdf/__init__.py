"""High-order time stepping for fractional diffusion-wave and subdiffusion
equations with hyper-singular sources.

The scheme integrates the source ``m`` times in closed form or by
Gauss--Jacobi quadrature, applies BDF-k convolution quadrature to the
smoothed problem and differentiates the result discretely ``m`` times.
"""

from .cq import (
    BdfPolynomial,
    WeightSequence,
    bdf_polynomial,
    cq_weights,
    discrete_conv_derivative,
    history_weights,
    integer_power_coefficients,
)
from .errors import (
    DimensionError,
    DomainError,
    InvalidOrderError,
    OracleDomainError,
    QuadratureError,
    SmoothingError,
    SolverError,
    UsageError,
)
from .experiments import (
    CASES,
    ConvergenceRow,
    ConvergenceTable,
    ExperimentPlan,
    emit,
    read_csv,
    run_case,
)
from .oracle import (
    ScalarModeProblem,
    convergence_order,
    mittag_leffler,
    scalar_exact_solution,
    solve_scalar_mode,
)
from .quadrature import gauss_jacobi, jacobi_integral, singular_quadrature
from .solver import (
    ConditionalStabilityWarning,
    ProblemSpec,
    Trajectory,
    advance,
    rhs_grid,
    stability_check,
    unstable_band,
)
from .sources import (
    SmoothedSource,
    SourceDescriptor,
    TemporalFactor,
    finite_part_convolution,
    finite_part_primitive,
    hadamard_power_integral,
    smooth_power_source,
    smoothed_grid,
)
from .spectral import SpatialOperator, cgl_nodes, differentiation_matrix, laplacian_dirichlet

__version__ = "0.1.0"

__all__ = [
    "BdfPolynomial",
    "WeightSequence",
    "bdf_polynomial",
    "cq_weights",
    "discrete_conv_derivative",
    "history_weights",
    "integer_power_coefficients",
    "DimensionError",
    "DomainError",
    "InvalidOrderError",
    "OracleDomainError",
    "QuadratureError",
    "SmoothingError",
    "SolverError",
    "UsageError",
    "CASES",
    "ConvergenceRow",
    "ConvergenceTable",
    "ExperimentPlan",
    "emit",
    "read_csv",
    "run_case",
    "ScalarModeProblem",
    "convergence_order",
    "mittag_leffler",
    "scalar_exact_solution",
    "solve_scalar_mode",
    "gauss_jacobi",
    "jacobi_integral",
    "singular_quadrature",
    "ConditionalStabilityWarning",
    "ProblemSpec",
    "Trajectory",
    "advance",
    "rhs_grid",
    "stability_check",
    "unstable_band",
    "SmoothedSource",
    "SourceDescriptor",
    "TemporalFactor",
    "finite_part_convolution",
    "finite_part_primitive",
    "hadamard_power_integral",
    "smooth_power_source",
    "smoothed_grid",
    "SpatialOperator",
    "cgl_nodes",
    "differentiation_matrix",
    "laplacian_dirichlet",
]
