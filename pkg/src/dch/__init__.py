"""Discrete complex analysis on critical (rhombic) quad-maps.

Vertex functions on a bipartite rhombic lattice, discrete Cauchy-Riemann
checks and solvers, trapezoid integration with discrete monomials and
exponentials, the Duffin derivative, Young-diagram change of basis,
minimal vanishing polynomials, and a refinement harness measuring
convergence orders against smooth targets.
"""

from .basis import (
    BPolynomial,
    MinimalPolynomial,
    YoungDiagram,
    b_polynomial,
    b_polynomial_recursive,
    evaluate_b,
    minimal_polynomial,
    partitions,
    translate_monomial,
    young_coefficient,
)
from .calculus import (
    FaceFunction,
    SeriesDivergenceWarning,
    derivative_edge_residuals,
    derive_duffin,
    dual,
    edge_increments,
    exp_product,
    exp_series_partial,
    face_derivative,
    integrate_lambda_edge,
    integrate_path,
    loop_integral,
    monomial,
    morera_residual,
    primitive,
)
from .convergence import (
    CHAIN,
    RECT,
    ConvergenceReport,
    RefiningFamily,
    exp_convergence,
    fit_order,
    monomial_convergence,
    primitive_convergence,
    refine,
    sample_ids,
    series_approximation,
)
from .errors import (
    BoundaryDataError,
    ConvergenceDomainError,
    DependenceNotFoundError,
    NotHolomorphicError,
    NumericalError,
    PoleProximityError,
    RatioMismatchError,
    ValidationError,
)
from .holomorphy import (
    HolomorphyReport,
    VertexFunction,
    boundary_dimension_formula,
    canonical_pins,
    coordinate,
    cr_matrix,
    cr_residual,
    cr_residuals,
    dimension_of_solution_space,
    epsilon,
    is_holomorphic,
    random_holomorphic,
    read_value_csv,
    solve_boundary,
)
from .lattice import (
    GAMMA,
    GAMMA_STAR,
    CriticalMap,
    PathRef,
    Violation,
    as_path,
    build_chain,
    build_rect_lattice,
    validate_criticality,
)

__version__ = "0.1.0"

__all__ = [
    "BPolynomial",
    "BoundaryDataError",
    "CHAIN",
    "ConvergenceDomainError",
    "ConvergenceReport",
    "CriticalMap",
    "DependenceNotFoundError",
    "FaceFunction",
    "GAMMA",
    "GAMMA_STAR",
    "HolomorphyReport",
    "MinimalPolynomial",
    "NotHolomorphicError",
    "NumericalError",
    "PathRef",
    "PoleProximityError",
    "RECT",
    "RatioMismatchError",
    "RefiningFamily",
    "SeriesDivergenceWarning",
    "ValidationError",
    "VertexFunction",
    "Violation",
    "YoungDiagram",
    "as_path",
    "b_polynomial",
    "b_polynomial_recursive",
    "boundary_dimension_formula",
    "build_chain",
    "build_rect_lattice",
    "canonical_pins",
    "coordinate",
    "cr_matrix",
    "cr_residual",
    "cr_residuals",
    "derivative_edge_residuals",
    "derive_duffin",
    "dimension_of_solution_space",
    "dual",
    "edge_increments",
    "epsilon",
    "evaluate_b",
    "exp_convergence",
    "exp_product",
    "exp_series_partial",
    "face_derivative",
    "fit_order",
    "integrate_lambda_edge",
    "integrate_path",
    "is_holomorphic",
    "loop_integral",
    "minimal_polynomial",
    "monomial",
    "monomial_convergence",
    "morera_residual",
    "partitions",
    "primitive",
    "primitive_convergence",
    "random_holomorphic",
    "read_value_csv",
    "refine",
    "sample_ids",
    "series_approximation",
    "solve_boundary",
    "translate_monomial",
    "validate_criticality",
    "young_coefficient",
]
