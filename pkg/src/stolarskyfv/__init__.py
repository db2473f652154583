"""Finite volume schemes for the stationary Fokker-Planck equation whose
interface weights are weighted Stolarsky means of the Boltzmann factors."""
from ._kernels import BACKEND
from .analysis import (
    ConvergenceTable, ErrorReport, FluxGap, compare_on_mesh, compare_schemes,
    consistency_estimator, convergence_study, error_report, fit_eoc,
)
from .assembly import DiscreteSystem, Problem, assemble
from .errors import (
    ConfigurationError, DomainError, ExprError, InvalidMeshError, NonConvergenceError,
    NumericError, ProblemEvaluationError, StolarskyFVError,
)
from .exprparse import Expression
from .linsolve import Solution, solve, solve_problem
from .means import (
    ARITHMETIC, GEOMETRIC, HARMONIC, LOGARITHMIC, MAX, MIN, QUADRATIC,
    SCHARFETTER_GUMMEL, SG, SQRA, TABLE_MEANS, MeanSpec, log_weight, stolarsky, weight_B,
)
from .mesh import Box, Mesh, build_cubic_mesh, build_interval_mesh, build_vertex_mesh, validate_mesh
from .reference import ReferenceSolution, shoot_reference

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "ConvergenceTable", "ErrorReport", "FluxGap", "compare_on_mesh", "compare_schemes",
    "consistency_estimator", "convergence_study", "error_report", "fit_eoc",
    "DiscreteSystem", "Problem", "assemble",
    "ConfigurationError", "DomainError", "ExprError", "InvalidMeshError", "NonConvergenceError",
    "NumericError", "ProblemEvaluationError", "StolarskyFVError",
    "Expression", "Solution", "solve", "solve_problem",
    "ARITHMETIC", "GEOMETRIC", "HARMONIC", "LOGARITHMIC", "MAX", "MIN", "QUADRATIC",
    "SCHARFETTER_GUMMEL", "SG", "SQRA", "TABLE_MEANS", "MeanSpec", "log_weight", "stolarsky", "weight_B",
    "Box", "Mesh", "build_cubic_mesh", "build_interval_mesh", "build_vertex_mesh", "validate_mesh",
    "ReferenceSolution", "shoot_reference",
]
