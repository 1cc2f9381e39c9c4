"""Constant scalar curvature metrics on sphere bundles, joins and the Yamabe equation."""

from .elliptic import EllipticModulus, jacobi, jacobi_derivatives, quarter_period
from .exceptions import DomainError, InadmissibleModulusError, PreconditionError
from .fiber_geometry import (BaseGeometry, ProfilePair, SkewFamily, SubmersionConstants,
                             check_boundary, dichotomy_check, oneill_norm_from_xi,
                             oneill_norm_join, oneill_rescaled, scal_doubly_warped,
                             scal_join_total, sphere_bundle_scalar, xi_form)
from .join_solver import (Branch, BranchInterval, JoinParams, WarpSolution,
                          admissible_modulus_range, build_profiles, family_scan,
                          gamma_from_modulus, limit_probe, scalar_from_solution, solve,
                          verify_residual)
from .tolerances import DEFAULT, Tolerances
from .yamabe import (YamabeProblem, bundle_thresholds, count_radial_solutions,
                     guaranteed_lower_bound, multiplicity_predicate, product_thresholds,
                     uniqueness_predicate)

__version__ = "0.1.0"

__all__ = [
    "BaseGeometry", "Branch", "BranchInterval", "DEFAULT", "DomainError", "EllipticModulus",
    "InadmissibleModulusError", "JoinParams", "PreconditionError", "ProfilePair", "SkewFamily",
    "SubmersionConstants", "Tolerances", "WarpSolution", "YamabeProblem",
    "admissible_modulus_range", "build_profiles", "bundle_thresholds", "check_boundary",
    "count_radial_solutions", "dichotomy_check", "family_scan", "gamma_from_modulus",
    "guaranteed_lower_bound", "jacobi", "jacobi_derivatives", "limit_probe",
    "multiplicity_predicate", "oneill_norm_from_xi", "oneill_norm_join", "oneill_rescaled",
    "product_thresholds", "quarter_period", "scal_doubly_warped", "scal_join_total",
    "scalar_from_solution", "solve", "sphere_bundle_scalar", "uniqueness_predicate",
    "verify_residual", "xi_form",
]
