"""Hankel structured low-rank approximation via a two-level gradient flow.

Given a data vector whose Hankel matrix is full rank, find a nearby vector
whose Hankel matrix is rank deficient: an inner gradient flow minimizes the
smallest singular value at fixed perturbation norm, an outer continuation
grows the norm until the singular value vanishes to tolerance.  Application
layers cover LTI system identification and polygon-from-moments recovery.
"""

from .driver import Solution, SolveParams, distance, impose_missing, missing_mask, solve
from .exceptions import (
    DegeneratePolygonError,
    HankelFlowError,
    InvalidModelError,
    NumericalError,
    ShapeError,
    StagnationError,
    StructureError,
)
from .flow import (
    FlowParams,
    FlowState,
    constrained_rhs,
    descent_gradient,
    free_rhs,
    integrate_constrained,
    integrate_free,
    sigma_rate,
)
from .hankel import (
    HankelShape,
    anti_diagonal_counts,
    apply_weights,
    build_hankel,
    frobenius_weights,
    project_hankel,
    vect,
)
from .lti import LtiModel, add_noise, identify, random_stable_model, simulate_lti
from .moments import (
    Polygon,
    complex_moments,
    recover_vertices,
    vertex_error,
    vertex_error_assignment,
)
from .spectral import SingularTriplet, smallest_singular_triplet

__version__ = "0.1.0"

__all__ = [
    "FlowParams",
    "FlowState",
    "HankelShape",
    "HankelFlowError",
    "DegeneratePolygonError",
    "InvalidModelError",
    "LtiModel",
    "NumericalError",
    "Polygon",
    "ShapeError",
    "SingularTriplet",
    "Solution",
    "SolveParams",
    "StagnationError",
    "StructureError",
    "add_noise",
    "anti_diagonal_counts",
    "apply_weights",
    "build_hankel",
    "complex_moments",
    "constrained_rhs",
    "descent_gradient",
    "distance",
    "free_rhs",
    "frobenius_weights",
    "identify",
    "impose_missing",
    "integrate_constrained",
    "integrate_free",
    "missing_mask",
    "project_hankel",
    "random_stable_model",
    "recover_vertices",
    "sigma_rate",
    "simulate_lti",
    "smallest_singular_triplet",
    "solve",
    "vect",
    "vertex_error",
    "vertex_error_assignment",
]
