"""Density-based topology optimization of 2D photonic devices.

A scalar Helmholtz problem (out-of-plane E_z, bilinear quads, first-order
absorbing boundaries) is solved on a regular grid; the design is filtered,
thresholded and interpolated into a permittivity field, and the focal
intensity at a target element is maximized with adjoint gradients.
"""

from .exceptions import ConfigurationError, NumericalError, SolverError
from .filtering import FilterSpec, ProjectionSpec, back_filter_sensitivities, build_filter, density_filter, threshold
from .grid import GridSpec, build_index_sets, embed_design, lens_design_indices
from .material import DielectricSpec, PlasmonicSpec, interpolate
from .objective import Evaluation, Objective, adjoint_gradient, binarized_evaluate, evaluate, non_discreteness
from .optimize import (
    GAConfig,
    GradientConfig,
    OptimizationError,
    RunHistory,
    beta_schedule,
    optimize_ga,
    optimize_gradient,
    run_continuation,
)
from .problem import PRESETS, ProblemSpec, compute_geometric_na, lens_problem, preset, rescale

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError", "NumericalError", "SolverError",
    "FilterSpec", "ProjectionSpec", "back_filter_sensitivities", "build_filter", "density_filter", "threshold",
    "GridSpec", "build_index_sets", "embed_design", "lens_design_indices",
    "DielectricSpec", "PlasmonicSpec", "interpolate",
    "Evaluation", "Objective", "adjoint_gradient", "binarized_evaluate", "evaluate", "non_discreteness",
    "GAConfig", "GradientConfig", "OptimizationError", "RunHistory", "beta_schedule",
    "optimize_ga", "optimize_gradient", "run_continuation",
    "PRESETS", "ProblemSpec", "compute_geometric_na", "lens_problem", "preset", "rescale",
]
