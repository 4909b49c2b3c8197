"""Lowest-order simplified weak Galerkin solver on rectangular tensor-product
meshes, with a convergence-study harness for gradient superconvergence
experiments."""

from .boundary import BoundaryMode
from .cases import get_case
from .harness import StudyConfig, run_study
from .mesh import (
    Mesh,
    build_graded_half,
    build_perturbed,
    build_uniform,
    refine_bisect,
)
from .metrics import ErrorReport, error_report, rates

__all__ = [
    "BoundaryMode",
    "ErrorReport",
    "Mesh",
    "StudyConfig",
    "build_graded_half",
    "build_perturbed",
    "build_uniform",
    "error_report",
    "get_case",
    "rates",
    "refine_bisect",
    "run_study",
]

__version__ = "0.1.0"
