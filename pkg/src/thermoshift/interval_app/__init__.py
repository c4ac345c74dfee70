"""Perturbed piecewise expanding Markov interval maps."""

from .coding import CellMasses, coding_point, dyadic_cells, geometric_potential, pushforward, word_image
from .experiment import IntervalReport, MonteCarloResult, forward_map, monte_carlo, p_coefficients, splitting_experiment
from .family import PerturbedIntervalFamily
from .system import AffineBranch, BranchGraph, Edge, IntervalSystem, ParametricBranch, ValidationReport, VanishingBranch, validate

__all__ = [
    "AffineBranch",
    "BranchGraph",
    "CellMasses",
    "Edge",
    "IntervalReport",
    "IntervalSystem",
    "MonteCarloResult",
    "ParametricBranch",
    "PerturbedIntervalFamily",
    "ValidationReport",
    "VanishingBranch",
    "coding_point",
    "dyadic_cells",
    "forward_map",
    "geometric_potential",
    "monte_carlo",
    "p_coefficients",
    "pushforward",
    "splitting_experiment",
    "validate",
    "word_image",
]
