"""Transfer operators, Perron complements and metastable splitting on truncated Markov shifts."""

from .complement import (
    complement_spectral_radius,
    eigen_transfer_check,
    excursion_budget,
    induced_apply,
    induced_series,
    perron_complement,
    schur_frobenius_residual,
)
from .errors import (
    ConstructionError,
    DegenerateBlockError,
    DegenerateCouplingError,
    DivergenceError,
    EmptyComponentSetError,
    InputError,
    ResolventError,
    ThermoshiftError,
    TruncationTooSmallError,
)
from .metastability import (
    coupling_decomposition,
    delta_coefficients,
    extrapolate,
    maximal_pressure_components,
    splitting_limit,
    tilde_delta,
)
from .potential import CylinderPotential, PerturbedFamily, pressure_estimate, pressure_growth, regularity_report
from .shift_core import MarkovShift, StateSpace, TransitionMatrix, enumerate_cylinders, is_irreducible, transitive_components
from .transfer import OperatorMatrix, PerronTriplet, assemble_operator, cylinder_measure, perron_triplet, spectral_radius

__version__ = "0.1.0"

__all__ = [
    "ConstructionError",
    "CylinderPotential",
    "DegenerateBlockError",
    "DegenerateCouplingError",
    "DivergenceError",
    "EmptyComponentSetError",
    "InputError",
    "MarkovShift",
    "OperatorMatrix",
    "PerronTriplet",
    "PerturbedFamily",
    "ResolventError",
    "StateSpace",
    "ThermoshiftError",
    "TransitionMatrix",
    "TruncationTooSmallError",
    "assemble_operator",
    "complement_spectral_radius",
    "coupling_decomposition",
    "cylinder_measure",
    "delta_coefficients",
    "eigen_transfer_check",
    "enumerate_cylinders",
    "excursion_budget",
    "extrapolate",
    "induced_apply",
    "induced_series",
    "is_irreducible",
    "maximal_pressure_components",
    "perron_complement",
    "perron_triplet",
    "pressure_estimate",
    "pressure_growth",
    "regularity_report",
    "schur_frobenius_residual",
    "spectral_radius",
    "splitting_limit",
    "tilde_delta",
    "transitive_components",
]
