"""Free-energy geometry of cost-only gridworlds under information constraints."""

from infogeo.errors import (
    AllTruncatedError,
    DivergenceError,
    InfogeoError,
    MissingPairEntryError,
    NoConvergenceError,
    NonAbsorbingError,
    NumericalUnderflowError,
    OverlappingSupportsError,
)
from infogeo.mdp import GridSpec, Mdp, build_gridworld, state_coords, state_index
from infogeo.solver import SolveResult, SolverConfig, decision_information, solve

__version__ = "0.1.0"

__all__ = [
    "AllTruncatedError",
    "DivergenceError",
    "GridSpec",
    "InfogeoError",
    "Mdp",
    "MissingPairEntryError",
    "NoConvergenceError",
    "NonAbsorbingError",
    "NumericalUnderflowError",
    "OverlappingSupportsError",
    "SolveResult",
    "SolverConfig",
    "build_gridworld",
    "decision_information",
    "solve",
    "state_coords",
    "state_index",
]
