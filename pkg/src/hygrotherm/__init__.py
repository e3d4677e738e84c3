"""One-dimensional heat and moisture transport in concrete exposed to fire."""

__version__ = "0.1.0"

from .errors import ConfigError, DomainError, SolverError  # noqa: E402
from .fire import BoundaryParams, ConstantAmbient, Hydrocarbon, ISO834, Parametric, make_scenario  # noqa: E402
from .materials import MaterialParams  # noqa: E402
from .solver import Mesh1D, Problem, SolverOptions, SystemState, initial_state, simulate  # noqa: E402

__all__ = ["ConfigError", "DomainError", "SolverError", "BoundaryParams", "ConstantAmbient",
           "Hydrocarbon", "ISO834", "Parametric", "make_scenario", "MaterialParams", "Mesh1D",
           "Problem", "SolverOptions", "SystemState", "initial_state", "simulate"]
