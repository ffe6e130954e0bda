"""Hausdorff dimension of quadratic Julia sets near parabolic parameters."""

from ._backend import BACKEND
from .config import DEFAULTS, Settings, load_settings
from .dynamics import (
    classify_parameter,
    continue_cycle,
    find_cycle,
    iterate,
    parabolic_parameter,
)
from .errors import DomainError, ParadimError, SolverError
from .pressure import (
    bowen_dimension,
    derivative_via_formula,
    gibbs_integral,
    periodic_pressure,
    preimage_pressure,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "DEFAULTS",
    "DomainError",
    "ParadimError",
    "Settings",
    "SolverError",
    "bowen_dimension",
    "classify_parameter",
    "continue_cycle",
    "derivative_via_formula",
    "find_cycle",
    "gibbs_integral",
    "iterate",
    "load_settings",
    "parabolic_parameter",
    "periodic_pressure",
    "preimage_pressure",
]
