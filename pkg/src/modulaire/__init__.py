"""Finite-dimensional operator algebras and modular theory."""

__version__ = "0.1.0"

from .errors import DimensionError, DomainError, ModulaireError, PreconditionError
from .linalg import DEFAULT_TOL, Tolerances

__all__ = [
    "DEFAULT_TOL",
    "DimensionError",
    "DomainError",
    "ModulaireError",
    "PreconditionError",
    "Tolerances",
    "__version__",
]
