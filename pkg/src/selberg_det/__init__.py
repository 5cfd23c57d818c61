"""Selberg zeta functions, Mayer transfer operators and regularized determinants
for the modular group and its finite-index subgroups."""

from .errors import SelbergDetError
from .specfun import EvalResult

__version__ = "0.1.0"

__all__ = ["EvalResult", "SelbergDetError", "__version__"]
