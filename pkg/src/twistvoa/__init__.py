"""Exact computations for the Heisenberg vertex algebra, its sigma-twisted module,
and coinvariants on the double cover t -> t^2 of the projective line."""

from .heisenberg import FockVector, Sector, TWISTED, VACUUM_SECTOR, Witness, parse_fock, format_fock
from .scalars import Surd
from .series import FracSeries, delta_coefficients

__all__ = [
    "FockVector",
    "FracSeries",
    "Sector",
    "Surd",
    "TWISTED",
    "VACUUM_SECTOR",
    "Witness",
    "delta_coefficients",
    "format_fock",
    "parse_fock",
]
__version__ = "0.1.0"
