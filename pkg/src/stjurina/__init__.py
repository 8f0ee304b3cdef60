"""Exact invariants of isolated hypersurface singularities and Sebastiani–Thom joins."""

from .polyring import Polynomial, VariableSet, parse_polynomial
from .invariants import Germ, invariant_report, milnor_number, tjurina_number, nu1, bs_exponent
from .join import make_join, verify_theorem, tau_join

__version__ = "0.1.0"

__all__ = [
    "Germ",
    "Polynomial",
    "VariableSet",
    "bs_exponent",
    "invariant_report",
    "make_join",
    "milnor_number",
    "nu1",
    "parse_polynomial",
    "tau_join",
    "tjurina_number",
    "verify_theorem",
]
