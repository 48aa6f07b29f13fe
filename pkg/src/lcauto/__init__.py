"""Finite automata for spacetime diagrams of linear cellular automata over F_p."""

__version__ = "0.1.0"

from .algebra import LaurentPoly, decode_base, encode_base, parse_poly
from .dfao import Dfao, combine, iso_check, minimize
from .errors import BudgetExceeded, DomainError, UsageError
from .lca import GeneratingPolynomial, SpacetimeGrid, generate_grid
from .substitution import InitialCondition, Substitution, substitution, subst_to_dfao
from .synthesis import build_st_automaton, kernel_closure, to_negp

__all__ = [
    "BudgetExceeded",
    "Dfao",
    "DomainError",
    "GeneratingPolynomial",
    "InitialCondition",
    "LaurentPoly",
    "SpacetimeGrid",
    "Substitution",
    "UsageError",
    "build_st_automaton",
    "combine",
    "decode_base",
    "encode_base",
    "generate_grid",
    "iso_check",
    "kernel_closure",
    "minimize",
    "parse_poly",
    "subst_to_dfao",
    "substitution",
    "to_negp",
]
