"""Concentration robustness analysis for mass-action reaction networks."""

from .model import (
    Complex,
    DomainError,
    NetworkError,
    Reaction,
    ReactionNetwork,
    Species,
    mass_action_jacobian,
    mass_action_rhs,
    mass_action_rhs_exact,
    stoichiometric_matrix,
)
from .parser import NetworkParseError, parse_network, read_network, serialize

__version__ = "0.1.0"
