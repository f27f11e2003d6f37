"""Exact symbolic engine: polynomials, elimination, roots and limits."""

from .elimination import (
    ElimPolynomial,
    NetworkAlgebra,
    NotFound,
    SpecializationError,
    SteadyStateParametrization,
    Unsupported,
    eliminate_to_univariate,
    find_parametrization,
    specialize_input,
    steady_state_equations,
)
from .limits import LimitCertificate, LimitKind, certified_limit, propagate_limits
from .poly import RationalPoly
from .roots import RootReport, RootValue, analyze_roots

__all__ = [
    "ElimPolynomial",
    "LimitCertificate",
    "LimitKind",
    "NetworkAlgebra",
    "NotFound",
    "RationalPoly",
    "RootReport",
    "RootValue",
    "SpecializationError",
    "SteadyStateParametrization",
    "Unsupported",
    "analyze_roots",
    "certified_limit",
    "eliminate_to_univariate",
    "find_parametrization",
    "propagate_limits",
    "specialize_input",
    "steady_state_equations",
]
