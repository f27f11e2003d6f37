"""Reaction network representation and the mass-action vector field.

A network is an immutable value: species in declaration order, reactions in
source order and exact rational rate constants. Everything numeric (the
stoichiometric matrix, the rate vector, the Jacobian) is derived from it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np


class NetworkError(ValueError):
    """Raised when a network violates a structural invariant."""


class DomainError(ValueError):
    """Raised when a concentration vector is outside the nonnegative orthant."""


@dataclass(frozen=True)
class Species:
    name: str
    index: int


@dataclass(frozen=True)
class Complex:
    """Stoichiometric coefficients of a complex, one entry per species."""

    coefficients: tuple[int, ...]

    def __post_init__(self):
        if any((not isinstance(c, int)) or c < 0 for c in self.coefficients):
            raise NetworkError(f"complex coefficients must be nonnegative integers: {self.coefficients}")

    @property
    def is_empty(self) -> bool:
        return not any(self.coefficients)

    @property
    def order(self) -> int:
        return sum(self.coefficients)

    def format(self, names: Sequence[str]) -> str:
        """Canonical text form, e.g. ``X + 2 Y`` or ``0``."""
        terms = []
        for name, c in zip(names, self.coefficients):
            if c == 1:
                terms.append(name)
            elif c > 1:
                terms.append(f"{c} {name}")
        return " + ".join(terms) if terms else "0"


@dataclass(frozen=True)
class Reaction:
    reactant: Complex
    product: Complex
    rate: Fraction
    rate_name: str | None = None

    def __post_init__(self):
        if self.reactant == self.product:
            raise NetworkError("reactant and product complexes must differ")
        if not isinstance(self.rate, Fraction):
            object.__setattr__(self, "rate", Fraction(self.rate))
        if self.rate <= 0:
            raise NetworkError(f"rate constant must be positive, got {self.rate}")

    @property
    def vector(self) -> tuple[int, ...]:
        return tuple(p - r for p, r in zip(self.product.coefficients, self.reactant.coefficients))


@dataclass(frozen=True)
class ReactionNetwork:
    """A finite simple directed graph of complexes with mass-action rates.

    Attributes:
        species: Species in declaration order.
        reactions: Reactions in source order.
        parameters: Named rate constants as ``(name, value)`` pairs.
    """

    species: tuple[Species, ...]
    reactions: tuple[Reaction, ...]
    parameters: tuple[tuple[str, Fraction], ...] = field(default=())

    def __post_init__(self):
        names = [s.name for s in self.species]
        if len(set(names)) != len(names):
            raise NetworkError("species names must be unique")
        for k, s in enumerate(self.species):
            if s.index != k:
                raise NetworkError(f"species {s.name!r} has index {s.index}, expected {k}")
        d = len(self.species)
        seen = set()
        params = dict(self.parameters)
        for rxn in self.reactions:
            if len(rxn.reactant.coefficients) != d or len(rxn.product.coefficients) != d:
                raise NetworkError("complex length does not match the species count")
            edge = (rxn.reactant, rxn.product)
            if edge in seen:
                raise NetworkError("duplicate reaction edge " + self.format_reaction(rxn))
            seen.add(edge)
            if rxn.rate_name is not None:
                if rxn.rate_name not in params:
                    raise NetworkError(f"unresolved parameter {rxn.rate_name!r}")
                if params[rxn.rate_name] != rxn.rate:
                    raise NetworkError(f"rate of {self.format_reaction(rxn)} disagrees with parameter {rxn.rate_name!r}")
        for name, value in self.parameters:
            if Fraction(value) <= 0:
                raise NetworkError(f"parameter {name!r} must be positive")

    # construction helpers -------------------------------------------------

    @classmethod
    def from_reactions(
        cls,
        species: Sequence[str],
        reactions: Iterable[tuple[Mapping[str, int], Mapping[str, int], object]],
        parameters: Mapping[str, object] | None = None,
    ) -> "ReactionNetwork":
        """Build a network from ``(reactant, product, rate)`` triples.

        Complexes are given as ``{name: coefficient}`` maps. A rate may be a
        number (converted exactly) or the name of an entry in ``parameters``.

        Example:
            >>> net = ReactionNetwork.from_reactions(
            ...     ["X", "Y"], [({"X": 1, "Y": 1}, {"Y": 2}, "alpha"), ({"Y": 1}, {"X": 1}, 1)],
            ...     {"alpha": 2})
            >>> net.rate_constants
            (Fraction(2, 1), Fraction(1, 1))
        """
        params = {k: _to_fraction(v) for k, v in (parameters or {}).items()}
        index = {name: k for k, name in enumerate(species)}

        def cplx(spec: Mapping[str, int]) -> Complex:
            coeffs = [0] * len(species)
            for name, c in spec.items():
                if name not in index:
                    raise NetworkError(f"unknown species {name!r}")
                coeffs[index[name]] += int(c)
            return Complex(tuple(coeffs))

        rxns = []
        for reac, prod, rate in reactions:
            if isinstance(rate, str):
                if rate not in params:
                    raise NetworkError(f"unresolved parameter {rate!r}")
                rxns.append(Reaction(cplx(reac), cplx(prod), params[rate], rate))
            else:
                rxns.append(Reaction(cplx(reac), cplx(prod), _to_fraction(rate)))
        return cls(
            tuple(Species(n, k) for k, n in enumerate(species)),
            tuple(rxns),
            tuple(params.items()),
        )

    def with_parameters(self, overrides: Mapping[str, object]) -> "ReactionNetwork":
        """Return a copy with some named rate constants replaced."""
        params = dict(self.parameters)
        for name, value in overrides.items():
            if name not in params:
                raise NetworkError(f"unknown parameter {name!r}")
            params[name] = _to_fraction(value)
        rxns = tuple(
            Reaction(r.reactant, r.product, params[r.rate_name], r.rate_name) if r.rate_name else r
            for r in self.reactions
        )
        return ReactionNetwork(self.species, rxns, tuple(params.items()))

    def with_reaction(self, reactant: Mapping[str, int], product: Mapping[str, int], rate) -> "ReactionNetwork":
        """Return a new network with one extra reaction appended."""
        triples = [(self._as_map(r.reactant), self._as_map(r.product), r.rate_name or r.rate) for r in self.reactions]
        triples.append((reactant, product, rate))
        return ReactionNetwork.from_reactions(self.species_names, triples, self.parameter_map)

    def _as_map(self, c: Complex) -> dict[str, int]:
        return {s.name: k for s, k in zip(self.species, c.coefficients) if k}

    # views ----------------------------------------------------------------

    @property
    def species_names(self) -> tuple[str, ...]:
        return tuple(s.name for s in self.species)

    @property
    def parameter_map(self) -> dict[str, Fraction]:
        return dict(self.parameters)

    @property
    def n_species(self) -> int:
        return len(self.species)

    @property
    def n_reactions(self) -> int:
        return len(self.reactions)

    @property
    def rate_constants(self) -> tuple[Fraction, ...]:
        return tuple(r.rate for r in self.reactions)

    def index(self, name: str) -> int:
        for s in self.species:
            if s.name == name:
                return s.index
        raise KeyError(f"unknown species {name!r}")

    def format_reaction(self, rxn: Reaction) -> str:
        names = self.species_names
        return f"{rxn.reactant.format(names)} -> {rxn.product.format(names)}"

    @cached_property
    def _system(self) -> "MassActionSystem":
        return MassActionSystem(self)


def _to_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        # decimal literal semantics: 0.1 means 1/10, not the nearest double
        return Fraction(repr(value))
    return Fraction(value)


def stoichiometric_matrix(net: ReactionNetwork) -> np.ndarray:
    """Integer ``d x r`` matrix whose column ``i`` is product minus reactant."""
    d, r = net.n_species, net.n_reactions
    out = np.zeros((d, r), dtype=np.int64)
    for i, rxn in enumerate(net.reactions):
        out[:, i] = rxn.vector
    return out


class MassActionSystem:
    """Precomputed float arrays for fast evaluation of the vector field.

    The integrator and the Newton polish call into this directly; no
    domain checks are made here because intermediate iterates may dip a
    hair below zero.
    """

    def __init__(self, net: ReactionNetwork):
        self.d = net.n_species
        self.r = net.n_reactions
        self.N = stoichiometric_matrix(net).astype(float)
        self.Y = np.array([rx.reactant.coefficients for rx in net.reactions], dtype=np.int64).reshape(self.r, self.d)
        self.k = np.array([float(rx.rate) for rx in net.reactions], dtype=float)
        # reactions whose monomial involves species k, with exponent lowered by one
        self._dY = []
        for s in range(self.d):
            rows = np.nonzero(self.Y[:, s])[0]
            low = self.Y[rows].copy()
            low[:, s] -= 1
            self._dY.append((rows, low, self.Y[rows, s].astype(float)))

    def fluxes(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.r == 0:
            return np.zeros(0)
        return self.k * np.prod(np.power(x[None, :], self.Y), axis=1)

    def rhs(self, x: np.ndarray) -> np.ndarray:
        return self.N @ self.fluxes(x)

    def flux_jacobian(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        dv = np.zeros((self.r, self.d))
        for s, (rows, low, expo) in enumerate(self._dY):
            if len(rows):
                dv[rows, s] = self.k[rows] * expo * np.prod(np.power(x[None, :], low), axis=1)
        return dv

    def jacobian(self, x: np.ndarray) -> np.ndarray:
        return self.N @ self.flux_jacobian(x)


def _check_domain(x: np.ndarray, d: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (d,):
        raise DomainError(f"expected a concentration vector of length {d}, got shape {x.shape}")
    if np.any(x < 0) or not np.all(np.isfinite(x)):
        raise DomainError("concentrations must be finite and nonnegative")
    return x


def mass_action_rhs(net: ReactionNetwork, x) -> np.ndarray:
    """Mass-action rate vector ``sum_i k_i (nu_i' - nu_i) x**nu_i``.

    Raises:
        DomainError: if any entry of ``x`` is negative.
    """
    x = _check_domain(x, net.n_species)
    return net._system.rhs(x)


def mass_action_jacobian(net: ReactionNetwork, x) -> np.ndarray:
    """Analytic Jacobian of :func:`mass_action_rhs`; entry (j, k) is d rhs_j / d x_k."""
    x = _check_domain(x, net.n_species)
    return net._system.jacobian(x)


def mass_action_rhs_exact(net: ReactionNetwork, x: Sequence) -> list[Fraction]:
    """Rational-arithmetic evaluation of the rate vector.

    Every entry of ``x`` is converted with :class:`fractions.Fraction`, so
    integer, rational and decimal-string inputs give exact results.
    """
    xs = [_to_fraction(v) for v in x]
    if len(xs) != net.n_species:
        raise DomainError(f"expected {net.n_species} concentrations, got {len(xs)}")
    if any(v < 0 for v in xs):
        raise DomainError("concentrations must be nonnegative")
    out = [Fraction(0)] * net.n_species
    for rxn in net.reactions:
        flux = rxn.rate
        for v, e in zip(xs, rxn.reactant.coefficients):
            if e:
                flux *= v**e
        if flux:
            for s, delta in enumerate(rxn.vector):
                if delta:
                    out[s] += delta * flux
    return out
