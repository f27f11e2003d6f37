"""Conservation laws: the left kernel of the stoichiometric matrix.

Positive laws (nonnegative kernel vectors) are the extreme rays of the cone
``kernel ∩ nonnegative orthant`` and are enumerated exactly with the double
description method.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import linalg
from .model import ReactionNetwork, stoichiometric_matrix


@dataclass(frozen=True)
class ConservationLaw:
    coeffs: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(Fraction(c) for c in self.coeffs))

    @property
    def support(self) -> frozenset[int]:
        return frozenset(k for k, c in enumerate(self.coeffs) if c != 0)

    @property
    def positive(self) -> bool:
        return any(c != 0 for c in self.coeffs) and min(self.coeffs) >= 0

    def dot(self, x: Sequence) -> Fraction | float:
        if all(isinstance(v, (int, Fraction)) for v in x):
            return sum((c * Fraction(v) for c, v in zip(self.coeffs, x)), Fraction(0))
        return float(np.dot(np.array([float(c) for c in self.coeffs]), np.asarray(x, dtype=float)))

    def as_array(self) -> np.ndarray:
        return np.array([float(c) for c in self.coeffs])

    def expression(self, names: Sequence[str]) -> str:
        """Linear expression such as ``X + 2 XY``."""
        parts = []
        for c, n in zip(self.coeffs, names):
            if c == 0:
                continue
            mag = abs(c)
            term = n if mag == 1 else f"{mag} {n}"
            if not parts:
                parts.append(term if c > 0 else f"-{term}")
            else:
                parts.append(("+ " if c > 0 else "- ") + term)
        return " ".join(parts) if parts else "0"


@dataclass(frozen=True)
class ConservedTotals:
    values: tuple

    def __len__(self):
        return len(self.values)

    def __getitem__(self, k):
        return self.values[k]


def _as_matrix(S) -> list[list[Fraction]]:
    if isinstance(S, ReactionNetwork):
        S = stoichiometric_matrix(S)
    S = np.asarray(S) if not isinstance(S, list) else S
    return [[Fraction(int(v)) if float(v).is_integer() else Fraction(v) for v in row] for row in S]


def kernel_basis(S) -> list[ConservationLaw]:
    """Basis of ``{c : c^T S = 0}`` by exact Gaussian elimination.

    ``S`` may be a stoichiometric matrix (``d x r``) or a network. Each basis
    vector is scaled to coprime integers.
    """
    if isinstance(S, ReactionNetwork):
        d = S.n_species
        rows = _as_matrix(S)
    else:
        rows = _as_matrix(S)
        d = len(rows)
    if d == 0:
        return []
    r = len(rows[0]) if rows else 0
    if r == 0:
        vecs = linalg.nullspace([], n_cols=d)
    else:
        vecs = linalg.nullspace(linalg.transpose(rows))
    return [ConservationLaw(tuple(linalg.primitive_integer_vector(v))) for v in vecs]


def _normalize_ray(v: Sequence[Fraction]) -> tuple[Fraction, ...]:
    smallest = min(abs(c) for c in v if c != 0)
    return tuple(Fraction(c) / smallest for c in v)


def positive_laws(basis: Sequence[ConservationLaw]) -> list[ConservationLaw]:
    """Extreme rays of the cone of nonnegative kernel vectors.

    The cone is ``{y B : y B >= 0}`` for the basis matrix ``B``; its rays are
    found in ``y`` coordinates with the double description method, then mapped
    back. Each ray is scaled so its smallest nonzero coefficient is 1, and the
    list is sorted in descending lexicographic order of coefficients so the
    output does not depend on how the basis was scaled or ordered.
    """
    if not basis:
        return []
    B = [list(law.coeffs) for law in basis]
    m, d = len(B), len(B[0])
    A = linalg.transpose(B)  # constraint rows a_k . y >= 0, one per species
    rays = _double_description(A, m)
    out = set()
    for y in rays:
        c = [sum((y[i] * B[i][k] for i in range(m)), Fraction(0)) for k in range(d)]
        if any(v != 0 for v in c):
            out.add(_normalize_ray(c))
    return [ConservationLaw(c) for c in sorted(out, reverse=True)]


def _double_description(A: list[list[Fraction]], m: int) -> list[list[Fraction]]:
    """Extreme rays of the pointed cone ``{y in Q^m : A y >= 0}``.

    ``A`` must have rank ``m`` (true for a kernel basis). The algorithm starts
    from the simplicial cone cut out by ``m`` independent rows and adds the
    remaining constraints one at a time, using the algebraic adjacency test.
    """
    n = len(A)
    start = linalg.row_basis_indices(A)
    if len(start) < m:
        raise ValueError("constraint matrix must have full column rank")
    sub = [A[i] for i in start]
    # the columns of sub^{-1} are the rays of the initial simplicial cone
    inv = _inverse(sub)
    rays = [[inv[r][c] for r in range(m)] for c in range(m)]
    processed = list(start)

    def dot(a, y):
        return sum((ai * yi for ai, yi in zip(a, y)), Fraction(0))

    for k in range(n):
        if k in start:
            continue
        a = A[k]
        vals = [dot(a, y) for y in rays]
        plus = [i for i, v in enumerate(vals) if v > 0]
        zero = [i for i, v in enumerate(vals) if v == 0]
        minus = [i for i, v in enumerate(vals) if v < 0]
        new = [rays[i] for i in plus + zero]
        active = [{j for j in processed if dot(A[j], y) == 0} for y in rays]
        for i in plus:
            for j in minus:
                common = active[i] & active[j]
                if len(common) < m - 2:
                    continue
                if m > 2 and linalg.rank([A[t] for t in common]) < m - 2:
                    continue
                y = [vals[i] * rj - vals[j] * ri for ri, rj in zip(rays[i], rays[j])]
                new.append(_primitive(y))
        processed.append(k)
        rays = _dedupe(new)
    return rays


def _primitive(v: list[Fraction]) -> list[Fraction]:
    return linalg.primitive_integer_vector(v)


def _dedupe(rays: list[list[Fraction]]) -> list[list[Fraction]]:
    seen, out = set(), []
    for r in rays:
        key = tuple(_primitive(r))
        if any(key) and key not in seen:
            seen.add(key)
            out.append(list(key))
    return out


def _inverse(M: list[list[Fraction]]) -> list[list[Fraction]]:
    n = len(M)
    aug = [list(row) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(M)]
    red, _ = linalg.rref(aug)
    return [row[n:] for row in red]


def totals(laws: Sequence[ConservationLaw], x0: Sequence) -> ConservedTotals:
    """Conserved totals ``c_k . x0``; exact when ``x0`` is rational."""
    if any(len(law.coeffs) != len(x0) for law in laws):
        raise ValueError(f"initial condition has {len(x0)} entries, laws expect {len(laws[0].coeffs)}")
    if any(float(v) < 0 for v in x0):
        raise ValueError("initial concentrations must be nonnegative")
    return ConservedTotals(tuple(law.dot(x0) for law in laws))


def analysis_laws(basis: Sequence[ConservationLaw], positive: Sequence[ConservationLaw]) -> list[ConservationLaw]:
    """A basis of the kernel that uses positive laws wherever possible.

    Positive rays are taken greedily in order while they stay independent;
    the basis is then completed from ``basis``. The totals of these laws are
    the independent symbols of the elimination step.
    """
    chosen: list[ConservationLaw] = []
    for law in list(positive) + list(basis):
        trial = [list(c.coeffs) for c in chosen] + [list(law.coeffs)]
        if linalg.rank(trial) == len(trial):
            chosen.append(law)
        if len(chosen) == len(basis):
            break
    return chosen


def positive_support_contains(positive: Sequence[ConservationLaw], input_i: int, output_j: int) -> bool:
    """True when some positive law contains ``output_j`` but not ``input_i``.

    In that case the output stays bounded along the dose-response curve.
    """
    return any(output_j in law.support and input_i not in law.support for law in positive)


__all__ = [
    "ConservationLaw",
    "ConservedTotals",
    "kernel_basis",
    "positive_laws",
    "totals",
    "analysis_laws",
    "positive_support_contains",
]
