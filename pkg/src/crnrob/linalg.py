"""Exact rational linear algebra on small dense matrices (lists of lists)."""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Sequence

Matrix = list[list[Fraction]]


def to_fractions(rows: Sequence[Sequence]) -> Matrix:
    return [[Fraction(v) if not isinstance(v, Fraction) else v for v in row] for row in rows]


def rref(rows: Sequence[Sequence]) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form and the list of pivot columns."""
    m = to_fractions(rows)
    if not m:
        return [], []
    n_rows, n_cols = len(m), len(m[0])
    pivots: list[int] = []
    r = 0
    for c in range(n_cols):
        if r == n_rows:
            break
        p = next((i for i in range(r, n_rows) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        inv = 1 / m[r][c]
        m[r] = [v * inv for v in m[r]]
        for i in range(n_rows):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
    return m, pivots


def rank(rows: Sequence[Sequence]) -> int:
    return len(rref(rows)[1])


def nullspace(rows: Sequence[Sequence], n_cols: int | None = None) -> Matrix:
    """Basis of ``{v : A v = 0}`` with one vector per free column."""
    if not rows:
        if n_cols is None:
            raise ValueError("n_cols required for an empty matrix")
        return [[Fraction(int(i == j)) for j in range(n_cols)] for i in range(n_cols)]
    m, pivots = rref(rows)
    n = len(m[0])
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * n
        v[f] = Fraction(1)
        for r, p in enumerate(pivots):
            v[p] = -m[r][f]
        basis.append(v)
    return basis


def transpose(rows: Sequence[Sequence]) -> Matrix:
    return [list(col) for col in zip(*rows)]


def primitive_integer_vector(v: Sequence[Fraction]) -> list[Fraction]:
    """Scale a rational vector to coprime integers (sign preserved)."""
    den = 1
    for x in v:
        den = den * x.denominator // gcd(den, x.denominator)
    ints = [int(x * den) for x in v]
    g = 0
    for x in ints:
        g = gcd(g, abs(x))
    if g == 0:
        return [Fraction(0)] * len(v)
    return [Fraction(x // g) for x in ints]


def row_basis_indices(rows: Sequence[Sequence]) -> list[int]:
    """Indices of the first maximal linearly independent subset of rows."""
    if not rows:
        return []
    return rref(transpose(rows))[1]
