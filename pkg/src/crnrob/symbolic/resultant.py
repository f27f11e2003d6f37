"""Resultants of multivariate polynomials with respect to one variable."""

from __future__ import annotations

from .poly import RationalPoly


def sylvester_matrix(f: RationalPoly, g: RationalPoly, name: str) -> list[list[RationalPoly]]:
    """Sylvester matrix of ``f`` and ``g`` viewed as polynomials in ``name``."""
    fc = f.coefficient_list(name)[::-1]  # highest power first
    gc = g.coefficient_list(name)[::-1]
    m, n = len(fc) - 1, len(gc) - 1
    size = m + n
    zero = RationalPoly.zero(f.variables)
    rows = []
    for i in range(n):
        rows.append([zero] * i + fc + [zero] * (size - m - 1 - i))
    for i in range(m):
        rows.append([zero] * i + gc + [zero] * (size - n - 1 - i))
    return rows


def bareiss_determinant(M: list[list[RationalPoly]]) -> RationalPoly:
    """Fraction-free determinant; every division in the recurrence is exact."""
    n = len(M)
    if n == 0:
        raise ValueError("empty matrix")
    A = [row[:] for row in M]
    variables = A[0][0].variables
    sign = 1
    prev = RationalPoly.constant(variables, 1)
    for k in range(n - 1):
        if A[k][k].is_zero():
            swap = next((i for i in range(k + 1, n) if not A[i][k].is_zero()), None)
            if swap is None:
                return RationalPoly.zero(variables)
            A[k], A[swap] = A[swap], A[k]
            sign = -sign
        pivot = A[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                num = pivot * A[i][j] - A[i][k] * A[k][j]
                A[i][j] = num.divide_exact(prev) if not prev.is_constant() else num.scale(1 / prev.constant_value())
            A[i][k] = RationalPoly.zero(variables)
        prev = pivot
    det = A[n - 1][n - 1]
    return det if sign > 0 else -det


def resultant(f: RationalPoly, g: RationalPoly, name: str) -> RationalPoly:
    """``Res_name(f, g)``, a polynomial free of ``name``.

    Uses the Sylvester determinant with Bareiss elimination. When one input
    has degree zero in ``name`` the resultant is that input raised to the
    other's degree.
    """
    if f.variables != g.variables:
        raise ValueError("variable mismatch")
    if f.is_zero() or g.is_zero():
        return RationalPoly.zero(f.variables)
    m, n = f.degree(name), g.degree(name)
    if m == 0 and n == 0:
        return RationalPoly.constant(f.variables, 1)
    if m == 0:
        return f**n
    if n == 0:
        return g**m
    return bareiss_determinant(sylvester_matrix(f, g, name))
