"""Multivariate gcd and irreducible factorization over Q.

These two operations are delegated to sympy; everything else in the
symbolic engine works on :class:`RationalPoly` directly.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

import sympy

from .poly import RationalPoly


def _gens(variables):
    return [sympy.Symbol(f"v{k}") for k in range(len(variables))]


def _to_sympy(p: RationalPoly) -> sympy.Poly:
    gens = _gens(p.variables)
    data = {e: sympy.Rational(c.numerator, c.denominator) for e, c in p.terms.items()}
    if not gens:
        raise ValueError("polynomial without variables")
    return sympy.Poly.from_dict(data or {(0,) * len(gens): 0}, *gens, domain="QQ")


def _from_sympy(sp: sympy.Poly, variables) -> RationalPoly:
    out = {}
    n = len(variables)
    for monom, coeff in sp.terms():
        c = sympy.Rational(coeff)
        e = tuple(monom) if n else ()
        out[e] = Fraction(int(c.p), int(c.q))
    return RationalPoly(variables, out)


@lru_cache(maxsize=4096)
def factor(p: RationalPoly) -> tuple[Fraction, tuple[tuple[RationalPoly, int], ...]]:
    """Irreducible factorization ``p = c * prod f_i**m_i``.

    Factors are primitive with positive leading coefficient; constants are
    collected in ``c``.
    """
    if p.is_zero():
        return Fraction(0), ()
    if p.is_constant():
        return p.constant_value(), ()
    sp = _to_sympy(p)
    c, facs = sp.factor_list()
    c = sympy.Rational(c)
    const = Fraction(int(c.p), int(c.q))
    out = []
    for f, m in facs:
        rp = _from_sympy(f, p.variables)
        prim = rp.primitive()
        const *= (rp.leading_term()[1] / prim.leading_term()[1]) ** m
        out.append((prim, int(m)))
    out.sort(key=lambda t: (t[0].degree(), len(t[0]), str(t[0])))
    return const, tuple(out)


def gcd(p: RationalPoly, q: RationalPoly) -> RationalPoly:
    """Primitive greatest common divisor (1 when coprime)."""
    if p.variables != q.variables:
        raise ValueError("variable mismatch")
    if p.is_zero():
        return q.primitive() if not q.is_zero() else q
    if q.is_zero():
        return p.primitive()
    if p.is_constant() or q.is_constant():
        return RationalPoly.constant(p.variables, 1)
    g = _from_sympy(sympy.gcd(_to_sympy(p), _to_sympy(q)), p.variables)
    return g.primitive() if not g.is_zero() else RationalPoly.constant(p.variables, 1)


def cancel(num: RationalPoly, den: RationalPoly) -> tuple[RationalPoly, RationalPoly]:
    """Reduce a fraction by the gcd; the denominator gets a positive leading term."""
    g = gcd(num, den)
    if not g.is_constant():
        num, den = num.divide_exact(g), den.divide_exact(g)
    lead = den.leading_term()[1]
    if den.is_constant():
        return num.scale(1 / lead), RationalPoly.constant(den.variables, 1)
    c = den.content()
    if lead < 0:
        c = -c
    return num.scale(1 / c), den.scale(1 / c)


def squarefree_factors(p: RationalPoly) -> list[RationalPoly]:
    """Distinct nonconstant irreducible factors of ``p``."""
    return [f for f, _ in factor(p)[1]]
