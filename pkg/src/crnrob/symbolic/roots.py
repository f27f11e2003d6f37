"""Real root isolation of univariate rational polynomials via Sturm sequences.

Univariate polynomials are handled as coefficient lists of Fractions,
lowest degree first.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import floor
from typing import Sequence

from .poly import RationalPoly

UPoly = list[Fraction]


def trim(p: Sequence) -> UPoly:
    p = [Fraction(c) for c in p]
    while p and p[-1] == 0:
        p.pop()
    return p


def degree(p: UPoly) -> int:
    return len(p) - 1


def evaluate(p: UPoly, x):
    acc = Fraction(0) if isinstance(x, (int, Fraction)) else 0.0
    for c in reversed(p):
        acc = acc * x + c
    return acc


def derivative(p: UPoly) -> UPoly:
    return trim([c * k for k, c in enumerate(p)][1:])


def divmod_upoly(a: UPoly, b: UPoly) -> tuple[UPoly, UPoly]:
    a, b = trim(a), trim(b)
    if not b:
        raise ZeroDivisionError("division by zero polynomial")
    q = [Fraction(0)] * max(len(a) - len(b) + 1, 1)
    r = a[:]
    lb = b[-1]
    while len(r) >= len(b) and r:
        shift = len(r) - len(b)
        f = r[-1] / lb
        q[shift] = f
        for k, c in enumerate(b):
            r[k + shift] -= f * c
        r = trim(r)
    return trim(q), r


def gcd_upoly(a: UPoly, b: UPoly) -> UPoly:
    a, b = trim(a), trim(b)
    while b:
        a, b = b, divmod_upoly(a, b)[1]
    if not a:
        return a
    return [c / a[-1] for c in a]


def squarefree(p: UPoly) -> UPoly:
    p = trim(p)
    if len(p) <= 2:
        return p
    g = gcd_upoly(p, derivative(p))
    if len(g) <= 1:
        return p
    return divmod_upoly(p, g)[0]


def sturm_sequence(p: UPoly) -> list[UPoly]:
    seq = [trim(p), derivative(trim(p))]
    while seq[-1]:
        r = divmod_upoly(seq[-2], seq[-1])[1]
        if not r:
            break
        seq.append([-c for c in r])
    return [s for s in seq if s]


def _sign(v) -> int:
    return (v > 0) - (v < 0)


def _variations(signs: list[int]) -> int:
    s = [x for x in signs if x != 0]
    return sum(1 for a, b in zip(s, s[1:]) if a != b)


def variations_at(seq: list[UPoly], x: Fraction) -> int:
    return _variations([_sign(evaluate(p, x)) for p in seq])


def variations_at_infinity(seq: list[UPoly]) -> int:
    return _variations([_sign(p[-1]) for p in seq])


def count_roots(seq: list[UPoly], a: Fraction, b: Fraction | None) -> int:
    """Distinct real roots in ``(a, b]`` (``b=None`` means +infinity)."""
    va = variations_at(seq, a)
    vb = variations_at_infinity(seq) if b is None else variations_at(seq, b)
    return va - vb


def cauchy_bound(p: UPoly) -> Fraction:
    p = trim(p)
    lead = abs(p[-1])
    return 1 + max((abs(c) / lead for c in p[:-1]), default=Fraction(0))


def simplest_between(lo: Fraction, hi: Fraction) -> Fraction:
    """Fraction with the smallest denominator in the closed interval ``[lo, hi]``."""
    if lo > hi:
        lo, hi = hi, lo
    if lo <= 0 <= hi:
        return Fraction(0)
    if hi < 0:
        return -simplest_between(-hi, -lo)
    fl = floor(lo)
    if fl == lo:
        return Fraction(fl)
    if fl + 1 <= hi:
        return Fraction(fl + 1)
    # lo and hi share the integer part; recurse on reciprocals of the fractional parts
    rest = simplest_between(1 / (hi - fl), 1 / (lo - fl))
    return fl + 1 / rest


@dataclass(frozen=True)
class RootValue:
    """A real algebraic number: exact rational, or isolating interval of a square-free polynomial."""

    lo: Fraction
    hi: Fraction
    exact: Fraction | None = None
    poly: tuple[Fraction, ...] = field(default=(), compare=False)

    @classmethod
    def rational(cls, v: Fraction) -> "RootValue":
        v = Fraction(v)
        return cls(v, v, v, (-v, Fraction(1)))

    @property
    def is_exact(self) -> bool:
        return self.exact is not None

    def __float__(self) -> float:
        if self.exact is not None:
            return float(self.exact)
        return float((self.lo + self.hi) / 2)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def is_zero(self) -> bool:
        return self.exact == 0

    def sign(self) -> int:
        if self.exact is not None:
            return _sign(self.exact)
        if self.lo >= 0:
            return 1
        if self.hi <= 0:
            return -1
        return 0

    def approx_equal(self, other: "RootValue") -> bool:
        """Same algebraic number (intervals overlap and the defining polynomials share it)."""
        if self.exact is not None and other.exact is not None:
            return self.exact == other.exact
        return not (self.hi < other.lo or other.hi < self.lo)

    def __str__(self) -> str:
        if self.exact is not None:
            return str(self.exact)
        return f"[{self.lo}, {self.hi}]"

    def to_json(self):
        if self.exact is not None:
            return str(self.exact)
        return {"interval": [str(self.lo), str(self.hi)], "approx": float(self)}


def isolate_real_roots(p: Sequence, lower: Fraction | None = None, width: Fraction = Fraction(1, 10**12)) -> list[RootValue]:
    """Distinct real roots, ascending; only roots ``>= lower`` when given.

    Rational roots are detected exactly; irrational roots come back as
    isolating intervals narrower than ``width``.
    """
    p = trim(p)
    if len(p) <= 1:
        return []
    sq = squarefree(p)
    seq = sturm_sequence(sq)
    bound = cauchy_bound(sq)
    lo = -bound if lower is None else Fraction(lower)
    out: list[RootValue] = []
    # a root exactly at ``lower`` is not counted by (lo, hi]; check it directly
    if lower is not None and evaluate(sq, lo) == 0:
        out.append(RootValue.rational(lo))
    if lo >= bound:
        return out
    stack = [(lo, bound)]
    intervals = []
    while stack:
        a, b = stack.pop()
        n = count_roots(seq, a, b)
        if n == 0:
            continue
        if n == 1:
            intervals.append((a, b))
            continue
        mid = (a + b) / 2
        stack.append((mid, b))
        stack.append((a, mid))
    for a, b in sorted(intervals):
        out.append(_refine(sq, seq, a, b, width))
    out.sort(key=lambda r: r.lo)
    return out


def _refine(sq: UPoly, seq: list[UPoly], a: Fraction, b: Fraction, width: Fraction) -> RootValue:
    """Shrink ``(a, b]`` holding exactly one root; detect rational roots exactly."""
    if evaluate(sq, b) == 0:
        return RootValue.rational(b)
    while True:
        guess = simplest_between(a, b)
        if a < guess <= b and evaluate(sq, guess) == 0:
            return RootValue.rational(guess)
        if b - a < width:
            return RootValue(a, b, None, tuple(sq))
        mid = (a + b) / 2
        if evaluate(sq, mid) == 0:
            return RootValue.rational(mid)
        if count_roots(seq, a, mid) == 1:
            b = mid
        else:
            a = mid


@dataclass(frozen=True)
class RootReport:
    nonneg_roots: tuple[RootValue, ...]
    has_zero_root: bool
    has_positive_root: bool

    @property
    def positive_roots(self) -> tuple[RootValue, ...]:
        return tuple(r for r in self.nonneg_roots if not r.is_zero())


def upoly_from(q) -> UPoly:
    """Coefficient list of a univariate :class:`RationalPoly` (or a plain sequence)."""
    if isinstance(q, RationalPoly):
        used = q.free_variables()
        if len(used) > 1:
            raise ValueError(f"expected a univariate polynomial, got variables {used}")
        if not used:
            return trim([q.constant_term()])
        coeffs = q.coefficient_list(used[0])
        return trim([c.constant_term() for c in coeffs])
    return trim(q)


def analyze_roots(q) -> RootReport:
    """Nonnegative real roots of a nonzero univariate polynomial.

    Example:
        >>> r = analyze_roots([1, -2])   # 1 - 2x
        >>> [str(v) for v in r.nonneg_roots]
        ['1/2']
    """
    p = upoly_from(q)
    if not p:
        raise ValueError("q must be nonzero")
    roots = tuple(isolate_real_roots(p, lower=Fraction(0)))
    has_zero = any(r.is_zero() for r in roots)
    return RootReport(roots, has_zero, any(not r.is_zero() for r in roots))
