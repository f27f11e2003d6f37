"""Sparse multivariate polynomials with exact rational coefficients."""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Iterable, Mapping, Sequence

Exp = tuple[int, ...]


def _frac(c) -> Fraction:
    return c if isinstance(c, Fraction) else Fraction(c)


class RationalPoly:
    """Polynomial over Q in a fixed, ordered tuple of variables.

    Terms map exponent tuples to nonzero :class:`~fractions.Fraction`
    coefficients. Values are treated as immutable; every operation returns a
    new polynomial. Binary operations require identical variable tuples
    (use :meth:`with_variables` to align).
    """

    __slots__ = ("variables", "terms", "_hash")

    def __init__(self, variables: Sequence[str], terms: Mapping[Exp, object] | None = None):
        self.variables = tuple(variables)
        n = len(self.variables)
        clean: dict[Exp, Fraction] = {}
        for e, c in (terms or {}).items():
            c = _frac(c)
            if c != 0:
                e = tuple(e)
                if len(e) != n:
                    raise ValueError(f"exponent {e} does not match variables {self.variables}")
                clean[e] = c
        self.terms = clean
        self._hash = None

    # constructors ---------------------------------------------------------

    @classmethod
    def zero(cls, variables: Sequence[str]) -> "RationalPoly":
        return cls(variables)

    @classmethod
    def constant(cls, variables: Sequence[str], c) -> "RationalPoly":
        return cls(variables, {(0,) * len(variables): c})

    @classmethod
    def var(cls, variables: Sequence[str], name: str) -> "RationalPoly":
        variables = tuple(variables)
        e = [0] * len(variables)
        e[variables.index(name)] = 1
        return cls(variables, {tuple(e): 1})

    @classmethod
    def monomial(cls, variables: Sequence[str], exps: Exp, c=1) -> "RationalPoly":
        return cls(variables, {tuple(exps): c})

    @classmethod
    def from_univariate(cls, variables: Sequence[str], name: str, coeffs: Sequence) -> "RationalPoly":
        """``sum coeffs[k] * name**k``; coefficients may be scalars or polynomials."""
        variables = tuple(variables)
        out = cls.zero(variables)
        x = cls.var(variables, name)
        power = cls.constant(variables, 1)
        for c in coeffs:
            if isinstance(c, RationalPoly):
                out = out + c.with_variables(variables) * power
            elif c:
                out = out + power.scale(c)
            power = power * x
        return out

    # basic properties -----------------------------------------------------

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not any(e) for e in self.terms)

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError("polynomial is not constant")
        return next(iter(self.terms.values()), Fraction(0))

    def constant_term(self) -> Fraction:
        return self.terms.get((0,) * len(self.variables), Fraction(0))

    def is_monomial(self) -> bool:
        return len(self.terms) == 1

    def __len__(self) -> int:
        return len(self.terms)

    def _idx(self, name: str) -> int:
        try:
            return self.variables.index(name)
        except ValueError:
            raise KeyError(f"{name!r} is not a variable of {self.variables}") from None

    def degree(self, name: str | None = None) -> int:
        """Degree in ``name`` (total degree when omitted); -1 for zero."""
        if not self.terms:
            return -1
        if name is None:
            return max(sum(e) for e in self.terms)
        if name not in self.variables:
            return 0
        k = self._idx(name)
        return max(e[k] for e in self.terms)

    def min_degree(self, name: str) -> int:
        if not self.terms or name not in self.variables:
            return 0
        k = self._idx(name)
        return min(e[k] for e in self.terms)

    def free_variables(self) -> tuple[str, ...]:
        used = [False] * len(self.variables)
        for e in self.terms:
            for k, v in enumerate(e):
                if v:
                    used[k] = True
        return tuple(v for v, u in zip(self.variables, used) if u)

    def depends_on(self, name: str) -> bool:
        return name in self.variables and self.degree(name) > 0

    def sorted_terms(self) -> list[tuple[Exp, Fraction]]:
        """Terms in descending graded lexicographic order."""
        return sorted(self.terms.items(), key=lambda t: (sum(t[0]), t[0]), reverse=True)

    def leading_term(self) -> tuple[Exp, Fraction]:
        if not self.terms:
            raise ValueError("zero polynomial has no leading term")
        return max(self.terms.items(), key=lambda t: (sum(t[0]), t[0]))

    # equality / hashing ---------------------------------------------------

    def __eq__(self, other) -> bool:
        if isinstance(other, RationalPoly):
            if self.variables == other.variables:
                return self.terms == other.terms
            return (self - other.with_variables(self.variables)).is_zero() if set(other.free_variables()) <= set(self.variables) else False
        if isinstance(other, (int, Fraction)):
            return self.is_constant() and self.constant_value() == other if self.terms else other == 0
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.variables, frozenset(self.terms.items())))
        return self._hash

    # arithmetic -----------------------------------------------------------

    def _coerce(self, other) -> "RationalPoly":
        if isinstance(other, RationalPoly):
            if other.variables != self.variables:
                raise ValueError(f"variable mismatch: {self.variables} vs {other.variables}")
            return other
        return RationalPoly.constant(self.variables, other)

    def __add__(self, other) -> "RationalPoly":
        other = self._coerce(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            v = out.get(e, 0) + c
            if v:
                out[e] = v
            else:
                out.pop(e, None)
        return RationalPoly(self.variables, out)

    __radd__ = __add__

    def __neg__(self) -> "RationalPoly":
        return RationalPoly(self.variables, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other) -> "RationalPoly":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "RationalPoly":
        return self._coerce(other) - self

    def __mul__(self, other) -> "RationalPoly":
        if not isinstance(other, RationalPoly):
            return self.scale(other)
        other = self._coerce(other)
        out: dict[Exp, Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return RationalPoly(self.variables, out)

    __rmul__ = __mul__

    def scale(self, c) -> "RationalPoly":
        c = _frac(c)
        if c == 0:
            return RationalPoly(self.variables)
        return RationalPoly(self.variables, {e: v * c for e, v in self.terms.items()})

    def __pow__(self, n: int) -> "RationalPoly":
        if n < 0:
            raise ValueError("negative powers are not polynomials")
        result = RationalPoly.constant(self.variables, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __truediv__(self, c) -> "RationalPoly":
        if isinstance(c, RationalPoly):
            return self.divide_exact(c)
        return self.scale(1 / _frac(c))

    # structure --------------------------------------------------------------

    def with_variables(self, variables: Sequence[str]) -> "RationalPoly":
        """Re-express in another variable tuple; unused variables may be dropped."""
        variables = tuple(variables)
        if variables == self.variables:
            return self
        pos = {v: k for k, v in enumerate(variables)}
        out = {}
        for e, c in self.terms.items():
            ne = [0] * len(variables)
            for v, k in zip(self.variables, e):
                if k:
                    if v not in pos:
                        raise ValueError(f"variable {v!r} occurs but is not in {variables}")
                    ne[pos[v]] = k
            out[tuple(ne)] = c
        return RationalPoly(variables, out)

    def rename(self, mapping: Mapping[str, str]) -> "RationalPoly":
        return RationalPoly(tuple(mapping.get(v, v) for v in self.variables), self.terms)

    def coefficients_in(self, name: str) -> dict[int, "RationalPoly"]:
        """``{k: c_k}`` with ``self = sum c_k name**k`` and ``c_k`` free of ``name``."""
        k = self._idx(name)
        buckets: dict[int, dict[Exp, Fraction]] = {}
        for e, c in self.terms.items():
            ne = e[:k] + (0,) + e[k + 1:]
            buckets.setdefault(e[k], {})[ne] = c
        return {p: RationalPoly(self.variables, t) for p, t in buckets.items()}

    def coefficient_list(self, name: str) -> list["RationalPoly"]:
        """Dense coefficient list in ``name``, lowest power first."""
        cs = self.coefficients_in(name)
        deg = max(cs) if cs else -1
        return [cs.get(p, RationalPoly(self.variables)) for p in range(deg + 1)]

    def leading_coefficient(self, name: str) -> "RationalPoly":
        cs = self.coefficients_in(name)
        return cs[max(cs)] if cs else RationalPoly(self.variables)

    def diff(self, name: str) -> "RationalPoly":
        k = self._idx(name)
        out = {}
        for e, c in self.terms.items():
            if e[k]:
                ne = e[:k] + (e[k] - 1,) + e[k + 1:]
                out[ne] = c * e[k]
        return RationalPoly(self.variables, out)

    def subs(self, name: str, value) -> "RationalPoly":
        """Substitute a polynomial (or scalar) for one variable."""
        if name not in self.variables or not self.depends_on(name):
            return self
        if not isinstance(value, RationalPoly):
            value = RationalPoly.constant(self.variables, value)
        value = value.with_variables(self.variables)
        cs = self.coefficients_in(name)
        out = RationalPoly(self.variables)
        for p in range(max(cs), -1, -1):
            out = out * value
            if p in cs:
                out = out + cs[p]
        return out

    def subs_many(self, values: Mapping[str, object]) -> "RationalPoly":
        """Simultaneous substitution of scalars and/or polynomials."""
        vals = {}
        for name, v in values.items():
            if name in self.variables:
                vals[name] = v.with_variables(self.variables) if isinstance(v, RationalPoly) else RationalPoly.constant(self.variables, v)
        if not vals:
            return self
        cache: dict[tuple[str, int], RationalPoly] = {}

        def power(name, k):
            key = (name, k)
            if key not in cache:
                cache[key] = vals[name] ** k
            return cache[key]

        out = RationalPoly(self.variables)
        idx = [(k, v) for k, v in enumerate(self.variables) if v in vals]
        for e, c in self.terms.items():
            rest = list(e)
            for k, _ in idx:
                rest[k] = 0
            term = RationalPoly(self.variables, {tuple(rest): c})
            for k, v in idx:
                if e[k]:
                    term = term * power(v, e[k])
            out = out + term
        return out

    def evaluate(self, values: Mapping[str, object]):
        """Evaluate at a full assignment; exact for rational inputs.

        Works with any numeric type supporting ``+``, ``*`` and ``**``
        (Fractions, floats, intervals).
        """
        total = None
        for e, c in self.terms.items():
            term = c
            for v, k in zip(self.variables, e):
                if k:
                    term = term * (values[v] ** k)
            total = term if total is None else total + term
        return Fraction(0) if total is None else total

    def evaluate_float(self, values: Mapping[str, float]) -> float:
        return float(sum(float(c) * _prod(float(values[v]) ** k for v, k in zip(self.variables, e) if k) for e, c in self.terms.items()))

    def max_term_magnitude(self, values: Mapping[str, float]) -> float:
        """Largest ``|c * monomial|`` at a float point (scale for relative residuals)."""
        best = 0.0
        for e, c in self.terms.items():
            m = abs(float(c)) * _prod(abs(float(values[v])) ** k for v, k in zip(self.variables, e) if k)
            best = max(best, m)
        return best

    # content and normalisation ----------------------------------------------

    def content(self) -> Fraction:
        """Positive rational ``c`` such that ``self / c`` has coprime integer coefficients."""
        if not self.terms:
            return Fraction(0)
        num = 0
        den = 1
        for c in self.terms.values():
            num = gcd(num, abs(c.numerator))
            den = den * c.denominator // gcd(den, c.denominator)
        return Fraction(num, den)

    def primitive(self) -> "RationalPoly":
        """Integer coefficients with gcd 1 and positive leading coefficient."""
        if not self.terms:
            return self
        c = self.content()
        if self.leading_term()[1] < 0:
            c = -c
        return self.scale(1 / c)

    def monic(self) -> "RationalPoly":
        return self.scale(1 / self.leading_term()[1]) if self.terms else self

    def monomial_content(self) -> Exp:
        """Componentwise minimum exponent (the largest monomial factor)."""
        if not self.terms:
            return (0,) * len(self.variables)
        it = iter(self.terms)
        m = list(next(it))
        for e in it:
            m = [min(a, b) for a, b in zip(m, e)]
        return tuple(m)

    def divide_monomial(self, exps: Exp) -> "RationalPoly":
        return RationalPoly(self.variables, {tuple(a - b for a, b in zip(e, exps)): c for e, c in self.terms.items()})

    def divide_exact(self, other: "RationalPoly") -> "RationalPoly":
        """Exact quotient; raises ``ArithmeticError`` when ``other`` does not divide."""
        q, r = self.divmod(other)
        if r:
            raise ArithmeticError("polynomial division is not exact")
        return q

    def divides(self, other: "RationalPoly") -> bool:
        """True when ``self`` divides ``other`` exactly."""
        if not self.terms:
            return not other.terms
        return not other.divmod(self)[1]

    def divmod(self, other: "RationalPoly") -> tuple["RationalPoly", "RationalPoly"]:
        """Multivariate division by a single polynomial in graded lex order."""
        other = self._coerce(other)
        if not other.terms:
            raise ZeroDivisionError("division by the zero polynomial")
        lt_e, lt_c = other.leading_term()
        q: dict[Exp, Fraction] = {}
        r: dict[Exp, Fraction] = {}
        p = dict(self.terms)
        key = lambda e: (sum(e), e)
        other_terms = list(other.terms.items())
        while p:
            e = max(p, key=key)
            c = p[e]
            if all(a >= b for a, b in zip(e, lt_e)):
                te = tuple(a - b for a, b in zip(e, lt_e))
                tc = c / lt_c
                q[te] = q.get(te, 0) + tc
                for oe, oc in other_terms:
                    ne = tuple(a + b for a, b in zip(te, oe))
                    v = p.get(ne, 0) - tc * oc
                    if v:
                        p[ne] = v
                    else:
                        p.pop(ne, None)
            else:
                r[e] = c
                del p[e]
        return RationalPoly(self.variables, q), RationalPoly(self.variables, r)

    # display ------------------------------------------------------------------

    def __repr__(self) -> str:
        return f"RationalPoly({self.variables}, {str(self)!r})"

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.sorted_terms():
            mono = "*".join(v if k == 1 else f"{v}^{k}" for v, k in zip(self.variables, e) if k)
            mag = abs(c)
            if mono:
                body = mono if mag == 1 else f"{mag}*{mono}"
            else:
                body = str(mag)
            if not parts:
                parts.append(body if c > 0 else f"-{body}")
            else:
                parts.append(("+ " if c > 0 else "- ") + body)
        return " ".join(parts)


def _prod(it: Iterable[float]) -> float:
    out = 1.0
    for v in it:
        out *= v
    return out


def common_variables(*polys: RationalPoly) -> tuple[str, ...]:
    seen: list[str] = []
    for p in polys:
        for v in p.variables:
            if v not in seen:
                seen.append(v)
    return tuple(seen)
