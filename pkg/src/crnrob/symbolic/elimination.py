"""Steady-state equations, rational parametrizations and elimination.

The pipeline for one output species ``j``:

1. Solve the independent steady-state equations one variable at a time,
   keeping ``j`` free when possible, to get every other species as a
   rational function of a few free species.
2. Substitute into the conservation-law equations ``sum_k a_k X_k = T``
   (totals as fresh symbols) and solve those for further free species.
3. Whatever is left is a polynomial relation between ``x = X_j`` and the
   totals; if several free species survive they are removed with
   resultants.
4. Among the irreducible factors of the result, keep those that vanish
   identically on the steady-state variety (checked exactly at random
   rational points of the parametrization).

When step 1 fails, iterated resultants on the full polynomial system are
tried instead.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Mapping, Sequence

from .. import linalg
from ..conservation import ConservationLaw, analysis_laws, kernel_basis, positive_laws
from ..model import ReactionNetwork, stoichiometric_matrix
from . import factor as fac
from .poly import RationalPoly
from .resultant import resultant

X_VAR = "x"
LAMBDA_VAR = "lambda"
_RESERVED = re.compile(r"^(x|lambda|T\d+)$")
_IDENT = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


class NotFound(Exception):
    """No rational parametrization was found within the search budget."""


class Unsupported(Exception):
    """Neither the parametrization route nor resultants produced a polynomial."""


class SpecializationError(ValueError):
    """The elimination polynomial vanishes identically after specialization."""


def species_symbols(names: Sequence[str]) -> tuple[str, ...]:
    """Polynomial variable names for species, avoiding ``x``, ``lambda`` and ``T<k>``."""
    out: list[str] = []
    taken = set()
    for k, name in enumerate(names):
        sym = name if _IDENT.match(name) and not _RESERVED.match(name) else f"s{k}"
        while sym in taken or _RESERVED.match(sym):
            sym = f"{sym}_"
        taken.add(sym)
        out.append(sym)
    return tuple(out)


def total_symbols(m: int) -> tuple[str, ...]:
    return tuple(f"T{k + 1}" for k in range(m))


def steady_state_equations(net: ReactionNetwork, variables: Sequence[str] | None = None) -> list[RationalPoly]:
    """The ``d`` mass-action polynomials ``dX_k/dt`` with exact rational coefficients.

    Example:
        >>> from crnrob.fixtures import load_fixture
        >>> [str(p) for p in steady_state_equations(load_fixture("archetypal"))]
        ['-2*X*Y + Y', '2*X*Y - Y']
    """
    syms = species_symbols(net.species_names)
    variables = tuple(variables) if variables is not None else syms
    d = net.n_species
    eqs = [RationalPoly.zero(variables) for _ in range(d)]
    for rxn in net.reactions:
        exps = [0] * len(variables)
        for k, c in enumerate(rxn.reactant.coefficients):
            if c:
                exps[variables.index(syms[k])] = c
        flux = RationalPoly.monomial(variables, tuple(exps), rxn.rate)
        for k, v in enumerate(rxn.vector):
            if v:
                eqs[k] = eqs[k] + flux.scale(v)
    return eqs


# rational substitution ----------------------------------------------------------


Ratio = tuple[RationalPoly, RationalPoly]


def substitute_rational(p: RationalPoly, values: Mapping[str, Ratio]) -> tuple[RationalPoly, RationalPoly]:
    """``p`` with ``v -> N_v / D_v`` substituted, as (numerator, denominator).

    The denominator is ``prod D_v ** deg_v(p)``; the numerator is a
    polynomial, so ``p`` vanishes on the substitution iff the numerator is 0.
    """
    vals = {v: r for v, r in values.items() if p.depends_on(v)}
    one = RationalPoly.constant(p.variables, 1)
    if not vals:
        return p, one
    degs = {v: p.degree(v) for v in vals}
    cache: dict[tuple[str, int, int], RationalPoly] = {}

    def power(v: str, k: int, which: int) -> RationalPoly:
        key = (v, k, which)
        if key not in cache:
            cache[key] = vals[v][which] ** k
        return cache[key]

    idx = [(p.variables.index(v), v) for v in vals]
    num = RationalPoly.zero(p.variables)
    for e, c in p.terms.items():
        rest = list(e)
        for k, _ in idx:
            rest[k] = 0
        term = RationalPoly(p.variables, {tuple(rest): c})
        for k, v in idx:
            if e[k]:
                term = term * power(v, e[k], 0)
            if degs[v] - e[k]:
                term = term * power(v, degs[v] - e[k], 1)
        num = num + term
    den = one
    for v in vals:
        den = den * power(v, degs[v], 1)
    return num, den


def _sign_definite(p: RationalPoly) -> bool:
    signs = {c > 0 for c in p.terms.values()}
    return len(signs) == 1


def _strip(p: RationalPoly, denominators: Sequence[RationalPoly]) -> tuple[RationalPoly, list[RationalPoly]]:
    """Remove monomial factors, content and factors shared with known denominators.

    Returns the cleaned polynomial and the list of removed non-constant
    factors (boundary components such as ``Y = 0``).
    """
    removed: list[RationalPoly] = []
    if p.is_zero():
        return p, removed
    mono = p.monomial_content()
    if any(mono):
        for k, e in enumerate(mono):
            if e:
                removed.append(RationalPoly.var(p.variables, p.variables[k]))
        p = p.divide_monomial(mono)
    p = p.primitive()
    if not p.is_constant():
        # factors with coefficients of one sign never vanish at positive points
        _, facs = fac.factor(p)
        for f, mult in facs:
            if f.degree() > 0 and _sign_definite(f):
                p = p.divide_exact(f**mult).primitive()
    for den in denominators:
        if den.is_constant():
            continue
        while not p.is_constant():
            g = fac.gcd(p, den)
            if g.is_constant():
                break
            removed.append(g)
            p = p.divide_exact(g).primitive()
    return p, removed


# parametrizations ----------------------------------------------------------------


@dataclass(frozen=True)
class SteadyStateParametrization:
    """Species as rational functions ``N/D`` of the free species (and totals).

    ``relations`` are polynomials in the free species and totals that must
    still vanish (unconsumed conservation laws). ``boundary`` lists the
    factors that were divided out while solving; they describe boundary or
    degenerate components that the parametrization does not cover.
    """

    variables: tuple[str, ...]
    species: tuple[str, ...]
    solved: dict[int, Ratio]
    free: tuple[int, ...]
    boundary: tuple[RationalPoly, ...] = ()
    relations: tuple[RationalPoly, ...] = ()
    consumed_laws: tuple[int, ...] = ()

    def expression(self, k: int) -> Ratio:
        if k in self.solved:
            return self.solved[k]
        v = RationalPoly.var(self.variables, self.species[k])
        return v, RationalPoly.constant(self.variables, 1)

    def free_names(self) -> tuple[str, ...]:
        return tuple(self.species[k] for k in self.free)

    def substitution(self) -> dict[str, Ratio]:
        return {self.species[k]: r for k, r in self.solved.items()}

    def verify(self, eqs: Sequence[RationalPoly]) -> bool:
        """Exact back-substitution into every equation."""
        sub = self.substitution()
        for eq in eqs:
            eq = eq.with_variables(self.variables)
            if not substitute_rational(eq, sub)[0].is_zero():
                return False
        return True

    def evaluate(self, free_values: Mapping[str, Fraction]) -> list[Fraction] | None:
        """Exact species values at a point of the free variables (None at a pole)."""
        out = []
        for k in range(len(self.species)):
            n, dd = self.expression(k)
            dv = dd.evaluate(free_values)
            if dv == 0:
                return None
            out.append(Fraction(n.evaluate(free_values)) / dv)
        return out

    def describe(self, names: Sequence[str]) -> list[str]:
        lines = []
        for k in sorted(self.solved):
            n, dd = self.solved[k]
            rhs = str(n) if dd.is_constant() and dd.constant_value() == 1 else f"({n}) / ({dd})"
            lines.append(f"{names[k]} = {rhs}")
        return lines


class _Solver:
    """Depth-first search over linear-in-one-variable solves."""

    def __init__(self, variables, species, prefer_free, max_nodes):
        self.variables = variables
        self.species = species
        self.prefer_free = set(prefer_free)
        self.max_nodes = max_nodes
        self.nodes = 0
        self.rng = random.Random(0)
        # when a list, dead ends of the strict search are recorded here
        self.dead_ends: list | None = None

    @staticmethod
    def split(p):
        """Distinct irreducible factors of ``p`` that can vanish at positive points."""
        _, facs = fac.factor(p)
        return [f for f, _ in facs if f.degree() > 0 and not _sign_definite(f)]

    def has_positive_point(self, solved, samples: int = 200) -> bool:
        """Random search for free values at which every solved species is positive."""
        free = [v for k, v in enumerate(self.variables) if k >= len(self.species) or k not in solved]
        for _ in range(samples):
            vals = {v: 10.0 ** self.rng.uniform(-3, 3) for v in free}
            ok = True
            for n, d in solved.values():
                num, den = n.evaluate_float(vals), d.evaluate_float(vals)
                if den == 0 or num / den <= 0:
                    ok = False
                    break
            if ok:
                return True
        return False

    def candidates(self, pending, solvable):
        out = []
        for pi, p in enumerate(pending):
            for k in solvable:
                v = self.species[k]
                if p.degree(v) != 1:
                    continue
                cs = p.coefficients_in(v)
                A, B = cs[1], cs.get(0, RationalPoly.zero(self.variables))
                score = (k in self.prefer_free, not A.is_constant(), len(A) + len(B), len(p), k)
                out.append((score, pi, k, A, B))
        out.sort(key=lambda t: t[0])
        return out

    @staticmethod
    def apply(solved, pending, k, v, A, B, keep_pi):
        num, den = fac.cancel(-B, A)
        new_solved = {}
        for s, (n, dd) in solved.items():
            nn, nd = substitute_rational(n, {v: (num, den)})
            dn, ddd = substitute_rational(dd, {v: (num, den)})
            new_solved[s] = fac.cancel(nn * ddd, dn * nd)
        new_solved[k] = (num, den)
        new_pending = []
        for pi, p in enumerate(pending):
            if pi == keep_pi:
                continue
            new_pending.append(substitute_rational(p, {v: (num, den)})[0])
        return new_solved, new_pending

    def run(self, solved, pending, solvable, boundary, allow_leftover):
        """Returns (solved, leftover, boundary) or None."""
        self.nodes += 1
        if self.nodes > self.max_nodes:
            return None
        dens = [dd for _, dd in solved.values()]
        clean = []
        for p in pending:
            p, removed = _strip(p, dens)
            boundary = boundary + removed
            if p.is_zero():
                continue
            if p.is_constant():
                return None
            if p not in clean:
                clean.append(p)
        if not clean:
            if not allow_leftover and not self.has_positive_point(solved):
                return None
            return solved, [], boundary
        if not allow_leftover:
            # a reducible equation describes several components; follow each factor
            for pi, p in enumerate(clean):
                parts = self.split(p)
                if len(parts) == 1 and parts[0] != p:
                    clean[pi] = parts[0]
                elif len(parts) > 1:
                    for f in parts:
                        res = self.run(solved, clean[:pi] + [f] + clean[pi + 1 :], solvable, boundary, allow_leftover)
                        if res is not None:
                            return res
                    return None
        cands = self.candidates(clean, solvable)
        if not cands:
            if self.dead_ends is not None:
                self.dead_ends.append((solved, clean, boundary))
            return (solved, clean, boundary) if allow_leftover else None
        tried = 0
        for _, pi, k, A, B in cands:
            if tried >= 4:
                break
            tried += 1
            v = self.species[k]
            new_solved, new_pending = self.apply(solved, clean, k, v, A, B, pi)
            res = self.run(new_solved, new_pending, [s for s in solvable if s != k], boundary, allow_leftover)
            if res is not None:
                return res
            if allow_leftover:
                break
        return (solved, clean, boundary) if allow_leftover else None


def _row_basis_equations(eqs: Sequence[RationalPoly]) -> list[RationalPoly]:
    """Linearly independent subset of the equations (as vectors of coefficients)."""
    monos = sorted({e for p in eqs for e in p.terms})
    rows = [[p.terms.get(e, Fraction(0)) for e in monos] for p in eqs]
    if not rows or not monos:
        return []
    idx = linalg.row_basis_indices(rows)
    return [eqs[k] for k in idx]


def find_parametrization(
    eqs: Sequence[RationalPoly],
    laws: Sequence[ConservationLaw] | None = None,
    prefer_free: Sequence[int] = (),
    species: Sequence[str] | None = None,
    max_nodes: int = 400,
    partial: bool = False,
) -> SteadyStateParametrization:
    """Rational parametrization of the positive steady states.

    ``eqs`` are polynomials in the species variables (see
    :func:`steady_state_equations`). Species listed in ``prefer_free`` are
    solved for only when nothing else works. When ``laws`` are given the
    law equations ``sum a_k X_k - T_l`` are consumed afterwards, and the
    unconsumed ones end up in ``relations``.

    With ``partial=True`` a failed search falls back to a greedy solve
    whose unsolved steady-state equations are kept in ``relations``
    (needed when a species is not a rational function of the others).

    Raises :class:`NotFound` when no elimination order succeeds.
    """
    if not eqs:
        species = tuple(species or ())
        variables = species + total_symbols(len(laws or ()))
        return SteadyStateParametrization(variables, species, {}, tuple(range(len(species))))
    species = tuple(species) if species is not None else eqs[0].variables
    m = len(laws or ())
    variables = species + total_symbols(m)
    base = [p.with_variables(variables) for p in _row_basis_equations(list(eqs))]
    solver = _Solver(variables, species, prefer_free, max_nodes)
    res = solver.run({}, base, list(range(len(species))), [], allow_leftover=False)
    leftover: list[RationalPoly] = []
    if res is None:
        if not partial:
            raise NotFound("no linear elimination order solves the steady-state equations")
        # search again, remembering where no species could be solved linearly
        solver = _Solver(variables, species, prefer_free, max_nodes)
        solver.dead_ends = []
        res = solver.run({}, base, list(range(len(species))), [], allow_leftover=False)
        if res is not None:
            solved, leftover, boundary = res
        elif solver.dead_ends:
            solved, leftover, boundary = min(
                solver.dead_ends, key=lambda t: (len(t[1]), sum(len(p) for p in t[1]), -len(t[0]))
            )
        else:
            raise NotFound("no linear elimination order solves the steady-state equations")
    else:
        solved, _, boundary = res
    free = tuple(k for k in range(len(species)) if k not in solved)
    param = SteadyStateParametrization(variables, species, solved, free, tuple(_dedupe(boundary)), tuple(leftover))
    if not leftover and not param.verify(eqs):
        raise NotFound("parametrization failed back-substitution")
    if not laws:
        return param
    return consume_laws(param, laws, keep=prefer_free, max_nodes=max_nodes)


def law_equations(laws: Sequence[ConservationLaw], species: Sequence[str]) -> list[RationalPoly]:
    variables = tuple(species) + total_symbols(len(laws))
    out = []
    for k, law in enumerate(laws):
        p = -RationalPoly.var(variables, f"T{k + 1}")
        for s, c in zip(species, law.coeffs):
            if c:
                p = p + RationalPoly.var(variables, s).scale(c)
        out.append(p)
    return out


def consume_laws(param: SteadyStateParametrization, laws: Sequence[ConservationLaw], keep: Sequence[int] = (), max_nodes: int = 400) -> SteadyStateParametrization:
    """Solve conservation-law equations for further free species."""
    variables = param.variables
    pending = []
    sub = param.substitution()
    for eq in law_equations(laws, param.species):
        pending.append(substitute_rational(eq.with_variables(variables), sub)[0])
    pending.extend(param.relations)
    solver = _Solver(variables, param.species, keep, max_nodes)
    solvable = [k for k in param.free if k not in set(keep)]
    res = solver.run(dict(param.solved), pending, solvable, list(param.boundary), allow_leftover=True)
    solved, leftover, boundary = res
    free = tuple(k for k in param.free if k not in solved)
    return SteadyStateParametrization(
        variables,
        param.species,
        solved,
        free,
        tuple(_dedupe(boundary)),
        tuple(leftover),
        tuple(range(len(laws))),
    )


def _dedupe(polys):
    out = []
    for p in polys:
        p = p.primitive()
        if not p.is_constant() and p not in out:
            out.append(p)
    return out


# elimination -----------------------------------------------------------------------


@dataclass(frozen=True)
class ElimPolynomial:
    """Elimination polynomial for one output species.

    ``poly`` lives in ``(x, T1, ..., Tm)``. After :func:`specialize_input`
    the fields ``specialized`` (in ``(x, lambda)``), ``m_deg``, ``q`` (in
    ``(x,)``) and ``factors`` (irreducible factors of ``specialized``) are
    filled in.
    """

    output_index: int
    poly: RationalPoly
    method: str = "parametrization"
    notes: tuple[str, ...] = ()
    input_index: int | None = None
    specialized: RationalPoly | None = None
    m_deg: int | None = None
    q: RationalPoly | None = None
    factors: tuple[RationalPoly, ...] = ()

    @property
    def lambda_dependent(self) -> bool:
        return bool(self.m_deg)

    @property
    def r(self) -> RationalPoly | None:
        """Remainder ``specialized - lambda**m * q``."""
        if self.specialized is None:
            return None
        lam = RationalPoly.var(self.specialized.variables, LAMBDA_VAR)
        return self.specialized - self.q.with_variables(self.specialized.variables) * lam**self.m_deg

    def residual(self, x: float, lam: float) -> float:
        """Relative residual ``|P| / max |term|`` at a numeric curve point."""
        vals = {X_VAR: x, LAMBDA_VAR: lam}
        scale = self.specialized.max_term_magnitude(vals)
        if scale == 0:
            return 0.0
        return abs(self.specialized.evaluate_float(vals)) / scale


def _random_point(rng: random.Random, names: Sequence[str]) -> dict[str, Fraction]:
    return {n: Fraction(rng.randint(1, 97), rng.randint(1, 13)) for n in names}


def _vanishes_on(poly: RationalPoly, param: SteadyStateParametrization, laws: Sequence[ConservationLaw], output_j: int, rng: random.Random, trials: int = 3) -> bool | None:
    """Does ``poly(x, T)`` vanish identically on the parametrized variety?

    Evaluates exactly at random rational points of the free species; a
    nonzero value is a certificate of non-vanishing, agreement at several
    independent points is taken as vanishing.
    """
    hits = 0
    for _ in range(trials * 4):
        point = _random_point(rng, param.free_names())
        values = param.evaluate(point)
        if values is None:
            continue
        assign = {X_VAR: values[output_j]}
        for k, law in enumerate(laws):
            assign[f"T{k + 1}"] = law.dot(values)
        if poly.evaluate(assign) != 0:
            return False
        hits += 1
        if hits >= trials:
            return True
    return None


def _eliminate(polys: list[RationalPoly], elim: list[str], max_steps: int) -> list[RationalPoly]:
    """Iterated resultants removing the variables in ``elim``."""
    polys = [p for p in polys if not p.is_zero()]
    steps = 0
    remaining = [v for v in elim if any(p.depends_on(v) for p in polys)]
    while remaining:
        if steps >= max_steps:
            raise Unsupported(f"elimination needs more than {max_steps} resultant steps")

        def cost(v):
            holders = [p for p in polys if p.depends_on(v)]
            return (min(p.degree(v) for p in holders), len(holders), v)

        v = min(remaining, key=cost)
        holders = [p for p in polys if p.depends_on(v)]
        others = [p for p in polys if not p.depends_on(v)]
        if len(holders) == 1:
            polys = others
        else:
            holders.sort(key=lambda p: (p.degree(v), len(p)))
            pivot = holders[0]
            new = []
            for h in holders[1:]:
                r = resultant(pivot, h, v)
                if r.is_zero():
                    continue
                _, facs = fac.factor(r)
                prod = RationalPoly.constant(r.variables, 1)
                for f_, _m in facs:
                    # boundary (monomial) and sign-definite factors carry no positive points
                    if f_.is_monomial() or _sign_definite(f_):
                        continue
                    prod = prod * f_
                if not prod.is_constant():
                    new.append(prod)
            polys = others + new
        steps += 1
        remaining = [u for u in elim if any(p.depends_on(u) for p in polys)]
    return [p for p in polys if not p.is_constant()]


class NetworkAlgebra:
    """Symbolic data of one network: equations, laws, parametrizations.

    Results are cached per output species, so one instance serves a whole
    classification table.
    """

    def __init__(self, net: ReactionNetwork, max_steps: int = 4, seed: int = 0):
        self.net = net
        self.max_steps = max_steps
        self.seed = seed
        self.species = species_symbols(net.species_names)
        basis = kernel_basis(net)
        self.positive = positive_laws(basis)
        self.laws = analysis_laws(basis, self.positive)
        self.totals = total_symbols(len(self.laws))
        self.variables = self.species + self.totals
        self.equations = steady_state_equations(net)
        self._param_cache: dict[tuple[int, ...], SteadyStateParametrization | None] = {}
        self._elim_cache: dict[int, ElimPolynomial | Exception] = {}

    @cached_property
    def base_parametrization(self) -> SteadyStateParametrization | None:
        return self.parametrization(())

    def parametrization(self, prefer_free: Sequence[int] = (), with_laws: bool = False) -> SteadyStateParametrization | None:
        key = (tuple(prefer_free), with_laws)
        if key not in self._param_cache:
            try:
                self._param_cache[key] = find_parametrization(
                    self.equations, self.laws if with_laws else None, prefer_free, self.species, partial=True
                )
            except NotFound:
                self._param_cache[key] = None
        return self._param_cache[key]

    def output_parametrization(self, output_j: int) -> SteadyStateParametrization | None:
        """Laws consumed with ``output_j`` kept free when possible."""
        return self.parametrization((output_j,), with_laws=True)

    def law_coefficients(self, input_i: int) -> tuple[Fraction, ...]:
        return tuple(law.coeffs[input_i] for law in self.laws)

    def elimination(self, output_j: int) -> ElimPolynomial:
        if output_j not in self._elim_cache:
            try:
                self._elim_cache[output_j] = self._eliminate_output(output_j)
            except (Unsupported, NotFound) as exc:
                self._elim_cache[output_j] = exc
        hit = self._elim_cache[output_j]
        if isinstance(hit, Exception):
            raise hit
        return hit

    def _target_vars(self) -> tuple[str, ...]:
        return (X_VAR,) + self.totals

    def _finish(self, polys: list[RationalPoly], output_j: int, method: str, notes: list[str]) -> ElimPolynomial:
        sym = self.species[output_j]
        target = self._target_vars()
        rng = random.Random(self.seed * 7919 + output_j)
        param0 = self.parametrization((output_j,))
        if param0 is not None and param0.relations:
            param0 = None  # random points of the free species are not on the variety
        chosen: list[RationalPoly] = []
        fallback: list[RationalPoly] = []
        for p in polys:
            p = p.rename({sym: X_VAR}).with_variables(target)
            _, facs = fac.factor(p)
            for f_, _m in facs:
                if not f_.depends_on(X_VAR):
                    continue
                if f_ not in fallback:
                    fallback.append(f_)
                if param0 is None:
                    continue
                ok = _vanishes_on(f_, param0, self.laws, output_j, rng)
                if ok and f_ not in chosen:
                    chosen.append(f_)
        if not chosen:
            # without a check, keep every factor that can vanish at a positive point
            kept = [f_ for f_ in fallback if not f_.is_monomial() and not _sign_definite(f_)]
            if not kept:
                raise Unsupported("elimination produced no polynomial involving the output")
            notes.append("no factor verified on the parametrized variety; all admissible factors kept")
            P = RationalPoly.constant(target, 1)
            for f_ in kept:
                P = P * f_
            return ElimPolynomial(output_j, P.primitive(), method, tuple(notes))
        if len(chosen) < len(fallback):
            notes.append(f"discarded {len(fallback) - len(chosen)} extraneous factor(s)")
        # one polynomial: the lowest-degree verified factor suffices
        chosen.sort(key=lambda f_: (f_.degree(X_VAR), f_.degree(), len(f_), str(f_)))
        P = chosen[0].primitive()
        return ElimPolynomial(output_j, P, method, tuple(notes))

    def _eliminate_output(self, output_j: int) -> ElimPolynomial:
        sym = self.species[output_j]
        notes: list[str] = []
        param = self.output_parametrization(output_j)
        if param is not None:
            others = [self.species[k] for k in param.free if k != output_j]
            if output_j in param.solved:
                n, dd = param.solved[output_j]
                # the output is solved; treat ``sym`` as a fresh symbol tied by sym*D - N
                polys = [RationalPoly.var(self.variables, sym) * dd - n] + list(param.relations)
            else:
                polys = list(param.relations)
                if not polys:
                    raise Unsupported("parametrization leaves the output unconstrained")
            try:
                polys = _eliminate(polys, others, self.max_steps)
                if any(p.depends_on(sym) for p in polys):
                    return self._finish(polys, output_j, "parametrization", notes)
            except Unsupported as exc:
                notes.append(f"parametrization route failed: {exc}")
        else:
            notes.append("no rational parametrization found")
        # fallback: resultants on the full system
        eqs = [p.with_variables(self.variables) for p in _row_basis_equations(self.equations)]
        eqs += law_equations(self.laws, self.species)
        elim = [s for s in self.species if s != sym]
        polys = _eliminate(eqs, elim, self.max_steps)
        if not any(p.depends_on(sym) for p in polys):
            raise Unsupported("resultant elimination lost the output variable")
        return self._finish(polys, output_j, "resultant", notes)

    def specialize(self, output_j: int, input_i: int, x0: Sequence) -> ElimPolynomial:
        base = [law.dot([Fraction(v) for v in x0]) for law in self.laws]
        return specialize_input(self.elimination(output_j), self.laws, base, input_i)


def eliminate_to_univariate(net: ReactionNetwork, output_j: int, max_steps: int = 4, seed: int = 0) -> ElimPolynomial:
    """Polynomial ``P(x, T1, ..., Tm)`` satisfied by the steady-state value ``x`` of one species.

    Convenience wrapper around :class:`NetworkAlgebra` for a single output.
    Raises :class:`Unsupported` when neither the parametrization route nor
    the resultant fallback produces a polynomial in the output.
    """
    return NetworkAlgebra(net, max_steps=max_steps, seed=seed).elimination(output_j)


def specialize_input(elim, laws: Sequence[ConservationLaw], totals_base: Sequence, input_i: int) -> ElimPolynomial:
    """Substitute ``T_k = C_k + a_k * lambda`` with ``a_k`` the input's law coefficient.

    Example (modified archetypal network, unit constants):
        >>> V = ("x", "T1")
        >>> x, T = RationalPoly.var(V, "x"), RationalPoly.var(V, "T1")
        >>> P = (T - x) * (1 - x) - x
        >>> law = ConservationLaw((1, 1))
        >>> e = specialize_input(ElimPolynomial(0, P), [law], [2], 0)
        >>> str(e.q), e.m_deg
        ('-x + 1', 1)
    """
    if isinstance(elim, RationalPoly):
        elim = ElimPolynomial(-1, elim)
    poly = elim.poly
    target = (X_VAR, LAMBDA_VAR)
    lam = RationalPoly.var(target, LAMBDA_VAR)
    values = {}
    for k, law in enumerate(laws):
        values[f"T{k + 1}"] = lam.scale(law.coeffs[input_i]) + Fraction(totals_base[k])
    wide = poly.with_variables(poly.variables + (LAMBDA_VAR,))
    spec = wide.subs_many({n: v.with_variables(wide.variables) for n, v in values.items()})
    spec = spec.with_variables(target)
    if spec.is_zero():
        raise SpecializationError("elimination polynomial vanishes identically after specialization")
    m = spec.degree(LAMBDA_VAR)
    q = spec.coefficients_in(LAMBDA_VAR)[m].with_variables((X_VAR,))
    content_const, facs = fac.factor(spec) if not spec.is_constant() else (spec.constant_term(), ())
    return ElimPolynomial(
        elim.output_index,
        poly,
        elim.method,
        elim.notes,
        input_index=input_i,
        specialized=spec,
        m_deg=m,
        q=q,
        factors=tuple(f_ for f_, _ in facs),
    )


__all__ = [
    "NotFound",
    "Unsupported",
    "SpecializationError",
    "species_symbols",
    "total_symbols",
    "steady_state_equations",
    "substitute_rational",
    "SteadyStateParametrization",
    "find_parametrization",
    "consume_laws",
    "law_equations",
    "ElimPolynomial",
    "NetworkAlgebra",
    "eliminate_to_univariate",
    "specialize_input",
]
