"""Limit certification for dose-response curves.

Given the specialized elimination polynomial ``P(x, lambda)`` the possible
behaviours of a real positive branch ``x(lambda)`` as ``lambda -> inf`` are
read off the Newton polygon of each irreducible factor: a branch
``x ~ k * lambda**e`` needs two terms to balance, so every edge of the
polygon with slope ``e`` and a positive root ``k`` of its edge polynomial
gives a candidate. ``e > 0`` means divergence, ``e < 0`` extinction and
``e = 0`` a finite positive limit ``k``, which is a root of ``q``.
Factors without ``lambda`` give eventually constant branches.

Candidates are then filtered by nonnegativity of the other species along
the branch. When the output is the only free species of a rational
parametrization, all species are rational functions of ``(x, lambda)``;
at two very large rational values of ``lambda`` the positive roots of
each factor are isolated exactly, assigned to the candidate they
approach, and the other species' signs are evaluated with interval
arithmetic. A candidate is dropped when every root assigned to it makes
some species negative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Mapping, Sequence

from .elimination import LAMBDA_VAR, X_VAR, ElimPolynomial, SteadyStateParametrization
from .poly import RationalPoly
from .roots import RootReport, RootValue, analyze_roots, isolate_real_roots, trim

SAMPLE_LAMBDAS = (Fraction(10) ** 12, Fraction(10) ** 24)
_REL_WIDTH = Fraction(1, 10**60)


class LimitKind(str, Enum):
    EXACT = "ExactLimit"
    INFINITY = "Infinity"
    ZERO = "Zero"
    CONSTANT = "EventuallyConstant"
    AMBIGUOUS = "Ambiguous"


@dataclass(frozen=True)
class Candidate:
    """One possible asymptotic behaviour of a branch of ``P``."""

    kind: LimitKind
    value: RootValue | None = None
    exponent: Fraction = Fraction(0)
    factor: RationalPoly | None = field(default=None, compare=False)

    def same_class(self, other: "Candidate") -> bool:
        if self.kind != other.kind:
            return False
        if self.value is None or other.value is None:
            return self.value is None and other.value is None
        return self.value.approx_equal(other.value)

    def __str__(self) -> str:
        if self.kind == LimitKind.INFINITY:
            return "inf"
        if self.kind == LimitKind.ZERO:
            return "0"
        return f"{self.value}" + (" (constant)" if self.kind == LimitKind.CONSTANT else "")


@dataclass(frozen=True)
class LimitCertificate:
    kind: LimitKind
    value: RootValue | None = None
    candidates: tuple[Candidate, ...] = ()
    resolved_by: str = ""
    notes: tuple[str, ...] = ()

    @property
    def is_ambiguous(self) -> bool:
        return self.kind == LimitKind.AMBIGUOUS

    def describe(self) -> str:
        if self.kind in (LimitKind.EXACT, LimitKind.CONSTANT):
            return f"{self.kind.value}({self.value})"
        if self.kind == LimitKind.AMBIGUOUS:
            return f"Ambiguous({', '.join(str(c) for c in self.candidates)})"
        return self.kind.value


# Newton polygon ---------------------------------------------------------------------


def _terms_xl(f: RationalPoly) -> list[tuple[int, int, Fraction]]:
    ix, il = f.variables.index(X_VAR), f.variables.index(LAMBDA_VAR)
    return [(e[ix], e[il], c) for e, c in f.terms.items()]


def newton_candidates(f: RationalPoly) -> list[Candidate]:
    """Branch candidates of one irreducible factor in ``(x, lambda)``."""
    if not f.depends_on(X_VAR):
        return []
    if not f.depends_on(LAMBDA_VAR):
        coeffs = f.coefficient_list(X_VAR)
        report = analyze_roots([c.constant_term() for c in coeffs])
        return [Candidate(LimitKind.CONSTANT, r, Fraction(0), f) for r in report.positive_roots]
    terms = _terms_xl(f)
    points = {(a, b) for a, b, _ in terms}
    slopes = set()
    pts = sorted(points)
    for i, (a1, b1) in enumerate(pts):
        for a2, b2 in pts[i + 1:]:
            if a1 != a2:
                slopes.add(Fraction(b2 - b1, a1 - a2))
    out: list[Candidate] = []
    for e in sorted(slopes):
        best = max(a * e + b for a, b in points)
        edge = [(a, c) for a, b, c in terms if a * e + b == best]
        if len({a for a, _ in edge}) < 2:
            continue
        amin = min(a for a, _ in edge)
        poly = [Fraction(0)] * (max(a for a, _ in edge) - amin + 1)
        for a, c in edge:
            poly[a - amin] += c
        for root in analyze_roots(poly).positive_roots:
            if e > 0:
                out.append(Candidate(LimitKind.INFINITY, root, e, f))
            elif e < 0:
                out.append(Candidate(LimitKind.ZERO, root, e, f))
            else:
                out.append(Candidate(LimitKind.EXACT, root, e, f))
    return out


# exact sampling of branches ------------------------------------------------------------


def _univariate_at(p: RationalPoly, lam: Fraction) -> list[Fraction]:
    if LAMBDA_VAR in p.variables:
        p = p.subs(LAMBDA_VAR, lam)
    if not p.depends_on(X_VAR):
        return trim([p.constant_term()])
    return trim([c.constant_term() for c in p.coefficient_list(X_VAR)])


def _eval(p: list[Fraction], x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(p):
        acc = acc * x + c
    return acc


def _refine_relative(root: RootValue, rel: Fraction = _REL_WIDTH) -> tuple[Fraction, Fraction]:
    if root.exact is not None:
        return root.exact, root.exact
    lo, hi = root.lo, root.hi
    sq = list(root.poly)
    slo = _eval(sq, lo)
    while hi - lo > rel * max(abs(lo), abs(hi)):
        mid = (lo + hi) / 2
        sm = _eval(sq, mid)
        if sm == 0:
            return mid, mid
        if (sm > 0) == (slo > 0):
            lo, slo = mid, sm
        else:
            hi = mid
    return lo, hi


def _interval_sign(p: list[Fraction], lo: Fraction, hi: Fraction) -> int:
    """Sign of ``p`` on ``[lo, hi]`` with ``lo >= 0``; 0 when undetermined."""
    low = high = Fraction(0)
    for a, c in enumerate(p):
        if c == 0:
            continue
        v1, v2 = c * lo**a, c * hi**a
        low += min(v1, v2)
        high += max(v1, v2)
    if low > 0:
        return 1
    if high < 0:
        return -1
    return 0


@dataclass(frozen=True)
class BranchModel:
    """Species along the dose-response branch as functions of ``(x, lambda)``."""

    output_index: int
    ratios: tuple[tuple[int, RationalPoly, RationalPoly], ...]


def branch_model(param: SteadyStateParametrization | None, output_j: int, laws, totals_base, input_i: int) -> BranchModel | None:
    """Specialize a parametrization whose only free species is the output."""
    if param is None or param.relations is None:
        return None
    if set(param.free) - {output_j} or output_j in param.solved:
        return None
    target = (X_VAR, LAMBDA_VAR)
    wide_vars = param.variables + (X_VAR, LAMBDA_VAR)
    lam = RationalPoly.var(wide_vars, LAMBDA_VAR)
    subs: dict[str, RationalPoly] = {param.species[output_j]: RationalPoly.var(wide_vars, X_VAR)}
    for k, law in enumerate(laws):
        subs[f"T{k + 1}"] = lam.scale(law.coeffs[input_i]) + Fraction(totals_base[k])
    ratios = []
    for k, (n, d) in sorted(param.solved.items()):
        n2 = n.with_variables(wide_vars).subs_many(subs).with_variables(target)
        d2 = d.with_variables(wide_vars).subs_many(subs).with_variables(target)
        ratios.append((k, n2, d2))
    return BranchModel(output_j, tuple(ratios))


def _root_feasible(model: BranchModel, lam: Fraction, lo: Fraction, hi: Fraction) -> bool:
    """False only when some species is certainly negative (or exactly zero) at the root."""
    for _, n, d in model.ratios:
        un, ud = _univariate_at(n, lam), _univariate_at(d, lam)
        if lo == hi and _eval(un, lo) == 0 and _eval(ud, lo) != 0:
            return False  # boundary point, not a positive steady state
        sn = _interval_sign(un, lo, hi)
        sd = _interval_sign(ud, lo, hi)
        if sn * sd < 0:
            return False
    return True


def _log_target(c: Candidate, lam: Fraction) -> float:
    return float(c.exponent) * math.log(float(lam)) + math.log(max(float(c.value), 1e-300))


def filter_feasible(candidates: Sequence[Candidate], model: BranchModel | None, samples: Sequence[Fraction] = SAMPLE_LAMBDAS) -> tuple[list[Candidate], list[Candidate]]:
    """Split candidates into (kept, rejected) by sampling the branches exactly."""
    if model is None or not candidates:
        return list(candidates), []
    support: dict[int, list[bool]] = {k: [] for k in range(len(candidates))}
    factors = []
    for c in candidates:
        if c.factor is not None and c.factor not in factors:
            factors.append(c.factor)
    for lam in samples:
        seen: dict[int, bool] = {}
        for f in factors:
            own = [k for k, c in enumerate(candidates) if c.factor == f]
            uni = _univariate_at(f, lam)
            if len(uni) <= 1:
                continue
            for root in isolate_real_roots(uni, lower=Fraction(0)):
                if root.is_zero():
                    continue
                lo, hi = _refine_relative(root)
                if lo <= 0:
                    continue
                logx = math.log(float((lo + hi) / 2))
                k = min(own, key=lambda k: abs(_log_target(candidates[k], lam) - logx))
                ok = _root_feasible(model, lam, lo, hi)
                seen[k] = seen.get(k, False) or ok
        for k in support:
            support[k].append(seen.get(k, True))
    kept = [c for k, c in enumerate(candidates) if all(support[k])]
    rejected = [c for k, c in enumerate(candidates) if not all(support[k])]
    return kept, rejected


# certification -----------------------------------------------------------------------


def _dedupe(cands: Sequence[Candidate]) -> list[Candidate]:
    out: list[Candidate] = []
    for c in cands:
        if not any(c.same_class(o) for o in out):
            out.append(c)
    return out


def _to_certificate(c: Candidate, resolved_by: str, cands, notes) -> LimitCertificate:
    value = c.value if c.kind in (LimitKind.EXACT, LimitKind.CONSTANT) else None
    return LimitCertificate(c.kind, value, tuple(cands), resolved_by, tuple(notes))


def all_candidates(elim: ElimPolynomial) -> list[Candidate]:
    out: list[Candidate] = []
    for f in elim.factors:
        out.extend(newton_candidates(f))
    return out


def match_hint(cands: Sequence[Candidate], hint, rel_tol: float = 0.05) -> Candidate | None:
    """The unique candidate consistent with an empirical verdict, if any."""
    kind = getattr(hint, "kind", None)
    kind = getattr(kind, "name", kind)
    matches = []
    for c in cands:
        if kind == "FINITE" and c.kind in (LimitKind.EXACT, LimitKind.CONSTANT):
            est = hint.limit_estimate
            if est is not None and abs(float(c.value) - est) <= rel_tol * max(abs(est), float(c.value)):
                matches.append(c)
        elif kind == "ZERO" and c.kind == LimitKind.ZERO:
            matches.append(c)
        elif kind == "INFINITY" and c.kind == LimitKind.INFINITY:
            matches.append(c)
    if kind in ("ZERO", "INFINITY") and matches:
        return matches[0]  # these branches differ only in the rate of approach
    return matches[0] if len(matches) == 1 else None


def certified_limit(
    elim: ElimPolynomial,
    report: RootReport | None = None,
    positive_support: bool = False,
    numeric_hint=None,
    model: BranchModel | None = None,
) -> LimitCertificate:
    """Decide the limit of ``X_j(lambda)`` from the specialized polynomial.

    Rules: branches of lambda-free factors are eventually constant; a
    positive law containing the output but not the input bounds the curve,
    which removes divergent candidates; candidates violating nonnegativity
    of other species are dropped; a single surviving class is certified.
    Otherwise the result is Ambiguous, unless ``numeric_hint`` singles out
    one candidate.
    """
    if elim.specialized is None:
        raise ValueError("elimination polynomial has not been specialized")
    if report is None:
        report = analyze_roots(elim.q)
    notes: list[str] = []
    cands = _dedupe(all_candidates(elim))
    if positive_support:
        bounded = [c for c in cands if c.kind != LimitKind.INFINITY]
        if len(bounded) < len(cands):
            notes.append("divergence excluded by a positive conservation law")
        cands = bounded
        if elim.lambda_dependent and not report.nonneg_roots and not any(c.kind == LimitKind.CONSTANT for c in cands):
            notes.append("internal inconsistency: bounded output but q has no nonnegative root")
            return LimitCertificate(LimitKind.AMBIGUOUS, None, tuple(cands), "", tuple(notes))
    before = len(cands)
    if len(cands) > 1:
        cands, rejected = filter_feasible(cands, model)
        if rejected:
            notes.append("side constraints rejected " + ", ".join(str(c) for c in rejected))
    if len(cands) == 1:
        how = "side constraints" if before > 1 else ("positive law" if positive_support else "unique candidate")
        return _to_certificate(cands[0], how, cands, notes)
    if len(cands) > 1 and len({c.kind for c in cands}) == 1 and cands[0].kind in (LimitKind.INFINITY, LimitKind.ZERO):
        # every branch has the same limit; only the rate of approach differs
        notes.append("all admissible branches share the limit")
        return _to_certificate(cands[0], "common limit", cands, notes)
    if not cands:
        notes.append("no admissible branch")
        return LimitCertificate(LimitKind.AMBIGUOUS, None, (), "", tuple(notes))
    if numeric_hint is not None:
        pick = match_hint(cands, numeric_hint)
        if pick is not None:
            notes.append("ambiguity resolved by numeric tail")
            return _to_certificate(pick, "numeric hint", cands, notes)
    return LimitCertificate(LimitKind.AMBIGUOUS, None, tuple(cands), "", tuple(notes))


# propagation through a parametrization ------------------------------------------------------


class Behaviour(str, Enum):
    ZERO = "zero"
    FINITE = "finite"
    INFINITY = "infinity"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class Asymptotic:
    """Coarse limit of a quantity: zero, a finite positive value, +/- infinity, or unknown."""

    behaviour: Behaviour
    value: float | None = None
    sign: int = 1

    @classmethod
    def finite(cls, v: float) -> "Asymptotic":
        if v == 0:
            return cls(Behaviour.ZERO, 0.0)
        return cls(Behaviour.FINITE, float(v), 1 if v > 0 else -1)

    @classmethod
    def from_certificate(cls, cert: LimitCertificate) -> "Asymptotic":
        if cert.kind == LimitKind.ZERO:
            return cls(Behaviour.ZERO, 0.0)
        if cert.kind == LimitKind.INFINITY:
            return cls(Behaviour.INFINITY)
        if cert.kind in (LimitKind.EXACT, LimitKind.CONSTANT):
            return cls.finite(float(cert.value))
        return cls(Behaviour.UNKNOWN)


ZERO = Asymptotic(Behaviour.ZERO, 0.0)
UNKNOWN = Asymptotic(Behaviour.UNKNOWN)


def _mul(a: Asymptotic, b: Asymptotic) -> Asymptotic:
    if Behaviour.UNKNOWN in (a.behaviour, b.behaviour):
        return UNKNOWN
    kinds = {a.behaviour, b.behaviour}
    if kinds == {Behaviour.ZERO, Behaviour.INFINITY}:
        return UNKNOWN
    if Behaviour.ZERO in kinds:
        return ZERO
    if Behaviour.INFINITY in kinds:
        return Asymptotic(Behaviour.INFINITY, None, a.sign * b.sign)
    return Asymptotic.finite(a.value * b.value)


def _add(a: Asymptotic, b: Asymptotic) -> Asymptotic:
    if Behaviour.UNKNOWN in (a.behaviour, b.behaviour):
        return UNKNOWN
    if a.behaviour == Behaviour.INFINITY and b.behaviour == Behaviour.INFINITY:
        return a if a.sign == b.sign else UNKNOWN
    if a.behaviour == Behaviour.INFINITY:
        return a
    if b.behaviour == Behaviour.INFINITY:
        return b
    total = (a.value or 0.0) + (b.value or 0.0)
    if a.behaviour == Behaviour.FINITE and b.behaviour == Behaviour.FINITE and abs(total) <= 1e-12 * (abs(a.value) + abs(b.value)):
        return UNKNOWN  # cancellation: the rate of approach decides
    if a.behaviour == Behaviour.ZERO and b.behaviour == Behaviour.ZERO:
        return ZERO
    return Asymptotic.finite(total) if total != 0 else UNKNOWN


def _poly_limit(p: RationalPoly, known: Mapping[str, Asymptotic]) -> Asymptotic:
    acc = None
    for e, c in p.terms.items():
        term = Asymptotic.finite(float(c))
        for v, k in zip(p.variables, e):
            if not k:
                continue
            base = known.get(v, UNKNOWN)
            for _ in range(k):
                term = _mul(term, base)
        acc = term if acc is None else _add(acc, term)
    return acc if acc is not None else ZERO


def _div(n: Asymptotic, d: Asymptotic) -> Asymptotic:
    if Behaviour.UNKNOWN in (n.behaviour, d.behaviour):
        return UNKNOWN
    if n.behaviour == d.behaviour and n.behaviour in (Behaviour.ZERO, Behaviour.INFINITY):
        return UNKNOWN
    if d.behaviour == Behaviour.ZERO:
        return Asymptotic(Behaviour.INFINITY, None, n.sign)
    if d.behaviour == Behaviour.INFINITY:
        return ZERO
    if n.behaviour == Behaviour.INFINITY:
        return Asymptotic(Behaviour.INFINITY, None, n.sign * d.sign)
    if n.behaviour == Behaviour.ZERO:
        return ZERO
    return Asymptotic.finite(n.value / d.value)


def propagate_limits(param: SteadyStateParametrization, known: Mapping[int, Asymptotic]) -> dict[int, Asymptotic]:
    """Limits of all species from the limits of the free species.

    Indeterminate forms (0 * inf, inf / inf, 0 / 0, cancelling sums) give
    ``UNKNOWN``. Only parametrizations free of totals are meaningful here.
    """
    sym_known = {param.species[k]: a for k, a in known.items()}
    out = dict(known)
    for k, (n, d) in param.solved.items():
        if k in out and out[k].behaviour != Behaviour.UNKNOWN:
            continue
        out[k] = _div(_poly_limit(n, sym_known), _poly_limit(d, sym_known))
    return out


__all__ = [
    "LimitKind",
    "Candidate",
    "LimitCertificate",
    "newton_candidates",
    "all_candidates",
    "BranchModel",
    "branch_model",
    "filter_feasible",
    "certified_limit",
    "match_hint",
    "Behaviour",
    "Asymptotic",
    "propagate_limits",
]
