from fractions import Fraction

import pytest

from crnrob.conservation import ConservationLaw
from crnrob.fixtures import load_fixture
from crnrob.numeric import EmpiricalVerdict, VerdictKind
from crnrob.symbolic import (
    ElimPolynomial,
    LimitKind,
    NetworkAlgebra,
    RationalPoly,
    certified_limit,
    propagate_limits,
    specialize_input,
)
from crnrob.symbolic.limits import Asymptotic, Behaviour, newton_candidates

V = ("x", "T1")
X = RationalPoly.var(V, "x")
T = RationalPoly.var(V, "T1")
LAW = ConservationLaw((1,))


def spec(P, base=1):
    """Specialize ``P(x, T1)`` along ``T1 = base + lambda``."""
    return specialize_input(ElimPolynomial(0, P), [LAW], [base], 0)


def test_modified_archetypal_exact_limit():
    e = spec((T - X) * (1 - X) - X, base=2)
    assert str(e.q) == "-x + 1"
    # the second root grows like lambda; the law x <= T1 rules it out
    assert certified_limit(e).is_ambiguous
    cert = certified_limit(e, positive_support=True)
    assert cert.kind == LimitKind.EXACT
    assert cert.value.exact == 1
    assert cert.describe() == "ExactLimit(1)"


def test_eventually_constant_branch():
    cert = certified_limit(spec(X * 2 - 1))
    assert cert.kind == LimitKind.CONSTANT
    assert cert.value.exact == Fraction(1, 2)


def test_divergent_and_extinct_branches():
    assert certified_limit(spec(X - T)).kind == LimitKind.INFINITY
    assert certified_limit(spec(X * T - 1)).kind == LimitKind.ZERO


def test_two_branches_are_ambiguous_until_resolved():
    e = spec((X - T) * (X - 2))
    cert = certified_limit(e)
    assert cert.is_ambiguous
    assert sorted(str(c) for c in cert.candidates) == ["2 (constant)", "inf"]
    bounded = certified_limit(e, positive_support=True)
    assert bounded.kind == LimitKind.CONSTANT and bounded.value.exact == 2
    assert "divergence excluded by a positive conservation law" in bounded.notes
    hinted = certified_limit(e, numeric_hint=EmpiricalVerdict(VerdictKind.FINITE, 2.01))
    assert hinted.kind == LimitKind.CONSTANT and hinted.resolved_by == "numeric hint"
    up = certified_limit(e, numeric_hint=EmpiricalVerdict(VerdictKind.INFINITY))
    assert up.kind == LimitKind.INFINITY
    nothing = certified_limit(e, numeric_hint=EmpiricalVerdict(VerdictKind.FINITE, 7.0))
    assert nothing.is_ambiguous


def test_branches_with_a_common_infinite_limit():
    cert = certified_limit(spec((X - T) * (X - T * 2)))
    assert len(cert.candidates) == 2
    assert cert.kind == LimitKind.INFINITY
    assert cert.resolved_by == "common limit"


def test_newton_candidates_exponents():
    W = ("x", "lambda")
    x, lam = RationalPoly.var(W, "x"), RationalPoly.var(W, "lambda")
    (c,) = newton_candidates(x**2 - lam)
    assert c.kind == LimitKind.INFINITY and c.exponent == Fraction(1, 2)
    (c,) = newton_candidates(x * lam**2 - 3)
    assert c.kind == LimitKind.ZERO and c.exponent == -2
    (c,) = newton_candidates(x * lam - lam * 5 + 1)
    assert c.kind == LimitKind.EXACT and c.value.exact == 5
    assert newton_candidates(lam - 1) == []


def test_unspecialized_polynomial_is_rejected():
    with pytest.raises(ValueError):
        certified_limit(ElimPolynomial(0, X - T))


def test_propagation_through_envz_parametrization():
    net = load_fixture("envz_ompr")
    ix = net.index
    param = NetworkAlgebra(net).parametrization(prefer_free=[ix("XPY"), ix("Y")])
    assert set(param.free_names()) == {"XPY", "Y"}
    out = propagate_limits(param, {ix("XPY"): Asymptotic.finite(1.0), ix("Y"): Asymptotic(Behaviour.INFINITY)})
    assert out[ix("X")] == Asymptotic.finite(2.0)
    assert out[ix("XP")].behaviour == Behaviour.ZERO
    assert out[ix("YP")] == Asymptotic.finite(2.0)
    # 0 * inf is indeterminate
    out = propagate_limits(param, {ix("XPY"): Asymptotic(Behaviour.ZERO), ix("Y"): Asymptotic(Behaviour.ZERO)})
    assert out[ix("XP")].behaviour == Behaviour.UNKNOWN
