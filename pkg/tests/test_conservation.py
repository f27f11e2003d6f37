import random
from fractions import Fraction

import numpy as np
import pytest
import sympy
from scipy.optimize import linprog, nnls

from crnrob.conservation import (
    ConservationLaw,
    analysis_laws,
    kernel_basis,
    positive_laws,
    positive_support_contains,
    totals,
)
from crnrob.fixtures import load_fixture
from crnrob.model import ReactionNetwork, mass_action_rhs_exact, stoichiometric_matrix

from netgen import conservative_network, random_network


def names_of(net, laws):
    return sorted(law.expression(net.species_names) for law in laws)


def test_futile_cycle_positive_laws():
    net = load_fixture("futile_cycle")
    laws = positive_laws(kernel_basis(net))
    assert names_of(net, laws) == sorted(["S + P + SE + PF", "E + SE", "F + PF"])
    assert sorted(totals(laws, [1] * 6).values) == [2, 2, 4]


def test_envz_positive_laws():
    net = load_fixture("envz_ompr")
    laws = positive_laws(kernel_basis(net))
    assert names_of(net, laws) == sorted(["X + XT + XP + XPY + XTYP", "Y + YP + XPY + XTYP"])


def test_open_network_has_no_laws():
    net = ReactionNetwork.from_reactions(["A", "B"], [({"A": 1}, {"B": 1}, 1), ({}, {"A": 1}, 1)])
    assert kernel_basis(net) == []
    assert positive_laws([]) == []


def test_mixed_sign_basis_yields_all_extreme_rays():
    net = ReactionNetwork.from_reactions(["A", "B", "C", "D"], [({"A": 1, "B": 1}, {"C": 1}, 1), ({"C": 1}, {"D": 1}, 1)])
    rays = {law.coeffs for law in positive_laws(kernel_basis(net))}
    assert rays == {(1, 0, 1, 1), (0, 1, 1, 1)}


def test_law_helpers():
    law = ConservationLaw((Fraction(1), Fraction(0), Fraction(2)))
    assert law.support == frozenset({0, 2})
    assert law.positive
    assert law.dot([1, 5, 3]) == 7
    assert law.expression(["A", "B", "C"]) == "A + 2 C"
    assert not ConservationLaw((Fraction(1), Fraction(-1))).positive


def test_positive_support_contains():
    net = load_fixture("envz_ompr")
    pos = positive_laws(kernel_basis(net))
    ix = net.index
    # Y + YP + XPY + XTYP bounds XPY when X grows
    assert positive_support_contains(pos, ix("X"), ix("XPY"))
    # every law holding XT also holds X
    assert not positive_support_contains(pos, ix("X"), ix("XT"))


def test_analysis_laws_span_the_kernel():
    net = load_fixture("futile_cycle")
    basis = kernel_basis(net)
    chosen = analysis_laws(basis, positive_laws(basis))
    M = sympy.Matrix([list(l.coeffs) for l in chosen])
    assert M.rank() == len(basis) == len(chosen)
    assert all(l.positive for l in chosen)


def test_kernel_dimension_matches_sympy():
    rng = random.Random(11)
    for _ in range(60):
        net = random_network(rng, rng.randint(2, 6), rng.randint(1, 6))
        S = sympy.Matrix(stoichiometric_matrix(net).tolist())
        assert len(kernel_basis(net)) == S.shape[0] - S.rank()


def _in_cone(rays, v):
    A = np.array([[float(c) for c in r.coeffs] for r in rays]).T
    _, resid = nnls(A, v)
    return resid <= 1e-8 * max(1.0, np.abs(v).max())


def test_positive_laws_are_extreme_and_complete():
    """Every nonnegative kernel vector found by an LP is a nonnegative combination of the rays."""
    rng = random.Random(3)
    nprng = np.random.default_rng(3)
    for _ in range(40):
        net = conservative_network(rng, rng.randint(2, 5))
        basis = kernel_basis(net)
        rays = positive_laws(basis)
        assert rays
        S = stoichiometric_matrix(net).astype(float)
        d = net.n_species
        for r in rays:
            assert all(c >= 0 for c in r.coeffs)
            assert not np.any(np.array([float(c) for c in r.coeffs]) @ S)
            # extreme: the kernel restricted to the support is one-dimensional
            sub = sympy.Matrix(stoichiometric_matrix(net)[sorted(r.support), :].tolist())
            assert sub.shape[0] - sub.rank() == 1
        for _ in range(5):
            res = linprog(
                nprng.uniform(-1, 1, d),
                A_eq=np.vstack([S.T, np.ones(d)]),
                b_eq=np.r_[np.zeros(S.shape[1]), 1.0],
                bounds=[(0, None)] * d,
            )
            assert res.status == 0
            assert _in_cone(rays, res.x)


def test_laws_are_exact_invariants():
    rng = random.Random(21)
    for _ in range(50):
        net = random_network(rng, rng.randint(2, 5), rng.randint(1, 5))
        point = [Fraction(rng.randint(1, 30), rng.randint(1, 7)) for _ in range(net.n_species)]
        rhs = mass_action_rhs_exact(net, point)
        for law in kernel_basis(net):
            assert law.dot(rhs) == 0


@pytest.mark.parametrize("bad", [[Fraction(1)], [1, 2, 3, 4]])
def test_totals_rejects_wrong_length(bad):
    net = load_fixture("archetypal")
    with pytest.raises(ValueError):
        totals(kernel_basis(net), bad)
