from fractions import Fraction

import numpy as np
import pytest

from crnrob.fixtures import load_fixture
from crnrob.model import (
    DomainError,
    MassActionSystem,
    NetworkError,
    ReactionNetwork,
    mass_action_jacobian,
    mass_action_rhs,
    mass_action_rhs_exact,
    stoichiometric_matrix,
)


@pytest.fixture
def archetypal():
    return ReactionNetwork.from_reactions(
        ["X", "Y"],
        [({"X": 1, "Y": 1}, {"Y": 2}, "alpha"), ({"Y": 1}, {"X": 1}, "beta")],
        {"alpha": 2, "beta": 1},
    )


def test_stoichiometric_matrix_columns_are_reaction_vectors(archetypal):
    S = stoichiometric_matrix(archetypal)
    assert S.shape == (2, 2)
    np.testing.assert_array_equal(S[:, 0], [-1, 1])
    np.testing.assert_array_equal(S[:, 1], [1, -1])


def test_rhs_matches_hand_derivation(archetypal):
    x = np.array([0.3, 2.0])
    # dX/dt = -alpha X Y + beta Y
    expected_x = -2 * 0.3 * 2.0 + 2.0
    np.testing.assert_allclose(mass_action_rhs(archetypal, x), [expected_x, -expected_x])


def test_exact_rhs_uses_rationals(archetypal):
    out = mass_action_rhs_exact(archetypal, [Fraction(1, 3), Fraction(1, 7)])
    assert out[0] == -2 * Fraction(1, 3) * Fraction(1, 7) + Fraction(1, 7)
    assert all(isinstance(v, Fraction) for v in out)


def test_jacobian_of_higher_order_reaction():
    net = ReactionNetwork.from_reactions(["A", "B"], [({"A": 2, "B": 1}, {"B": 3}, 5)])
    x = np.array([1.5, 0.5])
    J = mass_action_jacobian(net, x)
    # rate v = 5 A^2 B ; dA/dt = -2 v, dB/dt = 2 v
    dv = np.array([5 * 2 * 1.5 * 0.5, 5 * 1.5**2])
    np.testing.assert_allclose(J, np.array([-2 * dv, 2 * dv]))


def test_system_agrees_with_functional_api():
    net = load_fixture("envz_ompr")
    sys_ = MassActionSystem(net)
    x = np.linspace(0.2, 1.4, 7)
    np.testing.assert_allclose(sys_.rhs(x), mass_action_rhs(net, x))
    np.testing.assert_allclose(sys_.jacobian(x), mass_action_jacobian(net, x))


def test_negative_concentrations_rejected(archetypal):
    with pytest.raises(DomainError):
        mass_action_rhs(archetypal, [-1.0, 1.0])
    with pytest.raises(DomainError):
        mass_action_rhs(archetypal, [1.0])


@pytest.mark.parametrize(
    "species, reactions",
    [
        (["X", "X"], [({"X": 1}, {}, 1)]),
        (["X"], [({"X": 1}, {"X": 1}, 1)]),
        (["X"], [({"X": 1}, {}, 0)]),
        (["X"], [({"X": 1}, {}, -2)]),
        (["X"], [({"Z": 1}, {}, 1)]),
        (["X"], [({"X": 1}, {}, 1), ({"X": 1}, {}, 2)]),
        (["X"], [({"X": 1}, {}, "k")]),
    ],
)
def test_invalid_networks(species, reactions):
    with pytest.raises(NetworkError):
        ReactionNetwork.from_reactions(species, reactions)


def test_float_rates_are_read_as_decimals():
    net = ReactionNetwork.from_reactions(["X"], [({"X": 1}, {}, 0.1)])
    assert net.rate_constants == (Fraction(1, 10),)


def test_with_parameters_replaces_named_rates(archetypal):
    net = archetypal.with_parameters({"alpha": "3/2"})
    assert net.rate_constants == (Fraction(3, 2), Fraction(1))
    assert archetypal.rate_constants == (Fraction(2), Fraction(1))
    with pytest.raises(NetworkError):
        archetypal.with_parameters({"gamma": 1})


def test_with_reaction_builds_modified_network(archetypal):
    net = archetypal.with_reaction({"X": 1}, {"Y": 1}, 1)
    assert net.n_reactions == 3
    assert net.format_reaction(net.reactions[-1]) == "X -> Y"
    assert archetypal.n_reactions == 2


def test_lookup_helpers():
    net = load_fixture("futile_cycle")
    assert net.species_names == ("S", "P", "E", "F", "SE", "PF")
    assert net.index("PF") == 5
    with pytest.raises(KeyError):
        net.index("Q")
    assert net.n_reactions == 6
