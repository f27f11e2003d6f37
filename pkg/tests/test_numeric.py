import numpy as np
import pytest

from crnrob.fixtures import load_fixture
from crnrob.model import ReactionNetwork
from crnrob.numeric import (
    DoseResponseCurve,
    SolverOptions,
    VerdictKind,
    base_total,
    check_well_defined,
    default_grid,
    dose_response,
    empirical_verdict,
    find_steady_state,
    sweep,
)


def isomerization(k1=2, k2=3):
    return ReactionNetwork.from_reactions(["A", "B"], [({"A": 1}, {"B": 1}, k1), ({"B": 1}, {"A": 1}, k2)])


def schloegl():
    # dX/dt = -(X - 1)(X - 2)(X - 3): stable states 1 and 3
    return ReactionNetwork.from_reactions(
        ["X"],
        [({"X": 3}, {"X": 2}, 1), ({"X": 2}, {"X": 3}, 6), ({"X": 1}, {}, 11), ({}, {"X": 1}, 6)],
    )


@pytest.mark.parametrize("T", [1e-3, 1.0, 37.0, 1e6])
def test_isomerization_closed_form(T):
    ss = find_steady_state(isomerization(), [T, 0.0])
    assert ss.converged
    np.testing.assert_allclose(ss.x, [3 * T / 5, 2 * T / 5], rtol=1e-10)
    assert ss.compat_class == pytest.approx((T,))


def test_open_bistable_network_depends_on_start():
    net = schloegl()
    assert find_steady_state(net, [0.5]).x[0] == pytest.approx(1.0, abs=1e-9)
    assert find_steady_state(net, [2.5]).x[0] == pytest.approx(3.0, abs=1e-9)


def test_boundary_steady_state_is_reached():
    # X -> Y only: everything ends in Y
    net = ReactionNetwork.from_reactions(["X", "Y"], [({"X": 1}, {"Y": 1}, 1)])
    ss = find_steady_state(net, [2.0, 1.0])
    assert ss.converged
    np.testing.assert_allclose(ss.x, [0.0, 3.0], atol=1e-9)


def test_envz_steady_state_conserves_totals():
    net = load_fixture("envz_ompr")
    x0 = np.arange(1.0, 8.0)
    ss = find_steady_state(net, x0)
    assert ss.converged and ss.relative_residual < 1e-12
    T1 = x0[[0, 1, 2, 5, 6]].sum()
    assert ss.x[[0, 1, 2, 5, 6]].sum() == pytest.approx(T1, rel=1e-12)


@pytest.mark.parametrize("x0", [[1.0], [1.0, -1.0], [np.nan, 1.0]])
def test_invalid_initial_conditions(x0):
    with pytest.raises(ValueError):
        find_steady_state(isomerization(), x0)


def test_sweep_shapes_and_parallel_determinism():
    net = load_fixture("envz_ompr")
    grid = np.geomspace(0.1, 1e3, 6)
    one = sweep(net, np.ones(7), 0, grid, jobs=1)
    two = sweep(net, np.ones(7), 0, grid, jobs=2)
    assert one.states.shape == (6, 7)
    np.testing.assert_array_equal(one.states, two.states)
    assert one.converged.all()
    curve = one.curve(net.index("YP"))
    np.testing.assert_allclose(curve.values, 2.0, atol=1e-10)


@pytest.mark.parametrize("grid", [[], [1.0, 1.0], [2.0, 1.0], [-1.0, 2.0]])
def test_sweep_rejects_bad_grids(grid):
    with pytest.raises(ValueError):
        sweep(isomerization(), [1.0, 1.0], 0, grid)


def test_dose_response_default_grid_and_limit():
    net = load_fixture("archetypal_mod")
    curve = dose_response(net, [1.0, 1.0], 0, 0)
    assert len(curve.lambdas) == 40
    assert curve.lambdas[0] == pytest.approx(0.2)
    assert curve.lambdas[-1] == pytest.approx(2e6)
    v = empirical_verdict(curve)
    assert v.kind == VerdictKind.FINITE
    assert v.limit_estimate == pytest.approx(1.0, rel=1e-5)


def test_default_grid():
    g = default_grid(3.0)
    assert len(g) == 40
    assert g[0] == pytest.approx(0.3) and g[-1] == pytest.approx(3e6)
    assert np.allclose(np.diff(np.log(g)), np.log(g[1] / g[0]))
    with pytest.raises(ValueError):
        default_grid(1.0, start=0)


def test_base_total_uses_largest_positive_law():
    net = load_fixture("futile_cycle")
    assert base_total(net, np.ones(6)) == 4.0
    assert base_total(schloegl(), [2.5]) == 2.5


def _curve(lam, values):
    return DoseResponseCurve(0, 0, np.asarray(lam, float), np.asarray(values, float), np.ones(1))


LAM = np.geomspace(0.1, 1e6, 40)


@pytest.mark.parametrize(
    "values, kind",
    [
        (2.0 + 1.0 / LAM, VerdictKind.FINITE),
        (np.full(40, 0.5), VerdictKind.FINITE),
        (1.0 / LAM, VerdictKind.ZERO),
        (np.exp(-LAM), VerdictKind.ZERO),
        (LAM, VerdictKind.INFINITY),
        (np.sqrt(LAM), VerdictKind.INFINITY),
        (np.log(LAM + 2.0), VerdictKind.INCONCLUSIVE),
        (1.0 + 0.5 * np.sin(np.log(LAM) * 3), VerdictKind.INCONCLUSIVE),
    ],
)
def test_empirical_verdict_synthetic(values, kind):
    assert empirical_verdict(_curve(LAM, values)).kind == kind


def test_verdict_needs_enough_converged_points():
    short = np.geomspace(1, 10, 20)
    assert empirical_verdict(_curve(short, np.ones(20))).kind == VerdictKind.INCONCLUSIVE
    c = DoseResponseCurve(0, 0, LAM, np.ones(40), np.ones(1), converged=np.arange(40) < 4)
    assert empirical_verdict(c).kind == VerdictKind.INCONCLUSIVE


def test_curve_validation():
    with pytest.raises(ValueError):
        _curve([1.0, 2.0], [1.0])
    with pytest.raises(ValueError):
        _curve([2.0, 1.0], [1.0, 1.0])


def test_well_definedness_probe():
    net = load_fixture("envz_ompr")
    assert check_well_defined(net, np.ones(7), net.index("X"), 10.0)
    with pytest.raises(ValueError):
        check_well_defined(net, np.ones(7), 0, 1.0, n_starts=1)


def test_solver_options_are_respected():
    loose = SolverOptions(final_tol=1e-3)
    ss = find_steady_state(load_fixture("futile_cycle"), np.ones(6), loose)
    assert ss.converged
