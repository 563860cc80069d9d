"""The min-cost transport solver against an exhaustive LP-vertex oracle."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from infoforge.transport import solve_transport

from oracles import transport_bruteforce


def test_identity_is_free():
    supply = np.array([0.5, 0.3, 0.2])
    cost = np.zeros((3, 3))
    flow, total = solve_transport(supply, supply, cost)
    assert total == 0.0
    np.testing.assert_allclose(flow.sum(axis=1), supply, atol=1e-12)


def test_textbook_instance():
    # classic 2x3 with a known optimum
    supply = np.array([1.0, 1.0])
    demand = np.array([0.5, 0.5, 1.0])
    cost = np.array([[1.0, 2.0, 3.0], [4.0, 1.0, 2.0]])
    flow, total = solve_transport(supply, demand, cost)
    oracle = transport_bruteforce(supply, demand, cost, grid=2)
    assert total == pytest.approx(oracle, abs=1e-12)
    np.testing.assert_allclose(flow.sum(axis=1), supply, atol=1e-12)
    np.testing.assert_allclose(flow.sum(axis=0), demand, atol=1e-12)


def test_permutation_costs():
    # one unit per bin, cost favors a cyclic shift
    n = 4
    supply = np.full(n, 1.0 / n)
    cost = np.fromfunction(lambda i, j: ((i + 1) % n != j) * 1.0, (n, n))
    flow, total = solve_transport(supply, supply, cost)
    assert total == pytest.approx(0.0, abs=1e-12)
    for i in range(n):
        assert flow[i, (i + 1) % n] == pytest.approx(1.0 / n)


def test_input_validation():
    ones = np.array([1.0])
    with pytest.raises(ValueError):
        solve_transport(np.array([1.0, 2.0]), ones, np.zeros((1, 1)))
    with pytest.raises(ValueError):
        solve_transport(np.array([-1.0]), ones, np.zeros((1, 1)))
    with pytest.raises(ValueError):
        solve_transport(ones, ones, np.array([[-2.0]]))


def test_zero_cycle_float_regression():
    # a forward arc plus its own reverse is an exact zero cycle, but float
    # rounding once made it look negative and the search chased it forever
    supply = np.array([0.5, 0.25, 0.25, 0.0, 0.0])
    demand = np.full(5, 0.2)
    cost = np.array(
        [
            [49.0, 38.9, 40.1, 45.3, 46.6],
            [40.6, 26.5, 28.9, 35.9, 37.6],
            [35.3, 17.7, 21.3, 30.3, 32.6],
            [30.9, 16.4, 13.7, 21.0, 24.4],
            [43.0, 45.9, 41.7, 34.2, 31.6],
        ]
    )
    flow, total = solve_transport(supply, demand, cost)
    np.testing.assert_allclose(flow.sum(axis=1), supply, atol=1e-9)
    np.testing.assert_allclose(flow.sum(axis=0), demand, atol=1e-9)
    oracle = transport_bruteforce(supply, demand, cost, grid=20)
    assert total == pytest.approx(oracle, abs=1e-9)


def test_unbalanced_moves_min_total():
    flow, total = solve_transport(
        np.array([1.0, 0.0]), np.array([0.4, 0.4]), np.array([[1.0, 2.0], [1.0, 1.0]])
    )
    assert flow.sum() == pytest.approx(0.8)
    assert total == pytest.approx(0.4 + 0.8)


@settings(deadline=None, max_examples=60)
@given(
    st.lists(st.integers(0, 8), min_size=2, max_size=4),
    st.lists(st.integers(0, 8), min_size=2, max_size=4),
    st.data(),
)
def test_against_bruteforce_property(sup_units, dem_units, data):
    total_units = max(sum(sup_units), sum(dem_units), 1)
    # rebalance so both sides sum to total_units
    sup_units[0] += total_units - sum(sup_units)
    dem_units[0] += total_units - sum(dem_units)
    supply = np.array(sup_units, dtype=float) / total_units
    demand = np.array(dem_units, dtype=float) / total_units
    m, n = len(sup_units), len(dem_units)
    cost = np.array(
        [[data.draw(st.integers(0, 9)) for _ in range(n)] for _ in range(m)],
        dtype=float,
    )
    flow, total = solve_transport(supply, demand, cost)
    oracle = transport_bruteforce(supply, demand, cost, grid=total_units)
    assert total == pytest.approx(oracle, abs=1e-9)
    np.testing.assert_allclose(flow.sum(axis=1), supply, atol=1e-9)
    np.testing.assert_allclose(flow.sum(axis=0), demand, atol=1e-9)
    assert (flow >= -1e-12).all()
