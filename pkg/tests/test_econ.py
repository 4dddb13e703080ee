import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.optimize import minimize

from npgame.demand import DemandParams, DomainError, expected_profit, expected_profit_quad
from npgame.econ import (BestResponseCurve, InfeasibleMarket, best_response, critical_fractile,
                         epsilon_B_gap, feasible_grid, fractile_monotonicity_check,
                         leader_optimum, mills_price_of_stock, order_quantity,
                         riskless_gap, riskless_price, riskless_response)

BASE = DemandParams(18.0, 7.0, 3.2)


def test_critical_fractile():
    assert critical_fractile(2.0, 0.5) == 0.75
    with pytest.raises(DomainError):
        critical_fractile(1.0, 1.0)
    with pytest.raises(DomainError):
        critical_fractile(1.0, 0.0)


def test_order_quantity_reference():
    # 5.5 + 3.2 * Phi^-1(0.44)
    assert order_quantity(BASE, 1.785714, 1.0) == pytest.approx(5.01690, abs=1e-5)


def test_order_quantity_floor():
    params = DemandParams(18.0, 7.0, 0.1)
    p = 18 / 7
    assert order_quantity(params, p, p * (1 - 1e-9)) == 0.0


@pytest.mark.parametrize("params, a, expected", [
    (BASE, 1.0, 1.785714), (DemandParams(40.0, 5.0, 5.8), 2.0, 5.0)])
def test_riskless_price(params, a, expected):
    assert riskless_price(params, a) == pytest.approx(expected, abs=1e-6)


def test_riskless_price_infeasible():
    with pytest.raises(InfeasibleMarket):
        riskless_price(BASE, 3.0)


def test_mills_price_reference():
    # 1.785714 - (3.2 phi(0)) / 14
    assert mills_price_of_stock(BASE, 1.0, 0.0) == pytest.approx(1.694528, abs=1e-6)


def nelder_mead_optimum(params, a, start):
    res = minimize(lambda x: -expected_profit(params, a, x[0], x[1]), start,
                   method="Nelder-Mead",
                   options=dict(xatol=1e-10, fatol=1e-13, maxiter=4000))
    return -res.fun


@pytest.mark.parametrize("a", [0.3, 0.87, 1.2, 1.8])
def test_best_response_beats_local_search(a):
    br = best_response(BASE, a)
    for start in ([br.p_star, br.b_star], [(18 / 7 + a) / 2, 5.0]):
        assert br.expected_profit >= nelder_mead_optimum(BASE, a, start) - 1e-9


def test_best_response_profit_is_consistent():
    br = best_response(BASE, 1.0)
    assert br.expected_profit == pytest.approx(
        expected_profit_quad(BASE, 1.0, br.p_star, br.b_star), abs=1e-9)


def test_best_response_infeasible_and_domain():
    assert best_response(BASE, 18 / 7) == best_response(BASE, 5.0).__class__(18 / 7, 0.0, 0.0)
    with pytest.raises(DomainError):
        best_response(BASE, 0.0)


def test_best_response_noiseless_is_riskless():
    params = DemandParams(18.0, 7.0, 0.0)
    br = best_response(params, 1.0)
    assert br.p_star == pytest.approx(1.785714, abs=1e-6)
    assert br.b_star == pytest.approx(5.5)


def test_riskless_response_reference():
    r = riskless_response(BASE, 1.0)
    assert (r.p_star, r.b_star) == pytest.approx((1.785714, 5.01690), abs=1e-5)


@given(st.floats(0.05, 0.95))
def test_best_response_dominates_riskless(frac):
    a = frac * BASE.ratio
    assert best_response(BASE, a).expected_profit >= riskless_response(BASE, a).expected_profit - 1e-12


def test_noiseless_leader_optimum_is_half_ratio():
    # a * (theta0 - theta1 a) / 2 peaks at theta0 / (2 theta1)
    params = DemandParams(18.0, 7.0, 0.0)
    oracle = leader_optimum(params, 0.0, 50.0)
    assert oracle.a_star == pytest.approx(18 / 14, abs=1e-6)
    assert oracle.epsilon_B == pytest.approx(0.0, abs=1e-12)


def test_leader_optimum_grid_refinement():
    oracle = leader_optimum(BASE, 0.0, 50.0, 512)
    fine = feasible_grid(BASE, 0.0, 50.0, 5120)
    window = fine[np.abs(fine - oracle.a_star) < 0.02]
    best_fine = max(a * best_response(BASE, a).b_star for a in window)
    assert oracle.leader_value == pytest.approx(best_fine, abs=1e-3)
    assert oracle.leader_value >= best_fine - 1e-9
    assert oracle.follower_value == pytest.approx(oracle.response.expected_profit)


def test_leader_optimum_domain():
    with pytest.raises(DomainError):
        leader_optimum(BASE, 0.0, 50.0, 10)
    with pytest.raises(DomainError):
        leader_optimum(BASE, 5.0, 1.0)
    with pytest.raises(InfeasibleMarket):
        leader_optimum(BASE, 3.0, 50.0)


def test_fractile_monotonicity():
    assert fractile_monotonicity_check(BASE, feasible_grid(BASE, 0.0, 50.0, 100))


def test_epsilon_B():
    grid = feasible_grid(BASE, 0.0, 50.0, 64)
    eps = epsilon_B_gap(BASE, grid)
    assert eps == pytest.approx(max(riskless_gap(BASE, a) for a in grid))
    assert eps > 0
    assert epsilon_B_gap(DemandParams(18, 7, 0), grid) == pytest.approx(0.0, abs=1e-12)


def test_best_response_curve_accuracy():
    curve = BestResponseCurve(BASE)
    rng = np.random.default_rng(1)
    a = rng.uniform(1e-3, BASE.ratio * 0.999, 40)
    direct = np.array([best_response(BASE, x).expected_profit for x in a])
    assert np.max(np.abs(curve(a) - direct)) < 1e-7
    assert curve(np.array([BASE.ratio, 10.0])).tolist() == [0.0, 0.0]
