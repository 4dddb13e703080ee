import math

import numpy as np
import pytest

from npgame.bandit import ConfidenceBall, order_bounds
from npgame.config import ExperimentConfig
from npgame.demand import DemandParams, DomainError, expected_profit
from npgame.econ import golden_max, leader_optimum
from npgame.game import (Trajectory, lnpg_follower_action, lnpg_leader_action,
                         lnpg_leader_choice, run_episode_lnpg, run_episode_ucb, splitmix64,
                         trial_seed, ucb_arms, ucb_state)

BASE = DemandParams(18.0, 7.0, 3.2)
SHORT = ExperimentConfig(horizon=400, trials=1)


def test_splitmix_reference_and_seeds():
    # first output of the reference splitmix64 generator seeded with 0
    assert splitmix64(0) == 0xE220A8397B1DCDAF
    seeds = {trial_seed(7, i) for i in range(1000)}
    assert len(seeds) == 1000
    assert trial_seed(7, 3) == trial_seed(7, 3) != trial_seed(8, 3)


def test_follower_at_truth_is_riskless():
    p, b = lnpg_follower_action(ConfidenceBall((18.0, 7.0), 0.0), 1.0, 3.2)
    assert p == pytest.approx(1.785714, abs=1e-6)
    assert b == pytest.approx(5.01690, abs=1e-5)


def test_follower_priced_out_and_margin():
    ball = ConfidenceBall((18.0, 7.0), 0.3, h_max=100.0)
    for a in (0.1, 1.0, 2.5):
        p, b = lnpg_follower_action(ball, a, 3.2)
        assert p >= a
    p, b = lnpg_follower_action(ConfidenceBall((18.0, 7.0), 0.0), 3.0, 3.2)
    assert (p, b) == (3.0, 0.0)
    with pytest.raises(DomainError):
        lnpg_follower_action(ball, 0.0, 3.2)


def riskless_leader_oracle(params):
    """Maximiser of a times the riskless follower's order, by golden search."""
    ball = ConfidenceBall((params.theta0, params.theta1), 0.0)
    return golden_max(lambda a: a * order_bounds(ball, a, params.sigma)[1], 1e-6,
                      params.ratio * (1 - 1e-9), 1e-10)[0]


def test_leader_noiseless_truth():
    ball = ConfidenceBall((18.0, 7.0), 0.0)
    # a (theta0 - theta1 a) / 2 peaks at theta0 / (2 theta1)
    assert lnpg_leader_action(ball, 0.0, (0.0, 50.0)) == pytest.approx(18 / 14, abs=1e-6)


def test_leader_at_truth_matches_riskless_oracle():
    ball = ConfidenceBall((18.0, 7.0), 0.0)
    a = lnpg_leader_action(ball, 3.2, (0.0, 50.0))
    assert a == pytest.approx(riskless_leader_oracle(BASE), abs=1e-6)
    # the riskless follower shifts the leader below the best-response equilibrium
    assert a < leader_optimum(BASE, 0.0, 50.0).a_star


def test_leader_beats_grid():
    ball = ConfidenceBall((17.0, 6.5), 0.4, h_max=50.0)
    a = lnpg_leader_action(ball, 3.2, (0.0, 50.0), 128)
    score = a * order_bounds(ball, a, 3.2)[1]
    from npgame.bandit import optimistic_H
    top = min(50.0, optimistic_H(ball) * (1 - 1e-6))
    for x in np.linspace(0, top, 129)[1:]:
        assert score >= x * order_bounds(ball, x, 3.2)[1] - 1e-9


def test_leader_degenerate_and_domain():
    ball = ConfidenceBall((1.0, 7.0), 0.0)
    a, degenerate = lnpg_leader_choice(ball, 3.2, (0.5, 50.0))
    assert (a, degenerate) == (0.5, True)
    with pytest.raises(DomainError):
        lnpg_leader_action(ball, 3.2, (0.0, 50.0), 32)


def test_stride_matches_full_scan():
    ball = ConfidenceBall((17.5, 6.8), 0.2, h_max=50.0)
    full, _ = lnpg_leader_choice(ball, 3.2, (0.0, 50.0), 512, stride=1)
    coarse, _ = lnpg_leader_choice(ball, 3.2, (0.0, 50.0), 512, stride=8)
    assert coarse == pytest.approx(full, abs=1e-5)


@pytest.mark.parametrize("runner", [run_episode_lnpg, run_episode_ucb])
def test_episode_determinism_and_accounting(runner):
    one, two = runner(SHORT, 5), runner(SHORT, 5)
    assert np.array_equal(one.data, two.data)
    assert len(one) == SHORT.horizon
    assert np.all(one.g_a == one.a * one.b)
    assert np.all(one.g_b == one.p * np.minimum(one.demand, one.b) - one.a * one.b)
    np.testing.assert_allclose(one.g_a + one.g_b, one.p * np.minimum(one.demand, one.b),
                               rtol=1e-12, atol=1e-9)
    assert np.all(one.data[:, :4] >= 0)
    steps = one.steps()
    assert [s.t for s in steps] == list(range(1, SHORT.horizon + 1))
    assert steps[9].g_a == one.g_a[9]
    assert runner(SHORT, 6).data.tolist() != one.data.tolist()


def test_monte_carlo_reward_matches_expectation():
    rng = np.random.default_rng(2)
    a, p, b = 1.0, 1.7, 6.0
    d = np.maximum(0.0, 18 - 7 * p + 3.2 * rng.standard_normal(10_000))
    g_b = p * np.minimum(d, b) - a * b
    se = g_b.std() / math.sqrt(len(g_b))
    assert abs(g_b.mean() - expected_profit(BASE, a, p, b)) < 3 * se


def test_ucb_arms_layout():
    assert ucb_arms(ExperimentConfig())[:2].tolist() == [0.5, 1.5]
    assert ucb_arms(ExperimentConfig(price_lo=1.0, price_hi=3.0, ucb_arms=3)).tolist() == [1, 2, 3]


def test_ucb_abandons_infeasible_arm():
    # the arm at 20 sits far above any optimistic zero-crossing, so it always earns 0
    config = ExperimentConfig(theta0=1.0, theta1=1.0, sigma=0.05, price_lo=0.2, price_hi=20.0,
                              ucb_arms=2, horizon=4000)
    traj = run_episode_ucb(config, 1)
    assert np.all(traj.g_a[traj.pulls == 1] == 0)
    share = [np.mean(chunk == 0) for chunk in np.split(traj.pulls, 4)]
    assert share[-1] > 0.9 and share[-1] > share[0]
    state = ucb_state(traj, config)
    assert state.counts.sum() == config.horizon and state.sums[1] == 0.0


def test_lnpg_round_diagnostics():
    traj = run_episode_lnpg(SHORT, 3)
    assert traj.radius[0] == SHORT.kappa
    assert np.all(np.diff(traj.radius[3:]) <= 0)
    assert isinstance(traj, Trajectory) and traj.fingerprint == SHORT.fingerprint()
