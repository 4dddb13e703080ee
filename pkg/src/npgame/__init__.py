"""Newsvendor pricing game: demand model, equilibrium oracles, LNPG and UCB leaders."""

from .bandit import (ConfidenceBall, EstimatorState, confidence_radius, estimator_update,
                     optimistic_H, optimistic_theta_for_action, order_bounds, theta_hat)
from .config import ConfigError, ExperimentConfig, load_config
from .demand import DemandParams, DomainError, expected_profit, psi_loss
from .econ import BestResponse, EquilibriumOracle, best_response, leader_optimum
from .game import (Trajectory, lnpg_follower_action, lnpg_leader_action, run_episode_lnpg,
                   run_episode_ucb)
from .regret import aggregate_trials, follower_regret, stackelberg_regret

__all__ = [
    "BestResponse", "ConfidenceBall", "ConfigError", "DemandParams", "DomainError",
    "EquilibriumOracle", "EstimatorState", "ExperimentConfig", "Trajectory",
    "aggregate_trials", "best_response", "confidence_radius", "estimator_update",
    "expected_profit", "follower_regret", "leader_optimum", "lnpg_follower_action",
    "lnpg_leader_action", "load_config", "optimistic_H", "optimistic_theta_for_action",
    "order_bounds", "psi_loss", "run_episode_lnpg", "run_episode_ucb",
    "stackelberg_regret", "theta_hat",
]
