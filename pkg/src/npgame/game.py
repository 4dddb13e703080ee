"""Repeated newsvendor pricing game under the LNPG leader or a UCB1 leader.

Both leaders face the same optimistic riskless follower and share one ridge
estimator. The round loop lives in numba kernels; this module wraps it with
seeding and typed trajectories.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .bandit import N_ANGLES, ConfidenceBall, _cap
from .config import ExperimentConfig
from .demand import DomainError

_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def trial_seed(base_seed: int, i: int) -> int:
    """Independent, reproducible seed of trial ``i``."""
    return splitmix64(splitmix64(base_seed & _MASK64) ^ (i & _MASK64))


@dataclass(frozen=True)
class JointAction:
    a: float
    p: float
    b: float


@dataclass(frozen=True)
class StepRecord:
    t: int
    action: JointAction
    demand: float
    g_a: float
    g_b: float


@dataclass
class UcbState:
    arms: np.ndarray
    counts: np.ndarray
    sums: np.ndarray

    @classmethod
    def fresh(cls, arms) -> "UcbState":
        arms = np.asarray(arms, dtype=float)
        if len(arms) < 2:
            raise DomainError("UCB needs at least two arms")
        return cls(arms, np.zeros(len(arms)), np.zeros(len(arms)))


_COLUMNS = ("a", "p", "b", "demand", "g_a", "g_b", "theta0_hat", "theta1_hat",
            "radius", "h_max")


@dataclass
class Trajectory:
    """Per-round arrays of one episode; round t is index t - 1.

    Besides actions and rewards it keeps the ball each round acted on, so
    diagnostics need no re-simulation.
    """

    algorithm: str
    seed: int
    fingerprint: str
    data: np.ndarray
    degenerate: np.ndarray
    pulls: np.ndarray = field(default=None)

    def __len__(self):
        return self.data.shape[0]

    def __getattr__(self, name):
        if name in _COLUMNS:
            return self.data[:, _COLUMNS.index(name)]
        raise AttributeError(name)

    def step(self, t: int) -> StepRecord:
        row = self.data[t - 1]
        return StepRecord(t, JointAction(row[0], row[1], row[2]), row[3], row[4], row[5])

    def steps(self):
        return [self.step(t) for t in range(1, len(self) + 1)]


def ucb_arms(config: ExperimentConfig) -> np.ndarray:
    """K evenly spaced wholesale prices; with a zero lower end the grid is shifted half a step."""
    lo, hi, k = config.price_lo, config.price_hi, config.ucb_arms
    if lo == 0:
        return (np.arange(k) + 0.5) * (hi - lo) / k
    return np.linspace(lo, hi, k)


def ucb_state(traj: Trajectory, config: ExperimentConfig) -> UcbState:
    """Final arm counts and reward sums of a UCB trajectory."""
    state = UcbState.fresh(ucb_arms(config))
    np.add.at(state.counts, traj.pulls, 1.0)
    np.add.at(state.sums, traj.pulls, traj.g_a)
    return state


def lnpg_leader_choice(ball: ConfidenceBall, sigma: float, a_range, grid_n: int = 512,
                       stride: int = 1):
    """Optimistic leader price and whether the feasible set was empty."""
    if grid_n < 64:
        raise DomainError(f"grid_n must be >= 64, got {grid_n}")
    c0, c1 = ball.center
    a, _, degenerate, _ = K.leader_action(c0, c1, ball.radius, sigma, _cap(ball),
                                          float(a_range[0]), float(a_range[1]), grid_n,
                                          N_ANGLES, stride)
    return float(a), bool(degenerate)


def lnpg_leader_action(ball: ConfidenceBall, sigma: float, a_range, grid_n: int = 512) -> float:
    """Wholesale price maximising a times the optimistic order over the ball."""
    return lnpg_leader_choice(ball, sigma, a_range, grid_n)[0]


def lnpg_follower_action(ball: ConfidenceBall, a: float, sigma: float) -> tuple:
    """Riskless price and fractile order under the optimistic theta for ``a``."""
    if not a > 0:
        raise DomainError(f"wholesale price must be positive, got {a}")
    c0, c1 = ball.center
    p, b = K.follower_action(c0, c1, ball.radius, a, sigma, _cap(ball), N_ANGLES, math.nan)
    return float(p), float(b)


def episode_noise(config: ExperimentConfig, seed: int) -> np.ndarray:
    return np.random.default_rng(seed).standard_normal(config.horizon)


def run_episode_lnpg(config: ExperimentConfig, seed: int) -> Trajectory:
    noise = episode_noise(config, seed)
    out = np.zeros((config.horizon, len(_COLUMNS)))
    flags = np.zeros(config.horizon, dtype=np.bool_)
    K.run_lnpg(config.theta0, config.theta1, config.sigma, config.sigma, config.kappa,
               config.lam, config.price_lo, config.price_hi, config.grid_n,
               config.leader_stride, noise, out, flags, config.learner_signal == "latent")
    return Trajectory("lnpg", seed, config.fingerprint(), out, flags)


def run_episode_ucb(config: ExperimentConfig, seed: int) -> Trajectory:
    noise = episode_noise(config, seed)
    out = np.zeros((config.horizon, len(_COLUMNS)))
    pulls = np.zeros(config.horizon, dtype=np.int64)
    K.run_ucb(config.theta0, config.theta1, config.sigma, config.sigma, config.kappa,
              config.lam, config.price_hi, ucb_arms(config), config.ucb_c, noise, out, pulls,
              config.learner_signal == "latent")
    return Trajectory("ucb", seed, config.fingerprint(), out,
                      np.zeros(config.horizon, dtype=np.bool_), pulls)


RUNNERS = {"lnpg": run_episode_lnpg, "ucb": run_episode_ucb}
