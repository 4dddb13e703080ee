"""Regret of leader and follower, and quartile bands across trials."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import _kernels as K
from .demand import DemandParams
from .econ import BestResponseCurve, EquilibriumOracle, best_response, golden_max


@dataclass(frozen=True)
class RegretCurve:
    instantaneous: np.ndarray
    cumulative: np.ndarray

    @classmethod
    def from_instantaneous(cls, values) -> "RegretCurve":
        values = np.asarray(values, dtype=float)
        return cls(values, np.cumsum(values))


@dataclass(frozen=True)
class AggregateBand:
    mean: np.ndarray
    q25: np.ndarray
    q75: np.ndarray


def stackelberg_regret(traj, oracle: EquilibriumOracle) -> RegretCurve:
    """Per-round shortfall of a^t b^t against a* b*(a*); negative rounds are kept."""
    return RegretCurve.from_instantaneous(oracle.leader_value - traj.a * traj.b)


def _expected_profit_vec(params: DemandParams, a, p, b):
    out = np.zeros(len(a))
    for i in range(len(a)):
        if b[i] > 0:
            mu = max(0.0, params.theta0 - params.theta1 * p[i])
            out[i] = p[i] * K.expected_sales(mu, params.sigma, b[i]) - a[i] * b[i]
    return out


def follower_regret(traj, params: DemandParams, curve: BestResponseCurve = None) -> RegretCurve:
    """Expected-profit shortfall of the follower against its best response to each a^t.

    ``curve`` replaces the per-round best-response solve with an interpolant;
    pass one when scoring long trajectories.
    """
    a, p, b = traj.a, traj.p, traj.b
    if curve is None:
        best = np.array([best_response(params, x).expected_profit if x > 0 else 0.0
                         for x in a])
    else:
        best = curve(a)
    return RegretCurve.from_instantaneous(best - _expected_profit_vec(params, a, p, b))


def _refined_argmax(f: Callable, grid: np.ndarray, values: np.ndarray) -> float:
    k = int(np.argmax(values))
    lo = grid[max(k - 1, 0)]
    hi = grid[min(k + 1, len(grid) - 1)]
    a, v = golden_max(f, lo, hi, 1e-9 * (grid[-1] - grid[0]))
    return a if v > values[k] else float(grid[k])


def alt_br_penalty(params: DemandParams, alt_response: Callable, a_grid) -> float:
    """Leader-value penalty from a follower that plays ``alt_response`` instead of the best response.

    Both maximisers are found on ``a_grid`` and golden-refined; the alternative
    follower's order values each.
    """
    a_grid = np.asarray(a_grid, dtype=float)
    alt = lambda a: a * alt_response(a)[1]
    exact = lambda a: a * best_response(params, a).b_star if a > 0 else 0.0
    a_alt = _refined_argmax(alt, a_grid, np.array([alt(a) for a in a_grid]))
    a_star = _refined_argmax(exact, a_grid, np.array([exact(a) for a in a_grid]))
    return float(max(0.0, alt(a_alt) - alt(a_star)))


def riskless_follower(params: DemandParams) -> Callable:
    """a -> (p, b) of the riskless follower with known parameters."""
    def respond(a):
        p, b, _ = K.riskless_order(params.theta0, params.theta1, float(a), params.sigma, np.inf)
        return p, b
    return respond


def nearest_rank(sorted_values: np.ndarray, q: float) -> np.ndarray:
    """Nearest-rank percentile along axis 0 of an ascending-sorted array."""
    n = sorted_values.shape[0]
    rank = max(1, int(np.ceil(q * n)))
    return sorted_values[rank - 1]


def aggregate_trials(curves: Sequence, length: int = None) -> AggregateBand:
    """Mean and nearest-rank quartiles per round across trials.

    Accepts RegretCurve objects (their cumulative series) or plain arrays.
    """
    series = [c.cumulative if isinstance(c, RegretCurve) else np.asarray(c, dtype=float)
              for c in curves]
    if not series:
        n = length or 0
        empty = np.zeros(n)
        return AggregateBand(empty, empty, empty)
    lengths = {len(s) for s in series}
    if len(lengths) != 1:
        raise ValueError(f"curves have mismatched lengths {sorted(lengths)}")
    stack = np.sort(np.vstack(series), axis=0)
    return AggregateBand(stack.mean(axis=0), nearest_rank(stack, 0.25),
                         nearest_rank(stack, 0.75))

