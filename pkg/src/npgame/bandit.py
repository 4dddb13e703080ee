"""Shared ridge estimator of the demand line and the optimism it induces.

Both agents read the same estimate. The acting confidence set is the
Euclidean ball of radius ``kappa * sqrt(ln t / t)`` around the ridge
estimate; the Gram matrix is kept for diagnostics only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .demand import DomainError

N_ANGLES = 256


@dataclass
class EstimatorState:
    """Ridge regression of demand on the features (1, -p)."""

    lam: float = 1.0
    kappa: float = 3.0
    gram: np.ndarray = field(default=None)
    moment: np.ndarray = field(default=None)
    t: int = 0

    def __post_init__(self):
        if not self.lam > 0:
            raise DomainError(f"lambda must be positive, got {self.lam}")
        if not self.kappa > 0:
            raise DomainError(f"kappa must be positive, got {self.kappa}")
        if self.gram is None:
            self.gram = self.lam * np.eye(2)
        if self.moment is None:
            self.moment = np.zeros(2)


@dataclass(frozen=True)
class ConfidenceBall:
    center: tuple
    radius: float
    h_max: float = math.inf

    def __post_init__(self):
        if not self.radius >= 0:
            raise DomainError(f"radius must be >= 0, got {self.radius}")


def estimator_update(state: EstimatorState, p: float, d: float) -> EstimatorState:
    if not p >= 0:
        raise DomainError(f"price must be >= 0, got {p}")
    x = np.array([1.0, -p])
    state.gram += np.outer(x, x)
    state.moment += x * d
    state.t += 1
    return state


def theta_hat(state: EstimatorState) -> tuple:
    """Ridge estimate (theta0, theta1); the slope is reported positive-down."""
    g = state.gram
    c0, c1 = K.ridge_solve(g[0, 0], g[0, 1], g[1, 1], state.moment[0], state.moment[1])
    return float(c0), float(c1)


def confidence_radius(state: EstimatorState) -> float:
    """kappa * sqrt(ln t / t) for t >= 3, else kappa."""
    return float(K.radius(state.t, state.kappa))


def default_h_max(center, price_hi: float) -> float:
    """Cap on the optimistic price ratio: 4 theta0 / max(theta1, 0.1), at most 2 price_hi."""
    return float(K.h_cap(center[0], center[1], price_hi))


def confidence_ball(state: EstimatorState, price_hi: float = 50.0) -> ConfidenceBall:
    center = theta_hat(state)
    return ConfidenceBall(center, confidence_radius(state), default_h_max(center, price_hi))


def optimistic_H(ball: ConfidenceBall) -> float:
    """Largest price ratio theta0/theta1 over the ball, or the cap when theta1 <= 0 is reachable."""
    c0, c1 = ball.center
    return float(K.optimistic_ratio(c0, c1, ball.radius, ball.h_max))


def _cap(ball: ConfidenceBall) -> float:
    # the kernels need a finite cap; an uncapped ball with r < theta1 never reaches it
    if math.isfinite(ball.h_max):
        return ball.h_max
    return 1e300


def optimistic_theta_for_action(ball: ConfidenceBall, a: float, sigma: float) -> tuple:
    """Boundary point maximising the optimistic riskless order value p0 * b.

    Falls back to the center when no point of the ball makes the market feasible.
    """
    if not a > 0:
        raise DomainError(f"wholesale price must be positive, got {a}")
    c0, c1 = ball.center
    t0, t1, _, _ = K.theta_bar_full(c0, c1, ball.radius, a, sigma, _cap(ball), N_ANGLES)
    return float(t0), float(t1)


def optimistic_value(ball: ConfidenceBall, theta, a: float, sigma: float) -> float:
    """The objective maximised by optimistic_theta_for_action, evaluated at ``theta``."""
    return float(K.follower_value(theta[0], theta[1], a, sigma, _cap(ball)))


def order_bounds(ball: ConfidenceBall, a: float, sigma: float) -> tuple:
    """Pessimistic (center) and optimistic (theta-bar) riskless orders at wholesale ``a``."""
    if not a > 0:
        raise DomainError(f"wholesale price must be positive, got {a}")
    c0, c1 = ball.center
    h = _cap(ball)
    _, b_lower, _ = K.riskless_order(c0, c1, a, sigma, h)
    t0, t1 = optimistic_theta_for_action(ball, a, sigma)
    _, b_upper, _ = K.riskless_order(t0, t1, a, sigma, h)
    return float(b_lower), float(max(b_upper, b_lower))
