"""Gaussian additive demand, normal-distribution helpers and retailer profit.

Demand at retail price ``p`` is ``max(0, theta0 - theta1 * p) + eps`` with
``eps ~ Normal(0, sigma)``; realized demand is floored at zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from . import _kernels as K


class DomainError(ValueError):
    """Argument outside the mathematical domain of a function."""


@dataclass(frozen=True)
class DemandParams:
    """True or estimated demand line plus noise scale.

    Attributes:
        theta0: demand intercept (quantity at price zero)
        theta1: demand slope (quantity lost per unit of price)
        sigma: standard deviation of the additive demand noise
    """

    theta0: float
    theta1: float
    sigma: float = 0.0

    def __post_init__(self):
        if not self.theta0 >= 0:
            raise DomainError(f"theta0 must be >= 0, got {self.theta0}")
        if not self.theta1 > 0:
            raise DomainError(f"theta1 must be > 0, got {self.theta1}")
        if not self.sigma >= 0:
            raise DomainError(f"sigma must be >= 0, got {self.sigma}")

    @property
    def ratio(self) -> float:
        """Zero-crossing price theta0 / theta1."""
        return self.theta0 / self.theta1


def expected_demand(params: DemandParams, p: float) -> float:
    return max(0.0, params.theta0 - params.theta1 * p)


def sample_demand(params: DemandParams, p: float, rng: np.random.Generator) -> float:
    """One realized demand draw at price ``p``, floored at zero."""
    mean = expected_demand(params, p)
    if params.sigma == 0:
        return mean
    return max(0.0, mean + params.sigma * rng.standard_normal())


def std_normal_pdf(z: float) -> float:
    return K.norm_pdf(float(z))


def std_normal_cdf(z: float) -> float:
    return K.norm_cdf(float(z))


def std_normal_quantile(gamma: float) -> float:
    """Inverse of the standard normal cdf.

    Wichura's AS 241 rational approximation followed by one Newton step on
    the cdf. Raises DomainError unless 0 < gamma < 1.
    """
    gamma = float(gamma)
    if not 0.0 < gamma < 1.0:
        raise DomainError(f"quantile level must lie in (0, 1), got {gamma}")
    return K.norm_quantile(gamma)


def psi_loss(mu: float, sigma: float, b: float) -> float:
    """Expected shortage E[(X - b)+] for X ~ Normal(mu, sigma)."""
    return K.psi_loss(float(mu), float(sigma), float(b))


def expected_sales(mu: float, sigma: float, b: float) -> float:
    """E[min(max(X, 0), b)] for X ~ Normal(mu, sigma), exact."""
    return K.expected_sales(float(mu), float(sigma), float(b))


def expected_profit(params: DemandParams, a: float, p: float, b: float) -> float:
    """Retailer expected profit for wholesale ``a``, retail ``p`` and order ``b``.

    Evaluates ``p * int_0^b x f(x) dx + p * b * (1 - F(b)) - a * b`` through
    the exact truncated-normal moments; see ``expected_profit_quad`` for the
    quadrature reference.
    """
    if b <= 0:
        return 0.0
    mu = expected_demand(params, p)
    return p * K.expected_sales(mu, params.sigma, float(b)) - a * b


def expected_profit_quad(params: DemandParams, a: float, p: float, b: float,
                         tol: float = 1e-10) -> float:
    """Adaptive-quadrature evaluation of the expected retailer profit."""
    if b <= 0:
        return 0.0
    mu = expected_demand(params, p)
    sigma = params.sigma
    if sigma == 0:
        return p * min(mu, b) - a * b
    pdf = lambda x: math.exp(-0.5 * ((x - mu) / sigma) ** 2) / (sigma * math.sqrt(2 * math.pi))
    head, _ = integrate.quad(lambda x: x * pdf(x), 0.0, b, epsabs=tol, epsrel=0.0,
                             points=[mu] if 0 < mu < b else None, limit=200)
    # split the tail so the adaptive rule cannot step over a narrow peak
    edge = max(b, mu + 12 * sigma)
    tail, _ = integrate.quad(pdf, b, edge, epsabs=tol, epsrel=0.0,
                             points=[mu] if b < mu < edge else None, limit=200)
    tail += integrate.quad(pdf, edge, math.inf, epsabs=tol, epsrel=0.0, limit=200)[0]
    return p * head + p * b * tail - a * b


def riskless_profit(params: DemandParams, a: float, p: float) -> float:
    """Profit if every unit of expected demand sells: (theta0 - theta1 p)(p - a)."""
    return (params.theta0 - params.theta1 * p) * (p - a)
