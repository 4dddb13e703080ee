"""Perfect-information economics of the newsvendor pricing game.

The retailer's best response to a wholesale price is found along the curve
of optimal prices indexed by the stocking surplus ``z = b - E[demand]``
(for additive noise with fixed sigma this curve does not depend on theta).
The supplier's equilibrium price maximises ``a * b*(a)`` on a grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special
from scipy.interpolate import CubicHermiteSpline

from . import _kernels as K
from .demand import (DemandParams, DomainError, expected_demand, expected_profit,
                     psi_loss, std_normal_quantile)

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
SURPLUS_POINTS = 2001
SURPLUS_SPAN = 6.0


class InfeasibleMarket(ValueError):
    """Wholesale price at or above the demand zero-crossing."""


@dataclass(frozen=True)
class BestResponse:
    p_star: float
    b_star: float
    expected_profit: float


@dataclass(frozen=True)
class EquilibriumOracle:
    """Perfect-information Stackelberg equilibrium and the riskless-pricing gap."""

    a_star: float
    response: BestResponse
    leader_value: float
    follower_value: float
    epsilon_B: float


def golden_max(f: Callable[[float], float], lo: float, hi: float, tol: float):
    """Golden-section search for a maximum on [lo, hi]; returns (x, f(x))."""
    x1 = hi - GOLDEN * (hi - lo)
    x2 = lo + GOLDEN * (hi - lo)
    f1, f2 = f(x1), f(x2)
    while hi - lo > tol:
        if f1 >= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - GOLDEN * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + GOLDEN * (hi - lo)
            f2 = f(x2)
    mid = 0.5 * (lo + hi)
    return mid, f(mid)


def critical_fractile(p: float, a: float) -> float:
    if not p > a > 0:
        raise DomainError(f"critical fractile needs p > a > 0, got p={p}, a={a}")
    return (p - a) / p


def order_quantity(params: DemandParams, p: float, a: float) -> float:
    """Newsvendor order F^-1((p - a)/p) under Normal(E[demand at p], sigma), floored at 0."""
    gamma = critical_fractile(p, a)
    mean = expected_demand(params, p)
    if params.sigma == 0:
        return mean
    return max(0.0, mean + params.sigma * std_normal_quantile(gamma))


def riskless_price(params: DemandParams, a: float) -> float:
    if a >= params.ratio:
        raise InfeasibleMarket(f"wholesale price {a} >= zero-crossing {params.ratio}")
    return 0.5 * (params.ratio + a)


def mills_price_of_stock(params: DemandParams, a: float, z: float) -> float:
    """Optimal retail price when stocking ``z`` units above expected demand."""
    return riskless_price(params, a) - psi_loss(0.0, params.sigma, z) / (2.0 * params.theta1)


def riskless_response(params: DemandParams, a: float) -> BestResponse:
    """Riskless price with the fractile order, using the true parameters."""
    if not 0 < a < params.ratio:
        return BestResponse(a, 0.0, 0.0)
    p = riskless_price(params, a)
    b = order_quantity(params, p, a)
    return BestResponse(p, b, expected_profit(params, a, p, b))


def _sales_vec(mu, sigma, b):
    zb = (b - mu) / sigma
    z0 = -mu / sigma
    head = (mu * (special.ndtr(zb) - special.ndtr(z0))
            - sigma * (np.exp(-0.5 * zb * zb) - np.exp(-0.5 * z0 * z0)) * K.INV_SQRT_2PI)
    return np.where(b > 0, head + b * special.ndtr(-zb), 0.0)


def _stock_curve(params: DemandParams, a, z):
    """Price, order and expected profit along the optimal-price curve (vectorized)."""
    theta0, theta1, sigma = params.theta0, params.theta1, params.sigma
    u = z / sigma
    psi = sigma * (np.exp(-0.5 * u * u) * K.INV_SQRT_2PI - u * special.ndtr(-u))
    p = 0.5 * (theta0 / theta1 + a) - psi / (2.0 * theta1)
    mu = np.maximum(0.0, theta0 - theta1 * p)
    b = np.maximum(0.0, mu + z)
    return p, b, p * _sales_vec(mu, sigma, b) - a * b


def _zero(a: float) -> BestResponse:
    return BestResponse(a, 0.0, 0.0)


def _price_profile(params: DemandParams, a, p):
    """Profit at price ``p`` with the exact fractile order for that price (vectorized)."""
    mu = np.maximum(0.0, params.theta0 - params.theta1 * p)
    b = np.maximum(0.0, mu + params.sigma * special.ndtri((p - a) / p))
    return p, b, p * _sales_vec(mu, params.sigma, b) - a * b


def _refined_max(curve, x, lo_bound, hi_bound):
    """Grid argmax of ``curve`` over ``x`` then golden refinement; returns (p, b, g)."""
    _, _, g = curve(x)
    k = int(np.argmax(g))
    lo, hi = x[max(k - 1, 0)], x[min(k + 1, len(x) - 1)]
    lo, hi = max(lo, lo_bound), min(hi, hi_bound)

    def value(xx):
        return float(curve(np.array([xx]))[2][0])

    x_ref, g_ref = golden_max(value, lo, hi, 1e-7 * (x[-1] - x[0]))
    x_best = x_ref if g_ref > g[k] else x[k]
    return tuple(float(v[0]) for v in curve(np.array([x_best])))


def best_response(params: DemandParams, a: float) -> BestResponse:
    """Expected-profit maximising (price, order) of the retailer facing wholesale ``a``.

    Two 1-D searches are run and the better kept: the stock-surplus curve of
    Mills prices, and the price profile with the fractile order. The second is
    exact under the zero floor on demand, where the first drifts slightly.
    """
    if not a > 0:
        raise DomainError(f"wholesale price must be positive, got {a}")
    if a >= params.ratio:
        return _zero(a)
    if params.sigma == 0:
        p = riskless_price(params, a)
        b = expected_demand(params, p)
        return BestResponse(p, b, b * (p - a))
    span = SURPLUS_SPAN * params.sigma
    z = np.linspace(-span, span, SURPLUS_POINTS)
    by_stock = _refined_max(lambda zz: _stock_curve(params, a, zz), z, -span, span)
    top = params.ratio
    prices = a + (top - a) * np.arange(1, SURPLUS_POINTS + 1) / SURPLUS_POINTS
    by_price = _refined_max(lambda pp: _price_profile(params, a, pp), prices,
                            a * (1 + 1e-12), top)
    p, b, g = max(by_stock, by_price, key=lambda r: r[2])
    if not g > 0:
        return _zero(a)
    return BestResponse(p, b, g)


def best_response_many(params: DemandParams, a_values) -> np.ndarray:
    """Best-response (p, b, profit) rows for many wholesale prices."""
    a_values = np.asarray(a_values, dtype=float)
    out = np.zeros((len(a_values), 3))
    out[:, 0] = a_values
    if params.sigma == 0:
        ok = (a_values > 0) & (a_values < params.ratio)
        p = 0.5 * (params.ratio + a_values)
        b = np.maximum(0.0, params.theta0 - params.theta1 * p)
        out[ok] = np.column_stack([p, b, b * (p - a_values)])[ok]
        return out
    for i, a in enumerate(a_values):
        if 0 < a < params.ratio:
            r = best_response(params, float(a))
            out[i] = r.p_star, r.b_star, r.expected_profit
    return out


def feasible_grid(params: DemandParams, a_lo: float, a_hi: float, grid_n: int) -> np.ndarray:
    """grid_n wholesale prices on (a_lo, min(a_hi, zero-crossing)], excluding a_lo."""
    top = min(a_hi, params.ratio)
    if not top > a_lo:
        raise InfeasibleMarket(f"no feasible wholesale price in ({a_lo}, {a_hi}]")
    return a_lo + (top - a_lo) * np.arange(1, grid_n + 1) / grid_n


def leader_optimum(params: DemandParams, a_lo: float, a_hi: float,
                   grid_n: int = 512) -> EquilibriumOracle:
    """Stackelberg equilibrium under perfect information.

    Grid search of ``a * b*(a)`` on the feasible range, golden-refined on the
    bracketing cells; ties go to the smaller price.
    """
    if not 0 <= a_lo < a_hi:
        raise DomainError(f"need 0 <= a_lo < a_hi, got ({a_lo}, {a_hi})")
    if grid_n < 64:
        raise DomainError(f"grid_n must be >= 64, got {grid_n}")
    grid = feasible_grid(params, a_lo, a_hi, grid_n)
    values = np.array([a * best_response(params, a).b_star for a in grid])
    k = int(np.argmax(values))
    lo = grid[k - 1] if k > 0 else a_lo
    hi = grid[min(k + 1, len(grid) - 1)]
    a_ref, v_ref = golden_max(lambda a: a * best_response(params, a).b_star if a > 0 else 0.0,
                              lo, hi, 1e-7 * (grid[-1] - a_lo))
    a_star = a_ref if v_ref > values[k] else float(grid[k])
    response = best_response(params, a_star)
    return EquilibriumOracle(
        a_star=float(a_star),
        response=response,
        leader_value=float(a_star * response.b_star),
        follower_value=response.expected_profit,
        epsilon_B=epsilon_B_gap(params, grid),
    )


def riskless_gap(params: DemandParams, a: float) -> float:
    """Best-response profit minus riskless-strategy profit at one wholesale price."""
    if not 0 < a < params.ratio:
        return 0.0
    return best_response(params, a).expected_profit - riskless_response(params, a).expected_profit


def epsilon_B_gap(params: DemandParams, a_grid) -> float:
    """Worst riskless-pricing shortfall of the follower over a wholesale-price grid."""
    gaps = [riskless_gap(params, float(a)) for a in np.asarray(a_grid, dtype=float)]
    return max(0.0, max(gaps, default=0.0))


def fractile_monotonicity_check(params: DemandParams, a_grid) -> bool:
    """True iff the best-response order is nonincreasing along an ascending grid."""
    orders = [best_response(params, float(a)).b_star for a in a_grid]
    positive = [b for b in orders if b > 0]
    return all(x >= y for x, y in zip(positive, positive[1:]))


class BestResponseCurve:
    """Interpolated best-response profit V(a) on (0, zero-crossing).

    Built from exact best responses on a Chebyshev-spaced grid with Hermite
    cubics; the envelope theorem supplies the slope dV/da = -b*(a).
    """

    def __init__(self, params: DemandParams, n: int = 1025):
        self.params = params
        top = params.ratio
        # cluster nodes near both ends where the order changes fastest
        x = 0.5 * (1 - np.cos(np.linspace(0.0, math.pi, n)))
        nodes = 1e-6 * top + x * (top - 2e-6 * top)
        responses = [best_response(params, float(a)) for a in nodes]
        values = np.array([r.expected_profit for r in responses])
        slopes = -np.array([r.b_star for r in responses])
        self._lo, self._hi = nodes[0], nodes[-1]
        self._spline = CubicHermiteSpline(nodes, values, slopes)

    def __call__(self, a):
        a = np.asarray(a, dtype=float)
        inside = (a >= self._lo) & (a <= self._hi)
        out = np.zeros_like(a)
        out[inside] = self._spline(a[inside])
        if np.any(~inside & (a > 0) & (a < self._lo)):
            for i in np.flatnonzero(~inside & (a > 0) & (a < self._lo)):
                out.flat[i] = best_response(self.params, float(a.flat[i])).expected_profit
        return out
