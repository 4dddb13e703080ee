"""The eleven acceptance criteria as callable checks.

Each check returns a Check with a pass flag and a one-line detail. Criteria
7, 8 and 9 share one simulation run, cached for the life of the process.
"""

from __future__ import annotations

import contextlib
import io
import math
import tempfile
import time
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy import integrate
from scipy.special import ndtr

from . import _kernels as K
from .bandit import ConfidenceBall, optimistic_H
from .config import ExperimentConfig
from .demand import DemandParams, psi_loss
from .econ import (BestResponseCurve, best_response, feasible_grid, leader_optimum,
                   riskless_gap)
from .experiment import run_trials
from .regret import aggregate_trials

REFERENCE_PARAMS = (
    DemandParams(18.0, 7.0, 3.2),
    DemandParams(73.0, 7.0, 3.2),
    DemandParams(80.0, 11.0, 3.2),
    DemandParams(40.0, 5.0, 5.8),
)
BASELINE = ExperimentConfig(theta0=18.0, theta1=7.0, sigma=3.2, kappa=3.0, horizon=10_000,
                        trials=200, ucb_arms=50, price_lo=0.0, price_hi=50.0)


@dataclass(frozen=True)
class Check:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} [{self.number:2d}] {self.name}: {self.detail} ({self.seconds:.1f}s)"


def _timed(number: int, name: str, fn) -> Check:
    start = time.perf_counter()
    passed, detail = fn()
    return Check(number, name, bool(passed), detail, time.perf_counter() - start)


def psi_quadrature(mu: float, sigma: float, b: float) -> float:
    f = lambda x: (x - b) * math.exp(-0.5 * ((x - mu) / sigma) ** 2) / (sigma * math.sqrt(2 * math.pi))
    value, _ = integrate.quad(f, b, math.inf, epsabs=1e-12, epsrel=1e-12, limit=200)
    return value


def criterion_1():
    worst = 0.0
    start = time.perf_counter()
    for mu in np.linspace(0.0, 100.0, 10):
        for sigma in np.linspace(0.5, 10.0, 10):
            for b in mu + sigma * np.linspace(-6.0, 6.0, 13):
                worst = max(worst, abs(psi_loss(mu, sigma, b) - psi_quadrature(mu, sigma, b)))
    elapsed = time.perf_counter() - start
    return worst <= 1e-8 and elapsed < 5.0, f"max abs error {worst:.2e}, {elapsed:.2f}s"


def criterion_2():
    spread = 0.0
    for sigma in (0.5, 3.2, 5.8):
        for z in np.linspace(-3.0 * sigma, 3.0 * sigma, 25):
            values = []
            for params in REFERENCE_PARAMS:
                for frac in (0.1, 0.5, 0.9):
                    gamma = params.theta0 - params.theta1 * frac * params.ratio
                    values.append(psi_loss(gamma, sigma, gamma + z))
            spread = max(spread, max(values) - min(values))
    return spread <= 1e-12, f"max spread {spread:.2e}"


def ratio_brute_force(c0: float, c1: float, r: float, n: int = 100_000) -> float:
    phi = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
    return float(np.max((c0 + r * np.cos(phi)) / (c1 + r * np.sin(phi))))


def criterion_3():
    rng = np.random.default_rng(3)
    worst = 0.0
    start = time.perf_counter()
    for _ in range(100):
        c0 = rng.uniform(1.0, 100.0)
        c1 = rng.uniform(0.5, 15.0)
        r = rng.uniform(0.0, 0.95) * c1
        closed = optimistic_H(ConfidenceBall((c0, c1), r))
        brute = ratio_brute_force(c0, c1, r)
        worst = max(worst, abs(closed - brute) / brute)
    elapsed = time.perf_counter() - start
    return worst <= 1e-6 and elapsed < 10.0, f"max rel error {worst:.2e}, {elapsed:.2f}s"


def criterion_4():
    bad = []
    for params in REFERENCE_PARAMS:
        grid = feasible_grid(params, 0.0, params.ratio, 200)
        orders = np.array([best_response(params, a).b_star for a in grid])
        pos = orders[orders > 0]
        if not (np.all(np.diff(pos) < 0) and np.all(np.diff(orders) <= 0)):
            bad.append((params.theta0, params.theta1))
    return not bad, "orders strictly decreasing for all four configs" if not bad else f"violations {bad}"


def local_maxima(values: np.ndarray) -> int:
    v = np.concatenate([[-np.inf], values, [-np.inf]])
    return int(np.sum((v[1:-1] > v[:-2]) & (v[1:-1] >= v[2:])))


def criterion_5():
    counts = []
    for params in REFERENCE_PARAMS:
        grid = feasible_grid(params, 0.0, params.ratio, 512)
        values = np.array([a * best_response(params, a).b_star for a in grid])
        counts.append(local_maxima(values))
    return all(c == 1 for c in counts), f"local maxima per config {counts}"


def _grid_best(params: DemandParams, a: float, prices, orders):
    best, arg = -np.inf, (0.0, 0.0)
    for p in prices:
        mu = max(0.0, params.theta0 - params.theta1 * p)
        zb = (orders - mu) / params.sigma
        z0 = -mu / params.sigma
        head = (mu * (ndtr(zb) - ndtr(z0))
                - params.sigma * (np.exp(-0.5 * zb ** 2) - math.exp(-0.5 * z0 ** 2)) * K.INV_SQRT_2PI)
        g = p * np.where(orders > 0, head + orders * ndtr(-zb), 0.0) - a * orders
        k = int(np.argmax(g))
        if g[k] > best:
            best, arg = float(g[k]), (p, orders[k])
    return best, arg


def grid_oracle(params: DemandParams, a: float, n: int = 1000) -> float:
    """Brute-force optimum over an n x n (p, b) grid, then an n x n grid on the winning cell's neighbourhood."""
    prices = np.linspace(a, params.ratio, n)
    orders = np.linspace(0.0, params.theta0 - params.theta1 * a + 6 * params.sigma, n)
    _, (p0, b0) = _grid_best(params, a, prices, orders)
    dp, db = prices[1] - prices[0], orders[1] - orders[0]
    fine_p = np.linspace(max(a, p0 - 2 * dp), min(params.ratio, p0 + 2 * dp), n)
    fine_b = np.linspace(max(0.0, b0 - 2 * db), b0 + 2 * db, n)
    return _grid_best(params, a, fine_p, fine_b)[0]


def criterion_6():
    rng = np.random.default_rng(6)
    start = time.perf_counter()
    gaps = []
    for _ in range(3):
        params = DemandParams(rng.uniform(10, 100), rng.uniform(2, 12), rng.uniform(0.5, 6))
        a = rng.uniform(0.05, 0.6) * params.ratio
        exact = best_response(params, a).expected_profit
        gaps.append(exact - grid_oracle(params, a))
    elapsed = time.perf_counter() - start
    ok = all(-1e-9 <= g <= 1e-4 for g in gaps) and elapsed < 60.0
    return ok, f"best response minus grid optimum {[f'{g:.1e}' for g in gaps]}, {elapsed:.1f}s"


@lru_cache(maxsize=None)
def baseline_run(config: ExperimentConfig = BASELINE):
    """The shared desk-scale run: oracle plus LNPG and UCB trials with their wall times."""
    oracle = leader_optimum(DemandParams(config.theta0, config.theta1, config.sigma),
                            config.price_lo, config.price_hi, config.grid_n)
    out = {"oracle": oracle}
    for alg in ("lnpg", "ucb"):
        start = time.perf_counter()
        out[alg] = run_trials(config, alg, oracle.leader_value)
        out[alg + "_seconds"] = time.perf_counter() - start
    return out


def criterion_7():
    run = baseline_run()
    band = aggregate_trials([t.cumulative_regret for t in run["lnpg"]])
    r_2500, r_end = band.mean[2499], band.mean[-1]
    ratio = r_end / r_2500
    seconds = run["lnpg_seconds"]
    ok = r_2500 > 0 and ratio <= 2.6 and seconds <= 300
    sign = "" if r_2500 > 0 else " (regret negative: ratio not meaningful)"
    return ok, (f"R(2500)={r_2500:.1f} R(10000)={r_end:.1f} ratio={ratio:.3f}{sign}, "
                f"LNPG wall time {seconds:.0f}s")


def criterion_8():
    run = baseline_run()
    lnpg = aggregate_trials([t.cumulative_regret for t in run["lnpg"]])
    ucb = aggregate_trials([t.cumulative_regret for t in run["ucb"]])
    ok = lnpg.mean[-1] < ucb.mean[-1] and lnpg.q75[-1] < ucb.q25[-1]
    return ok, (f"LNPG mean {lnpg.mean[-1]:.1f} q75 {lnpg.q75[-1]:.1f}; "
                f"UCB mean {ucb.mean[-1]:.1f} q25 {ucb.q25[-1]:.1f}")


def criterion_9(seeds: int = 50):
    run = baseline_run()
    oracle = run["oracle"]
    params = DemandParams(BASELINE.theta0, BASELINE.theta1, BASELINE.sigma)
    curve = BestResponseCurve(params)
    trials = run["lnpg"][:seeds]
    regrets, gaps = [], []
    for trial in trials:
        a, p, b = trial.tail.T
        played = np.array([K.expected_sales(max(0.0, params.theta0 - params.theta1 * pi),
                                            params.sigma, bi) * pi - ai * bi if bi > 0 else 0.0
                           for ai, pi, bi in zip(a, p, b)])
        regrets.append(float(np.mean(curve(a) - played)))
        gaps.append(riskless_gap(params, float(np.mean(a))))
    follower, gap = float(np.mean(regrets)), float(np.mean(gaps))
    rel_follower = abs(follower - gap) / gap
    a_final = float(np.mean([t.final_quarter_a for t in trials]))
    rel_leader = abs(a_final - oracle.a_star) / oracle.a_star
    ok = rel_follower <= 0.05 and rel_leader <= 0.10
    return ok, (f"follower tail regret {follower:.4f} vs gap {gap:.4f} "
                f"(off {100 * rel_follower:.1f}%, limit 5%); final-quarter a {a_final:.4f} "
                f"vs a* {oracle.a_star:.4f} (off {100 * rel_leader:.1f}%, limit 10%)")


def coverage(params: DemandParams, kappa: float, seeds: int = 100, horizon: int = 5000,
             t_min: int = 10, lam: float = 1.0) -> float:
    """Fraction of (seed, t) with the truth inside the ball, prices uniform on [0, zero-crossing]."""
    inside = 0
    total = 0
    truth = np.array([params.theta0, params.theta1])
    ts = np.arange(1, horizon + 1)
    for seed in range(seeds):
        rng = np.random.default_rng(seed)
        p = rng.uniform(0.0, params.ratio, horizon)
        y = params.theta0 - params.theta1 * p + params.sigma * rng.standard_normal(horizon)
        g00 = lam + ts
        g01 = -np.cumsum(p)
        g11 = lam + np.cumsum(p * p)
        m0 = np.cumsum(y)
        m1 = -np.cumsum(p * y)
        det = g00 * g11 - g01 * g01
        c0 = (g11 * m0 - g01 * m1) / det
        c1 = (g00 * m1 - g01 * m0) / det
        err = np.hypot(c0 - truth[0], c1 - truth[1])
        radius = np.where(ts >= 3, kappa * np.sqrt(np.log(ts) / ts), kappa)
        window = ts >= t_min
        inside += int(np.sum(err[window] <= radius[window]))
        total += int(np.sum(window))
    return inside / total


def criterion_10():
    frac = coverage(REFERENCE_PARAMS[0], kappa=3.0)
    return frac >= 0.90, f"coverage {100 * frac:.1f}% (need 90%)"


def criterion_11():
    from .cli import main

    text = "theta0 = 18\ntheta1 = 7\nkappa = 3\ntrials = 3\nhorizon = 300\nseed = 11\nworkers = 1\n"
    with tempfile.TemporaryDirectory() as tmp:
        cfg = Path(tmp) / "run.cfg"
        cfg.write_text(text)
        with contextlib.redirect_stdout(io.StringIO()):
            codes = [main(["run", "--config", str(cfg), "--out", str(Path(tmp) / d)])
                     for d in ("first", "second")]
        names = sorted(p.name for p in (Path(tmp) / "first").glob("*.csv"))
        same = all((Path(tmp) / "first" / n).read_bytes() == (Path(tmp) / "second" / n).read_bytes()
                   for n in names)
    ok = codes == [0, 0] and len(names) == 4 and same
    return ok, f"{len(names)} CSVs compared, identical={same}"


CRITERIA = [
    (1, "psi closed form vs quadrature", criterion_1),
    (2, "shortage invariance across theta", criterion_2),
    (3, "optimistic ratio closed form vs brute force", criterion_3),
    (4, "best-response order decreasing in a", criterion_4),
    (5, "leader objective unimodal", criterion_5),
    (6, "best response vs 2-D grid oracle", criterion_6),
    (7, "Stackelberg regret growth ratio", criterion_7),
    (8, "LNPG beats UCB", criterion_8),
    (9, "follower and leader convergence", criterion_9),
    (10, "confidence-ball coverage", criterion_10),
    (11, "byte-identical reruns", criterion_11),
]
LONG = {7, 8, 9}


def run_one(number: int) -> Check:
    _, name, fn = CRITERIA[number - 1]
    return _timed(number, name, fn)


def run_all(full: bool = True, echo: bool = True) -> list:
    results = []
    for number, name, fn in CRITERIA:
        if number in LONG and not full:
            continue
        check = _timed(number, name, fn)
        if echo:
            print(check.line(), flush=True)
        results.append(check)
    return results
