"""Seeded parallel trials, aggregated CSV output and the run summary."""

from __future__ import annotations

import multiprocessing
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import ExperimentConfig
from .demand import DemandParams
from .econ import EquilibriumOracle, leader_optimum
from .game import RUNNERS, trial_seed
from .regret import AggregateBand, aggregate_trials

HEADER = "t,mean,q25,q75\n"


@dataclass
class TrialResult:
    """What the orchestrator keeps from one episode."""

    index: int
    seed: int
    cumulative_regret: np.ndarray
    leader_reward: np.ndarray
    tail: np.ndarray  # columns a, p, b over the last tenth of the horizon
    final_quarter_a: float


@dataclass
class AlgorithmResult:
    trials: list
    regret: AggregateBand
    reward: AggregateBand
    wall_time: float


@dataclass
class RunSummary:
    oracle: EquilibriumOracle
    fingerprint: str
    results: dict = field(default_factory=dict)

    def lines(self):
        o = self.oracle
        out = [
            f"fingerprint {self.fingerprint}",
            f"oracle a_star {o.a_star!r} p_star {o.response.p_star!r} "
            f"b_star {o.response.b_star!r} leader_value {o.leader_value!r} "
            f"epsilon_B {o.epsilon_B!r}",
        ]
        for alg, res in self.results.items():
            total_reward = float(np.mean([r.leader_reward.sum() for r in res.trials]))
            out.append(
                f"{alg} final_regret_mean {float(res.regret.mean[-1])!r} "
                f"final_regret_q25 {float(res.regret.q25[-1])!r} "
                f"final_regret_q75 {float(res.regret.q75[-1])!r} "
                f"mean_episodic_reward {total_reward!r} wall_time_s {res.wall_time:.2f}"
            )
        return out


def oracle_for(config: ExperimentConfig) -> EquilibriumOracle:
    params = DemandParams(config.theta0, config.theta1, config.sigma)
    return leader_optimum(params, config.price_lo, config.price_hi, config.grid_n)


def _trial(config: ExperimentConfig, algorithm: str, index: int, leader_value: float):
    seed = trial_seed(config.base_seed, index)
    traj = RUNNERS[algorithm](config, seed)
    g_a = traj.g_a.copy()
    horizon = len(traj)
    start = int(0.9 * horizon)
    tail = np.column_stack([traj.a[start:], traj.p[start:], traj.b[start:]])
    return TrialResult(index, seed, np.cumsum(leader_value - g_a), g_a, tail,
                       float(traj.a[(3 * horizon) // 4:].mean()))


def _workers(config: ExperimentConfig) -> int:
    return config.workers or os.cpu_count() or 1


def run_trials(config: ExperimentConfig, algorithm: str, leader_value: float,
               indices=None) -> list:
    """Run the given trial indices (default all) of one algorithm, in index order."""
    indices = list(range(config.trials)) if indices is None else list(indices)
    n_workers = min(_workers(config), len(indices))
    if n_workers <= 1:
        return [_trial(config, algorithm, i, leader_value) for i in indices]
    ctx = multiprocessing.get_context("spawn")
    with ProcessPoolExecutor(n_workers, mp_context=ctx) as pool:
        futures = [pool.submit(_trial, config, algorithm, i, leader_value) for i in indices]
        return [f.result() for f in futures]


def format_band(band: AggregateBand) -> str:
    """CSV text with shortest round-trip floats and rounds numbered from 1."""
    rows = [HEADER]
    for t, (m, lo, hi) in enumerate(zip(band.mean, band.q25, band.q75), start=1):
        rows.append(f"{t},{float(m)!r},{float(lo)!r},{float(hi)!r}\n")
    return "".join(rows)


def emit_plot_data(curves, path, svg: bool = False) -> Path:
    """Aggregate ``curves`` (or take a ready AggregateBand) and write CSV, optionally SVG."""
    band = curves if isinstance(curves, AggregateBand) else aggregate_trials(curves)
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_band(band))
    if svg:
        write_svg(band, path.with_suffix(".svg"))
    return path


def read_band(path) -> AggregateBand:
    rows = Path(path).read_text(encoding="utf-8").splitlines()[1:]
    data = np.array([[float(x) for x in r.split(",")[1:]] for r in rows]).reshape(-1, 3)
    return AggregateBand(data[:, 0], data[:, 1], data[:, 2])


def write_svg(band: AggregateBand, path, width: int = 640, height: int = 400) -> Path:
    """Minimal line chart of the mean with a shaded quartile band."""
    n = len(band.mean)
    pad = 40
    if n == 0:
        body = ""
    else:
        lo = float(min(band.q25.min(), band.mean.min()))
        hi = float(max(band.q75.max(), band.mean.max()))
        span = hi - lo or 1.0
        step = max(1, n // 500)
        ts = np.arange(0, n, step)

        def xy(i, v):
            x = pad + (width - 2 * pad) * (i / max(n - 1, 1))
            y = height - pad - (height - 2 * pad) * ((v - lo) / span)
            return f"{x:.1f},{y:.1f}"

        upper = " ".join(xy(i, band.q75[i]) for i in ts)
        lower = " ".join(xy(i, band.q25[i]) for i in ts[::-1])
        mean = " ".join(xy(i, band.mean[i]) for i in ts)
        body = (f'<polygon points="{upper} {lower}" fill="#9ecae1" opacity="0.6"/>\n'
                f'<polyline points="{mean}" fill="none" stroke="#08519c" stroke-width="1.5"/>\n'
                f'<text x="{pad}" y="{pad - 10}" font-size="12">max {hi:.4g}</text>\n'
                f'<text x="{pad}" y="{height - 10}" font-size="12">min {lo:.4g}, T={n}</text>\n')
    svg = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">\n'
           f'<rect width="100%" height="100%" fill="white"/>\n{body}</svg>\n')
    Path(path).write_text(svg, encoding="utf-8")
    return Path(path)


def run_experiment(config: ExperimentConfig, out_dir=None, svg: bool = False) -> RunSummary:
    """Run every configured algorithm and write regret/reward CSVs plus summary.txt."""
    out = Path(out_dir if out_dir is not None else config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    oracle = oracle_for(config)
    summary = RunSummary(oracle, config.fingerprint())
    for alg in config.algorithms:
        start = time.perf_counter()
        trials = run_trials(config, alg, oracle.leader_value)
        regret = aggregate_trials([t.cumulative_regret for t in trials])
        reward = aggregate_trials([t.leader_reward for t in trials])
        summary.results[alg] = AlgorithmResult(trials, regret, reward,
                                               time.perf_counter() - start)
        emit_plot_data(regret, out / f"regret_{alg}.csv", svg)
        emit_plot_data(reward, out / f"reward_{alg}.csv", svg)
    (out / "summary.txt").write_text("\n".join(summary.lines()) + "\n", encoding="utf-8")
    return summary
