import numpy as np
import pytest

from npgame.cli import main
from npgame.config import ConfigError, ExperimentConfig, load_config, parse_config
from npgame.regret import AggregateBand
from npgame.experiment import (emit_plot_data, format_band, read_band,
                               run_experiment, run_trials)


def test_minimal_config_takes_defaults():
    cfg = parse_config("theta0 = 18\ntheta1 = 7\nkappa = 3\n")
    assert (cfg.theta0, cfg.theta1, cfg.kappa) == (18.0, 7.0, 3.0)
    assert (cfg.sigma, cfg.lam, cfg.horizon, cfg.trials, cfg.ucb_arms) == (3.2, 1.0, 10000, 200, 50)
    assert (cfg.price_lo, cfg.price_hi, cfg.grid_n) == (0.0, 50.0, 512)


def test_noisy_config():
    cfg = parse_config("sigma = 5.8  # noisier\ntheta0 = 40\ntheta1 = 5\nkappa = 0.05\n")
    assert (cfg.sigma, cfg.theta0, cfg.theta1, cfg.kappa) == (5.8, 40.0, 5.0, 0.05)


def test_aliases_and_lists():
    cfg = parse_config("lambda = 2\nT = 50\nN = 3\nK = 4\nrange = [1, 9]\nalgorithms = lnpg\n")
    assert (cfg.lam, cfg.horizon, cfg.trials, cfg.ucb_arms) == (2.0, 50, 3, 4)
    assert (cfg.price_lo, cfg.price_hi, cfg.algorithms) == (1.0, 9.0, ("lnpg",))


@pytest.mark.parametrize("text, fragment", [
    ("theta1 = 0\n", "theta1"),
    ("theta0 = 18\nbogus = 1\n", ":2: unknown key 'bogus'"),
    ("theta0\n", ":1: expected"),
    ("horizon = 2.5\n", "integer"),
    ("sigma = abc\n", "bad value"),
    ("algorithms = lnpg, sgd\n", "algorithms"),
    ("range = 1\n", "range"),
])
def test_config_errors(text, fragment):
    with pytest.raises(ConfigError) as info:
        parse_config(text, "cfg")
    assert fragment in str(info.value)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "nope.cfg")


def test_fingerprint_ignores_output_dir():
    a = ExperimentConfig(output_dir="x")
    assert a.fingerprint() == ExperimentConfig(output_dir="y").fingerprint()
    assert a.fingerprint() != ExperimentConfig(kappa=1.0).fingerprint()


def test_emit_empty_and_constant(tmp_path):
    path = emit_plot_data([], tmp_path / "e.csv")
    assert path.read_text() == "t,mean,q25,q75\n"
    path = emit_plot_data([np.full(3, 1.5)], tmp_path / "c.csv")
    assert path.read_text().splitlines()[1:] == ["1,1.5,1.5,1.5", "2,1.5,1.5,1.5", "3,1.5,1.5,1.5"]


def test_csv_round_trip_and_svg(tmp_path):
    rng = np.random.default_rng(0)
    band = AggregateBand(rng.normal(size=20), rng.normal(size=20) - 1, rng.normal(size=20) + 1)
    path = emit_plot_data(band, tmp_path / "r.csv", svg=True)
    back = read_band(path)
    for name in ("mean", "q25", "q75"):
        assert getattr(back, name).tolist() == getattr(band, name).tolist()
    assert b"\r" not in path.read_bytes()
    assert (tmp_path / "r.svg").read_text().startswith("<svg")
    assert format_band(band).count("\n") == 21


def small_config(tmp_path, **extra):
    lines = ["theta0 = 18", "theta1 = 7", "kappa = 3", "trials = 2", "horizon = 10",
             "seed = 4", "workers = 1"] + [f"{k} = {v}" for k, v in extra.items()]
    path = tmp_path / "small.cfg"
    path.write_text("\n".join(lines) + "\n")
    return path


def test_run_twice_is_byte_identical(tmp_path):
    cfg = small_config(tmp_path)
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "a")]) == 0
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "b"), "--svg"]) == 0
    for name in ("regret_lnpg.csv", "regret_ucb.csv", "reward_lnpg.csv", "reward_ucb.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    assert (tmp_path / "b" / "regret_lnpg.svg").exists()


def test_summary_matches_csv(tmp_path):
    cfg = load_config(small_config(tmp_path))
    run_experiment(cfg, tmp_path / "o")
    summary = (tmp_path / "o" / "summary.txt").read_text().splitlines()
    for alg in ("lnpg", "ucb"):
        last = (tmp_path / "o" / f"regret_{alg}.csv").read_text().splitlines()[-1].split(",")
        line = next(s for s in summary if s.startswith(alg + " ")).split()
        fields = dict(zip(line[1::2], line[2::2]))
        assert [fields["final_regret_mean"], fields["final_regret_q25"],
                fields["final_regret_q75"]] == last[1:]


def test_trial_independence():
    cfg = ExperimentConfig(trials=4, horizon=30, workers=1)
    full = run_trials(cfg, "lnpg", 5.0)
    alone = run_trials(cfg, "lnpg", 5.0, indices=[2])[0]
    assert np.array_equal(full[2].cumulative_regret, alone.cumulative_regret)
    assert full[1].seed != full[2].seed


def test_parallel_matches_serial():
    cfg = ExperimentConfig(trials=3, horizon=20, workers=1)
    serial = run_trials(cfg, "ucb", 5.0)
    parallel = run_trials(cfg.replace(workers=2), "ucb", 5.0)
    for s, p in zip(serial, parallel):
        assert np.array_equal(s.cumulative_regret, p.cumulative_regret)


def test_cli_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("theta1 = 0\n")
    assert main(["oracle", "--config", str(bad)]) == 1
    assert main(["run", "--config", str(tmp_path / "missing.cfg")]) == 1
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["run", "--config", str(small_config(tmp_path)), "--out", str(blocker)]) == 2
    capsys.readouterr()
    assert main(["oracle", "--config", str(small_config(tmp_path))]) == 0
    out = capsys.readouterr().out
    assert "a_star" in out and "epsilon_B" in out
    assert main(["run", "--config", str(small_config(tmp_path)), "--oracle-only"]) == 0


def test_cli_overrides(tmp_path):
    cfg = small_config(tmp_path)
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o"),
                 "--trials", "1", "--horizon", "7", "--seed", "9"]) == 0
    rows = (tmp_path / "o" / "regret_lnpg.csv").read_text().splitlines()
    assert len(rows) == 8
