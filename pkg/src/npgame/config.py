"""Experiment configuration: a flat ``key = value`` file with ``#`` comments."""

from __future__ import annotations

import dataclasses
import hashlib
from dataclasses import dataclass
from pathlib import Path

ALGORITHMS = ("lnpg", "ucb")
SIGNALS = ("latent", "realized")


class ConfigError(ValueError):
    """Malformed or invalid configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    """All knobs of one experiment; defaults describe the baseline market.

    ``learner_signal`` picks the regression target: ``latent`` is the unfloored
    linear demand signal, ``realized`` the sales-side demand floored at zero.
    ``leader_stride`` is the coarse step of the leader's grid scan inside
    episodes (1 scans every grid point).
    """

    theta0: float = 18.0
    theta1: float = 7.0
    sigma: float = 3.2
    kappa: float = 3.0
    lam: float = 1.0
    horizon: int = 10000
    trials: int = 200
    base_seed: int = 0
    price_lo: float = 0.0
    price_hi: float = 50.0
    grid_n: int = 512
    ucb_arms: int = 50
    ucb_c: float = 1.0
    algorithms: tuple = ALGORITHMS
    output_dir: str = "out"
    learner_signal: str = "latent"
    leader_stride: int = 8
    workers: int = 0

    def __post_init__(self):
        checks = [
            (self.theta0 >= 0, f"theta0 must be >= 0, got {self.theta0}"),
            (self.theta1 > 0, f"theta1 must be > 0, got {self.theta1}"),
            (self.sigma >= 0, f"sigma must be >= 0, got {self.sigma}"),
            (self.kappa > 0, f"kappa must be > 0, got {self.kappa}"),
            (self.lam > 0, f"lambda must be > 0, got {self.lam}"),
            (self.horizon >= 1, f"horizon must be >= 1, got {self.horizon}"),
            (self.trials >= 1, f"trials must be >= 1, got {self.trials}"),
            (0 <= self.price_lo < self.price_hi,
             f"need 0 <= price_lo < price_hi, got [{self.price_lo}, {self.price_hi}]"),
            (self.grid_n >= 64, f"grid_n must be >= 64, got {self.grid_n}"),
            (self.ucb_arms >= 2, f"ucb_arms must be >= 2, got {self.ucb_arms}"),
            (self.ucb_c >= 0, f"ucb_c must be >= 0, got {self.ucb_c}"),
            (len(self.algorithms) > 0 and all(a in ALGORITHMS for a in self.algorithms),
             f"algorithms must be drawn from {ALGORITHMS}, got {self.algorithms}"),
            (self.learner_signal in SIGNALS,
             f"learner_signal must be one of {SIGNALS}, got {self.learner_signal!r}"),
            (self.leader_stride >= 1, f"leader_stride must be >= 1, got {self.leader_stride}"),
            (self.workers >= 0, f"workers must be >= 0, got {self.workers}"),
        ]
        for ok, message in checks:
            if not ok:
                raise ConfigError(message)

    def fingerprint(self) -> str:
        """Short hash of every field except the output directory and worker count."""
        fields = dataclasses.asdict(self)
        fields.pop("output_dir")
        fields.pop("workers")
        text = ";".join(f"{k}={fields[k]!r}" for k in sorted(fields))
        return hashlib.sha256(text.encode()).hexdigest()[:16]

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)


# file keys that differ from field names
_ALIASES = {"lambda": "lam", "T": "horizon", "N": "trials", "K": "ucb_arms", "seed": "base_seed"}
_FIELDS = {f.name: f for f in dataclasses.fields(ExperimentConfig)}


def _convert(name: str, raw: str):
    kind = type(_FIELDS[name].default)
    if kind is tuple:
        items = [s.strip() for s in raw.replace(",", " ").split()]
        return tuple(items)
    if kind is int:
        value = float(raw)
        if value != int(value):
            raise ValueError(f"expected an integer, got {raw!r}")
        return int(value)
    if kind is float:
        return float(raw)
    return raw


def parse_config(text: str, source: str = "<string>") -> ExperimentConfig:
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {line!r}")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key == "range":
            parts = raw.strip("[]() ").replace(",", " ").split()
            if len(parts) != 2:
                raise ConfigError(f"{source}:{lineno}: range needs two numbers, got {raw!r}")
            try:
                values["price_lo"], values["price_hi"] = float(parts[0]), float(parts[1])
            except ValueError as exc:
                raise ConfigError(f"{source}:{lineno}: {exc}") from None
            continue
        name = _ALIASES.get(key, key)
        if name not in _FIELDS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        try:
            values[name] = _convert(name, raw)
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: bad value for {key}: {exc}") from None
    return ExperimentConfig(**values)


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, str(path))
