"""Seeded synthetic irregular time series with a controllable class signal.

Each instance has random length and exponential inter-sample gaps.  Every
variable is ``level + drift * (t - t_mid) + noise`` with a per-instance
random level, then cells are hidden independently.  The signal type picks
the one ingredient that depends on the class:

``mean-shift``          level offset of ``effect * c``
``scale-shift``         noise scale ``1 + effect * c``
``slope-shift``         drift ``effect * (2c / (K-1) - 1)``: opposite signs,
                        identical value marginals
``missingness-shift``   missing rate ``missing_rate + effect * (c / (K-1) - 1/2)``;
                        the value process is the same for all classes

Rows where every variable is hidden are dropped, as consolidation would do,
and an instance left without any observation keeps one randomly chosen cell
so that the dataset survives the interchange format unchanged.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from ..core import LabeledDataset, TimeSeriesInstance
from ..errors import ConfigError

SIGNALS = ("mean-shift", "scale-shift", "slope-shift", "missingness-shift")
DEFAULT_EFFECT = {"mean-shift": 1.0, "scale-shift": 1.0, "slope-shift": 0.07,
                  "missingness-shift": 0.4}


@dataclass(frozen=True)
class SynthesisConfig:
    seed: Optional[int] = None
    n_instances: int = 300
    n_variables: int = 5
    min_length: int = 10
    max_length: int = 40
    missing_rate: float = 0.5
    n_classes: int = 2
    signal: str = "slope-shift"
    effect_size: Optional[float] = None  # None picks DEFAULT_EFFECT[signal]
    level_sd: float = 3.0
    noise_sd: float = 1.0
    mean_gap: float = 1.0

    def validate(self):
        if self.seed is None:
            raise ConfigError("synthesis needs an explicit seed")
        if self.n_instances < 1 or self.n_variables < 1:
            raise ConfigError("n_instances and n_variables must be positive")
        if not 1 <= self.min_length <= self.max_length:
            raise ConfigError("need 1 <= min_length <= max_length")
        if not 0 <= self.missing_rate < 1:
            raise ConfigError("missing_rate must lie in [0, 1)")
        if self.n_classes < 2:
            raise ConfigError("n_classes must be >= 2")
        if self.signal not in SIGNALS:
            raise ConfigError(f"unknown signal {self.signal!r}; choose from {', '.join(SIGNALS)}")
        if self.noise_sd < 0 or self.level_sd < 0 or self.mean_gap <= 0:
            raise ConfigError("noise_sd, level_sd must be >= 0 and mean_gap > 0")

    @property
    def effect(self) -> float:
        return DEFAULT_EFFECT[self.signal] if self.effect_size is None else float(self.effect_size)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["effect_size"] = self.effect
        return d


def _missing_rate(cfg: SynthesisConfig, c: int) -> float:
    if cfg.signal != "missingness-shift":
        return cfg.missing_rate
    rel = c / (cfg.n_classes - 1) - 0.5
    return float(np.clip(cfg.missing_rate + cfg.effect * rel, 0.0, 0.99))


def synthesize(config: SynthesisConfig) -> LabeledDataset:
    config.validate()
    rng = np.random.default_rng(config.seed)
    N, D, K = config.n_instances, config.n_variables, config.n_classes
    labels = rng.permutation(np.arange(N) % K)
    names = tuple(f"v{j}" for j in range(D))
    instances = []
    for i in range(N):
        c = int(labels[i])
        L = int(rng.integers(config.min_length, config.max_length + 1))
        t = np.cumsum(rng.exponential(config.mean_gap, size=L))
        t_mid = 0.5 * (t[0] + t[-1])
        level = rng.normal(0.0, config.level_sd, size=D)
        noise_sd = config.noise_sd
        drift = 0.0
        if config.signal == "mean-shift":
            level = level + config.effect * c
        elif config.signal == "scale-shift":
            noise_sd = config.noise_sd * (1.0 + config.effect * c)
        elif config.signal == "slope-shift":
            drift = config.effect * (2.0 * c / (K - 1) - 1.0)
        values = (level[None, :] + drift * (t - t_mid)[:, None]
                  + rng.normal(0.0, 1.0, size=(L, D)) * noise_sd)
        mask = rng.random((L, D)) >= _missing_rate(config, c)
        if not mask.any():
            mask[rng.integers(L), rng.integers(D)] = True
        keep = mask.any(axis=1)
        instances.append(TimeSeriesInstance(f"s{i:05d}", t[keep], values[keep], mask[keep]))
    return LabeledDataset(tuple(instances), labels, names, K)


def mask_dropout(data: LabeledDataset, rate: float, seed: int) -> LabeledDataset:
    """Hide each observed cell independently with probability ``rate``.

    Rows are kept even when they become fully unobserved, so sequence
    lengths do not change.
    """
    if not 0 <= rate < 1:
        raise ConfigError("dropout rate must lie in [0, 1)")
    rng = np.random.default_rng(seed)
    out = []
    for inst in data.instances:
        drop = rng.random(inst.mask.shape) < rate
        mask = inst.mask & ~drop
        out.append(TimeSeriesInstance(inst.id, inst.timestamps, inst.values, mask))
    return LabeledDataset(tuple(out), data.labels, data.variables, data.num_classes)
