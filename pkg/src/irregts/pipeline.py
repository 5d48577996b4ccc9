"""Representation choice: fit on a training split, apply to any split."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import baselines
from .core import GlobalStats, LabeledDataset, Standardizer, compute_global_stats
from .errors import ConfigError
from .features import extract_dataset, feature_names

REPRESENTATIONS = ("summary", "raw", "mean-imp", "forward-imp", "linear-imp", "mask")

_IMPUTERS = {
    "mean-imp": baselines.impute_mean,
    "forward-imp": baselines.impute_forward,
    "linear-imp": baselines.impute_linear,
}

# Row labels in the style of the comparison tables.
DISPLAY_NAMES = {
    "summary": "Proposed",
    "raw": "Raw",
    "mean-imp": "Mean-Imp",
    "forward-imp": "For-Imp",
    "linear-imp": "Lin-Imp",
    "mask": "M",
}


@dataclass(frozen=True)
class FittedRepresentation:
    """Everything a representation learned from the training split."""

    name: str
    variables: tuple
    stats: GlobalStats
    l_max: Optional[int] = None
    linear_use_index: bool = False

    def feature_names(self) -> list[str]:
        if self.name == "summary":
            return feature_names(self.variables)
        if self.name == "mask":
            return [f"m_{v}_t{k}" for k in range(self.l_max) for v in self.variables]
        cols = [*self.variables, "time"]
        return [f"x_{c}_t{k}" if c != "time" else f"time_t{k}"
                for k in range(self.l_max) for c in cols]

    def _raw_matrix(self, data: LabeledDataset) -> np.ndarray:
        X = np.empty((len(data), self.l_max * (data.num_variables + 1)))
        for i, inst in enumerate(data.instances):
            if self.name == "raw":
                grid = inst.values
            elif self.name == "linear-imp":
                grid = baselines.impute_linear(inst, self.stats, use_index=self.linear_use_index)
            else:
                grid = _IMPUTERS[self.name](inst, self.stats)
            X[i] = baselines.build_padded(inst, grid, self.l_max,
                                          allow_absent=self.name == "raw").flat
        return X

    def transform(self, data: LabeledDataset, normalize: bool = True) -> np.ndarray:
        if tuple(data.variables) != self.variables:
            raise ConfigError("dataset variables differ from the training split's")
        if self.name == "summary":
            return extract_dataset(data, self.stats)
        if self.name == "mask":
            X = np.empty((len(data), self.l_max * data.num_variables))
            for i, inst in enumerate(data.instances):
                X[i] = baselines.build_mask_representation(inst, self.l_max).flat
            return X
        X = self._raw_matrix(data)
        if normalize and self.stats.scaler is not None:
            X = self.stats.scaler.transform(X)
        return X


def fit_representation(name: str, train: LabeledDataset,
                       linear_use_index: bool = False) -> FittedRepresentation:
    """Learn fallback means, L_max and (for padded grids) column scalers from ``train``."""
    if name not in REPRESENTATIONS:
        raise ConfigError(f"unknown representation {name!r}; choose from {', '.join(REPRESENTATIONS)}")
    stats = compute_global_stats(train)
    if name == "summary":
        return FittedRepresentation(name, tuple(train.variables), stats)
    l_max = baselines.max_length(train.instances)
    if l_max == 0:
        raise ConfigError("every training instance is empty; cannot fix a padding length")
    rep = FittedRepresentation(name, tuple(train.variables), stats, l_max, linear_use_index)
    if name == "mask":
        return rep
    scaler = Standardizer.fit(rep._raw_matrix(train))
    return FittedRepresentation(name, rep.variables, stats.with_scaler(scaler), l_max,
                                linear_use_index)
