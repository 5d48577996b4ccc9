"""Domain types shared across the package.

A time series instance is a value grid paired with an explicit observation
mask.  Absent cells hold NaN in ``values`` purely for convenience; code
decides presence from ``mask`` only.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError, DataError


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class TimeSeriesInstance:
    """One segment: L timestamps, an L x D value grid and its mask.

    Attributes:
        id: Opaque identifier.
        timestamps: Shape (L,), non-decreasing.
        values: Shape (L, D); NaN where unobserved.
        mask: Shape (L, D) bool; True iff the cell is a real observation.
    """

    id: str
    timestamps: np.ndarray
    values: np.ndarray
    mask: np.ndarray

    def __post_init__(self):
        t = np.array(self.timestamps, dtype=float).reshape(-1)
        v = np.array(self.values, dtype=float)
        if v.ndim == 1 and t.size == 0:
            v = v.reshape(0, max(v.size, 0))
        m = np.array(self.mask, dtype=bool)
        if v.ndim != 2:
            raise DataError(f"instance {self.id!r}: values must be 2-D, got shape {v.shape}")
        if m.shape != v.shape:
            raise DataError(f"instance {self.id!r}: mask shape {m.shape} != values shape {v.shape}")
        if t.shape[0] != v.shape[0]:
            raise DataError(
                f"instance {self.id!r}: {t.shape[0]} timestamps for {v.shape[0]} rows")
        if not np.all(np.isfinite(t)):
            raise DataError(f"instance {self.id!r}: non-finite timestamp")
        if t.size > 1 and np.any(np.diff(t) < 0):
            raise DataError(f"instance {self.id!r}: timestamps must be non-decreasing")
        if not np.all(np.isfinite(v[m])):
            raise DataError(f"instance {self.id!r}: observed cell holds a non-finite value")
        v = np.where(m, v, np.nan)
        object.__setattr__(self, "id", str(self.id))
        object.__setattr__(self, "timestamps", _frozen(t))
        object.__setattr__(self, "values", _frozen(v))
        object.__setattr__(self, "mask", _frozen(m))

    @classmethod
    def from_values(cls, id, timestamps, values) -> "TimeSeriesInstance":
        """Build an instance treating NaN cells as absent."""
        v = np.asarray(values, dtype=float)
        return cls(id, timestamps, v, ~np.isnan(v))

    @property
    def length(self) -> int:
        return self.values.shape[0]

    @property
    def num_variables(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class LabeledDataset:
    instances: tuple
    labels: np.ndarray
    variables: tuple
    num_classes: int = 2

    def __post_init__(self):
        inst = tuple(self.instances)
        y = np.asarray(self.labels, dtype=np.int64).reshape(-1)
        names = tuple(str(v) for v in self.variables)
        if len(names) == 0 and inst:
            raise ConfigError("dataset needs at least one variable")
        if len(set(names)) != len(names):
            raise ConfigError("variable names must be unique")
        if len(inst) != y.shape[0]:
            raise DataError(f"{len(inst)} instances but {y.shape[0]} labels")
        if self.num_classes < 2:
            raise ConfigError("num_classes must be >= 2")
        for x in inst:
            if x.num_variables != len(names):
                raise DataError(
                    f"instance {x.id!r} has {x.num_variables} variables, expected {len(names)}")
        if y.size and (y.min() < 0 or y.max() >= self.num_classes):
            raise DataError(f"labels must lie in [0, {self.num_classes})")
        object.__setattr__(self, "instances", inst)
        object.__setattr__(self, "labels", _frozen(y))
        object.__setattr__(self, "variables", names)

    @property
    def num_variables(self) -> int:
        return len(self.variables)

    def __len__(self):
        return len(self.instances)

    def subset(self, idx) -> "LabeledDataset":
        idx = np.asarray(idx, dtype=np.int64)
        return LabeledDataset(
            tuple(self.instances[i] for i in idx), self.labels[idx],
            self.variables, self.num_classes)


@dataclass(frozen=True)
class Standardizer:
    """Per-column z-scoring.  Columns with zero (or undefined) spread map to 0."""

    mean: np.ndarray
    std: np.ndarray
    constant: np.ndarray = field(default=None)

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float)
        std = np.asarray(self.std, dtype=float)
        const = ~(std > 0) if self.constant is None else np.asarray(self.constant, dtype=bool)
        object.__setattr__(self, "mean", _frozen(mean))
        object.__setattr__(self, "std", _frozen(std))
        object.__setattr__(self, "constant", _frozen(const))

    @classmethod
    def fit(cls, X) -> "Standardizer":
        """Fit on the columns of X; NaN cells are ignored."""
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[0] == 0:
            raise ConfigError("standardizer needs a non-empty 2-D matrix")
        obs = ~np.isnan(X)
        cnt = obs.sum(axis=0)
        filled = np.where(obs, X, 0.0)
        with np.errstate(invalid="ignore", divide="ignore"):
            mean = np.where(cnt > 0, filled.sum(axis=0) / np.maximum(cnt, 1), 0.0)
            dev = np.where(obs, X - mean, 0.0)
            std = np.sqrt(np.maximum((dev ** 2).sum(axis=0) / np.maximum(cnt, 1), 0.0))
        return cls(mean, std)

    def transform(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.shape[-1] != self.mean.shape[0]:
            raise ConfigError(
                f"standardizer fitted on {self.mean.shape[0]} columns, got {X.shape[-1]}")
        safe = np.where(self.constant, 1.0, self.std)
        Z = (X - self.mean) / safe
        # NaN cells stay NaN so tree heads still see them as absent
        return np.where(self.constant & ~np.isnan(X), 0.0, Z)


@dataclass(frozen=True)
class GlobalStats:
    """Training-split statistics used as fallbacks and scalers.

    ``variable_means[d]`` is the pooled mean of every observed value of
    variable d in the training split, or 0 for a variable never observed.
    """

    variable_means: np.ndarray
    observed_counts: np.ndarray
    scaler: Optional[Standardizer] = None

    def __post_init__(self):
        object.__setattr__(self, "variable_means",
                           _frozen(np.asarray(self.variable_means, dtype=float)))
        object.__setattr__(self, "observed_counts",
                           _frozen(np.asarray(self.observed_counts, dtype=np.int64)))

    @property
    def num_variables(self) -> int:
        return self.variable_means.shape[0]

    def with_scaler(self, scaler: Standardizer) -> "GlobalStats":
        return GlobalStats(self.variable_means, self.observed_counts, scaler)

    def check_compatible(self, num_variables: int):
        if num_variables != self.num_variables:
            raise ConfigError(
                f"stats cover {self.num_variables} variables, instance has {num_variables}")


def compute_global_stats(train: LabeledDataset | Sequence[TimeSeriesInstance]) -> GlobalStats:
    """Pooled per-variable means over all observed cells of the training split.

    Sums use ``math.fsum`` so the result is correctly rounded and therefore
    independent of instance order.
    """
    instances = train.instances if isinstance(train, LabeledDataset) else tuple(train)
    if len(instances) == 0:
        raise ConfigError("cannot compute global statistics from an empty training split")
    D = instances[0].num_variables
    if isinstance(train, LabeledDataset):
        D = train.num_variables
    for x in instances:
        if x.num_variables != D:
            raise DataError(f"instance {x.id!r} has {x.num_variables} variables, expected {D}")
    values = np.concatenate([x.values for x in instances], axis=0)
    mask = np.concatenate([x.mask for x in instances], axis=0)
    means = np.zeros(D)
    counts = mask.sum(axis=0)
    for d in range(D):
        if counts[d] > 0:
            means[d] = math.fsum(values[mask[:, d], d]) / counts[d]
    return GlobalStats(means, counts)
