"""Time-agnostic summary statistics.

Each variable is reduced to four numbers: mean and standard deviation of
its observed values, and mean and standard deviation of the changes between
temporally consecutive observations.  Timestamps are never consulted, only
observation order.
"""
from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import GlobalStats, LabeledDataset, TimeSeriesInstance
from .errors import DataError

STAT_NAMES = ("mean", "std", "dmean", "dstd")


@dataclass(frozen=True)
class SummaryFeatures:
    """4 x D matrix with rows (mean, std, dmean, dstd)."""

    matrix: np.ndarray

    @property
    def flat(self) -> np.ndarray:
        """Variable-major flattening: all four stats of variable 0, then variable 1, ..."""
        return self.matrix.T.reshape(-1)


def feature_names(variables: Sequence[str]) -> list[str]:
    return [f"f_{v}_{s}" for v in variables for s in STAT_NAMES]


def parse_feature_name(name: str):
    """Split ``f_<var>_<stat>`` into ``(var, stat)``; None when it does not match."""
    if not name.startswith("f_"):
        return None
    var, _, stat = name[2:].rpartition("_")
    if not var or stat not in STAT_NAMES:
        return None
    return var, stat


def _pop_std(x: np.ndarray, mu: float) -> float:
    # two-pass form; the clamp absorbs tiny negative round-off
    return float(np.sqrt(max(float(np.mean((x - mu) ** 2)), 0.0)))


def summarize_column(obs: np.ndarray, fallback: float) -> tuple[float, float, float, float]:
    """Four statistics of one variable given its observed values in time order."""
    n = obs.shape[0]
    if n == 0:
        return float(fallback), 0.0, 0.0, 0.0
    mu0 = float(np.mean(obs))
    if n == 1:
        return float(obs[0]), 0.0, 0.0, 0.0
    sd0 = _pop_std(obs, mu0)
    diffs = np.diff(obs)
    # the pairwise differences telescope
    mu1 = float((obs[-1] - obs[0]) / (n - 1))
    sd1 = _pop_std(diffs, mu1)
    return mu0, sd0, mu1, sd1


def extract(instance: TimeSeriesInstance, stats: GlobalStats) -> SummaryFeatures:
    stats.check_compatible(instance.num_variables)
    D = instance.num_variables
    out = np.empty((4, D))
    t = instance.timestamps
    for d in range(D):
        m = instance.mask[:, d]
        obs = instance.values[m, d]
        if obs.shape[0] > 1 and np.any(np.diff(t[m]) == 0):
            warnings.warn(
                f"instance {instance.id!r}: variable {d} observed more than once at the same "
                "timestamp; adjacency follows row order", stacklevel=2)
        out[:, d] = summarize_column(obs, stats.variable_means[d])
    return SummaryFeatures(out)


def extract_dataset(data: LabeledDataset | Sequence[TimeSeriesInstance],
                    stats: GlobalStats) -> np.ndarray:
    """N x 4D matrix whose row i is ``extract(instances[i]).flat``."""
    instances = data.instances if isinstance(data, LabeledDataset) else tuple(data)
    X = np.empty((len(instances), 4 * stats.num_variables))
    for i, inst in enumerate(instances):
        X[i] = extract(inst, stats).flat
    return X


def write_features_csv(path_or_buf, ids: Sequence[str], X: np.ndarray,
                       variables: Sequence[str]):
    """Write features with header ``id,f_<var>_<stat>...``; 17 significant digits."""
    names = feature_names(variables)
    if X.shape[1] != len(names):
        raise DataError(f"feature matrix has {X.shape[1]} columns, expected {len(names)}")
    own = isinstance(path_or_buf, (str, bytes)) or hasattr(path_or_buf, "__fspath__")
    fh = open(path_or_buf, "w", newline="", encoding="utf-8") if own else path_or_buf
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", *names])
        for i, row in zip(ids, X):
            w.writerow([i, *(format(float(v), ".17g") for v in row)])
    finally:
        if own:
            fh.close()


def read_features_csv(path_or_buf):
    """Inverse of :func:`write_features_csv`; returns ``(ids, X, variables)``."""
    if isinstance(path_or_buf, str) or hasattr(path_or_buf, "__fspath__"):
        with open(path_or_buf, newline="", encoding="utf-8") as fh:
            text = fh.read()
    else:
        text = path_or_buf.read()
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0][0] != "id":
        raise DataError("features file must start with an 'id' header column")
    header = rows[0][1:]
    variables = []
    for name in header:
        parsed = parse_feature_name(name)
        if parsed is None:
            raise DataError(f"unrecognised feature column {name!r}")
        if parsed[0] not in variables:
            variables.append(parsed[0])
    if header != feature_names(variables):
        raise DataError("feature columns are not in variable-major order")
    ids = [r[0] for r in rows[1:]]
    X = np.array([[float(v) for v in r[1:]] for r in rows[1:]], dtype=float).reshape(
        len(ids), len(header))
    return ids, X, variables
