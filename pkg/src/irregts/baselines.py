"""Raw-input comparison representations.

Three imputers complete the value grid; the completed grid is stacked with
the timestamp column and padded to a fixed length by prepending zero rows
(or trimmed by dropping the earliest rows).  The mask-only representation
is padded the same way without the timestamp column.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .core import GlobalStats, TimeSeriesInstance
from .errors import ConfigError, DataError


def impute_mean(instance: TimeSeriesInstance, stats: GlobalStats) -> np.ndarray:
    stats.check_compatible(instance.num_variables)
    return np.where(instance.mask, instance.values, stats.variable_means[None, :])


def impute_forward(instance: TimeSeriesInstance, stats: GlobalStats) -> np.ndarray:
    """Carry the last observation forward; leading gaps take the training mean."""
    stats.check_compatible(instance.num_variables)
    L, D = instance.values.shape
    if L == 0:
        return np.empty((0, D))
    rows = np.arange(L)[:, None]
    last = np.where(instance.mask, rows, -1)
    np.maximum.accumulate(last, axis=0, out=last)
    cols = np.broadcast_to(np.arange(D), (L, D))
    carried = instance.values[np.maximum(last, 0), cols]
    return np.where(last >= 0, carried, stats.variable_means[None, :])


def impute_linear(instance: TimeSeriesInstance, stats: GlobalStats,
                  use_index: bool = False) -> np.ndarray:
    """Linear interpolation between bracketing observations.

    The abscissa is the timestamp column, or the row index when
    ``use_index`` is set.  Cells before the first or after the last
    observation hold that observation; a column with no observation takes
    the training mean.
    """
    stats.check_compatible(instance.num_variables)
    L, D = instance.values.shape
    axis = np.arange(L, dtype=float) if use_index else instance.timestamps
    out = np.array(instance.values, dtype=float)
    for d in range(D):
        m = instance.mask[:, d]
        if m.all():
            continue
        if not m.any():
            out[:, d] = stats.variable_means[d]
            continue
        filled = np.interp(axis[~m], axis[m], instance.values[m, d])
        out[~m, d] = filled
    return out


def _fit_rows(grid: np.ndarray, l_max: int) -> np.ndarray:
    L, C = grid.shape
    if L >= l_max:
        return grid[L - l_max:]
    return np.concatenate([np.zeros((l_max - L, C), dtype=grid.dtype), grid], axis=0)


def _check_lmax(l_max):
    if int(l_max) != l_max or l_max <= 0:
        raise ConfigError(f"L_max must be a positive integer, got {l_max!r}")


@dataclass(frozen=True)
class PaddedRepresentation:
    grid: np.ndarray  # (L_max, D + 1); last column is time

    @property
    def flat(self) -> np.ndarray:
        return self.grid.reshape(-1)


@dataclass(frozen=True)
class MaskRepresentation:
    grid: np.ndarray  # (L_max, D) of {0, 1}

    @property
    def flat(self) -> np.ndarray:
        return self.grid.reshape(-1)


def build_padded(instance: TimeSeriesInstance, completed: np.ndarray, l_max: int,
                 allow_absent: bool = False) -> PaddedRepresentation:
    """Stack ``completed`` with timestamps and pad/trim to ``l_max`` rows.

    With ``allow_absent`` the grid may keep NaN at absent cells (for heads
    that route missing values natively).
    """
    _check_lmax(l_max)
    completed = np.asarray(completed, dtype=float)
    if completed.shape != instance.values.shape:
        raise DataError(
            f"completed grid shape {completed.shape} != instance shape {instance.values.shape}")
    if not allow_absent and np.isnan(completed).any():
        raise DataError(f"instance {instance.id!r}: grid still has absent cells; impute first")
    stacked = np.concatenate([completed, instance.timestamps[:, None]], axis=1)
    return PaddedRepresentation(_fit_rows(stacked, int(l_max)))


def build_mask_representation(instance: TimeSeriesInstance, l_max: int) -> MaskRepresentation:
    _check_lmax(l_max)
    return MaskRepresentation(_fit_rows(instance.mask.astype(float), int(l_max)))


def max_length(instances) -> int:
    return max((x.length for x in instances), default=0)


# Padded-matrix cache: little-endian header then float64 data in column-major order.
#   magic  b"IRTSPAD"   7 bytes
#   version            uint8 (currently 1)
#   rows, cols         uint64, uint64
_CACHE_MAGIC = b"IRTSPAD"
_CACHE_VERSION = 1
_CACHE_HEADER = struct.Struct("<7sBQQ")


def save_padded_cache(path, X: np.ndarray):
    X = np.asarray(X, dtype="<f8")
    if X.ndim != 2:
        raise ConfigError("cache holds a 2-D matrix")
    with open(path, "wb") as fh:
        fh.write(_CACHE_HEADER.pack(_CACHE_MAGIC, _CACHE_VERSION, *X.shape))
        fh.write(np.asfortranarray(X).tobytes(order="F"))


def load_padded_cache(path) -> np.ndarray:
    with open(path, "rb") as fh:
        head = fh.read(_CACHE_HEADER.size)
        if len(head) != _CACHE_HEADER.size:
            raise DataError(f"{path}: truncated cache header")
        magic, version, rows, cols = _CACHE_HEADER.unpack(head)
        if magic != _CACHE_MAGIC:
            raise DataError(f"{path}: not a padded-representation cache")
        if version != _CACHE_VERSION:
            raise DataError(f"{path}: unsupported cache version {version}")
        body = fh.read()
    if len(body) != rows * cols * 8:
        raise DataError(f"{path}: expected {rows * cols} values, found {len(body) // 8}")
    return np.frombuffer(body, dtype="<f8").reshape((rows, cols), order="F").astype(float)
