"""Total-gain feature importance, optionally grouped by summary-statistic type."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..errors import ConfigError
from ..features import STAT_NAMES, parse_feature_name
from .gbdt import GbdtModel


@dataclass(frozen=True)
class ImportanceReport:
    gains: dict                       # feature name -> total gain (only features that split)
    group_fractions: Optional[dict]   # stat type -> share of total gain, or None
    grouping_error: Optional[str] = None
    folds: int = 1
    per_fold_group_fractions: tuple = field(default=())

    def to_dict(self) -> dict:
        return {
            "gains": {k: float(v) for k, v in self.gains.items()},
            "group_fractions": self.group_fractions,
            "grouping_error": self.grouping_error,
            "folds": self.folds,
            "per_fold_group_fractions": list(self.per_fold_group_fractions),
        }


def feature_total_gain(model: GbdtModel) -> np.ndarray:
    total = np.zeros(model.num_features)
    for tree in model.iter_trees():
        internal = tree.left >= 0
        np.add.at(total, tree.feature[internal], tree.gain[internal])
    return total


def _group(gains: dict):
    by_type = dict.fromkeys(STAT_NAMES, 0.0)
    for name, g in gains.items():
        parsed = parse_feature_name(name)
        if parsed is None:
            return None, f"feature {name!r} does not follow the f_<var>_<stat> naming scheme"
        by_type[parsed[1]] += g
    total = sum(by_type.values())
    if not total > 0:
        return None, "model made no splits; nothing to attribute"
    return {k: v / total for k, v in by_type.items()}, None


def total_gain_importance(model: GbdtModel, feature_names: Sequence[str]) -> ImportanceReport:
    if len(feature_names) != model.num_features:
        raise ConfigError(f"{len(feature_names)} names for {model.num_features} features")
    total = feature_total_gain(model)
    gains = {feature_names[j]: float(total[j]) for j in np.flatnonzero(total > 0)}
    if not gains:
        return ImportanceReport({}, None, "model made no splits; nothing to attribute")
    fractions, err = _group(gains)
    return ImportanceReport(gains, fractions, err)


def average_importance(reports: Sequence[ImportanceReport]) -> ImportanceReport:
    """Average gains and group shares over folds.

    Group shares are averaged per fold, so they still sum to one.
    """
    if not reports:
        raise ConfigError("no importance reports to average")
    names = sorted({n for r in reports for n in r.gains})
    k = len(reports)
    gains = {n: sum(r.gains.get(n, 0.0) for r in reports) / k for n in names}
    errors = [r.grouping_error for r in reports if r.grouping_error]
    if errors:
        return ImportanceReport(gains, None, errors[0], k)
    per_fold = tuple(r.group_fractions for r in reports)
    fractions = {s: sum(f[s] for f in per_fold) / k for s in STAT_NAMES}
    return ImportanceReport(gains, fractions, None, k, per_fold)
