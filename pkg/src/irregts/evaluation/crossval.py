"""k-fold cross-validation driver.

Every statistic a representation or head needs (fallback means, padding
length, scalers, model parameters) is fitted on the training portion of the
fold only.
"""
from __future__ import annotations

import json
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

import numpy as np

from ..classify import GbdtConfig, GbdtModel, LogisticConfig, fit_head, predict_proba
from ..classify.importance import average_importance, total_gain_importance
from ..core import LabeledDataset
from ..data_io import dataset_content_hash
from ..errors import ConfigError, DataError, IrregTSError, NumericError
from ..pipeline import REPRESENTATIONS, fit_representation
from .metrics import auprc, auroc, multiclass_metrics

BINARY_METRICS = ("auroc", "auprc")
MULTICLASS_METRICS = ("accuracy", "precision", "recall", "f1")

REPORT_FORMAT = "irregts-eval-report"
REPORT_VERSION = 1


@dataclass(frozen=True)
class FoldPlan:
    assignment: np.ndarray  # fold index per instance
    k: int
    seed: int
    stratified: bool

    def test_indices(self, j: int) -> np.ndarray:
        return np.flatnonzero(self.assignment == j)

    def train_indices(self, j: int) -> np.ndarray:
        return np.flatnonzero(self.assignment != j)


def make_folds(labels, k: int = 5, seed: int = 0, stratified: bool = True) -> FoldPlan:
    """Assign each instance to one of ``k`` folds, deterministically for a seed.

    Stratified plans shuffle each class separately and deal its members
    round-robin, continuing the rotation across classes, so every fold's
    class counts are within one of the class's share.
    """
    y = np.asarray(labels, dtype=np.int64).reshape(-1)
    N = y.size
    if int(k) != k or k < 2:
        raise ConfigError(f"k must be an integer >= 2, got {k!r}")
    if N < k:
        raise ConfigError(f"need at least k={k} instances, got {N}")
    rng = np.random.default_rng(seed)
    assignment = np.empty(N, dtype=np.int64)
    if stratified:
        classes, counts = np.unique(y, return_counts=True)
        small = classes[counts < k]
        if small.size:
            warnings.warn(f"class(es) {small.tolist()} have fewer than k={k} members; "
                          "some folds will miss them", stacklevel=2)
        offset = 0
        for c in classes:
            members = rng.permutation(np.flatnonzero(y == c))
            assignment[members] = (offset + np.arange(members.size)) % k
            offset += members.size
    else:
        perm = rng.permutation(N)
        assignment[perm] = np.arange(N) % k
    return FoldPlan(assignment, int(k), int(seed), bool(stratified))


@dataclass(frozen=True)
class FoldResult:
    index: int
    metrics: dict
    representation: object
    model: object
    importance: Optional[object] = None


def _score(proba: np.ndarray, y: np.ndarray, K: int) -> dict:
    if K == 2:
        return {"auroc": auroc(proba[:, 1], y), "auprc": auprc(proba[:, 1], y)}
    return multiclass_metrics(np.argmax(proba, axis=1), y, K)


def _run_fold(data: LabeledDataset, plan: FoldPlan, j: int, representation: str,
              head: str, head_config, linear_use_index: bool, keep_model: bool) -> FoldResult:
    try:
        train = data.subset(plan.train_indices(j))
        test = data.subset(plan.test_indices(j))
        rep = fit_representation(representation, train, linear_use_index=linear_use_index)
        Xtr, Xte = rep.transform(train), rep.transform(test)
        model = fit_head(head, Xtr, train.labels, head_config, data.num_classes)
        proba = predict_proba(model, Xte)
        if not np.all(np.isfinite(proba)):
            raise NumericError("non-finite predicted probabilities")
        metrics = _score(proba, test.labels, data.num_classes)
        imp = None
        if isinstance(model, GbdtModel):
            imp = total_gain_importance(model, rep.feature_names())
        return FoldResult(j, metrics, rep, model if keep_model else None, imp)
    except IrregTSError as e:
        raise type(e)(f"fold {j}: {e}") from e


@dataclass
class EvalReport:
    metric_names: tuple
    per_fold: dict
    mean: dict
    std: dict
    std_sample: dict
    config: dict
    dataset_hash: str
    importance: Optional[object] = None
    folds: list = field(default_factory=list, repr=False)

    def to_dict(self, verbose: bool = False) -> dict:
        out = {
            "format": REPORT_FORMAT,
            "format_version": REPORT_VERSION,
            "config": self.config,
            "dataset_hash": self.dataset_hash,
            "metrics": {
                m: {"folds": self.per_fold[m], "mean": self.mean[m], "std": self.std[m]}
                for m in self.metric_names
            },
        }
        if verbose:
            for m in self.metric_names:
                out["metrics"][m]["std_sample"] = self.std_sample[m]
        if self.importance is not None:
            out["importance"] = self.importance.to_dict()
        return out

    def to_json(self, verbose: bool = False) -> str:
        return json.dumps(self.to_dict(verbose), indent=2, sort_keys=True, allow_nan=False)


def head_config_dict(head: str, cfg) -> dict:
    if cfg is None:
        cfg = GbdtConfig() if head == "gbdt" else LogisticConfig()
    return asdict(cfg)


def aggregate(results, metric_names, config: dict, dataset_hash: str) -> EvalReport:
    per_fold = {m: [float(r.metrics[m]) for r in results] for m in metric_names}
    mean = {m: math.fsum(v) / len(v) for m, v in per_fold.items()}
    std = {m: float(np.std(v)) for m, v in per_fold.items()}
    std_sample = {m: float(np.std(v, ddof=1)) if len(v) > 1 else 0.0
                  for m, v in per_fold.items()}
    imp = None
    imps = [r.importance for r in results if r.importance is not None]
    if imps and len(imps) == len(results):
        imp = average_importance(imps)
    return EvalReport(tuple(metric_names), per_fold, mean, std, std_sample, config,
                      dataset_hash, imp, list(results))


def run_cv(data: LabeledDataset, representation: str = "summary", head: str = "gbdt",
           head_config=None, k: int = 5, seed: int = 0, stratified: bool = True,
           jobs: int = 1, linear_use_index: bool = False,
           on_fold: Optional[Callable[[FoldResult], None]] = None,
           keep_models: bool = False) -> EvalReport:
    """Cross-validate one (representation, head) pair and aggregate mean/std.

    ``on_fold`` is called in the parent process with each fold's result, in
    fold order; it sees the fitted representation (stats, L_max, scaler).
    Standard deviations are population form (divide by k); the sample form
    is kept in ``std_sample``.
    """
    if representation not in REPRESENTATIONS:
        raise ConfigError(f"unknown representation {representation!r}")
    if head not in ("lr", "gbdt"):
        raise ConfigError(f"unknown head {head!r}")
    if len(data) == 0:
        raise DataError("dataset is empty")
    plan = make_folds(data.labels, k, seed, stratified)
    keep = keep_models or on_fold is not None
    args = [(data, plan, j, representation, head, head_config, linear_use_index, keep)
            for j in range(plan.k)]
    if jobs and jobs > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, plan.k)) as pool:
            futures = [pool.submit(_run_fold, *a) for a in args]
            results = [f.result() for f in futures]
    else:
        results = [_run_fold(*a) for a in args]
    if on_fold is not None:
        for r in results:
            on_fold(r)
    metric_names = BINARY_METRICS if data.num_classes == 2 else MULTICLASS_METRICS
    config = {
        "representation": representation,
        "head": head,
        "head_config": head_config_dict(head, head_config),
        "k": plan.k,
        "seed": plan.seed,
        "stratified": plan.stratified,
        "linear_use_index": bool(linear_use_index),
        "num_classes": data.num_classes,
        "num_instances": len(data),
        "num_variables": data.num_variables,
    }
    return aggregate(results, metric_names, config, dataset_content_hash(data))
