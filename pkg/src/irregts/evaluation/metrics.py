"""Ranking and classification metrics."""
from __future__ import annotations

import warnings

import numpy as np
from scipy.stats import rankdata

from ..errors import DataError


def _binary_inputs(scores, labels):
    s = np.asarray(scores, dtype=float).reshape(-1)
    y = np.asarray(labels).reshape(-1)
    if s.shape != y.shape:
        raise DataError("scores and labels differ in length")
    if not np.all(np.isfinite(s)):
        raise DataError("scores must be finite")
    if not np.all((y == 0) | (y == 1)):
        raise DataError("binary metrics need labels in {0, 1}")
    y = y.astype(bool)
    if y.all() or not y.any():
        raise DataError("metric undefined: labels contain a single class")
    return s, y


def auroc(scores, labels) -> float:
    """Normalised Mann-Whitney U; tied scores count one half."""
    s, y = _binary_inputs(scores, labels)
    P = int(y.sum())
    N = y.size - P
    ranks = rankdata(s)  # average ranks for ties
    u = ranks[y].sum() - P * (P + 1) / 2.0
    return float(u / (P * N))


def auprc(scores, labels) -> float:
    """Average precision: sum over distinct thresholds of (R_i - R_{i-1}) * P_i.

    Thresholds are the distinct scores in descending order; tied scores enter
    as one step.
    """
    s, y = _binary_inputs(scores, labels)
    order = np.argsort(-s, kind="stable")
    s_sorted, y_sorted = s[order], y[order]
    tp = np.cumsum(y_sorted)
    fp = np.cumsum(~y_sorted)
    # last position of each distinct-score run
    ends = np.flatnonzero(np.r_[s_sorted[1:] != s_sorted[:-1], True])
    tp, fp = tp[ends], fp[ends]
    P = int(y.sum())
    d_tp = np.diff(np.r_[0, tp])
    precision = tp / (tp + fp)
    terms = (d_tp / P) * precision
    # sequential accumulation over thresholds
    return float(np.cumsum(terms)[-1])


def confusion_matrix(pred, true, K: int) -> np.ndarray:
    pred = np.asarray(pred, dtype=np.int64).reshape(-1)
    true = np.asarray(true, dtype=np.int64).reshape(-1)
    if pred.shape != true.shape:
        raise DataError("predictions and labels differ in length")
    if pred.size == 0:
        raise DataError("no predictions to score")
    if pred.min() < 0 or true.min() < 0 or pred.max() >= K or true.max() >= K:
        raise DataError(f"class labels must lie in [0, {K})")
    cm = np.zeros((K, K), dtype=np.int64)
    np.add.at(cm, (true, pred), 1)
    return cm


def multiclass_metrics(pred_labels, true_labels, K: int) -> dict:
    """Accuracy plus macro-averaged precision, recall and F1 over all K classes."""
    cm = confusion_matrix(pred_labels, true_labels, K)
    tp = np.diag(cm).astype(float)
    pred_tot = cm.sum(axis=0)
    true_tot = cm.sum(axis=1)
    absent = (pred_tot == 0) & (true_tot == 0)
    if absent.any():
        warnings.warn(f"classes {np.flatnonzero(absent).tolist()} absent from both predictions "
                      "and labels; they contribute 0 to macro averages", stacklevel=2)
    with np.errstate(invalid="ignore", divide="ignore"):
        prec = np.where(pred_tot > 0, tp / pred_tot, 0.0)
        rec = np.where(true_tot > 0, tp / true_tot, 0.0)
        f1 = np.where(prec + rec > 0, 2 * prec * rec / (prec + rec), 0.0)
    return {
        "accuracy": float(tp.sum() / cm.sum()),
        "precision": float(prec.mean()),
        "recall": float(rec.mean()),
        "f1": float(f1.mean()),
    }
