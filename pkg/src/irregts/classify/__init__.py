"""Classification heads."""
import numpy as np

from ..errors import ConfigError
from .gbdt import GbdtConfig, GbdtModel, Tree, fit_gbdt, predict_proba_gbdt
from .importance import ImportanceReport, average_importance, total_gain_importance
from .logistic import LogisticConfig, LogisticModel, fit_logistic, predict_proba_logistic

HEADS = ("lr", "gbdt")


def fit_head(head: str, X, y, config=None, num_classes=None):
    if head == "lr":
        return fit_logistic(X, y, config or LogisticConfig(), num_classes)
    if head == "gbdt":
        return fit_gbdt(X, y, config or GbdtConfig(), num_classes)
    raise ConfigError(f"unknown head {head!r}; choose from {', '.join(HEADS)}")


def predict_proba(model, X) -> np.ndarray:
    """N x K class probabilities for either head."""
    if isinstance(model, GbdtModel):
        return predict_proba_gbdt(model, X)
    if isinstance(model, LogisticModel):
        return predict_proba_logistic(model, X)
    raise TypeError(f"unsupported model type {type(model).__name__}")


__all__ = [
    "GbdtConfig", "GbdtModel", "Tree", "fit_gbdt", "LogisticConfig", "LogisticModel",
    "fit_logistic", "predict_proba", "fit_head", "ImportanceReport",
    "total_gain_importance", "average_importance", "HEADS",
]
