"""Cross-validation and metrics."""
from .crossval import EvalReport, FoldPlan, FoldResult, make_folds, run_cv
from .metrics import auprc, auroc, confusion_matrix, multiclass_metrics

__all__ = ["EvalReport", "FoldPlan", "FoldResult", "make_folds", "run_cv", "auroc", "auprc",
           "confusion_matrix", "multiclass_metrics"]
