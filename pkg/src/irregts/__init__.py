"""Time-agnostic summary features for irregular multivariate time series."""
from .core import GlobalStats, LabeledDataset, Standardizer, TimeSeriesInstance, compute_global_stats
from .errors import ConfigError, DataError, IrregTSError, NumericError
from .features import SummaryFeatures, extract, extract_dataset, feature_names

__version__ = "0.1.0"

__all__ = [
    "TimeSeriesInstance", "LabeledDataset", "GlobalStats", "Standardizer",
    "compute_global_stats", "SummaryFeatures", "extract", "extract_dataset", "feature_names",
    "ConfigError", "DataError", "NumericError", "IrregTSError",
]
