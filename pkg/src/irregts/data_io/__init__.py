"""Ingestion, export, adapters and synthetic data."""
from .adapters import AdapterSpec, adapt_directory, adapt_physionet_psv, load_spec
from .longcsv import (dataset_content_hash, file_content_hash, load_long_csv, long_csv_text,
                      missing_rates, read_labels, read_vocabulary, write_long_csv,
                      write_vocabulary)
from .synth import SIGNALS, SynthesisConfig, mask_dropout, synthesize

__all__ = [
    "load_long_csv", "write_long_csv", "long_csv_text", "read_labels", "read_vocabulary",
    "write_vocabulary", "dataset_content_hash", "file_content_hash", "missing_rates",
    "SynthesisConfig", "synthesize", "mask_dropout", "SIGNALS",
    "AdapterSpec", "adapt_directory", "adapt_physionet_psv", "load_spec",
]
