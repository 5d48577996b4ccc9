"""Long-format interchange files.

Data file: UTF-8, LF line endings, header ``instance_id,time,variable,value``,
one record per observation.  Absence is encoded by the lack of a record.
Labels file: header ``instance_id,label`` with integer classes.
"""
from __future__ import annotations

import csv
import hashlib
import io
import math
import os
import warnings
from typing import Optional, Sequence

import numpy as np

from ..core import LabeledDataset, TimeSeriesInstance
from ..errors import DataError

DATA_HEADER = ["instance_id", "time", "variable", "value"]
LABELS_HEADER = ["instance_id", "label"]


def read_vocabulary(path) -> list[str]:
    """One variable name per line; blank lines and ``#`` comments ignored."""
    with open(path, encoding="utf-8") as fh:
        names = [ln.strip() for ln in fh]
    return [n for n in names if n and not n.startswith("#")]


def write_vocabulary(path, variables: Sequence[str]):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.writelines(f"{v}\n" for v in variables)


def _parse_float(text: str, what: str, lineno: int, path) -> float:
    try:
        v = float(text)
    except ValueError:
        raise DataError(f"{path}:{lineno}: non-numeric {what} {text!r}") from None
    if not math.isfinite(v):
        raise DataError(f"{path}:{lineno}: non-finite {what} {text!r}")
    return v


def read_labels(path) -> dict:
    labels = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            return labels
        if [h.strip() for h in header] != LABELS_HEADER:
            raise DataError(f"{path}: expected header {','.join(LABELS_HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise DataError(f"{path}:{lineno}: expected 2 fields, got {len(row)}")
            try:
                labels[row[0]] = int(row[1])
            except ValueError:
                raise DataError(f"{path}:{lineno}: label {row[1]!r} is not an integer") from None
    return labels


def load_long_csv(data_path, labels_path, variables: Optional[Sequence[str]] = None,
                  num_classes: Optional[int] = None) -> LabeledDataset:
    """Read the interchange pair into a :class:`LabeledDataset`.

    Records are grouped by instance (first-appearance order) and sorted by
    time; simultaneous observations of different variables share a row.
    A repeated (time, variable) pair keeps the last value and warns.
    ``variables`` fixes the column order; by default it is the sorted set of
    names seen.  Labelled instances with no record at all are appended as
    empty instances.
    """
    vocab = list(variables) if variables is not None else None
    vocab_index = {v: j for j, v in enumerate(vocab)} if vocab is not None else None
    records: dict = {}
    seen_vars = set()
    with open(data_path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is not None and [h.strip() for h in header] != DATA_HEADER:
            raise DataError(f"{data_path}: expected header {','.join(DATA_HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise DataError(f"{data_path}:{lineno}: expected 4 fields, got {len(row)}")
            iid, t, var, val = row
            if vocab_index is not None and var not in vocab_index:
                raise DataError(f"{data_path}:{lineno}: unknown variable {var!r}; "
                                f"vocabulary is {vocab}")
            t = _parse_float(t, "time", lineno, data_path)
            val = _parse_float(val, "value", lineno, data_path)
            seen_vars.add(var)
            records.setdefault(iid, []).append((t, var, val))

    labels = read_labels(labels_path)
    if vocab is None:
        vocab = sorted(seen_vars)
        vocab_index = {v: j for j, v in enumerate(vocab)}
    if not records:
        warnings.warn(f"{data_path}: no records; returning an empty dataset", stacklevel=2)
        return LabeledDataset((), np.zeros(0, dtype=np.int64), vocab,
                              max(num_classes or 2, 2))

    unlabeled = [i for i in records if i not in labels]
    if unlabeled:
        raise DataError(f"instances without a label: {unlabeled[:10]}"
                        + (" ..." if len(unlabeled) > 10 else ""))
    D = len(vocab)
    instances, ys = [], []
    duplicates = 0
    for iid, recs in records.items():
        times = sorted({r[0] for r in recs})
        row_of = {t: i for i, t in enumerate(times)}
        values = np.full((len(times), D), np.nan)
        filled = np.zeros((len(times), D), dtype=bool)
        for t, var, val in recs:
            i, j = row_of[t], vocab_index[var]
            if filled[i, j]:
                duplicates += 1
            values[i, j] = val
            filled[i, j] = True
        instances.append(TimeSeriesInstance(iid, np.array(times), values, filled))
        ys.append(labels[iid])
    if duplicates:
        warnings.warn(f"{data_path}: {duplicates} repeated (instance, time, variable) "
                      "records; kept the last value of each", stacklevel=2)
    missing = [i for i in labels if i not in records]
    if missing:
        warnings.warn(f"{len(missing)} labelled instance(s) have no records; "
                      "kept as empty instances", stacklevel=2)
        for iid in missing:
            instances.append(TimeSeriesInstance(iid, np.zeros(0), np.zeros((0, D)),
                                                 np.zeros((0, D), dtype=bool)))
            ys.append(labels[iid])
    y = np.array(ys, dtype=np.int64)
    if y.min() < 0:
        raise DataError("labels must be non-negative")
    K = max(int(num_classes or 0), int(y.max()) + 1, 2)
    return LabeledDataset(tuple(instances), y, vocab, K)


def _format(v: float) -> str:
    return repr(float(v))


def long_csv_text(dataset: LabeledDataset) -> tuple[str, str]:
    """Serialise a dataset to the (data, labels) interchange texts."""
    data = io.StringIO()
    w = csv.writer(data, lineterminator="\n")
    w.writerow(DATA_HEADER)
    for inst in dataset.instances:
        for i in range(inst.length):
            t = _format(inst.timestamps[i])
            for j in np.flatnonzero(inst.mask[i]):
                w.writerow([inst.id, t, dataset.variables[j], _format(inst.values[i, j])])
    labels = io.StringIO()
    w = csv.writer(labels, lineterminator="\n")
    w.writerow(LABELS_HEADER)
    for inst, y in zip(dataset.instances, dataset.labels):
        w.writerow([inst.id, int(y)])
    return data.getvalue(), labels.getvalue()


def write_long_csv(dataset: LabeledDataset, data_path, labels_path):
    data, labels = long_csv_text(dataset)
    for path, text in ((data_path, data), (labels_path, labels)):
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def dataset_content_hash(dataset: LabeledDataset) -> str:
    """Git-style blob SHA-1 of the dataset's canonical interchange serialisation."""
    data, labels = long_csv_text(dataset)
    vocab = "".join(f"{v}\n" for v in dataset.variables)
    body = f"{vocab}\0{data}\0{labels}".encode("utf-8")
    return hashlib.sha1(b"blob %d\0" % len(body) + body).hexdigest()


def file_content_hash(path) -> str:
    with open(path, "rb") as fh:
        body = fh.read()
    return hashlib.sha1(b"blob %d\0" % len(body) + body).hexdigest()


def missing_rates(dataset: LabeledDataset) -> dict:
    """Per-variable share of (instance, time step) cells that are unobserved."""
    if not dataset.instances:
        return {v: float("nan") for v in dataset.variables}
    mask = np.concatenate([x.mask for x in dataset.instances], axis=0)
    if mask.shape[0] == 0:
        return {v: 1.0 for v in dataset.variables}
    return {v: float(1.0 - mask[:, j].mean()) for j, v in enumerate(dataset.variables)}


def ensure_dir(path):
    os.makedirs(path, exist_ok=True)
    return path
