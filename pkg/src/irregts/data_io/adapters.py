"""Convert locally downloaded per-record files into the interchange format.

Nothing is downloaded here.  An adapter spec is a plain-text file of
``key = value`` lines (``#`` starts a comment; lists are comma-separated)
naming the role of each column.

Common keys
    layout            ``wide`` (one row per time step, one column per variable)
                      or ``long`` (one row per observation)
    file_glob         pattern of per-record files inside the directory (``*.psv``)
    delimiter         field separator; ``|`` for PSV, ``,`` for CSV
    time_column       column holding the time stamp
    time_format       ``float`` (default) or ``hh:mm`` (converted to hours)
    drop_columns      variables to discard (static descriptors, identifiers)
    missing_tokens    cell texts meaning "not observed"; default ``NaN`` and empty
    missing_values    numeric sentinels meaning "not observed" (e.g. ``-1``)
    exclude_ids       record ids to skip
    exclude_ids_file  file with one record id per line to skip

Wide layout
    label_column      per-row label column
    label_rule        ``any`` (1 if the label is ever 1), ``last`` or ``max``

Long layout
    variable_column, value_column
    labels_file       outcome table (relative to the input directory or absolute)
    labels_id_column, labels_value_column

The record id is the file name without its extension.
"""
from __future__ import annotations

import csv
import glob
import logging
import math
import os
from dataclasses import dataclass, field

from ..errors import ConfigError, DataError
from .longcsv import DATA_HEADER, LABELS_HEADER, write_vocabulary

log = logging.getLogger(__name__)


def _split_list(text: str) -> list[str]:
    return [t.strip() for t in text.split(",")] if text.strip() else []


@dataclass
class AdapterSpec:
    layout: str = "wide"
    file_glob: str = "*.psv"
    delimiter: str = "|"
    time_column: str = "ICULOS"
    time_format: str = "float"
    label_column: str = "SepsisLabel"
    label_rule: str = "any"
    drop_columns: list = field(default_factory=list)
    missing_tokens: list = field(default_factory=lambda: ["NaN", ""])
    missing_values: list = field(default_factory=list)
    exclude_ids: list = field(default_factory=list)
    exclude_ids_file: str = ""
    variable_column: str = "Parameter"
    value_column: str = "Value"
    labels_file: str = ""
    labels_id_column: str = "RecordID"
    labels_value_column: str = "In-hospital_death"

    _LISTS = ("drop_columns", "missing_tokens", "missing_values", "exclude_ids")

    @classmethod
    def from_text(cls, text: str) -> "AdapterSpec":
        spec = cls()
        known = set(cls.__dataclass_fields__)
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].rstrip()
            if not line.strip():
                continue
            if "=" not in line:
                raise ConfigError(f"adapter spec line {lineno}: expected 'key = value'")
            key, _, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            if key not in known:
                raise ConfigError(f"adapter spec line {lineno}: unknown key {key!r}")
            if key in cls._LISTS:
                setattr(spec, key, _split_list(value))
            else:
                setattr(spec, key, value)
        spec.validate()
        return spec

    @classmethod
    def from_file(cls, path) -> "AdapterSpec":
        with open(path, encoding="utf-8") as fh:
            return cls.from_text(fh.read())

    def validate(self):
        if self.layout not in ("wide", "long"):
            raise ConfigError(f"unknown layout {self.layout!r}")
        if self.time_format not in ("float", "hh:mm"):
            raise ConfigError(f"unknown time_format {self.time_format!r}")
        if self.label_rule not in ("any", "last", "max"):
            raise ConfigError(f"unknown label_rule {self.label_rule!r}")
        if len(self.delimiter) != 1:
            raise ConfigError("delimiter must be a single character")
        try:
            [float(v) for v in self.missing_values]
        except ValueError:
            raise ConfigError("missing_values must be numeric") from None


class _Malformed(Exception):
    pass


def _parse_time(text: str, fmt: str) -> float:
    text = text.strip()
    if fmt == "hh:mm":
        h, sep, m = text.partition(":")
        if not sep:
            raise _Malformed(f"time {text!r} is not hh:mm")
        try:
            return int(h) + int(m) / 60.0
        except ValueError:
            raise _Malformed(f"time {text!r} is not hh:mm") from None
    try:
        t = float(text)
    except ValueError:
        raise _Malformed(f"non-numeric time {text!r}") from None
    if not math.isfinite(t):
        raise _Malformed(f"non-finite time {text!r}")
    return t


def _parse_value(text: str, spec: AdapterSpec, sentinels):
    text = text.strip()
    if text in spec.missing_tokens:
        return None
    try:
        v = float(text)
    except ValueError:
        raise _Malformed(f"non-numeric value {text!r}") from None
    if not math.isfinite(v) or v in sentinels:
        return None
    return v


def _read_wide(path, spec: AdapterSpec, sentinels):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh, delimiter=spec.delimiter))
    if not rows:
        return None
    header = [h.strip() for h in rows[0]]
    for col in (spec.time_column, spec.label_column):
        if col not in header:
            raise _Malformed(f"missing column {col!r}")
    body = [r for r in rows[1:] if r]
    if not body:
        return None
    ti, li = header.index(spec.time_column), header.index(spec.label_column)
    var_cols = [j for j, h in enumerate(header)
                if j not in (ti, li) and h not in spec.drop_columns]
    records, labels = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise _Malformed(f"line {lineno}: {len(row)} fields, header has {len(header)}")
        try:
            t = _parse_time(row[ti], spec.time_format)
            lab = _parse_value(row[li], spec, ())
            for j in var_cols:
                v = _parse_value(row[j], spec, sentinels)
                if v is not None:
                    records.append((t, header[j], v))
        except _Malformed as e:
            raise _Malformed(f"line {lineno}: {e}") from None
        if lab is not None:
            labels.append(lab)
    if not labels:
        raise _Malformed("no label values")
    if spec.label_rule == "any":
        label = int(any(v == 1 for v in labels))
    elif spec.label_rule == "last":
        label = int(labels[-1])
    else:
        label = int(max(labels))
    return [header[j] for j in var_cols], records, label


def _read_long(path, spec: AdapterSpec, sentinels):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh, delimiter=spec.delimiter))
    if not rows:
        return None
    header = [h.strip() for h in rows[0]]
    for col in (spec.time_column, spec.variable_column, spec.value_column):
        if col not in header:
            raise _Malformed(f"missing column {col!r}")
    ti, vi, xi = (header.index(c) for c in (spec.time_column, spec.variable_column,
                                              spec.value_column))
    records, names = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise _Malformed(f"line {lineno}: {len(row)} fields, header has {len(header)}")
        var = row[vi].strip()
        if not var or var in spec.drop_columns:
            continue
        try:
            t = _parse_time(row[ti], spec.time_format)
            v = _parse_value(row[xi], spec, sentinels)
        except _Malformed as e:
            raise _Malformed(f"line {lineno}: {e}") from None
        if var not in names:
            names.append(var)
        if v is not None:
            records.append((t, var, v))
    if not records:
        return None
    return names, records, None


def _read_label_table(path, spec: AdapterSpec) -> dict:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh, delimiter=",")
        out = {}
        for lineno, row in enumerate(reader, start=2):
            try:
                out[row[spec.labels_id_column].strip()] = int(float(row[spec.labels_value_column]))
            except (KeyError, ValueError, TypeError):
                raise DataError(f"{path}:{lineno}: cannot read label row") from None
    return out


def adapt_directory(directory, spec: AdapterSpec, out_dir):
    """Convert every matching file under ``directory``; returns the output paths and a log.

    Files with a header but no data are skipped and logged.  Any malformed
    file aborts the conversion with one message per offending file, and
    nothing is written.
    """
    if not os.path.isdir(directory):
        raise DataError(f"input directory {directory!r} does not exist")
    paths = sorted(glob.glob(os.path.join(directory, spec.file_glob)))
    excluded = set(spec.exclude_ids)
    if spec.exclude_ids_file:
        p = spec.exclude_ids_file
        p = p if os.path.isabs(p) else os.path.join(directory, p)
        with open(p, encoding="utf-8") as fh:
            excluded |= {ln.strip() for ln in fh if ln.strip()}
    sentinels = tuple(float(v) for v in spec.missing_values)
    outcome = None
    if spec.layout == "long":
        if not spec.labels_file:
            raise ConfigError("long layout needs labels_file")
        p = spec.labels_file if os.path.isabs(spec.labels_file) else os.path.join(
            directory, spec.labels_file)
        outcome = _read_label_table(p, spec)
        paths = [p_ for p_ in paths if os.path.abspath(p_) != os.path.abspath(p)]

    messages, errors = [], []
    converted = []
    vocab: list = []
    for path in paths:
        rid = os.path.splitext(os.path.basename(path))[0]
        if rid in excluded:
            messages.append(f"{path}: excluded by id list")
            continue
        try:
            parsed = (_read_wide if spec.layout == "wide" else _read_long)(path, spec, sentinels)
        except _Malformed as e:
            errors.append(f"{path}: {e}")
            continue
        except (OSError, UnicodeDecodeError) as e:
            errors.append(f"{path}: {e}")
            continue
        if parsed is None:
            messages.append(f"{path}: no data rows; instance rejected")
            log.warning("%s: no data rows; instance rejected", path)
            continue
        names, records, label = parsed
        if not records:
            messages.append(f"{path}: no observed values; instance rejected")
            log.warning("%s: no observed values; instance rejected", path)
            continue
        if outcome is not None:
            if rid not in outcome:
                errors.append(f"{path}: no label for record {rid!r} in {spec.labels_file}")
                continue
            label = outcome[rid]
        for n in names:
            if n not in vocab:
                vocab.append(n)
        converted.append((rid, records, label))
    if errors:
        raise DataError("adapter refused to write partial output:\n  " + "\n  ".join(errors))
    if not converted:
        raise DataError(f"no usable records found under {directory!r}")

    os.makedirs(out_dir, exist_ok=True)
    order = {v: j for j, v in enumerate(vocab)}
    data_path = os.path.join(out_dir, "data.csv")
    labels_path = os.path.join(out_dir, "labels.csv")
    with open(data_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(DATA_HEADER)
        for rid, records, _ in converted:
            # stable: rows keep file order within the same (time, variable) key
            for t, var, v in sorted(records, key=lambda r: (r[0], order[r[1]])):
                w.writerow([rid, repr(t), var, repr(v)])
    with open(labels_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(LABELS_HEADER)
        for rid, _, label in converted:
            w.writerow([rid, label])
    vocab_path = os.path.join(out_dir, "variables.txt")
    write_vocabulary(vocab_path, vocab)
    messages.append(f"converted {len(converted)} record(s), {len(vocab)} variable(s)")
    with open(os.path.join(out_dir, "adapt.log"), "w", encoding="utf-8", newline="\n") as fh:
        fh.writelines(m + "\n" for m in messages)
    return data_path, labels_path, vocab_path, messages


BUILTIN_SPECS = ("p19", "p12")


def load_spec(spec) -> AdapterSpec:
    """Accept an :class:`AdapterSpec`, a built-in name (``p19``, ``p12``) or a spec file path."""
    if spec is None:
        return AdapterSpec.from_text(_builtin_text("p19"))
    if isinstance(spec, AdapterSpec):
        return spec
    if spec in BUILTIN_SPECS:
        return AdapterSpec.from_text(_builtin_text(spec))
    if not os.path.isfile(spec):
        raise ConfigError(f"adapter spec {spec!r} is neither a file nor one of {BUILTIN_SPECS}")
    return AdapterSpec.from_file(spec)


def _builtin_text(name: str) -> str:
    from importlib.resources import files
    return files(__package__).joinpath("specs", f"{name}.txt").read_text(encoding="utf-8")


def adapt_physionet_psv(directory, spec, out_dir):
    """Convert PhysioNet per-patient files (P19 pipe-separated by default)."""
    return adapt_directory(directory, load_spec(spec), out_dir)
