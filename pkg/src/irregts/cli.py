"""Command-line entry point.

Subcommands: ``synth``, ``adapt``, ``extract``, ``benchmark``, ``importance``.
Every command writes under ``--out``.  ``--config FILE`` reads ``key = value``
lines (keys are long option names, dashes or underscores) whose values take
precedence over flags given on the command line.

Exit codes: 0 success, 2 usage error, 3 data error, 4 numeric failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict, dataclass, field
from typing import Optional

from . import __version__
from .classify import GbdtConfig, LogisticConfig
from .core import compute_global_stats
from .data_io import (SIGNALS, SynthesisConfig, file_content_hash, load_long_csv, load_spec,
                      missing_rates, read_vocabulary, synthesize, write_long_csv,
                      write_vocabulary)
from .data_io.adapters import adapt_directory
from .errors import ConfigError, IrregTSError, NumericError
from .evaluation import run_cv
from .features import STAT_NAMES, extract_dataset, write_features_csv
from .pipeline import DISPLAY_NAMES, REPRESENTATIONS

HEAD_LABELS = {"lr": "LR", "gbdt": "GBDT"}
STAT_LABELS = {"mean": "mean of observed values", "std": "std of observed values",
               "dmean": "mean change", "dstd": "std of change"}


@dataclass
class ExperimentConfig:
    data: str
    labels: str
    variables: Optional[str]
    representations: list
    heads: list
    gbdt: GbdtConfig = field(default_factory=GbdtConfig)
    lr: LogisticConfig = field(default_factory=LogisticConfig)
    k: int = 5
    seed: int = 0
    stratify: bool = True
    linear_use_index: bool = False
    jobs: int = 1
    out: str = "."

    def validate(self):
        for r in self.representations:
            if r not in REPRESENTATIONS:
                raise ConfigError(f"unknown representation {r!r}; choose from "
                                  f"{', '.join(REPRESENTATIONS)}")
        for h in self.heads:
            if h not in HEAD_LABELS:
                raise ConfigError(f"unknown head {h!r}; choose from lr, gbdt")
        if self.k < 2:
            raise ConfigError(f"k must be >= 2, got {self.k}")
        if self.jobs < 1:
            raise ConfigError("--jobs must be >= 1")
        self.gbdt.validate()
        if not self.lr.C > 0 or self.lr.max_iter < 1:
            raise ConfigError("LR needs C > 0 and max_iter >= 1")
        for p in (self.data, self.labels):
            if not os.path.isfile(p):
                raise ConfigError(f"input file {p!r} not found")

    def head_config(self, head):
        return self.gbdt if head == "gbdt" else self.lr

    def to_dict(self) -> dict:
        # output location and worker count never change results
        d = asdict(self)
        del d["out"], d["jobs"]
        return d


def _csv_list(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def _add_data_args(p):
    p.add_argument("--data", required=False, help="long-format CSV (instance_id,time,variable,value)")
    p.add_argument("--labels", required=False, help="labels CSV (instance_id,label)")
    p.add_argument("--variables", default=None,
                   help="vocabulary file (one name per line) or comma-separated names")


def _add_cv_args(p, multi: bool):
    rep_help = ("representation(s), comma-separated" if multi else "representation")
    p.add_argument("--representation", default="summary",
                   help=f"{rep_help}: {'|'.join(REPRESENTATIONS)}")
    p.add_argument("--head", default="gbdt", help="classifier head(s), comma-separated: lr|gbdt"
                   if multi else "classifier head: lr|gbdt")
    p.add_argument("--k", type=int, default=5, help="number of folds")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-stratify", dest="stratify", action="store_false",
                   help="plain shuffled folds instead of stratified")
    p.add_argument("--linear-use-index", action="store_true",
                   help="linear imputer interpolates over row index instead of time")
    p.add_argument("--n-trees", type=int, default=GbdtConfig.n_trees)
    p.add_argument("--max-depth", type=int, default=GbdtConfig.max_depth)
    p.add_argument("--learning-rate", type=float, default=GbdtConfig.learning_rate)
    p.add_argument("--reg-lambda", type=float, default=GbdtConfig.reg_lambda)
    p.add_argument("--gamma", type=float, default=GbdtConfig.gamma)
    p.add_argument("--min-child-weight", type=float, default=GbdtConfig.min_child_weight)
    p.add_argument("--lr-c", type=float, default=LogisticConfig.C,
                   help="inverse L2 strength of logistic regression")
    p.add_argument("--lr-max-iter", type=int, default=LogisticConfig.max_iter)
    p.add_argument("--jobs", type=int, default=1, help="maximum parallel fold workers")
    p.add_argument("--verbose", action="store_true", help="also report sample std over folds")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="irregts", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"irregts {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write a seeded synthetic dataset")
    p.add_argument("--seed", type=int, default=None, help="required")
    p.add_argument("--n-instances", type=int, default=SynthesisConfig.n_instances)
    p.add_argument("--n-variables", type=int, default=SynthesisConfig.n_variables)
    p.add_argument("--min-length", type=int, default=SynthesisConfig.min_length)
    p.add_argument("--max-length", type=int, default=SynthesisConfig.max_length)
    p.add_argument("--missing-rate", type=float, default=SynthesisConfig.missing_rate)
    p.add_argument("--classes", type=int, default=SynthesisConfig.n_classes)
    p.add_argument("--signal", default=SynthesisConfig.signal, choices=SIGNALS)
    p.add_argument("--effect-size", type=float, default=None)

    p = sub.add_parser("adapt", help="convert downloaded per-record files to the long format")
    p.add_argument("--input-dir", default=None)
    p.add_argument("--spec", default="p19", help="built-in spec name (p19, p12) or spec file")

    p = sub.add_parser("extract", help="write summary features for a dataset")
    _add_data_args(p)

    p = sub.add_parser("benchmark", help="cross-validate representation/head pairs")
    _add_data_args(p)
    _add_cv_args(p, multi=True)

    p = sub.add_parser("importance", help="grouped total-gain importance of summary features")
    _add_data_args(p)
    _add_cv_args(p, multi=False)

    for name, sp in sub.choices.items():
        sp.add_argument("--config", default=None, help="key = value file overriding flags")
        sp.add_argument("--out", default=".", help="output directory")
    return parser


def _apply_config_file(parser, sub_parser, args):
    if not args.config:
        return args
    actions = {a.dest: a for a in sub_parser._actions}
    try:
        with open(args.config, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as e:
        raise ConfigError(f"cannot read config file: {e}") from None
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{args.config}:{lineno}: expected 'key = value'")
        key, _, value = (s.strip() for s in line.partition("="))
        dest = key.lstrip("-").replace("-", "_")
        if key.replace("_", "-") == "no-stratify":
            dest, value = "stratify", str(not _bool(value))
        if dest not in actions or dest in ("config", "help"):
            raise ConfigError(f"{args.config}:{lineno}: unknown option {key!r}")
        action = actions[dest]
        if isinstance(action, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
            setattr(args, dest, _bool(value))
        else:
            conv = action.type or str
            try:
                setattr(args, dest, conv(value))
            except (TypeError, ValueError):
                raise ConfigError(f"{args.config}:{lineno}: bad value for {key!r}") from None
    return args


def _variables(arg):
    if arg is None:
        return None
    if os.path.isfile(arg):
        return read_vocabulary(arg)
    return _csv_list(arg)


def _experiment(args, multi: bool) -> ExperimentConfig:
    if not args.data or not args.labels:
        raise ConfigError("--data and --labels are required")
    reps = _csv_list(args.representation)
    heads = _csv_list(args.head)
    if not multi and (len(reps) != 1 or len(heads) != 1):
        raise ConfigError("this command takes a single representation and head")
    cfg = ExperimentConfig(
        data=args.data, labels=args.labels, variables=args.variables,
        representations=reps, heads=heads,
        gbdt=GbdtConfig(args.n_trees, args.max_depth, args.learning_rate, args.reg_lambda,
                        args.gamma, args.min_child_weight),
        lr=LogisticConfig(args.lr_c, args.lr_max_iter),
        k=args.k, seed=args.seed, stratify=args.stratify,
        linear_use_index=args.linear_use_index, jobs=args.jobs, out=args.out)
    cfg.validate()
    return cfg


def _load(cfg_or_args):
    return load_long_csv(cfg_or_args.data, cfg_or_args.labels, _variables(cfg_or_args.variables))


def _inputs_hash(cfg) -> dict:
    return {"data": file_content_hash(cfg.data), "labels": file_content_hash(cfg.labels)}


def _write(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _pct(mean, std) -> str:
    return f"{100 * mean:.1f} ± {100 * std:.1f}"


def format_table(reports) -> str:
    metrics = reports[0].metric_names
    rows = [["Method", *(m.upper() if len(m) <= 5 else m.capitalize() for m in metrics)]]
    for r in reports:
        label = (f"{DISPLAY_NAMES[r.config['representation']]} + "
                 f"{HEAD_LABELS[r.config['head']]}")
        rows.append([label, *(_pct(r.mean[m], r.std[m]) for m in metrics)])
    widths = [max(len(row[j]) for row in rows) for j in range(len(rows[0]))]
    lines = ["  ".join(c.ljust(w) if j == 0 else c.rjust(w)
                       for j, (c, w) in enumerate(zip(row, widths))) for row in rows]
    lines.insert(1, "-" * len(lines[0]))
    return "\n".join(lines) + "\n"


def cmd_synth(args) -> int:
    cfg = SynthesisConfig(seed=args.seed, n_instances=args.n_instances,
                          n_variables=args.n_variables, min_length=args.min_length,
                          max_length=args.max_length, missing_rate=args.missing_rate,
                          n_classes=args.classes, signal=args.signal,
                          effect_size=args.effect_size)
    ds = synthesize(cfg)
    os.makedirs(args.out, exist_ok=True)
    write_long_csv(ds, os.path.join(args.out, "data.csv"), os.path.join(args.out, "labels.csv"))
    write_vocabulary(os.path.join(args.out, "variables.txt"), ds.variables)
    _write(os.path.join(args.out, "synth.json"),
           json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n")
    print(f"wrote {len(ds)} instances, {ds.num_variables} variables to {args.out}")
    return 0


def cmd_adapt(args) -> int:
    if not args.input_dir:
        raise ConfigError("--input-dir is required")
    spec = load_spec(args.spec)
    data, labels, vocab, messages = adapt_directory(args.input_dir, spec, args.out)
    for m in messages:
        print(m)
    return 0


def cmd_extract(args) -> int:
    if not args.data or not args.labels:
        raise ConfigError("--data and --labels are required")
    ds = _load(args)
    stats = compute_global_stats(ds)
    X = extract_dataset(ds, stats)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "features.csv")
    write_features_csv(path, [x.id for x in ds.instances], X, ds.variables)
    rates = missing_rates(ds)
    width = max(len(v) for v in ds.variables)
    print(f"{len(ds)} instances, {ds.num_variables} variables -> {path}")
    print("per-variable missing rate:")
    for v, r in rates.items():
        print(f"  {v.ljust(width)}  {100 * r:5.1f}%")
    return 0


def cmd_benchmark(args) -> int:
    cfg = _experiment(args, multi=True)
    ds = _load(cfg)
    reports = []
    for rep in cfg.representations:
        for head in cfg.heads:
            reports.append(run_cv(ds, rep, head, cfg.head_config(head), cfg.k, cfg.seed,
                                  cfg.stratify, cfg.jobs, cfg.linear_use_index))
    os.makedirs(cfg.out, exist_ok=True)
    doc = {
        "format": "irregts-benchmark",
        "format_version": 1,
        "config": cfg.to_dict(),
        "inputs": _inputs_hash(cfg),
        "runs": [r.to_dict(verbose=args.verbose) for r in reports],
    }
    _write(os.path.join(cfg.out, "benchmark.json"),
           json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n")
    table = format_table(reports)
    _write(os.path.join(cfg.out, "benchmark.txt"), table)
    print(table, end="")
    return 0


def cmd_importance(args) -> int:
    cfg = _experiment(args, multi=False)
    if cfg.representations != ["summary"] or cfg.heads != ["gbdt"]:
        raise ConfigError("importance is defined for --representation summary --head gbdt")
    if cfg.gbdt.n_trees == 0:
        raise NumericError("n_trees is 0: the ensemble makes no splits, so there is no gain "
                           "to attribute")
    ds = _load(cfg)
    report = run_cv(ds, "summary", "gbdt", cfg.gbdt, cfg.k, cfg.seed, cfg.stratify, cfg.jobs)
    imp = report.importance
    if imp is None or imp.grouping_error:
        raise NumericError(f"no importance available: {imp.grouping_error if imp else 'none'}")
    os.makedirs(cfg.out, exist_ok=True)
    doc = {
        "format": "irregts-importance",
        "format_version": 1,
        "config": cfg.to_dict(),
        "inputs": _inputs_hash(cfg),
        "importance": imp.to_dict(),
        "evaluation": report.to_dict(verbose=args.verbose),
    }
    _write(os.path.join(cfg.out, "importance.json"),
           json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n")
    lines = [f"Total-gain share by feature type ({imp.folds}-fold average)"]
    for s in STAT_NAMES:
        share = 100 * imp.group_fractions[s]
        bar = "#" * int(round(share / 2))
        lines.append(f"  {s:<5}  {STAT_LABELS[s]:<24} {share:5.1f}%  {bar}")
    text = "\n".join(lines) + "\n"
    _write(os.path.join(cfg.out, "importance.txt"), text)
    print(text, end="")
    return 0


COMMANDS = {"synth": cmd_synth, "adapt": cmd_adapt, "extract": cmd_extract,
            "benchmark": cmd_benchmark, "importance": cmd_importance}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args = _apply_config_file(parser, parser._subparsers._group_actions[0].choices[
            args.command], args)
        return COMMANDS[args.command](args)
    except IrregTSError as e:
        print(f"irregts {args.command}: error: {e}", file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
