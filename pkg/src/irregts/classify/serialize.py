"""Versioned JSON model format.

Layout (``format_version`` 1)::

    {"format": "irregts-model", "format_version": 1, "kind": "gbdt" | "logistic", ...}

GBDT models carry ``base_margin`` and ``rounds``: a list of rounds, each a
list of 1 (binary) or K nested node objects.  An internal node is
``{"feature", "threshold", "default_left", "gain", "cover", "left", "right"}``,
a leaf is ``{"leaf", "cover"}``.  Logistic models carry ``weights``, ``bias``
and the scaler's ``mean``/``std``/``constant`` arrays.

Floats are written with ``repr`` and so round-trip exactly.  Non-finite
values (the missingness-only split threshold) are written as the strings
``"inf"``/``"-inf"`` to keep the document strict JSON.
"""
from __future__ import annotations

import json
import math

import numpy as np

from ..core import Standardizer
from ..errors import DataError
from .gbdt import GbdtConfig, GbdtModel, Tree
from .logistic import LogisticModel

FORMAT = "irregts-model"
FORMAT_VERSION = 1


def _f(x: float):
    x = float(x)
    if math.isfinite(x):
        return x
    return "inf" if x > 0 else ("-inf" if x < 0 else "nan")


def _unf(x) -> float:
    return float(x)  # float("inf") parses the string form


def _node(tree: Tree, i: int) -> dict:
    if tree.left[i] < 0:
        return {"leaf": _f(tree.value[i]), "cover": _f(tree.cover[i])}
    return {
        "feature": int(tree.feature[i]),
        "threshold": _f(tree.threshold[i]),
        "default_left": bool(tree.default_left[i]),
        "gain": _f(tree.gain[i]),
        "cover": _f(tree.cover[i]),
        "left": _node(tree, tree.left[i]),
        "right": _node(tree, tree.right[i]),
    }


def _tree_from(obj: dict) -> Tree:
    cols = {k: [] for k in ("feature", "threshold", "left", "right", "default_left",
                            "value", "gain", "cover")}
    # breadth-first renumbering
    queue = [obj]
    while queue:
        nxt = []
        for node in queue:
            i = len(cols["feature"])
            for k in cols:
                cols[k].append(None)
            cols["cover"][i] = _unf(node.get("cover", 0.0))
            if "leaf" in node:
                cols["feature"][i], cols["threshold"][i] = -1, 0.0
                cols["left"][i] = cols["right"][i] = -1
                cols["default_left"][i], cols["gain"][i] = False, 0.0
                cols["value"][i] = _unf(node["leaf"])
            else:
                cols["feature"][i] = int(node["feature"])
                cols["threshold"][i] = _unf(node["threshold"])
                cols["default_left"][i] = bool(node["default_left"])
                cols["gain"][i] = _unf(node["gain"])
                cols["value"][i] = 0.0
                nxt.append((i, node["left"], node["right"]))
        # children of this level are appended in order, so their indices are predictable
        base = len(cols["feature"])
        for j, (i, l, r) in enumerate(nxt):
            cols["left"][i], cols["right"][i] = base + 2 * j, base + 2 * j + 1
        queue = [c for _, l, r in nxt for c in (l, r)]
    return Tree(np.array(cols["feature"], dtype=np.int64), np.array(cols["threshold"], dtype=float),
                np.array(cols["left"], dtype=np.int64), np.array(cols["right"], dtype=np.int64),
                np.array(cols["default_left"], dtype=bool), np.array(cols["value"], dtype=float),
                np.array(cols["gain"], dtype=float), np.array(cols["cover"], dtype=float))


def model_to_dict(model) -> dict:
    if isinstance(model, GbdtModel):
        return {
            "format": FORMAT, "format_version": FORMAT_VERSION, "kind": "gbdt",
            "num_classes": model.num_classes, "num_features": model.num_features,
            "config": {k: _f(v) if isinstance(v, float) else v
                       for k, v in model.config.__dict__.items()},
            "base_margin": [_f(v) for v in model.base_margin],
            "rounds": [[_node(t, 0) for t in rnd] for rnd in model.trees],
        }
    if isinstance(model, LogisticModel):
        return {
            "format": FORMAT, "format_version": FORMAT_VERSION, "kind": "logistic",
            "num_classes": model.num_classes, "C": _f(model.C), "n_iter": model.n_iter,
            "weights": np.vectorize(_f, otypes=[object])(model.weights).tolist(),
            "bias": [_f(v) for v in model.bias],
            "scaler": {"mean": [_f(v) for v in model.scaler.mean],
                       "std": [_f(v) for v in model.scaler.std],
                       "constant": [bool(v) for v in model.scaler.constant]},
        }
    raise TypeError(f"cannot serialise {type(model).__name__}")


def model_from_dict(obj: dict):
    if obj.get("format") != FORMAT:
        raise DataError("not an irregts model document")
    if obj.get("format_version") != FORMAT_VERSION:
        raise DataError(f"unsupported model format version {obj.get('format_version')!r}")
    kind = obj.get("kind")
    if kind == "gbdt":
        cfg = GbdtConfig(**{k: (_unf(v) if isinstance(v, (str, float)) else v)
                            for k, v in obj["config"].items()})
        rounds = tuple(tuple(_tree_from(t) for t in rnd) for rnd in obj["rounds"])
        return GbdtModel(rounds, np.array([_unf(v) for v in obj["base_margin"]]),
                         int(obj["num_classes"]), int(obj["num_features"]), cfg)
    if kind == "logistic":
        s = obj["scaler"]
        scaler = Standardizer(np.array([_unf(v) for v in s["mean"]]),
                              np.array([_unf(v) for v in s["std"]]),
                              np.array(s["constant"], dtype=bool))
        W = np.array(obj["weights"], dtype=object)
        W = np.vectorize(_unf, otypes=[float])(W) if W.size else W.astype(float)
        return LogisticModel(W, np.array([_unf(v) for v in obj["bias"]]), scaler,
                             int(obj["num_classes"]), _unf(obj["C"]), int(obj["n_iter"]))
    raise DataError(f"unknown model kind {kind!r}")


def dumps(model) -> str:
    return json.dumps(model_to_dict(model), sort_keys=True, allow_nan=False)


def loads(text: str):
    return model_from_dict(json.loads(text))
