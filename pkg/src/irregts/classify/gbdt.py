"""Second-order gradient boosting with exact greedy splits.

Trees are grown level by level on the gradient/hessian statistics of the
current margins.  A candidate split is scored with::

    G_L^2 / (H_L + lambda) + G_R^2 / (H_R + lambda) - G^2 / (H + lambda)

(the reported gain omits the usual factor 1/2, like XGBoost's ``total_gain``).
Samples whose split feature is absent are tried on both sides; the better
side becomes the node's default direction.  One extra candidate per feature
sends every observed sample left and every absent sample right, so a split
can be made on missingness alone.

Ties are broken deterministically: lowest feature index, then lowest
threshold, then missing-goes-left before missing-goes-right.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit, log_expit, logsumexp, softmax

from ..errors import ConfigError, DataError

_HESS_FLOOR = 1e-16


@dataclass(frozen=True)
class GbdtConfig:
    n_trees: int = 100
    max_depth: int = 5
    learning_rate: float = 0.1
    reg_lambda: float = 1.0
    gamma: float = 0.0
    min_child_weight: float = 1e-6

    def validate(self):
        if self.n_trees < 0:
            raise ConfigError("n_trees must be >= 0")
        if self.max_depth < 0:
            raise ConfigError("max_depth must be >= 0")
        if not self.learning_rate > 0:
            raise ConfigError("learning_rate must be > 0")
        if self.reg_lambda < 0 or self.gamma < 0 or self.min_child_weight < 0:
            raise ConfigError("reg_lambda, gamma and min_child_weight must be >= 0")


@dataclass(frozen=True)
class Tree:
    """Flat array tree.  Node 0 is the root; ``left[i] == -1`` marks a leaf.

    Leaf ``value`` already includes the learning-rate shrinkage.  ``gain`` is
    the realised split gain for internal nodes and 0 for leaves.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    default_left: np.ndarray
    value: np.ndarray
    gain: np.ndarray
    cover: np.ndarray

    @property
    def num_nodes(self) -> int:
        return self.feature.shape[0]

    def is_leaf(self, i: int) -> bool:
        return self.left[i] < 0

    def depth(self) -> int:
        def rec(i):
            if self.left[i] < 0:
                return 0
            return 1 + max(rec(self.left[i]), rec(self.right[i]))
        return rec(0)

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf index reached by every row of X."""
        n = X.shape[0]
        node = np.zeros(n, dtype=np.int64)
        rows = np.arange(n)
        while True:
            internal = self.left[node] >= 0
            if not internal.any():
                return node
            f = np.where(internal, self.feature[node], 0)
            x = X[rows, f]
            go_left = np.where(np.isnan(x), self.default_left[node], x < self.threshold[node])
            nxt = np.where(go_left, self.left[node], self.right[node])
            node = np.where(internal, nxt, node)

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.value[self.apply(X)]


@dataclass(frozen=True)
class GbdtModel:
    trees: tuple            # rounds; each round is a tuple of 1 (binary) or K trees
    base_margin: np.ndarray  # (1,) or (K,)
    num_classes: int
    num_features: int
    config: GbdtConfig
    train_loss: tuple = field(default=(), compare=False)

    def iter_trees(self):
        for rnd in self.trees:
            yield from rnd


class _Builder:
    def __init__(self, X, order_t, config: GbdtConfig):
        self.X = X
        self.Xt = np.ascontiguousarray(X.T)
        self.order_t = order_t
        self.cfg = config

    def _best_split(self, member, g, h, G, H):
        cfg = self.cfg
        lam = cfg.reg_lambda
        n = int(member.sum())
        F = self.Xt.shape[0]
        idx = self.order_t[member[self.order_t]].reshape(F, n)
        vals = np.take_along_axis(self.Xt, idx, axis=1)
        absent = np.isnan(vals)
        gs = np.where(absent, 0.0, g[idx])
        hs = np.where(absent, 0.0, h[idx])
        CG = np.cumsum(gs, axis=1)
        CH = np.cumsum(hs, axis=1)
        n_obs = (~absent).sum(axis=1)
        G_obs, H_obs = CG[:, -1], CH[:, -1]
        G_mis, H_mis = G - G_obs, H - H_obs
        parent = G * G / (H + lam)

        def score(GL, HL):
            GR, HR = G - GL, H - HL
            with np.errstate(divide="ignore", invalid="ignore"):
                s = GL * GL / (HL + lam) + GR * GR / (HR + lam) - parent
            ok = (HL >= cfg.min_child_weight) & (HR >= cfg.min_child_weight)
            return np.where(ok, s, -np.inf)

        # threshold candidates between sorted positions k and k+1
        k = np.arange(n - 1)
        valid = (k[None, :] + 1 < n_obs[:, None]) & (vals[:, 1:] > vals[:, :-1])
        CGk, CHk = CG[:, :-1], CH[:, :-1]
        gain_ml = np.where(valid, score(CGk + G_mis[:, None], CHk + H_mis[:, None]), -np.inf)
        gain_mr = np.where(valid, score(CGk, CHk), -np.inf)
        # missingness-only candidate: observed left, absent right
        only_ok = (n_obs > 0) & (n_obs < n)
        gain_inf = np.where(only_ok, score(G_obs, H_obs), -np.inf)

        cand = np.empty((F, 2 * (n - 1) + 1))
        cand[:, 0:-1:2] = gain_ml
        cand[:, 1:-1:2] = gain_mr
        cand[:, -1] = gain_inf
        pos = np.argmax(cand, axis=1)
        best = cand[np.arange(F), pos]
        f = int(np.argmax(best))
        gain = float(best[f])
        if not np.isfinite(gain) or gain <= cfg.gamma:
            return None
        p = int(pos[f])
        if p == cand.shape[1] - 1:
            thr, default_left = np.inf, False
        else:
            kk, default_left = p // 2, p % 2 == 0
            a, b = vals[f, kk], vals[f, kk + 1]
            thr = 0.5 * a + 0.5 * b
            if not a < thr:
                thr = b
        return f, float(thr), bool(default_left), gain

    def build(self, g, h):
        cfg = self.cfg
        lam = cfg.reg_lambda
        N = self.X.shape[0]
        feature, threshold, left, right, dleft, value, gain, cover = ([] for _ in range(8))

        def new_node(member):
            G, H = float(g[member].sum()), float(h[member].sum())
            feature.append(-1)
            threshold.append(0.0)
            left.append(-1)
            right.append(-1)
            dleft.append(False)
            value.append(-G / (H + lam) * cfg.learning_rate if H + lam > 0 else 0.0)
            gain.append(0.0)
            cover.append(H)
            return len(feature) - 1, G, H

        root, G, H = new_node(np.ones(N, dtype=bool))
        frontier = [(root, np.ones(N, dtype=bool), G, H)]
        for depth in range(cfg.max_depth):
            nxt = []
            for node, member, G, H in frontier:
                if member.sum() < 2:
                    continue
                split = self._best_split(member, g, h, G, H)
                if split is None:
                    continue
                f, thr, dl, gn = split
                x = self.X[:, f]
                to_left = np.where(np.isnan(x), dl, x < thr)
                lm, rm = member & to_left, member & ~to_left
                li, lG, lH = new_node(lm)
                ri, rG, rH = new_node(rm)
                feature[node], threshold[node] = f, thr
                left[node], right[node], dleft[node], gain[node] = li, ri, dl, gn
                value[node] = 0.0
                nxt.append((li, lm, lG, lH))
                nxt.append((ri, rm, rG, rH))
            frontier = nxt
            if not frontier:
                break
        return Tree(np.array(feature, dtype=np.int64), np.array(threshold),
                    np.array(left, dtype=np.int64), np.array(right, dtype=np.int64),
                    np.array(dleft, dtype=bool), np.array(value), np.array(gain),
                    np.array(cover))


def _binary_loss(margin, y):
    return float(np.mean(-log_expit(margin) + (1.0 - y) * margin))


def _softmax_loss(margin, y):
    return float(np.mean(logsumexp(margin, axis=1) - margin[np.arange(y.size), y]))


def fit_gbdt(X, y, config: GbdtConfig = GbdtConfig(), num_classes=None) -> GbdtModel:
    """Fit a boosted ensemble; absent cells (NaN) are handled natively."""
    config.validate()
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise DataError("X must be N x F with one label per row")
    if np.isinf(X).any():
        raise DataError("GBDT input must not contain infinities")
    if X.shape[0] < 2 or np.unique(y).size < 2:
        raise DataError("GBDT needs at least two samples from two classes")
    K = int(num_classes if num_classes is not None else y.max() + 1)
    N, F = X.shape
    order_t = np.ascontiguousarray(np.argsort(X, axis=0, kind="stable").T)
    builder = _Builder(X, order_t, config)
    rounds, losses = [], []
    if K == 2:
        prior = float(np.clip(y.mean(), 1e-15, 1 - 1e-15))
        base = np.array([np.log(prior / (1.0 - prior))])
        margin = np.full(N, base[0])
        yf = y.astype(float)
        losses.append(_binary_loss(margin, yf))
        for _ in range(config.n_trees):
            p = expit(margin)
            g = p - yf
            h = np.maximum(p * (1.0 - p), _HESS_FLOOR)
            tree = builder.build(g, h)
            margin = margin + tree.predict(X)
            rounds.append((tree,))
            losses.append(_binary_loss(margin, yf))
    else:
        base = np.zeros(K)
        margin = np.zeros((N, K))
        onehot = np.eye(K)[y]
        losses.append(_softmax_loss(margin, y))
        for _ in range(config.n_trees):
            P = softmax(margin, axis=1)
            trees = []
            for c in range(K):
                g = P[:, c] - onehot[:, c]
                h = np.maximum(P[:, c] * (1.0 - P[:, c]), _HESS_FLOOR)
                trees.append(builder.build(g, h))
            for c, tree in enumerate(trees):
                margin[:, c] += tree.predict(X)
            rounds.append(tuple(trees))
            losses.append(_softmax_loss(margin, y))
    return GbdtModel(tuple(rounds), base, K, F, config, tuple(losses))


def predict_margin(model: GbdtModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != model.num_features:
        raise DataError(f"expected {model.num_features} columns, got {X.shape[-1]}")
    K = 1 if model.num_classes == 2 else model.num_classes
    margin = np.tile(model.base_margin, (X.shape[0], 1)).astype(float)
    for rnd in model.trees:
        for c, tree in enumerate(rnd):
            margin[:, c] += tree.predict(X)
    return margin[:, 0] if K == 1 else margin


def predict_proba_gbdt(model: GbdtModel, X) -> np.ndarray:
    margin = predict_margin(model, X)
    if model.num_classes == 2:
        p = expit(margin)
        return np.column_stack([1.0 - p, p])
    return softmax(margin, axis=1)
