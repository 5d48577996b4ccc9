"""L2-regularised logistic regression on standardised inputs.

The objective follows the usual inverse-strength convention::

    0.5 * ||W||^2 + C * sum_i loss_i

with an unpenalised intercept.  Binary problems use a single logit;
K > 2 classes use the multinomial (softmax) loss.  Optimisation is
full-batch L-BFGS, so a fit is deterministic.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit, log_expit, logsumexp, softmax

from ..core import Standardizer
from ..errors import DataError, NumericError


@dataclass(frozen=True)
class LogisticConfig:
    C: float = 1.0
    max_iter: int = 500
    tol: float = 1e-6


@dataclass(frozen=True)
class LogisticModel:
    weights: np.ndarray  # (F,) for binary, (F, K) otherwise
    bias: np.ndarray     # (1,) or (K,)
    scaler: Standardizer
    num_classes: int
    C: float
    n_iter: int

    @property
    def num_features(self) -> int:
        return self.weights.shape[0]


def _split(params, F, K):
    width = 1 if K == 2 else K
    W = params[:F * width].reshape(F, width)
    b = params[F * width:]
    return W, b


def objective(params: np.ndarray, X: np.ndarray, y: np.ndarray, C: float, num_classes: int):
    """Regularised loss and its gradient w.r.t. the packed parameter vector."""
    N, F = X.shape
    W, b = _split(params, F, num_classes)
    Z = X @ W + b
    if num_classes == 2:
        z = Z[:, 0]
        # log(1 + e^z) - y z, via log_expit for stability
        loss = np.sum(-log_expit(z) + (1.0 - y) * z)
        r = expit(z) - y
        gW = X.T @ r
        gb = np.array([r.sum()])
        gW = gW[:, None]
    else:
        loss = np.sum(logsumexp(Z, axis=1) - Z[np.arange(N), y])
        P = softmax(Z, axis=1)
        P[np.arange(N), y] -= 1.0
        gW = X.T @ P
        gb = P.sum(axis=0)
    f = 0.5 * float(np.sum(W * W)) + C * float(loss)
    grad = np.concatenate([(W + C * gW).reshape(-1), C * gb])
    return f, grad


def fit_logistic(X, y, config: LogisticConfig = LogisticConfig(), num_classes=None) -> LogisticModel:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise DataError("X must be N x F with one label per row")
    if np.isnan(X).any():
        raise DataError("logistic regression needs complete input; impute the missing "
                        "cells or use summary features")
    if X.shape[0] < 2 or np.unique(y).size < 2:
        raise DataError("logistic regression needs at least two samples from two classes")
    K = int(num_classes if num_classes is not None else y.max() + 1)
    scaler = Standardizer.fit(X)
    Xs = scaler.transform(X)
    F = Xs.shape[1]
    width = 1 if K == 2 else K
    x0 = np.zeros(F * width + width)
    res = minimize(objective, x0, args=(Xs, y.astype(float) if K == 2 else y, config.C, K),
                   jac=True, method="L-BFGS-B",
                   options={"maxiter": config.max_iter, "gtol": config.tol, "maxcor": 20})
    if not np.all(np.isfinite(res.x)):
        raise NumericError("logistic regression diverged")
    if not res.success and res.nit >= config.max_iter:
        warnings.warn(f"logistic regression stopped after {res.nit} iterations "
                      f"without reaching tolerance {config.tol}", stacklevel=2)
    W, b = _split(res.x, F, K)
    if K == 2:
        W = W[:, 0]
    return LogisticModel(W.copy(), b.copy(), scaler, K, config.C, int(res.nit))


def predict_proba_logistic(model: LogisticModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != model.num_features:
        raise DataError(f"expected {model.num_features} columns, got {X.shape[-1]}")
    if np.isnan(X).any():
        raise DataError("logistic regression cannot score absent cells")
    Xs = model.scaler.transform(X)
    if model.num_classes == 2:
        p = expit(Xs @ model.weights + model.bias[0])
        return np.column_stack([1.0 - p, p])
    return softmax(Xs @ model.weights + model.bias, axis=1)
