"""Trainable linear readout: ridge regression, hinge-loss SVM, pruning.

Labels are 0/1 at the module boundary and +/-1 internally.  The decision
rule is sign(w.x + b), with score 0 resolved to class +1.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y


def _to_pm1(y) -> np.ndarray:
    """Map {0,1} (or already +/-1) labels to +/-1."""
    y = np.asarray(y)
    out = np.where(y > 0, 1, -1)
    if len(np.unique(out)) < 2:
        raise ValueError("labels must contain both classes")
    return out.astype(float)


@dataclass
class LinearReadout:
    """Weights, bias and pruning mask of a trained linear classifier."""

    weights: np.ndarray
    bias: float
    active_mask: np.ndarray = None

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        if self.active_mask is None:
            self.active_mask = np.ones(len(self.weights), dtype=bool)
        self.active_mask = np.asarray(self.active_mask, dtype=bool)
        if len(self.active_mask) != len(self.weights):
            raise ValueError("active_mask length must match weights")
        if np.any(self.weights[~self.active_mask] != 0.0):
            raise ValueError("pruned features must carry weight exactly 0")

    def score_values(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.shape[1] != len(self.weights):
            raise ValueError(
                f"feature count mismatch: X has {X.shape[1]}, readout has {len(self.weights)}"
            )
        return X @ self.weights + self.bias

    def predict_pm1(self, X) -> np.ndarray:
        """+/-1 predictions; score exactly 0 resolves to +1."""
        return np.where(self.score_values(X) >= 0, 1, -1)

    def predict01(self, X) -> np.ndarray:
        return (self.predict_pm1(X) > 0).astype(int)

    def to_json(self, path, extra: Optional[dict] = None) -> None:
        doc = {
            "weights": self.weights.tolist(),
            "bias": self.bias,
            "active_mask": self.active_mask.tolist(),
        }
        if extra:
            doc.update(extra)
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, path) -> "LinearReadout":
        with open(path) as fh:
            doc = json.load(fh)
        return cls(
            weights=np.asarray(doc["weights"], dtype=float),
            bias=float(doc["bias"]),
            active_mask=np.asarray(doc["active_mask"], dtype=bool),
        )


@dataclass(frozen=True)
class TrainConfig:
    method: str = "ridge"  # "ridge" | "svm"
    ridge_lambda: float = 1e-3
    svm_c: float = 1.0
    svm_epochs: int = 200
    split: float = 0.8  # train fraction: 0.8 static, 0.5 stream
    split_seed: int = 0

    def __post_init__(self):
        if self.method not in ("ridge", "svm"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.ridge_lambda <= 0:
            raise ValueError("ridge_lambda must be > 0")
        if self.svm_c <= 0:
            raise ValueError("svm_c must be > 0")
        if not (0.0 < self.split < 1.0):
            raise ValueError("split must be in (0, 1)")


def train_ridge(X, y, lam: float = 1e-3) -> LinearReadout:
    """Regularized least squares on +/-1 targets, bias unregularized."""
    if lam <= 0:
        raise ValueError("lam must be > 0")
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValueError("X must be 2-D with at least 2 rows")
    y2 = _to_pm1(y)
    n, d = X.shape
    Xa = np.hstack([X, np.ones((n, 1))])
    A = Xa.T @ Xa
    A[np.diag_indices(d)] += lam  # leave the bias entry unregularized
    rhs = Xa.T @ y2
    try:
        wb = np.linalg.solve(A, rhs)
    except np.linalg.LinAlgError as exc:  # cannot occur for lam > 0; guard anyway
        raise np.linalg.LinAlgError(f"singular ridge system despite lam = {lam:g}") from exc
    return LinearReadout(weights=wb[:d], bias=float(wb[d]))


def svm_objective(w, b, X, y2, c: float) -> float:
    margins = y2 * (X @ w + b)
    return 0.5 * float(w @ w) + c * float(np.maximum(0.0, 1.0 - margins).sum())


def train_svm(X, y, c: float = 1.0, epochs: int = 200, seed: int = 0) -> LinearReadout:
    """Deterministic full-batch subgradient descent on the hinge objective.

    Step 1/(c*t) at epoch t; the best-objective iterate seen (including the
    zero start) is returned, so the objective never exceeds that of (0, 0).
    The seed is accepted for interface stability; the epoch-ordered pass is
    fully deterministic and does not consume it.
    """
    del seed
    if c <= 0:
        raise ValueError("c must be > 0")
    X = np.asarray(X, dtype=float)
    y2 = _to_pm1(y)
    n, d = X.shape
    w = np.zeros(d)
    b = 0.0
    best_obj = svm_objective(w, b, X, y2, c)
    best = (w.copy(), b)
    for t in range(1, epochs + 1):
        margins = y2 * (X @ w + b)
        viol = margins < 1.0
        grad_w = w - c * (y2[viol] @ X[viol])
        grad_b = -c * float(y2[viol].sum())
        eta = 1.0 / (c * t)
        w = w - eta * grad_w
        b = b - eta * grad_b
        obj = svm_objective(w, b, X, y2, c)
        if obj < best_obj:
            best_obj = obj
            best = (w.copy(), b)
    return LinearReadout(weights=best[0], bias=float(best[1]))


def evaluate(readout: LinearReadout, X, y) -> float:
    """Fraction of correctly classified rows."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    if len(X) != len(y):
        raise ValueError("X and y row counts differ")
    y2 = np.where(y > 0, 1, -1)
    return float(np.mean(readout.predict_pm1(X) == y2))


def train_val_split(groups, split: float, seed: int):
    """Stratified train/validation index split.

    ``groups`` carries the stratification key per row (input word index for
    static tasks, stream id for temporal ones).  Every group contributes to
    both sides whenever it has >= 2 members.
    """
    groups = np.asarray(groups)
    rng = np.random.default_rng(seed)
    train_idx, val_idx = [], []
    for g in np.unique(groups):
        idx = np.flatnonzero(groups == g)
        idx = idx[rng.permutation(len(idx))]
        n_train = int(round(split * len(idx)))
        n_train = min(max(n_train, 1), len(idx) - 1) if len(idx) >= 2 else n_train
        train_idx.append(idx[:n_train])
        val_idx.append(idx[n_train:])
    return np.sort(np.concatenate(train_idx)), np.sort(np.concatenate(val_idx))


def _train(X, y, cfg: TrainConfig) -> LinearReadout:
    if cfg.method == "ridge":
        return train_ridge(X, y, cfg.ridge_lambda)
    return train_svm(X, y, cfg.svm_c, cfg.svm_epochs, cfg.split_seed)


def top_m_features(weights, keep_m: int) -> np.ndarray:
    """Indices of the keep_m largest-|weight| features, ties to lowest index."""
    weights = np.asarray(weights, dtype=float)
    if not (1 <= keep_m <= len(weights)):
        raise ValueError(f"keep_m must be in [1, {len(weights)}], got {keep_m}")
    order = np.lexsort((np.arange(len(weights)), -np.abs(weights)))
    return np.sort(order[:keep_m])


def prune_retrain(X, y, cfg: TrainConfig, keep_m: int, groups=None):
    """Magnitude pruning with retraining.

    Trains on the train split, keeps the keep_m largest-|weight| features,
    retrains on the surviving columns, and reports validation accuracy.
    Returns (pruned readout with full-length zero-masked weights, accuracy).
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    if groups is None:
        groups = y
    tr, va = train_val_split(groups, cfg.split, cfg.split_seed)
    full = _train(X[tr], y[tr], cfg)
    keep = top_m_features(full.weights, keep_m)
    sub = _train(X[tr][:, keep], y[tr], cfg)
    d = X.shape[1]
    weights = np.zeros(d)
    weights[keep] = sub.weights
    mask = np.zeros(d, dtype=bool)
    mask[keep] = True
    pruned = LinearReadout(weights=weights, bias=sub.bias, active_mask=mask)
    acc = evaluate(pruned, X[va], y[va])
    return pruned, acc


class RidgeReadout(BaseEstimator, ClassifierMixin):
    """sklearn-style wrapper around train_ridge (fit/predict/score)."""

    def __init__(self, lam: float = 1e-3):
        self.lam = lam

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        self.readout_ = train_ridge(X, y, self.lam)
        self.classes_ = np.array([0, 1])
        return self

    def decision_function(self, X):
        check_is_fitted(self, "readout_")
        return self.readout_.score_values(check_array(X))

    def predict(self, X):
        check_is_fitted(self, "readout_")
        return self.readout_.predict01(check_array(X))


class MarginSVM(BaseEstimator, ClassifierMixin):
    """sklearn-style wrapper around train_svm."""

    def __init__(self, c: float = 1.0, epochs: int = 200):
        self.c = c
        self.epochs = epochs

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        self.readout_ = train_svm(X, y, self.c, self.epochs)
        self.classes_ = np.array([0, 1])
        return self

    def decision_function(self, X):
        check_is_fitted(self, "readout_")
        return self.readout_.score_values(check_array(X))

    def predict(self, X):
        check_is_fitted(self, "readout_")
        return self.readout_.predict01(check_array(X))
