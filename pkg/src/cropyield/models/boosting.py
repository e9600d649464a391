"""Squared-loss gradient boosting: plain residual fitting and the
second-order regularised variant."""
from dataclasses import dataclass

import numpy as np

from .tree import grow


@dataclass(frozen=True, eq=False)
class BoostedModel:
    base_score: float
    trees: tuple
    learning_rate: float

    def staged_predict(self, X):
        X = np.ascontiguousarray(X, dtype=np.float64)
        out = np.full(X.shape[0], self.base_score)
        yield out
        for tree in self.trees:
            out = out + self.learning_rate * tree.predict(X)
            yield out

    def predict(self, X):
        for out in self.staged_predict(X):
            pass
        return out


def _check(n_estimators, learning_rate):
    if n_estimators < 0:
        raise ValueError(f"n_estimators must be >= 0, got {n_estimators}")
    if not learning_rate > 0:
        raise ValueError(f"learning_rate must be > 0, got {learning_rate}")


def fit_gbm(X, y, n_estimators=100, learning_rate=0.1, max_depth=3, min_samples_split=2,
            min_samples_leaf=1):
    """F_0 = mean(y); each round fits a CART tree to ``y - F`` and adds
    ``learning_rate`` times its output."""
    _check(n_estimators, learning_rate)
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    base = float(np.mean(y))
    F = np.full(y.shape[0], base)
    trees = []
    for _ in range(n_estimators):
        tree = grow(X, y - F, max_depth=max_depth, min_samples_split=min_samples_split,
                    min_samples_leaf=min_samples_leaf)
        F = F + learning_rate * tree.predict(X)
        trees.append(tree)
    return BoostedModel(base, tuple(trees), float(learning_rate))


def fit_xgb(X, y, n_estimators=100, learning_rate=0.3, reg_lambda=1.0, gamma=0.0, max_depth=6,
            min_samples_split=2, min_samples_leaf=1):
    """Second-order boosting for squared loss (g = F - y, h = 1).

    A split is kept only when
    ``0.5 * (G_L^2/(H_L+lam) + G_R^2/(H_R+lam) - G^2/(H+lam)) - gamma > 0``
    and each leaf outputs ``-G / (H + lam)``.
    """
    _check(n_estimators, learning_rate)
    if reg_lambda < 0 or gamma < 0:
        raise ValueError("reg_lambda and gamma must be >= 0")
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    base = float(np.mean(y))
    F = np.full(y.shape[0], base)
    trees = []
    for _ in range(n_estimators):
        # the kernel works on -g = y - F, so leaf -G/(H+lam) is sum/(count+lam)
        tree = grow(X, y - F, max_depth=max_depth, min_samples_split=min_samples_split,
                    min_samples_leaf=min_samples_leaf, reg_lambda=reg_lambda, gamma=gamma,
                    boosted=True)
        F = F + learning_rate * tree.predict(X)
        trees.append(tree)
    return BoostedModel(base, tuple(trees), float(learning_rate))
