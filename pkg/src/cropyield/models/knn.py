"""Brute-force k-nearest-neighbour regression."""
from dataclasses import dataclass

import numpy as np

_CHUNK = 256


@dataclass(frozen=True, eq=False)
class KNNModel:
    X: np.ndarray          # stored (possibly standardised) training rows
    y: np.ndarray
    k: int
    mean: np.ndarray = None  # set when features are standardised
    std: np.ndarray = None

    def transform(self, X):
        X = np.asarray(X, dtype=np.float64)
        if self.mean is None:
            return X
        return standardize(X, self.mean, self.std)

    def neighbors(self, X):
        """Indices of the k nearest training rows per query, nearest first.

        Ordered by (squared distance, training index), so equal distances go to
        the lower index.
        """
        Q = self.transform(X)
        out = np.empty((Q.shape[0], self.k), dtype=np.int64)
        for lo in range(0, Q.shape[0], _CHUNK):
            q = Q[lo:lo + _CHUNK]
            d2 = np.zeros((q.shape[0], self.X.shape[0]))
            for f in range(self.X.shape[1]):
                diff = q[:, f, None] - self.X[None, :, f]
                d2 += diff * diff
            for r in range(q.shape[0]):
                out[lo + r] = _k_smallest(d2[r], self.k)
        return out

    def predict(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.shape[0] == 0:
            return np.empty(0)
        idx = self.neighbors(X)
        return np.array([np.mean(self.y[row]) for row in idx])


def _k_smallest(d, k):
    n = d.size
    if k < n:
        kth = np.partition(d, k - 1)[k - 1]
        below = np.flatnonzero(d < kth)
        ties = np.flatnonzero(d == kth)[: k - below.size]
        cand = np.concatenate([below, ties])
    else:
        cand = np.arange(n)
    return cand[np.lexsort((cand, d[cand]))]


def standardize(X, mean, std):
    out = np.zeros_like(X, dtype=np.float64)
    nz = std > 0
    out[:, nz] = (X[:, nz] - mean[nz]) / std[nz]
    return out


def fit_knn(X, y, k=5, scale=False):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = X.shape[0]
    if k < 1:
        raise ValueError("k must be ≥ 1")
    if k > n:
        raise ValueError(f"k={k} exceeds the {n} training rows")
    if scale:
        mean, std = X.mean(axis=0), X.std(axis=0)
        return KNNModel(standardize(X, mean, std), y.copy(), int(k), mean, std)
    return KNNModel(X.copy(), y.copy(), int(k))
