"""Bootstrap tree ensembles: random forest and bagging."""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .. import _rng
from .tree import grow, check_tree_params


@dataclass(frozen=True, eq=False)
class EnsembleModel:
    trees: tuple

    def predict(self, X):
        X = np.ascontiguousarray(X, dtype=np.float64)
        total = np.zeros(X.shape[0])
        for tree in self.trees:
            total = total + tree.predict(X)
        return total / len(self.trees)


def _fit_member(X, y, i, seed, bootstrap, max_features, tree_params):
    n = X.shape[0]
    if bootstrap:
        samples = _rng.bootstrap_indices(n, np.uint64(_rng.derive(seed, "boot", i)))
    else:
        samples = np.arange(n)
    return grow(X, y, samples, max_features=max_features,
                seed=_rng.derive(seed, "feat", i), **tree_params)


def fit_forest(X, y, n_estimators=100, max_features=None, bootstrap=True, seed=0,
               max_depth=None, min_samples_split=2, min_samples_leaf=1, n_jobs=1):
    """Average of CART trees, each on its own bootstrap sample, with a fresh
    random subset of ``max_features`` candidate features at every node.

    Tree ``i`` draws all of its randomness from child seeds of ``(seed, i)``,
    so the result does not depend on ``n_jobs``.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    p = X.shape[1]
    max_features = p if max_features is None else int(max_features)
    if not 1 <= max_features <= p:
        raise ValueError(f"max_features must be in [1, {p}], got {max_features}")
    if n_estimators < 1:
        raise ValueError(f"n_estimators must be >= 1, got {n_estimators}")
    check_tree_params(max_depth, min_samples_split, min_samples_leaf)
    tree_params = dict(max_depth=max_depth, min_samples_split=min_samples_split,
                       min_samples_leaf=min_samples_leaf)

    def member(i):
        return _fit_member(X, y, i, seed, bootstrap, max_features, tree_params)

    if n_jobs is None or n_jobs <= 1:
        trees = [member(i) for i in range(n_estimators)]
    else:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            trees = list(pool.map(member, range(n_estimators)))
    return EnsembleModel(tuple(trees))


def fit_bagging(X, y, n_estimators=100, bootstrap=True, seed=0, max_depth=None,
                min_samples_split=2, min_samples_leaf=1, n_jobs=1):
    """Bagged CART trees: a forest that considers every feature at each node."""
    return fit_forest(X, y, n_estimators=n_estimators, max_features=None, bootstrap=bootstrap,
                      seed=seed, max_depth=max_depth, min_samples_split=min_samples_split,
                      min_samples_leaf=min_samples_leaf, n_jobs=n_jobs)
