"""Regression trees stored as flat node arrays.

A single numba kernel grows both plain CART trees (variance reduction) and the
regularised second-order trees used by the XGB-style booster. With squared loss
the hessian is 1 per row, so both criteria reduce to maximising

    S_L^2 / (n_L + lam) + S_R^2 / (n_R + lam)

over candidate splits, where S is the sum of targets (residuals) in a child.
``lam = 0`` is exactly CART's SSE minimisation.
"""
from dataclasses import dataclass

import numpy as np
from numba import njit

from .. import _rng

LEAF = -1
_NODE_TAG = np.uint64(_rng.tag_hash("node"))


@dataclass(frozen=True, eq=False)
class Tree:
    """Flat binary tree. Node 0 is the root; leaves have ``feature == -1``.

    Rows go left when ``x[feature] <= threshold``.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    def __post_init__(self):
        for arr in (self.feature, self.threshold, self.left, self.right, self.value):
            arr.setflags(write=False)

    @property
    def node_count(self):
        return self.feature.size

    @property
    def leaf_count(self):
        return int(np.count_nonzero(self.feature == LEAF))

    def depth(self):
        depths = np.zeros(self.node_count, dtype=np.int64)
        for node in range(self.node_count):
            if self.feature[node] != LEAF:
                depths[self.left[node]] = depths[self.right[node]] = depths[node] + 1
        return int(depths.max())

    def predict(self, X):
        X = np.ascontiguousarray(X, dtype=np.float64)
        return _predict(self.feature, self.threshold, self.left, self.right, self.value, X)

    def apply(self, X):
        """Leaf index reached by each row."""
        X = np.ascontiguousarray(X, dtype=np.float64)
        return _apply(self.feature, self.threshold, self.left, self.right, X)

    def same_as(self, other):
        return all(np.array_equal(a, b) for a, b in zip(
            (self.feature, self.threshold, self.left, self.right, self.value),
            (other.feature, other.threshold, other.left, other.right, other.value)))


@njit(cache=True, nogil=True)
def _apply(feature, threshold, left, right, X):
    out = np.empty(X.shape[0], dtype=np.int64)
    for r in range(X.shape[0]):
        node = 0
        while feature[node] != -1:
            if X[r, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[r] = node
    return out


@njit(cache=True, nogil=True)
def _predict(feature, threshold, left, right, value, X):
    leaves = _apply(feature, threshold, left, right, X)
    out = np.empty(X.shape[0])
    for r in range(X.shape[0]):
        out[r] = value[leaves[r]]
    return out


@njit(cache=True, nogil=True)
def _grow(X, target, samples, max_depth, min_samples_split, min_samples_leaf,
          lam, gamma, boosted, max_features, feat_seed):
    m = samples.size
    p = X.shape[1]

    # one stably sorted copy of the sample list per feature; children keep
    # contiguous segments of it after each stable partition
    order = np.empty((p, m), dtype=np.int64)
    col = np.empty(m)
    for f in range(p):
        for k in range(m):
            col[k] = X[samples[k], f]
        srt = np.argsort(col, kind="mergesort")
        for k in range(m):
            order[f, k] = samples[srt[k]]

    cap = 2 * m + 1
    feature = np.full(cap, -1, dtype=np.int64)
    threshold = np.zeros(cap)
    left = np.full(cap, -1, dtype=np.int64)
    right = np.full(cap, -1, dtype=np.int64)
    value = np.zeros(cap)

    go_left = np.zeros(X.shape[0], dtype=np.bool_)
    buf = np.empty(m, dtype=np.int64)
    feats = np.arange(p)

    st_node = np.empty(cap, dtype=np.int64)
    st_start = np.empty(cap, dtype=np.int64)
    st_end = np.empty(cap, dtype=np.int64)
    st_depth = np.empty(cap, dtype=np.int64)
    st_node[0], st_start[0], st_end[0], st_depth[0] = 0, 0, m, 0
    top = 1
    n_nodes = 1

    while top > 0:
        top -= 1
        node, start, end, depth = st_node[top], st_start[top], st_end[top], st_depth[top]
        n = end - start

        s = 0.0
        tmin = np.inf
        tmax = -np.inf
        for k in range(start, end):
            t = target[order[0, k]]
            s += t
            tmin = min(tmin, t)
            tmax = max(tmax, t)
        value[node] = s / (n + lam)

        if n < min_samples_split or (max_depth >= 0 and depth >= max_depth) or tmin == tmax:
            continue

        n_feats = p
        if max_features < p:
            rs = _rng.seed_state(_rng.child_seed(feat_seed, _NODE_TAG, node))
            for f in range(p):
                feats[f] = f
            for f in range(max_features):
                j = f + _rng.below(rs, p - f)
                tmp = feats[f]
                feats[f] = feats[j]
                feats[j] = tmp
            feats[:max_features].sort()
            n_feats = max_features

        best_score = -np.inf
        best_f = -1
        best_thr = 0.0
        for fi in range(n_feats):
            f = feats[fi]
            sl = 0.0
            for k in range(start, end - 1):
                i = order[f, k]
                sl += target[i]
                nl = k - start + 1
                if nl < min_samples_leaf:
                    continue
                nr = n - nl
                if nr < min_samples_leaf:
                    break
                xa = X[i, f]
                xb = X[order[f, k + 1], f]
                if xa == xb:
                    continue
                sr = s - sl
                score = sl * sl / (nl + lam) + sr * sr / (nr + lam)
                if score > best_score:
                    best_score = score
                    best_f = f
                    thr = (xa + xb) / 2.0
                    if thr >= xb:
                        thr = xa
                    best_thr = thr

        if best_f < 0:
            continue
        if boosted:
            gain = 0.5 * (best_score - s * s / (n + lam)) - gamma
            if not gain > 0.0:
                continue

        for k in range(start, end):
            i = order[best_f, k]
            go_left[i] = X[i, best_f] <= best_thr
        mid = start
        for f in range(p):
            a = start
            b = 0
            for k in range(start, end):
                i = order[f, k]
                if go_left[i]:
                    order[f, a] = i
                    a += 1
                else:
                    buf[b] = i
                    b += 1
            for k in range(b):
                order[f, a + k] = buf[k]
            mid = a

        lid = n_nodes
        rid = n_nodes + 1
        n_nodes += 2
        feature[node] = best_f
        threshold[node] = best_thr
        left[node] = lid
        right[node] = rid
        # right pushed first so the left subtree is numbered first
        st_node[top], st_start[top], st_end[top], st_depth[top] = rid, mid, end, depth + 1
        top += 1
        st_node[top], st_start[top], st_end[top], st_depth[top] = lid, start, mid, depth + 1
        top += 1

    return (feature[:n_nodes].copy(), threshold[:n_nodes].copy(), left[:n_nodes].copy(),
            right[:n_nodes].copy(), value[:n_nodes].copy())


def grow(X, target, samples=None, *, max_depth=None, min_samples_split=2, min_samples_leaf=1,
         reg_lambda=0.0, gamma=0.0, boosted=False, max_features=None, seed=0):
    """Grow one tree on ``X[samples]`` against ``target[samples]``.

    ``samples`` may repeat indices (bootstrap draws). With ``boosted`` a split is
    kept only if its regularised gain is positive and leaves take
    ``sum / (count + reg_lambda)``; otherwise leaves are sample means.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    target = np.ascontiguousarray(target, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] != target.shape[0]:
        raise ValueError("X must be 2-D with one row per target")
    if X.shape[0] < 1:
        raise ValueError("cannot grow a tree on zero rows")
    samples = np.arange(X.shape[0]) if samples is None else np.asarray(samples, dtype=np.int64)
    p = X.shape[1]
    max_features = p if max_features is None else int(max_features)
    if not 1 <= max_features <= p:
        raise ValueError(f"max_features must be in [1, {p}], got {max_features}")
    check_tree_params(max_depth, min_samples_split, min_samples_leaf)
    arrays = _grow(X, target, samples,
                   -1 if max_depth is None else int(max_depth),
                   int(min_samples_split), int(min_samples_leaf),
                   float(reg_lambda), float(gamma), bool(boosted), max_features,
                   np.uint64(seed))
    return Tree(*arrays)


def check_tree_params(max_depth, min_samples_split, min_samples_leaf):
    if max_depth is not None and max_depth < 1:
        raise ValueError(f"max_depth must be >= 1 or unlimited, got {max_depth}")
    if min_samples_split < 2:
        raise ValueError(f"min_samples_split must be >= 2, got {min_samples_split}")
    if min_samples_leaf < 1:
        raise ValueError(f"min_samples_leaf must be >= 1, got {min_samples_leaf}")


def fit_tree(X, y, max_depth=None, min_samples_split=2, min_samples_leaf=1):
    """CART regression tree minimising SSE_left + SSE_right at every node."""
    return grow(X, y, max_depth=max_depth, min_samples_split=min_samples_split,
                min_samples_leaf=min_samples_leaf)
