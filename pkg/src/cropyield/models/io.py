"""JSON model files.

Layout::

    {"format_version": 1, "kind": ..., "hyperparameters": {...}, "seed": ...,
     "feature_names": [...], "encodings": {"area": [...], "item": [...]},
     "payload": {...}, "checksum": "<sha256 of the canonical body>"}

Trees are flat node arrays (root at index 0, ``feature_index == -1`` marks a
leaf) stored column-wise under ``feature_index``, ``threshold``, ``left``,
``right`` and ``value``. Floats are written with ``repr`` so they load back
bit-identically.
"""
import hashlib
import json
from pathlib import Path

import numpy as np

FORMAT_VERSION = 1


class ModelFormatError(ValueError):
    pass


def _canonical(body):
    return json.dumps(body, sort_keys=True, separators=(",", ":"), allow_nan=False)


def _checksum(body):
    return hashlib.sha256(_canonical(body).encode("utf-8")).hexdigest()


def tree_to_dict(tree):
    return {
        "feature_index": tree.feature.tolist(),
        "threshold": tree.threshold.tolist(),
        "left": tree.left.tolist(),
        "right": tree.right.tolist(),
        "value": tree.value.tolist(),
    }


def tree_from_dict(d, n_features):
    from .tree import Tree

    try:
        feature = np.array(d["feature_index"], dtype=np.int64)
        threshold = np.array(d["threshold"], dtype=np.float64)
        left = np.array(d["left"], dtype=np.int64)
        right = np.array(d["right"], dtype=np.int64)
        value = np.array(d["value"], dtype=np.float64)
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"malformed tree: {exc}") from None
    n = feature.size
    if n == 0 or any(a.shape != (n,) for a in (threshold, left, right, value)):
        raise ModelFormatError("malformed tree: node arrays are empty or of unequal length")
    internal = feature != -1
    if np.any(feature[internal] < 0) or np.any(feature[internal] >= n_features):
        raise ModelFormatError("malformed tree: feature index out of range")
    # children must come after their parent, which also rules out cycles
    idx = np.arange(n)
    for child in (left, right):
        if np.any(child[internal] <= idx[internal]) or np.any(child[internal] >= n):
            raise ModelFormatError("malformed tree: bad child index")
        if np.any(child[~internal] != -1):
            raise ModelFormatError("malformed tree: leaf with children")
    return Tree(feature, threshold, left, right, value)


def _payload(model):
    from . import BoostedModel, EnsembleModel, KNNModel, LinearModel, Tree

    s = model.state
    if isinstance(s, LinearModel):
        return {"weights": s.weights.tolist(), "rank": s.rank}
    if isinstance(s, Tree):
        return {"tree": tree_to_dict(s)}
    if isinstance(s, EnsembleModel):
        return {"trees": [tree_to_dict(t) for t in s.trees]}
    if isinstance(s, BoostedModel):
        return {"base_score": s.base_score, "learning_rate": s.learning_rate,
                "trees": [tree_to_dict(t) for t in s.trees]}
    if isinstance(s, KNNModel):
        return {"X": s.X.tolist(), "y": s.y.tolist(), "k": s.k,
                "mean": None if s.mean is None else s.mean.tolist(),
                "std": None if s.std is None else s.std.tolist()}
    raise TypeError(f"cannot serialise {type(s).__name__}")


def _state(kind, payload, n_features):
    from . import BoostedModel, EnsembleModel, KNNModel, LinearModel

    if kind == "linear":
        w = np.array(payload["weights"], dtype=np.float64)
        if w.shape != (n_features + 1,):
            raise ModelFormatError("malformed linear weights")
        return LinearModel(w, int(payload.get("rank", -1)))
    if kind == "tree":
        return tree_from_dict(payload["tree"], n_features)
    if kind in ("forest", "bagging"):
        trees = tuple(tree_from_dict(t, n_features) for t in payload["trees"])
        if not trees:
            raise ModelFormatError("ensemble has no trees")
        return EnsembleModel(trees)
    if kind in ("gbm", "xgb"):
        return BoostedModel(float(payload["base_score"]),
                            tuple(tree_from_dict(t, n_features) for t in payload["trees"]),
                            float(payload["learning_rate"]))
    if kind == "knn":
        X = np.array(payload["X"], dtype=np.float64).reshape(-1, n_features)
        y = np.array(payload["y"], dtype=np.float64)
        k = int(payload["k"])
        if y.shape != (X.shape[0],) or not 1 <= k <= y.size:
            raise ModelFormatError("malformed knn payload")
        mean = None if payload["mean"] is None else np.array(payload["mean"], dtype=np.float64)
        std = None if payload["std"] is None else np.array(payload["std"], dtype=np.float64)
        return KNNModel(X, y, k, mean, std)
    raise ModelFormatError(f"unknown model kind {kind!r}")


def model_to_dict(model):
    body = {
        "format_version": FORMAT_VERSION,
        "kind": model.kind,
        "hyperparameters": model.spec.hyperparameters,
        "seed": model.spec.seed,
        "feature_names": list(model.feature_names),
        "encodings": {"area": list(model.area_categories), "item": list(model.item_categories)},
        "payload": _payload(model),
    }
    body["checksum"] = _checksum(body)
    return body


def save_model(model, path):
    path = Path(path)
    text = _canonical(model_to_dict(model))
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    tmp.replace(path)


def model_from_dict(body):
    from . import ModelSpec, TrainedModel

    if not isinstance(body, dict):
        raise ModelFormatError("model file must hold a JSON object")
    version = body.get("format_version")
    if version != FORMAT_VERSION:
        raise ModelFormatError(f"unsupported format_version {version!r} (expected {FORMAT_VERSION})")
    expected = body.get("checksum")
    content = {k: v for k, v in body.items() if k != "checksum"}
    if expected != _checksum(content):
        raise ModelFormatError("checksum mismatch")
    try:
        names = tuple(body["feature_names"])
        spec = ModelSpec(body["kind"], dict(body["hyperparameters"]), int(body["seed"]))
        state = _state(spec.kind, body["payload"], len(names))
        enc = body["encodings"]
        return TrainedModel(spec, state, names, tuple(enc["area"]), tuple(enc["item"]))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ModelFormatError):
            raise
        raise ModelFormatError(f"malformed model file: {exc}") from None


def load_model(path):
    try:
        body = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"malformed model file: {exc}") from None
    return model_from_dict(body)
