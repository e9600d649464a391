"""The seven regressors behind one ``fit(spec, train)`` / ``predict`` contract."""
import math
from dataclasses import dataclass, field

import numpy as np

from ..dataset import FEATURE_NAMES
from .boosting import BoostedModel, fit_gbm, fit_xgb
from .ensemble import EnsembleModel, fit_bagging, fit_forest
from .knn import KNNModel, fit_knn
from .linear import LinearModel, fit_linear
from .tree import Tree, fit_tree, grow

# report order follows the comparison table
KINDS = ("linear", "forest", "gbm", "xgb", "knn", "tree", "bagging")

DISPLAY_NAMES = {
    "linear": "Linear Regression",
    "forest": "Random Forest",
    "gbm": "Gradient Boost",
    "xgb": "XGBoost",
    "knn": "KNN",
    "tree": "Decision Tree",
    "bagging": "Bagging Regressor",
}

_TREE = {"max_depth": None, "min_samples_split": 2, "min_samples_leaf": 1}

DEFAULTS = {
    "linear": {},
    "tree": dict(_TREE),
    "forest": {"n_estimators": 100, "bootstrap": True, "max_features": 6, **_TREE},
    "bagging": {"n_estimators": 100, "bootstrap": True, **_TREE},
    "gbm": {"n_estimators": 100, "learning_rate": 0.1, **_TREE, "max_depth": 3},
    "xgb": {"n_estimators": 100, "learning_rate": 0.3, "lambda": 1.0, "gamma": 0.0,
            **_TREE, "max_depth": 6},
    "knn": {"k": 5, "scale": False},
}


class ModelError(ValueError):
    """Invalid model specification or incompatible input."""


def _check_range(kind, hp):
    def need(cond, msg):
        if not cond:
            raise ModelError(f"{kind}: {msg}")

    for key, value in hp.items():
        if key in ("bootstrap", "scale"):
            need(isinstance(value, bool), f"{key} must be true/false")
        elif key in ("learning_rate", "lambda", "gamma"):
            need(isinstance(value, (int, float)) and not isinstance(value, bool)
                 and math.isfinite(value), f"{key} must be a finite number")
        elif key == "max_depth":
            need(value is None or (isinstance(value, int) and not isinstance(value, bool)),
                 "max_depth must be an integer or none")
        else:
            need(isinstance(value, int) and not isinstance(value, bool),
                 f"{key} must be an integer")
    if "k" in hp:
        need(hp["k"] >= 1, "k must be ≥ 1")
    if "n_estimators" in hp:
        low = 0 if kind in ("gbm", "xgb") else 1
        need(hp["n_estimators"] >= low, f"n_estimators must be ≥ {low}")
    if "learning_rate" in hp:
        need(hp["learning_rate"] > 0, "learning_rate must be > 0")
    for key in ("lambda", "gamma"):
        if key in hp:
            need(hp[key] >= 0, f"{key} must be ≥ 0")
    if hp.get("max_depth") is not None:
        need(hp["max_depth"] >= 1, "max_depth must be ≥ 1 or none")
    if "min_samples_split" in hp:
        need(hp["min_samples_split"] >= 2, "min_samples_split must be ≥ 2")
    if "min_samples_leaf" in hp:
        need(hp["min_samples_leaf"] >= 1, "min_samples_leaf must be ≥ 1")
    if "max_features" in hp:
        need(1 <= hp["max_features"] <= len(FEATURE_NAMES),
             f"max_features must be in [1, {len(FEATURE_NAMES)}]")


@dataclass(frozen=True)
class ModelSpec:
    kind: str
    hyperparameters: dict = field(default_factory=dict)
    seed: int = 42

    def __post_init__(self):
        if self.kind not in DEFAULTS:
            raise ModelError(f"unknown model kind {self.kind!r}; expected one of {', '.join(KINDS)}")
        unknown = sorted(set(self.hyperparameters) - set(DEFAULTS[self.kind]))
        if unknown:
            raise ModelError(f"{self.kind}: unknown hyperparameters: {', '.join(unknown)}")
        hp = {**DEFAULTS[self.kind], **self.hyperparameters}
        for key in ("learning_rate", "lambda", "gamma"):
            if isinstance(hp.get(key), int) and not isinstance(hp[key], bool):
                hp[key] = float(hp[key])
        _check_range(self.kind, hp)
        object.__setattr__(self, "hyperparameters", hp)

    @property
    def name(self):
        return DISPLAY_NAMES[self.kind]


@dataclass(frozen=True, eq=False)
class TrainedModel:
    spec: ModelSpec
    state: object
    feature_names: tuple = FEATURE_NAMES
    area_categories: tuple = ()
    item_categories: tuple = ()

    @property
    def kind(self):
        return self.spec.kind

    def predict(self, X):
        return predict(self, X)


def fit(spec, train, n_jobs=1):
    """Fit ``spec`` on a :class:`~cropyield.dataset.Dataset`. Deterministic for fixed inputs."""
    X, y = train.X, train.y
    if len(y) < 1:
        raise ModelError("training set is empty")
    hp = spec.hyperparameters
    tree_hp = {k: hp[k] for k in _TREE if k in hp}
    kind = spec.kind
    if kind == "linear":
        state = fit_linear(X, y)
    elif kind == "tree":
        state = fit_tree(X, y, **tree_hp)
    elif kind == "forest":
        state = fit_forest(X, y, n_estimators=hp["n_estimators"], max_features=hp["max_features"],
                           bootstrap=hp["bootstrap"], seed=spec.seed, n_jobs=n_jobs, **tree_hp)
    elif kind == "bagging":
        state = fit_bagging(X, y, n_estimators=hp["n_estimators"], bootstrap=hp["bootstrap"],
                            seed=spec.seed, n_jobs=n_jobs, **tree_hp)
    elif kind == "gbm":
        state = fit_gbm(X, y, n_estimators=hp["n_estimators"], learning_rate=hp["learning_rate"],
                        **tree_hp)
    elif kind == "xgb":
        state = fit_xgb(X, y, n_estimators=hp["n_estimators"], learning_rate=hp["learning_rate"],
                        reg_lambda=hp["lambda"], gamma=hp["gamma"], **tree_hp)
    else:
        if hp["k"] > len(y):
            raise ModelError(f"knn: k={hp['k']} exceeds the {len(y)} training rows")
        state = fit_knn(X, y, k=hp["k"], scale=hp["scale"])
    return TrainedModel(spec, state, tuple(train.feature_names),
                        train.area_map.categories, train.item_map.categories)


def predict(model, X):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1 and X.size == 0:
        X = X.reshape(0, len(model.feature_names))
    if X.ndim != 2 or X.shape[1] != len(model.feature_names):
        raise ModelError(f"expected {len(model.feature_names)} feature columns, got shape {X.shape}")
    if X.shape[0] == 0:
        return np.empty(0)
    return model.state.predict(X)


from .io import load_model, save_model  # noqa: E402

__all__ = [
    "KINDS", "DISPLAY_NAMES", "DEFAULTS", "ModelSpec", "ModelError", "TrainedModel",
    "fit", "predict", "save_model", "load_model",
    "Tree", "LinearModel", "EnsembleModel", "BoostedModel", "KNNModel",
    "fit_tree", "fit_forest", "fit_bagging", "fit_gbm", "fit_xgb", "fit_knn", "fit_linear", "grow",
]
