"""Regression metrics for the model comparison table.

``accuracy`` in a report is an alias of R^2; MAPE is a ratio, not a percent.
"""
import logging
import math
from dataclasses import dataclass, asdict

import numpy as np

logger = logging.getLogger(__name__)

MAPE_ZERO_TOL = 1e-12


@dataclass(frozen=True)
class MetricsReport:
    model_name: str
    accuracy: float
    mae: float
    mape: float
    r2: float
    mse: float
    n_eval: int
    mape_excluded: int

    def as_dict(self):
        return asdict(self)


def _pair(y, yhat, min_len=1):
    y = np.asarray(y, dtype=np.float64).ravel()
    yhat = np.asarray(yhat, dtype=np.float64).ravel()
    if y.shape != yhat.shape:
        raise ValueError(f"length mismatch: {y.size} targets vs {yhat.size} predictions")
    if y.size < min_len:
        raise ValueError(f"need at least {min_len} values, got {y.size}")
    return y, yhat


def mae(y, yhat):
    y, yhat = _pair(y, yhat)
    return float(np.mean(np.abs(y - yhat)))


def mse(y, yhat):
    y, yhat = _pair(y, yhat)
    d = y - yhat
    return float(np.mean(d * d))


def rmse(y, yhat):
    return math.sqrt(mse(y, yhat))


def mape(y, yhat):
    """Mean of ``|y - yhat| / |y|`` over rows with nonzero target.

    Returns ``(value, excluded)`` where ``excluded`` counts the zero-target rows.
    """
    y, yhat = _pair(y, yhat)
    keep = np.abs(y) >= MAPE_ZERO_TOL
    if not keep.any():
        raise ValueError("every target is zero; MAPE undefined")
    value = float(np.mean(np.abs(y[keep] - yhat[keep]) / np.abs(y[keep])))
    return value, int(y.size - keep.sum())


def r2(y, yhat):
    y, yhat = _pair(y, yhat, min_len=2)
    d = y - yhat
    ss_res = float(np.dot(d, d))
    c = y - y.mean()
    ss_tot = float(np.dot(c, c))
    if ss_tot == 0:
        logger.warning("r2 undefined for constant target; returning NaN")
        return float("nan")
    return 1.0 - ss_res / ss_tot


def evaluate(model_name, y, yhat):
    score = r2(y, yhat)
    mape_value, excluded = mape(y, yhat)
    return MetricsReport(model_name, score, mae(y, yhat), mape_value, score, mse(y, yhat),
                         int(np.size(y)), excluded)
