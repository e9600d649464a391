"""Descriptive statistics: correlation matrix, grouped aggregates, boxplot summaries."""
from dataclasses import dataclass

import numpy as np

from .dataset import DataError, feature_column

CORR_NAMES = ("area_code", "item_code", "year", "yield", "rainfall_mm", "pesticides_tonnes", "avg_temp_c")


@dataclass(frozen=True, eq=False)
class CorrelationMatrix:
    names: tuple
    values: np.ndarray

    def get(self, a, b):
        return float(self.values[self.names.index(a), self.names.index(b)])


@dataclass(frozen=True)
class GroupAggregate:
    key: str
    count: int
    mean: float
    std: float
    min: float
    max: float
    total: float


@dataclass(frozen=True)
class BoxplotStats:
    group: str
    min: float
    q1: float
    median: float
    q3: float
    max: float
    lower_whisker: float
    upper_whisker: float
    outlier_count: int


def pearson(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    da, db = a - a.mean(), b - b.mean()
    saa, sbb = np.dot(da, da), np.dot(db, db)
    if saa == 0 or sbb == 0:
        return float("nan")
    denom = np.sqrt(saa * sbb)
    if denom == 0 or not np.isfinite(denom):
        # product under/overflowed; the split form is slightly less exact
        denom = np.sqrt(saa) * np.sqrt(sbb)
    r = np.dot(da, db) / denom
    return float(min(1.0, max(-1.0, r)))


def correlation_matrix(ds):
    if len(ds) < 2:
        raise DataError("correlation needs at least 2 rows (fewer than 2 rows given)")
    cols = [feature_column(ds, name) for name in CORR_NAMES]
    k = len(cols)
    values = np.empty((k, k))
    for i in range(k):
        values[i, i] = 1.0
        for j in range(i + 1, k):
            values[i, j] = values[j, i] = pearson(cols[i], cols[j])
    return CorrelationMatrix(CORR_NAMES, values)


def quantile(sorted_values, p):
    """Linear interpolation at 0-indexed position ``p * (n - 1)`` of already sorted data."""
    n = len(sorted_values)
    pos = p * (n - 1)
    lo = int(np.floor(pos))
    hi = min(lo + 1, n - 1)
    frac = pos - lo
    return float(sorted_values[lo] + (sorted_values[hi] - sorted_values[lo]) * frac)


def _aggregate(key, values):
    values = np.asarray(values, dtype=np.float64)
    return GroupAggregate(key, int(values.size), float(values.mean()), float(values.std()),
                          float(values.min()), float(values.max()), float(values.sum()))


def _groups(ds, group_by):
    if group_by == "item":
        codes, labels = ds.X[:, 1], ds.item_map.categories
    elif group_by == "area":
        codes, labels = ds.X[:, 0], ds.area_map.categories
    else:
        raise ValueError(f"group_by must be 'item' or 'area', got {group_by!r}")
    for code, label in enumerate(labels):
        mask = codes == code
        if mask.any():
            yield label, mask


def group_aggregate(ds, group_by, column):
    values = feature_column(ds, column)
    return [_aggregate(label, values[mask]) for label, mask in _groups(ds, group_by)]


def summarize_box(group, values):
    v = np.sort(np.asarray(values, dtype=np.float64))
    q1, med, q3 = quantile(v, 0.25), quantile(v, 0.5), quantile(v, 0.75)
    iqr = q3 - q1
    lo_fence, hi_fence = q1 - 1.5 * iqr, q3 + 1.5 * iqr
    inside = v[(v >= lo_fence) & (v <= hi_fence)]
    # interpolated quartiles can sit outside every inlier (e.g. [0, 100, 100, 100]);
    # clamp so the whiskers never cross the box
    lower = min(float(inside[0]), q1) if inside.size else q1
    upper = max(float(inside[-1]), q3) if inside.size else q3
    return BoxplotStats(group, float(v[0]), q1, med, q3, float(v[-1]), lower, upper,
                        int(v.size - inside.size))


def boxplot_stats(ds, group_by="item"):
    return [summarize_box(label, ds.y[mask]) for label, mask in _groups(ds, group_by)]


def describe(ds):
    """Per-column mean/std/min/max/quartiles for the 7 numeric columns."""
    out = {}
    for name in CORR_NAMES:
        col = feature_column(ds, name)
        agg = _aggregate(name, col)
        v = np.sort(col)
        out[name] = {
            "count": agg.count, "mean": agg.mean, "std": agg.std, "min": agg.min,
            "q1": quantile(v, 0.25), "median": quantile(v, 0.5), "q3": quantile(v, 0.75),
            "max": agg.max,
        }
    return out
