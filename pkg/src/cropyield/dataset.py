"""Loading, cleaning, encoding and splitting of the crop-yield CSV."""
import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _rng

logger = logging.getLogger(__name__)

# CSV header name -> RawRecord attribute
SCHEMA = {
    "Area": "area",
    "Item": "item",
    "Year": "year",
    "hg/ha_yield": "yield_hg_ha",
    "average_rain_fall_mm_per_year": "rainfall_mm",
    "pesticides_tonnes": "pesticides_tonnes",
    "avg_temp": "avg_temp_c",
}
FEATURE_NAMES = ("area_code", "item_code", "year", "rainfall_mm", "pesticides_tonnes", "avg_temp_c")
NUMERIC_FIELDS = ("yield_hg_ha", "rainfall_mm", "pesticides_tonnes", "avg_temp_c")
NON_NEGATIVE = ("yield_hg_ha", "rainfall_mm", "pesticides_tonnes")
DEFAULT_TRAIN_FRACTION = 0.8


class DataError(ValueError):
    """Input data is missing, malformed, or unusable."""


@dataclass(frozen=True)
class RawRecord:
    area: str
    item: str
    year: int
    yield_hg_ha: float
    rainfall_mm: float
    pesticides_tonnes: float
    avg_temp_c: float


@dataclass(frozen=True)
class Diagnostic:
    row: int
    field: str
    reason: str

    def __str__(self):
        return f"row={self.row} field={self.field} reason={self.reason}"


@dataclass(frozen=True)
class EncodingMap:
    categories: tuple

    @classmethod
    def build(cls, labels):
        return cls(tuple(sorted(set(labels), key=lambda s: s.encode("utf-8"))))

    @property
    def index_of(self):
        return {label: i for i, label in enumerate(self.categories)}

    def encode(self, labels):
        index = self.index_of
        unseen = sorted({lab for lab in labels if lab not in index})
        if unseen:
            raise DataError(f"unseen labels: {', '.join(unseen)}")
        return np.array([index[lab] for lab in labels], dtype=np.float64)

    def decode(self, codes):
        return [self.categories[int(c)] for c in codes]

    def __len__(self):
        return len(self.categories)


@dataclass(frozen=True, eq=False)
class Dataset:
    X: np.ndarray
    y: np.ndarray
    area_map: EncodingMap
    item_map: EncodingMap
    dropped_rows: int = 0
    feature_names: tuple = FEATURE_NAMES

    def __post_init__(self):
        if self.X.ndim != 2 or self.X.shape[1] != len(self.feature_names):
            raise DataError(f"X must have {len(self.feature_names)} columns, got shape {self.X.shape}")
        if self.X.shape[0] != self.y.shape[0]:
            raise DataError("X and y row counts differ")
        if self.X.shape[0] < 1:
            raise DataError("empty dataset")
        if not (np.all(np.isfinite(self.X)) and np.all(np.isfinite(self.y))):
            raise DataError("non-finite values in dataset")
        self.X.setflags(write=False)
        self.y.setflags(write=False)

    def __len__(self):
        return self.X.shape[0]

    def take(self, indices):
        indices = np.asarray(indices, dtype=np.int64)
        return Dataset(self.X[indices].copy(), self.y[indices].copy(),
                       self.area_map, self.item_map, 0, self.feature_names)

    def records(self):
        areas = self.area_map.decode(self.X[:, 0])
        items = self.item_map.decode(self.X[:, 1])
        return [
            RawRecord(a, i, int(row[2]), float(t), float(row[3]), float(row[4]), float(row[5]))
            for a, i, row, t in zip(areas, items, self.X, self.y)
        ]


@dataclass(frozen=True)
class SplitResult:
    train: Dataset
    test: Dataset
    seed: int
    train_fraction: float
    train_indices: np.ndarray = field(repr=False)
    test_indices: np.ndarray = field(repr=False)


def _parse_year(text):
    try:
        return int(text)
    except ValueError:
        value = float(text)
        if not value.is_integer():
            raise
        return int(value)


def load_csv(path, schema=tuple(SCHEMA)):
    """Parse the CSV at ``path`` into records plus per-row diagnostics.

    Columns are matched by header name; rows with unparseable fields are left
    out of the returned records and reported in the diagnostics instead.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DataError(f"empty file: {path}")
        header = [h.strip() for h in header]
        missing = [name for name in schema if name not in header]
        if missing:
            raise DataError(f"header missing required columns: {', '.join(missing)}")
        extra = [h for h in header if h not in SCHEMA]
        if extra:
            logger.warning("ignoring extra columns: %s", ", ".join(repr(h) for h in extra))
        pos = {SCHEMA[name]: header.index(name) for name in SCHEMA}

        records, diagnostics = [], []
        for rowno, row in enumerate(reader, start=1):
            if not row:
                continue
            if len(row) < len(header):
                diagnostics.append(Diagnostic(rowno, "*", f"expected {len(header)} fields, got {len(row)}"))
                continue
            values = {"area": row[pos["area"]].strip(), "item": row[pos["item"]].strip()}
            ok = True
            try:
                values["year"] = _parse_year(row[pos["year"]].strip())
            except ValueError:
                diagnostics.append(Diagnostic(rowno, "year", "non-numeric year"))
                ok = False
            for name in NUMERIC_FIELDS:
                try:
                    values[name] = float(row[pos[name]])
                except ValueError:
                    diagnostics.append(Diagnostic(rowno, name, f"non-numeric {name}"))
                    ok = False
            if ok:
                records.append(RawRecord(**values))
    return records, diagnostics


def write_csv(ds, path):
    """Write ``ds`` back out with the original header; floats use repr so they round-trip."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(list(SCHEMA))
        for r in ds.records():
            writer.writerow([r.area, r.item, r.year, repr(r.yield_hg_ha), repr(r.rainfall_mm),
                             repr(r.pesticides_tonnes), repr(r.avg_temp_c)])


def _valid(r):
    if not (r.area and r.item) or not 1900 <= r.year <= 2100:
        return False
    if not all(math.isfinite(getattr(r, name)) for name in NUMERIC_FIELDS):
        return False
    return all(getattr(r, name) >= 0 for name in NON_NEGATIVE)


def clean(records):
    """Drop invalid records, keeping order. Returns ``(kept, dropped_count)``."""
    kept = [r for r in records if _valid(r)]
    if not kept:
        raise DataError("empty dataset after cleaning")
    return kept, len(records) - len(kept)


def encode(records, dropped_rows=0):
    if not records:
        raise DataError("cannot encode an empty record list")
    area_map = EncodingMap.build(r.area for r in records)
    item_map = EncodingMap.build(r.item for r in records)
    X = np.column_stack([
        area_map.encode([r.area for r in records]),
        item_map.encode([r.item for r in records]),
        np.array([r.year for r in records], dtype=np.float64),
        np.array([r.rainfall_mm for r in records], dtype=np.float64),
        np.array([r.pesticides_tonnes for r in records], dtype=np.float64),
        np.array([r.avg_temp_c for r in records], dtype=np.float64),
    ])
    y = np.array([r.yield_hg_ha for r in records], dtype=np.float64)
    return Dataset(X, y, area_map, item_map, dropped_rows)


def load_dataset(path):
    """load_csv + clean + encode. Parse diagnostics are logged, and counted as dropped."""
    records, diagnostics = load_csv(path)
    for d in diagnostics:
        logger.info("%s", d)
    kept, dropped = clean(records)
    return encode(kept, dropped + len(diagnostics))


def split(ds, train_fraction=DEFAULT_TRAIN_FRACTION, seed=42):
    if not 0 < train_fraction < 1:
        raise ValueError(f"train_fraction must be in (0, 1), got {train_fraction}")
    n = len(ds)
    n_train = math.floor(train_fraction * n)
    if n_train < 1 or n - n_train < 1:
        raise DataError(f"split of {n} rows at {train_fraction} leaves an empty side")
    perm = _rng.permutation(n, np.uint64(_rng.derive(seed, "split")))
    train_idx, test_idx = perm[:n_train], perm[n_train:]
    return SplitResult(ds.take(train_idx), ds.take(test_idx), seed, train_fraction,
                       train_idx, test_idx)


def feature_column(ds, name):
    if name == "yield":
        return ds.y
    try:
        return ds.X[:, ds.feature_names.index(name)]
    except ValueError:
        raise KeyError(f"unknown column: {name!r}") from None
