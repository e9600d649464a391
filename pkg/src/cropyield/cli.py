"""Command-line harness.

Subcommands: describe, compare, train, predict, export-predictions, boxplot-data.
Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
"""
import argparse
import csv
import hashlib
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import dataset as dsmod
from . import metrics, stats
from .dataset import DataError
from .models import DISPLAY_NAMES, KINDS, ModelError, ModelSpec, fit, load_model, save_model
from .models.io import ModelFormatError

logger = logging.getLogger("cropyield")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3
REPORT_COLUMNS = ("Model", "Accuracy", "MAE", "MAPE", "R2")
PREDICT_COLUMNS = ("Area", "Item", "Year", "average_rain_fall_mm_per_year", "pesticides_tonnes",
                   "avg_temp")


class UsageError(Exception):
    pass


class NumericError(Exception):
    pass


def fmt(x):
    """Shortest decimal that round-trips the float."""
    return repr(float(x))


@dataclass
class RunConfig:
    data_path: str = None
    train_fraction: float = dsmod.DEFAULT_TRAIN_FRACTION
    seed: int = 42
    models: list = field(default_factory=lambda: [ModelSpec(k) for k in KINDS])
    output_dir: str = "out"
    threads: int = 1
    emit: frozenset = frozenset({"report", "corr", "boxplot", "predictions"})
    report_train: bool = False


# ---------------------------------------------------------------- parsing

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _parse_value(text):
    low = text.strip().lower()
    if low in ("none", "null", "inf", "unlimited"):
        return None
    if low in ("true", "on", "yes"):
        return True
    if low in ("false", "off", "no"):
        return False
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        raise UsageError(f"cannot parse hyperparameter value {text!r}") from None


def parse_overrides(extra):
    """``--forest.n_estimators=50`` style tokens -> {kind: {param: value}}."""
    out = {}
    tokens = list(extra)
    while tokens:
        tok = tokens.pop(0)
        if not tok.startswith("--") or "." not in tok:
            raise UsageError(f"unrecognized argument: {tok}")
        key, sep, value = tok[2:].partition("=")
        if not sep:
            if not tokens:
                raise UsageError(f"missing value for {tok}")
            value = tokens.pop(0)
        kind, _, param = key.partition(".")
        if kind not in KINDS:
            raise UsageError(f"unknown model {kind!r} in {tok}")
        out.setdefault(kind, {})[param] = _parse_value(value)
    return out


def _build_parser():
    parser = _Parser(prog="cropyield", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def common(p, models=True):
        p.add_argument("--config", help="JSON file mirroring the run configuration")
        p.add_argument("--data", help="crop-yield CSV")
        p.add_argument("--out", help="output directory (default: out)")
        if models:
            p.add_argument("--seed", type=int)
            p.add_argument("--train-fraction", type=float)
            p.add_argument("--threads", type=int)
            p.add_argument("--scale-knn", action="store_true", default=None)
        return p

    common(sub.add_parser("describe", help="correlation matrix and descriptive summary"), models=False)
    common(sub.add_parser("boxplot-data", help="per-item yield boxplot statistics"), models=False)
    p = common(sub.add_parser("compare", help="fit every model on one split and tabulate metrics"))
    p.add_argument("--models", help="comma-separated model kinds (default: all)")
    p.add_argument("--report-train", action="store_true", default=None)
    p = common(sub.add_parser("train", help="fit one model and save it"))
    p.add_argument("--model", required=True, choices=KINDS)
    p.add_argument("--full", action="store_true", help="train on every row")
    p.add_argument("--model-out", help="model file path (default: <out>/model_<kind>.json)")
    p = common(sub.add_parser("export-predictions", help="predicted-vs-actual data on the test split"))
    p.add_argument("--model", default="bagging", choices=KINDS)
    p = sub.add_parser("predict", help="apply a saved model to a CSV")
    p.add_argument("--model-file", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--output", help="output CSV (default: stdout)")
    return parser


def load_config(args, extra):
    """Merge defaults <- config file <- command-line flags."""
    cfg = RunConfig()
    file_values = {}
    if getattr(args, "config", None):
        try:
            file_values = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None

    def pick(flag, key, default):
        value = getattr(args, flag, None)
        if value is not None:
            return value
        return file_values.get(key, default)

    cfg.data_path = pick("data", "data_path", None)
    cfg.seed = int(pick("seed", "seed", cfg.seed))
    cfg.train_fraction = float(pick("train_fraction", "train_fraction", cfg.train_fraction))
    cfg.output_dir = pick("out", "output_dir", cfg.output_dir)
    cfg.threads = int(pick("threads", "threads", cfg.threads))
    cfg.report_train = bool(pick("report_train", "report_train", False))
    if "emit" in file_values:
        cfg.emit = frozenset(file_values["emit"])
    scale_knn = pick("scale_knn", "scale_knn", None)

    # models: list of kinds or {"kind", "hyperparameters"} objects in the file
    entries = file_values.get("models", list(KINDS))
    if getattr(args, "models", None):
        entries = [m.strip() for m in args.models.split(",") if m.strip()]
    file_hp = {}
    kinds = []
    for entry in entries:
        if isinstance(entry, dict):
            kinds.append(entry["kind"])
            file_hp[entry["kind"]] = dict(entry.get("hyperparameters", {}))
        else:
            kinds.append(entry)
    if getattr(args, "model", None):
        kinds = [args.model]
    if not kinds:
        raise UsageError("at least one model is required")
    bad = [k for k in kinds if k not in KINDS]
    if bad:
        raise UsageError(f"unknown model kinds: {', '.join(bad)}; choose from {', '.join(KINDS)}")
    overrides = parse_overrides(extra)
    specs = []
    for kind in kinds:
        hp = {**file_hp.get(kind, {}), **overrides.get(kind, {})}
        if kind == "knn" and scale_knn is not None:
            hp.setdefault("scale", bool(scale_knn))
        specs.append(ModelSpec(kind, hp, cfg.seed))
    cfg.models = specs
    if cfg.threads < 1:
        raise UsageError("--threads must be ≥ 1")
    return cfg


# ---------------------------------------------------------------- helpers

def _load(cfg):
    if not cfg.data_path:
        raise UsageError("--data is required")
    ds = dsmod.load_dataset(cfg.data_path)
    if ds.dropped_rows:
        logger.warning("dropped %d invalid rows", ds.dropped_rows)
    return ds


def file_hash(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def split_hash(split):
    h = hashlib.sha256()
    h.update(np.asarray(split.train_indices, dtype="<i8").tobytes())
    h.update(b"|")
    h.update(np.asarray(split.test_indices, dtype="<i8").tobytes())
    return h.hexdigest()


def _outdir(cfg):
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _fit_checked(spec, train, threads):
    try:
        model = fit(spec, train, n_jobs=threads)
    except ModelError:
        raise
    except (ValueError, FloatingPointError, np.linalg.LinAlgError) as exc:
        raise NumericError(f"{spec.name} failed: {exc}") from exc
    return model


def _predict_checked(model, X):
    pred = model.predict(X)
    if not np.all(np.isfinite(pred)):
        raise NumericError(f"{model.spec.name} produced non-finite predictions")
    return pred


def report_rows_csv(rows):
    lines = [",".join(REPORT_COLUMNS)]
    for r in rows:
        lines.append(",".join([r.model_name, fmt(r.accuracy), fmt(r.mae), fmt(r.mape), fmt(r.r2)]))
    return "\n".join(lines) + "\n"


def parse_report_csv(text):
    """Inverse of :func:`report_rows_csv`: list of dicts keyed by the column names."""
    reader = csv.DictReader(text.splitlines())
    return [{"Model": row["Model"], **{c: float(row[c]) for c in REPORT_COLUMNS[1:]}}
            for row in reader]


def _format_table(rows):
    head = f"{'Model':<20}{'Accuracy':>10}{'MAE':>12}{'MAPE':>10}{'R2':>10}"
    body = [f"{r.model_name:<20}{r.accuracy:>10.3f}{r.mae:>12.2f}{r.mape:>10.3f}{r.r2:>10.3f}"
            for r in rows]
    return "\n".join([head, *body])


# ---------------------------------------------------------------- commands

def cmd_describe(cfg):
    ds = _load(cfg)
    corr = stats.correlation_matrix(ds)
    out = _outdir(cfg)
    lines = ["," + ",".join(corr.names)]
    for name, row in zip(corr.names, corr.values):
        lines.append(name + "," + ",".join(fmt(v) for v in row))
    (out / "corr.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    summary = {
        "n_rows": len(ds),
        "dropped_rows": ds.dropped_rows,
        "columns": stats.describe(ds),
        "yield_by_item": [vars(a) for a in stats.group_aggregate(ds, "item", "yield")],
        "yield_by_area": [vars(a) for a in stats.group_aggregate(ds, "area", "yield")],
    }
    _write_json(out / "describe.json", summary)
    print(f"wrote {out / 'corr.csv'} and {out / 'describe.json'}")
    return corr


def cmd_compare(cfg):
    ds = _load(cfg)
    sp = dsmod.split(ds, cfg.train_fraction, cfg.seed)
    rows, train_rows = [], []
    for spec in cfg.models:
        logger.info("fitting %s", spec.name)
        model = _fit_checked(spec, sp.train, cfg.threads)
        rows.append(metrics.evaluate(spec.name, sp.test.y, _predict_checked(model, sp.test.X)))
        if cfg.report_train:
            train_rows.append(metrics.evaluate(spec.name, sp.train.y,
                                               _predict_checked(model, sp.train.X)))
    out = _outdir(cfg)
    (out / "report.csv").write_text(report_rows_csv(rows), encoding="utf-8")
    meta = {
        "seed": cfg.seed,
        "train_fraction": cfg.train_fraction,
        "n_train": len(sp.train),
        "n_test": len(sp.test),
        "dataset_hash": file_hash(cfg.data_path),
        "split_hash": split_hash(sp),
        "models": [{"kind": s.kind, "hyperparameters": s.hyperparameters} for s in cfg.models],
    }
    doc = {"metadata": meta, "rows": [r.as_dict() for r in rows]}
    if cfg.report_train:
        doc["train_rows"] = [r.as_dict() for r in train_rows]
    _write_json(out / "report.json", doc)
    print(_format_table(rows))
    if cfg.report_train:
        print("\n(training set)")
        print(_format_table(train_rows))
    return rows, meta


def cmd_train(cfg, full=False, model_out=None):
    ds = _load(cfg)
    spec = cfg.models[0]
    if full:
        train, test = ds, None
    else:
        sp = dsmod.split(ds, cfg.train_fraction, cfg.seed)
        train, test = sp.train, sp.test
    model = _fit_checked(spec, train, cfg.threads)
    path = Path(model_out) if model_out else _outdir(cfg) / f"model_{spec.kind}.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    save_model(model, path)
    tr = metrics.evaluate(spec.name, train.y, _predict_checked(model, train.X))
    print(f"{spec.name}: n_train={len(train)} train R2={tr.r2:.4f} MAE={tr.mae:.2f}")
    if test is not None:
        te = metrics.evaluate(spec.name, test.y, _predict_checked(model, test.X))
        print(f"{spec.name}: n_test={len(test)} test R2={te.r2:.4f} MAE={te.mae:.2f}")
    print(f"saved {path}")
    return model, path


def cmd_predict(model_path, input_path, output_path=None):
    model = load_model(model_path)
    input_path = Path(input_path)
    if not input_path.is_file():
        raise DataError(f"no such file: {input_path}")
    with input_path.open(newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DataError(f"empty file: {input_path}")
        header = [h.strip() for h in header]
        missing = [c for c in PREDICT_COLUMNS if c not in header]
        if missing:
            raise DataError(f"input missing required columns: {', '.join(missing)}")
        rows = [row for row in reader if row]
    pos = [header.index(c) for c in PREDICT_COLUMNS]
    area_map = dsmod.EncodingMap(model.area_categories)
    item_map = dsmod.EncodingMap(model.item_categories)
    areas = [r[pos[0]].strip() for r in rows]
    items = [r[pos[1]].strip() for r in rows]
    unseen = sorted({a for a in areas if a not in area_map.index_of}
                    | {i for i in items if i not in item_map.index_of})
    if unseen:
        raise DataError(f"unseen Area/Item labels: {', '.join(unseen)}")
    X = np.empty((len(rows), 6))
    if rows:
        X[:, 0] = area_map.encode(areas)
        X[:, 1] = item_map.encode(items)
        for j, p in enumerate(pos[2:], start=2):
            for i, r in enumerate(rows):
                try:
                    X[i, j] = float(r[p])
                except ValueError:
                    raise DataError(f"row={i + 1} field={PREDICT_COLUMNS[j]} reason=non-numeric") from None
    pred = _predict_checked(model, X)
    handle = open(output_path, "w", newline="", encoding="utf-8") if output_path else sys.stdout
    try:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header + ["predicted_yield"])
        for r, v in zip(rows, pred):
            writer.writerow(r + [fmt(v)])
    finally:
        if output_path:
            handle.close()
    return pred


def cmd_export_predictions(cfg):
    ds = _load(cfg)
    sp = dsmod.split(ds, cfg.train_fraction, cfg.seed)
    spec = cfg.models[0]
    model = _fit_checked(spec, sp.train, cfg.threads)
    pred = _predict_checked(model, sp.test.X)
    actual = sp.test.y
    out = _outdir(cfg)
    path = out / f"pred_vs_actual_{spec.kind}.csv"
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["actual", "predicted"])
        for a, p in zip(actual, pred):
            writer.writerow([fmt(a), fmt(p)])
    fit_line = diagonal_fit(actual, pred)
    fit_line["model"] = spec.name
    fit_line["metrics"] = metrics.evaluate(spec.name, actual, pred).as_dict()
    _write_json(out / f"pred_vs_actual_{spec.kind}.json", fit_line)
    print(f"{spec.name}: slope={fit_line['slope']:.4f} intercept={fit_line['intercept']:.2f} "
          f"R2={fit_line['r2']:.4f} n={fit_line['n']}")
    return fit_line


def diagonal_fit(actual, predicted):
    """OLS line of predicted on actual, with the R^2 of that regression."""
    from .models.linear import fit_linear

    actual = np.asarray(actual, dtype=np.float64)
    predicted = np.asarray(predicted, dtype=np.float64)
    line = fit_linear(actual[:, None], predicted)
    fitted = line.predict(actual[:, None])
    return {"slope": float(line.weights[1]), "intercept": float(line.weights[0]),
            "r2": metrics.r2(predicted, fitted), "n": int(actual.size)}


def cmd_boxplot_data(cfg):
    ds = _load(cfg)
    boxes = sorted(stats.boxplot_stats(ds, "item"), key=lambda b: (-b.median, b.group))
    out = _outdir(cfg)
    _write_json(out / "boxplot_by_item.json", [vars(b) for b in boxes])
    for b in boxes:
        print(f"{b.group:<24} median={b.median:.1f} q1={b.q1:.1f} q3={b.q3:.1f} outliers={b.outlier_count}")
    return boxes


# ---------------------------------------------------------------- entry point

def run(argv=None):
    parser = _build_parser()
    args, extra = parser.parse_known_args(argv)
    if args.command is None:
        raise UsageError("a subcommand is required: " + ", ".join(
            ["describe", "compare", "train", "predict", "export-predictions", "boxplot-data"]))
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "predict":
        if extra:
            raise UsageError(f"unrecognized arguments: {' '.join(extra)}")
        cmd_predict(args.model_file, args.input, args.output)
        return
    cfg = load_config(args, extra)
    if args.command == "describe":
        cmd_describe(cfg)
    elif args.command == "boxplot-data":
        cmd_boxplot_data(cfg)
    elif args.command == "compare":
        cmd_compare(cfg)
    elif args.command == "train":
        cmd_train(cfg, full=args.full, model_out=args.model_out)
    elif args.command == "export-predictions":
        cmd_export_predictions(cfg)


def main(argv=None):
    try:
        run(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ModelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, ModelFormatError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NumericError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
