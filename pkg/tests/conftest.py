import os
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

import synth  # noqa: E402
from cropyield import dataset as dsmod  # noqa: E402

CROP_ENV = "CROP_YIELD_CSV"


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(cid, title): acceptance criterion")
    config._criteria = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and (rep.skipped or rep.failed)):
        cid, title = marker.args
        results = item.config._criteria.setdefault(cid, {"title": title, "outcomes": []})
        if rep.skipped:
            reason = rep.longrepr[2] if isinstance(rep.longrepr, tuple) else str(rep.longrepr)
            results["outcomes"].append(("NOT RUN", reason.removeprefix("Skipped: ")))
        else:
            results["outcomes"].append(("PASS" if rep.passed else "FAIL", item.name))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    criteria = getattr(config, "_criteria", {})
    if not criteria:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(criteria, key=lambda c: int(c)):
        entry = criteria[cid]
        states = [s for s, _ in entry["outcomes"]]
        if "FAIL" in states:
            verdict = "FAIL"
        elif "NOT RUN" in states:
            verdict = "NOT RUN" if "PASS" not in states else "PARTIAL (some parts not run)"
        else:
            verdict = "PASS"
        detail = "; ".join(d for s, d in entry["outcomes"] if s == "NOT RUN")
        line = f"criterion {cid}: {verdict:<8} {entry['title']}"
        if detail:
            line += f"  [{detail}]"
        terminalreporter.write_line(line)
    for note in getattr(config, "_criteria_notes", []):
        terminalreporter.write_line(f"  note: {note}")


@pytest.fixture
def note(request):
    """Attach a line to the acceptance summary."""
    def add(text):
        notes = getattr(request.config, "_criteria_notes", None)
        if notes is None:
            notes = request.config._criteria_notes = []
        notes.append(text)
    return add


@pytest.fixture(scope="session")
def crop_csv():
    path = os.environ.get(CROP_ENV)
    if not path:
        pytest.skip(f"{CROP_ENV} not set: the public crop-yield CSV is not bundled")
    if not Path(path).is_file():
        pytest.fail(f"{CROP_ENV}={path} does not exist")
    return Path(path)


@pytest.fixture(scope="session")
def small_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "small.csv"
    return synth.write(path, synth.crop_like(n_areas=12, years=range(1990, 2000), items_per_area=4))


@pytest.fixture(scope="session")
def small_ds(small_csv):
    return dsmod.load_dataset(small_csv)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def make_dataset(X, y, n_areas=None, n_items=None):
    """Wrap raw arrays as a Dataset; area/item codes in the first two columns."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n_areas = n_areas or int(X[:, 0].max()) + 1
    n_items = n_items or int(X[:, 1].max()) + 1
    areas = dsmod.EncodingMap(tuple(f"A{i:04d}" for i in range(n_areas)))
    items = dsmod.EncodingMap(tuple(f"I{i:04d}" for i in range(n_items)))
    return dsmod.Dataset(X, y, areas, items)


def random_dataset(rng, n, noise=1.0):
    X = np.column_stack([
        rng.integers(0, 5, n), rng.integers(0, 3, n), rng.integers(1990, 2014, n),
        rng.uniform(0, 3000, n), rng.lognormal(5, 2, n), rng.uniform(5, 30, n),
    ]).astype(np.float64)
    y = 1000 * X[:, 1] + 3 * (X[:, 2] - 1990) + 0.5 * X[:, 5] ** 2 + rng.normal(0, noise, n)
    return make_dataset(X, np.abs(y), 5, 3)
