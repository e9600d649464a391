import logging

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cropyield import dataset as dsmod
from cropyield.dataset import DataError, RawRecord

from conftest import random_dataset

HEADER = "Area,Item,Year,hg/ha_yield,average_rain_fall_mm_per_year,pesticides_tonnes,avg_temp\n"


def write(tmp_path, text, name="d.csv"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


def test_load_maps_fields(tmp_path):
    recs, diags = dsmod.load_csv(write(tmp_path, HEADER + "Albania,Maize,1990,36613,1485,121,16.37\n"))
    assert diags == []
    assert recs == [RawRecord("Albania", "Maize", 1990, 36613.0, 1485.0, 121.0, 16.37)]


def test_non_numeric_field_is_diagnosed(tmp_path):
    text = HEADER + "Albania,Maize,1990,36613,Asia,121,16.37\nAlbania,Wheat,1990,100,1485,121,16.37\n"
    recs, diags = dsmod.load_csv(write(tmp_path, text))
    assert [r.item for r in recs] == ["Wheat"]
    assert len(diags) == 1
    assert str(diags[0]) == "row=1 field=rainfall_mm reason=non-numeric rainfall_mm"


def test_missing_column_named(tmp_path):
    text = "Area,Item,Year,average_rain_fall_mm_per_year,pesticides_tonnes,avg_temp\n"
    with pytest.raises(DataError, match="hg/ha_yield"):
        dsmod.load_csv(write(tmp_path, text))


def test_missing_and_empty_file(tmp_path):
    with pytest.raises(DataError, match="no such file"):
        dsmod.load_csv(tmp_path / "nope.csv")
    with pytest.raises(DataError, match="empty"):
        dsmod.load_csv(write(tmp_path, ""))


def test_header_order_and_extra_columns(tmp_path, caplog):
    text = ",avg_temp,Item,Area,Year,pesticides_tonnes,hg/ha_yield,average_rain_fall_mm_per_year,note\n"
    text += "0,16.37,Maize,Albania,1990,121,36613,1485,x\n"
    with caplog.at_level(logging.WARNING):
        recs, _ = dsmod.load_csv(write(tmp_path, text))
    assert recs[0] == RawRecord("Albania", "Maize", 1990, 36613.0, 1485.0, 121.0, 16.37)
    assert "extra columns" in caplog.text


def rec(**kw):
    base = dict(area="A", item="I", year=2000, yield_hg_ha=1.0, rainfall_mm=1.0,
                pesticides_tonnes=1.0, avg_temp_c=20.0)
    base.update(kw)
    return RawRecord(**base)


def test_clean():
    kept, dropped = dsmod.clean([rec(), rec(area="B")])
    assert len(kept) == 2 and dropped == 0
    kept, dropped = dsmod.clean([rec(), rec(avg_temp_c=float("nan")), rec(area="C")])
    assert [r.area for r in kept] == ["A", "C"] and dropped == 1
    with pytest.raises(DataError, match="empty dataset after cleaning"):
        dsmod.clean([rec(yield_hg_ha=-1.0), rec(rainfall_mm=float("inf")), rec(year=1800)])


record_strategy = st.builds(
    RawRecord,
    area=st.sampled_from(["A", "B", ""]), item=st.sampled_from(["x", "y"]),
    year=st.integers(1850, 2150),
    yield_hg_ha=st.floats(-10, 10) | st.just(float("nan")),
    rainfall_mm=st.floats(-10, 10) | st.just(float("nan")), pesticides_tonnes=st.floats(-1, 10),
    avg_temp_c=st.floats(allow_nan=True, allow_infinity=True),
)


@given(st.lists(record_strategy, min_size=1, max_size=20))
def test_clean_idempotent(records):
    try:
        once, _ = dsmod.clean(records)
    except DataError:
        return
    twice, dropped = dsmod.clean(once)
    assert twice == once and dropped == 0


def test_encode_sorted_codes():
    ds = dsmod.encode([rec(area="India"), rec(area="Albania"), rec(area="India")])
    assert ds.area_map.categories == ("Albania", "India")
    assert ds.X.shape == (3, 6)
    assert ds.X[:, 0].tolist() == [1, 0, 1]
    assert ds.X[:, 1].tolist() == [0, 0, 0]
    assert ds.feature_names == ("area_code", "item_code", "year", "rainfall_mm",
                                "pesticides_tonnes", "avg_temp_c")


@given(st.lists(st.text(min_size=1, max_size=6), min_size=1, max_size=15))
def test_encoding_round_trip(labels):
    emap = dsmod.EncodingMap.build(labels)
    assert emap.decode(emap.encode(labels)) == labels
    assert sorted(emap.index_of.values()) == list(range(len(emap)))


def test_split_counts_and_determinism(rng):
    ds = random_dataset(rng, 10)
    a = dsmod.split(ds, 0.8, 7)
    b = dsmod.split(ds, 0.8, 7)
    assert len(a.train) == 8 and len(a.test) == 2
    assert np.array_equal(a.train_indices, b.train_indices)
    assert a.train.area_map is ds.area_map


def test_split_seed_changes_permutation(rng):
    ds = random_dataset(rng, 100)
    assert not np.array_equal(dsmod.split(ds, 0.8, 1).train_indices,
                              dsmod.split(ds, 0.8, 2).train_indices)


@given(n=st.integers(2, 200), frac=st.floats(0.01, 0.99), seed=st.integers(0, 2**64 - 1))
@settings(max_examples=60, deadline=None)
def test_split_is_partition(n, frac, seed):
    ds = random_dataset(np.random.default_rng(n), n)
    try:
        sp = dsmod.split(ds, frac, seed)
    except DataError:
        assert int(frac * n) in (0, n)
        return
    tr, te = set(sp.train_indices.tolist()), set(sp.test_indices.tolist())
    assert tr | te == set(range(n)) and not tr & te
    assert len(sp.train) + len(sp.test) == n


def test_split_errors(rng):
    ds = random_dataset(rng, 10)
    with pytest.raises(ValueError):
        dsmod.split(ds, 1.0, 1)
    with pytest.raises(DataError):
        dsmod.split(ds, 0.05, 1)


def test_feature_column(rng):
    ds = random_dataset(rng, 5)
    assert np.array_equal(dsmod.feature_column(ds, "year"), ds.X[:, 2])
    assert dsmod.feature_column(ds, "yield") is ds.y
    with pytest.raises(KeyError, match="soil_ph"):
        dsmod.feature_column(ds, "soil_ph")


def test_write_load_round_trip(tmp_path, small_ds):
    path = tmp_path / "rt.csv"
    dsmod.write_csv(small_ds, path)
    again = dsmod.load_dataset(path)
    assert np.array_equal(again.X, small_ds.X)
    assert np.array_equal(again.y, small_ds.y)
    assert again.area_map == small_ds.area_map


def test_dataset_rejects_nan():
    emap = dsmod.EncodingMap(("a",))
    with pytest.raises(DataError):
        dsmod.Dataset(np.full((1, 6), np.nan), np.zeros(1), emap, emap)
