import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from irregts import ConfigError, DataError, LabeledDataset
from irregts.data_io import (SynthesisConfig, dataset_content_hash, load_long_csv, long_csv_text,
                             mask_dropout, missing_rates, synthesize, write_long_csv)
from oracles import random_instance


def write(tmp_path, data, labels):
    d, l = tmp_path / "data.csv", tmp_path / "labels.csv"
    d.write_text(data)
    l.write_text(labels)
    return d, l


def test_simultaneous_records_share_a_row(tmp_path):
    d, l = write(tmp_path, "instance_id,time,variable,value\nx,1,a,1.5\nx,1,b,2\nx,2,a,3\n",
                 "instance_id,label\nx,1\n")
    ds = load_long_csv(d, l)
    x = ds.instances[0]
    assert x.length == 2 and x.timestamps.tolist() == [1.0, 2.0]
    assert x.mask.tolist() == [[True, True], [True, False]]
    assert x.values[0].tolist() == [1.5, 2.0]


def test_records_sorted_by_time(tmp_path):
    d, l = write(tmp_path, "instance_id,time,variable,value\nx,5,a,1\nx,-1,a,2\n",
                 "instance_id,label\nx,0\n")
    assert load_long_csv(d, l).instances[0].values[:, 0].tolist() == [2.0, 1.0]


def test_empty_file_warns(tmp_path):
    d, l = write(tmp_path, "instance_id,time,variable,value\n", "instance_id,label\n")
    with pytest.warns(UserWarning, match="no records"):
        ds = load_long_csv(d, l)
    assert len(ds) == 0


def test_duplicate_keeps_last(tmp_path):
    d, l = write(tmp_path, "instance_id,time,variable,value\nx,1,a,1\nx,1,a,7\n",
                 "instance_id,label\nx,0\n")
    with pytest.warns(UserWarning, match="repeated"):
        ds = load_long_csv(d, l)
    assert ds.instances[0].values.tolist() == [[7.0]]


def test_labelled_instance_without_records(tmp_path):
    d, l = write(tmp_path, "instance_id,time,variable,value\nx,1,a,1\n",
                 "instance_id,label\nx,0\ny,1\n")
    with pytest.warns(UserWarning, match="no records"):
        ds = load_long_csv(d, l)
    assert [x.id for x in ds.instances] == ["x", "y"] and ds.instances[1].length == 0


@pytest.mark.parametrize("data,labels,match", [
    ("instance_id,time,variable,value\nx,1,zz,1\n", "instance_id,label\nx,0\n", "unknown variable"),
    ("instance_id,time,variable,value\nx,1,a,high\n", "instance_id,label\nx,0\n", ":2: non-numeric"),
    ("instance_id,time,variable,value\nx,1,a,1\n", "instance_id,label\n", "without a label"),
    ("id,t,v,x\n", "instance_id,label\n", "expected header"),
    ("instance_id,time,variable,value\nx,1,a\n", "instance_id,label\nx,0\n", "4 fields"),
    ("instance_id,time,variable,value\nx,1,a,1\n", "instance_id,label\nx,yes\n", "integer"),
])
def test_loader_errors(tmp_path, data, labels, match):
    d, l = write(tmp_path, data, labels)
    with pytest.raises(DataError, match=match):
        load_long_csv(d, l, ["a"])


def test_round_trip_bit_identical(tmp_path):
    rng = np.random.default_rng(0)
    xs = []
    for i in range(40):
        x = random_instance(rng, D=4, id=f"r{i}")
        keep = x.mask.any(axis=1)  # fully absent rows have no records
        if keep.any():
            xs.append(type(x)(x.id, x.timestamps[keep], x.values[keep], x.mask[keep]))
    ds = LabeledDataset(tuple(xs), rng.integers(0, 2, len(xs)), ("a", "b", "c", "d"))
    d, l = tmp_path / "d.csv", tmp_path / "l.csv"
    write_long_csv(ds, d, l)
    back = load_long_csv(d, l, ds.variables)
    assert dataset_content_hash(back) == dataset_content_hash(ds)
    for a, b in zip(ds.instances, back.instances):
        assert np.array_equal(a.timestamps, b.timestamps)
        assert np.array_equal(a.mask, b.mask)
        assert np.array_equal(a.values[a.mask], b.values[b.mask])
    assert np.array_equal(ds.labels, back.labels)


def test_files_written_with_lf(tmp_path):
    ds = synthesize(SynthesisConfig(seed=0, n_instances=3))
    d, l = tmp_path / "d.csv", tmp_path / "l.csv"
    write_long_csv(ds, d, l)
    assert b"\r" not in d.read_bytes() + l.read_bytes()


def test_synth_requires_seed():
    with pytest.raises(ConfigError):
        synthesize(SynthesisConfig())


def test_synth_deterministic():
    cfg = SynthesisConfig(seed=5, n_instances=30)
    assert long_csv_text(synthesize(cfg)) == long_csv_text(synthesize(cfg))
    assert long_csv_text(synthesize(cfg)) != long_csv_text(synthesize(SynthesisConfig(seed=6,
                                                                                   n_instances=30)))


def test_synth_rate_zero_all_observed():
    ds = synthesize(SynthesisConfig(seed=1, n_instances=20, missing_rate=0.0))
    assert all(x.mask.all() for x in ds.instances)
    assert set(missing_rates(ds).values()) == {0.0}


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from(["mean-shift", "scale-shift", "slope-shift",
                                                "missingness-shift"]))
def test_synth_survives_round_trip(tmp_path_factory, seed, signal):
    ds = synthesize(SynthesisConfig(seed=seed, n_instances=10, signal=signal, n_classes=3))
    tmp = tmp_path_factory.mktemp("rt")
    write_long_csv(ds, tmp / "d.csv", tmp / "l.csv")
    back = load_long_csv(tmp / "d.csv", tmp / "l.csv", ds.variables)
    assert dataset_content_hash(back) == dataset_content_hash(ds)


def test_missingness_shift_rates_by_class():
    ds = synthesize(SynthesisConfig(seed=2, n_instances=400, signal="missingness-shift",
                                    max_length=20, effect_size=0.4))
    # rows that lose every cell are dropped, so compare raw cell shares loosely
    by_class = [np.mean([x.mask.mean() for x, y in zip(ds.instances, ds.labels) if y == c])
                for c in (0, 1)]
    assert by_class[0] > by_class[1] + 0.2


def test_mask_dropout_keeps_rows():
    ds = synthesize(SynthesisConfig(seed=3, n_instances=20, missing_rate=0.0))
    out = mask_dropout(ds, 0.5, seed=0)
    for a, b in zip(ds.instances, out.instances):
        assert a.length == b.length
        assert not (b.mask & ~a.mask).any()
    rate = 1 - np.mean(np.concatenate([x.mask.ravel() for x in out.instances]))
    assert 0.45 < rate < 0.55
