import json
import warnings

import numpy as np
import pytest

from irregts import ConfigError, DataError, compute_global_stats
from irregts.baselines import max_length
from irregts.classify import GbdtConfig
from irregts.data_io import SynthesisConfig, synthesize
from irregts.evaluation import make_folds, run_cv

FAST = GbdtConfig(n_trees=30, max_depth=3)


def test_stratified_balanced_folds():
    y = np.array([0, 1] * 5)
    plan = make_folds(y, k=5, seed=3)
    for j in range(5):
        assert sorted(y[plan.test_indices(j)].tolist()) == [0, 1]


def test_fold_plan_is_partition_and_deterministic():
    y = np.random.default_rng(0).integers(0, 3, size=47)
    a = make_folds(y, 5, seed=9)
    b = make_folds(y, 5, seed=9)
    assert np.array_equal(a.assignment, b.assignment)
    assert not np.array_equal(a.assignment, make_folds(y, 5, seed=10).assignment)
    all_test = np.concatenate([a.test_indices(j) for j in range(5)])
    assert sorted(all_test.tolist()) == list(range(47))
    for j in range(5):
        assert set(a.train_indices(j)).isdisjoint(a.test_indices(j))
        for c in range(3):
            share = (y == c).sum() / 5
            assert abs((y[a.test_indices(j)] == c).sum() - share) < 1


def test_leave_one_out():
    y = np.array([0, 1, 0, 1, 1, 0])
    for stratified in (True, False):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            plan = make_folds(y, k=6, seed=0, stratified=stratified)
        assert all(plan.test_indices(j).size == 1 for j in range(6))


def test_plain_folds_sizes():
    plan = make_folds(np.zeros(11, int), k=3, stratified=False)
    assert sorted(np.bincount(plan.assignment).tolist()) == [3, 4, 4]


@pytest.mark.parametrize("k", [1, 0, 2.5])
def test_bad_k(k):
    with pytest.raises(ConfigError):
        make_folds(np.array([0, 1] * 5), k=k)


def test_too_few_instances():
    with pytest.raises(ConfigError):
        make_folds(np.array([0, 1]), k=3)


@pytest.fixture(scope="module")
def slope_data():
    return synthesize(SynthesisConfig(seed=0, n_instances=120))


@pytest.mark.parametrize("rep", ["summary", "mean-imp", "forward-imp", "linear-imp", "mask", "raw"])
def test_fold_statistics_come_from_train_only(slope_data, rep):
    plan = make_folds(slope_data.labels, 4, seed=1)
    seen = []

    def hook(r):
        train = slope_data.subset(plan.train_indices(r.index))
        want = compute_global_stats(train)
        assert np.array_equal(r.representation.stats.variable_means, want.variable_means)
        if rep != "summary":
            assert r.representation.l_max == max_length(train.instances)
        seen.append(r.index)

    head = "lr" if rep not in ("raw",) else "gbdt"
    run_cv(slope_data, rep, head, FAST if head == "gbdt" else None, k=4, seed=1, on_fold=hook)
    assert seen == [0, 1, 2, 3]


def test_no_signal_auroc_near_half():
    ds = synthesize(SynthesisConfig(seed=3, n_instances=300, effect_size=0.0))
    rep = run_cv(ds, "summary", "gbdt", FAST)
    assert 0.4 <= rep.mean["auroc"] <= 0.6


def test_report_deterministic_and_jobs_independent(slope_data):
    a = run_cv(slope_data, "summary", "gbdt", FAST, seed=2).to_json(verbose=True)
    b = run_cv(slope_data, "summary", "gbdt", FAST, seed=2).to_json(verbose=True)
    c = run_cv(slope_data, "summary", "gbdt", FAST, seed=2, jobs=3).to_json(verbose=True)
    assert a == b == c
    doc = json.loads(a)
    assert doc["config"]["k"] == 5 and doc["config"]["head_config"]["n_trees"] == 30
    m = doc["metrics"]["auroc"]
    assert len(m["folds"]) == 5
    assert m["std"] == pytest.approx(np.std(m["folds"]), abs=1e-15)
    assert m["std_sample"] == pytest.approx(np.std(m["folds"], ddof=1), abs=1e-15)
    assert sum(doc["importance"]["group_fractions"].values()) == pytest.approx(1.0)


def test_multiclass_report():
    ds = synthesize(SynthesisConfig(seed=1, n_instances=150, n_classes=3, signal="mean-shift",
                                    effect_size=3.0))
    rep = run_cv(ds, "summary", "lr", k=3)
    assert rep.metric_names == ("accuracy", "precision", "recall", "f1")
    assert rep.mean["accuracy"] > 0.6


def test_fold_errors_name_the_fold():
    ds = synthesize(SynthesisConfig(seed=0, n_instances=12))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        with pytest.raises(DataError, match=r"fold \d+: .*single class"):
            run_cv(ds, "summary", "gbdt", FAST, k=12)
