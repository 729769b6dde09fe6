import re

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gsmemlab import classifiers as C
from gsmemlab import dataset as ds
from gsmemlab import eval as ev

A, B = 1, 0


def test_confusion_hand_count():
    m = ev.confusion([A, A, B, B], [A, B, A, B])
    assert (m.tp, m.fp, m.fn, m.tn) == (1, 1, 1, 1)


def test_confusion_all_correct_and_all_missed():
    m = ev.confusion([A, B, A], [A, B, A])
    assert m.fp == m.fn == 0
    m = ev.confusion([B] * 5, [A] * 5)
    assert (m.fn, m.tp, m.fp, m.tn) == (5, 0, 0, 0)


def test_confusion_length_mismatch():
    with pytest.raises(ValueError):
        ev.confusion([A, B], [A])


def test_metrics_arithmetic():
    r = ev.metrics(ev.ConfusionMatrix(tp=1, fp=1, tn=1, fn=1))
    assert (r.fpr, r.fnr, r.accuracy) == (0.5, 0.5, 0.5)
    assert ev.metrics(ev.ConfusionMatrix(fp=0, tn=10)).fpr == 0.0


def test_metrics_undefined_not_zero():
    r = ev.metrics(ev.ConfusionMatrix(tp=3, fn=1))
    assert r.fpr is None
    assert r.fnr == 0.25
    assert r.objective() == float("inf")


@given(st.integers(0, 50), st.integers(0, 50), st.integers(0, 50), st.integers(0, 50))
def test_metrics_ranges(tp, fp, tn, fn):
    m = ev.ConfusionMatrix(tp, fp, tn, fn)
    r = ev.metrics(m)
    for v in (r.fpr, r.fnr, r.accuracy):
        assert v is None or 0.0 <= v <= 1.0
    if m.total:
        assert r.accuracy == pytest.approx(1 - (fp + fn) / m.total)


class _Fixed:
    """Stand-in model whose predictions are fixed per config."""


def _patch_training(monkeypatch, outcomes):
    # outcomes: learning_rate -> predicted labels on the test set
    def fake_train(config, train_set):
        m = _Fixed()
        m.pred = outcomes[config.learning_rate]
        return m

    monkeypatch.setattr(ev, "train", fake_train)
    monkeypatch.setattr(ev, "predict_labels", lambda m, x: m.pred)


TRUTH = ds.Dataset(np.ones((20, 2)), [1] * 10 + [0] * 10)


def _pred(fn, fp):
    return np.array([0] * fn + [1] * (10 - fn) + [1] * fp + [0] * (10 - fp))


def test_grid_search_single_config(monkeypatch):
    _patch_training(monkeypatch, {0.1: _pred(2, 3)})
    r = ev.grid_search("LR", [C.TrainConfig("LR", learning_rate=0.1)], TRUTH, TRUTH)
    assert (r.metrics.fnr, r.metrics.fpr, r.index, r.grid_size) == (0.2, 0.3, 0, 1)


def test_grid_search_perfect_config_wins(monkeypatch):
    _patch_training(monkeypatch, {0.1: _pred(1, 1), 0.2: _pred(0, 0), 0.3: _pred(0, 1)})
    grid = [C.TrainConfig("LR", learning_rate=v) for v in (0.1, 0.2, 0.3)]
    r = ev.grid_search("LR", grid, TRUTH, TRUTH)
    assert r.config.learning_rate == 0.2


def test_grid_search_tie_prefers_lower_fnr(monkeypatch):
    _patch_training(monkeypatch, {0.1: _pred(2, 1), 0.2: _pred(1, 2), 0.3: _pred(1, 2)})
    grid = [C.TrainConfig("LR", learning_rate=v) for v in (0.1, 0.2, 0.3)]
    r = ev.grid_search("LR", grid, TRUTH, TRUTH)
    assert (r.metrics.fnr, r.index) == (0.1, 1)


def test_grid_search_errors():
    with pytest.raises(ValueError):
        ev.grid_search("LR", [], TRUTH, TRUTH)
    with pytest.raises(ValueError):
        ev.grid_search("LR", [C.TrainConfig("SVM")], TRUTH, TRUTH)


def test_grid_search_winner_is_minimal(default_split):
    tr, te = default_split
    grid = ev.expand_grid("BT", {"rounds": [1, 3, 10], "max_depth": [1, 2]})
    r = ev.grid_search("BT", grid, tr, te)
    for c in grid:
        assert r.metrics.objective() <= ev.evaluate(C.train(c, tr), te).objective()


def test_expand_grid_order():
    g = ev.expand_grid("LR", {"learning_rate": [0.1, 0.2], "epochs": [5, 6]}, seed=3)
    assert [(c.epochs, c.learning_rate) for c in g] == [(5, 0.1), (5, 0.2), (6, 0.1), (6, 0.2)]
    assert all(c.seed == 3 for c in g)
    assert len(ev.expand_grid("NBC", {})) == 1


@pytest.fixture(scope="module")
def small_compare():
    data = ds.generate(ds.GeneratorConfig(n_benign=150, n_attack=150, seed=1))
    grids = {"LR": ev.expand_grid("LR", {"epochs": [50, 100]}),
             "NBC": ev.expand_grid("NBC", {}),
             "RF": ev.expand_grid("RF", {"n_trees": [3], "max_depth": [2, 3]})}
    return data, grids


def test_compare_single_algorithm_equals_grid_search(small_compare):
    data, grids = small_compare
    rep = ev.compare_all({"LR"}, grids, data, 0.7, 5)
    tr, te = ds.split(data, 0.7, 5)
    r = ev.grid_search("LR", grids["LR"], tr, te)
    (e,) = rep.entries
    assert (e.metrics, e.config, e.config_index) == (r.metrics, r.config, r.index)
    assert rep.split_hash == ds.split_digest(tr, te)


def test_compare_deterministic_and_parallel_invariant(small_compare):
    data, grids = small_compare
    a = ev.compare_all({"LR", "NBC", "RF"}, grids, data, 0.7, 5)
    b = ev.compare_all({"RF", "NBC", "LR"}, grids, data, 0.7, 5, jobs=3)
    assert [e.algorithm for e in a.entries] == ["LR", "RF", "NBC"]
    assert a.to_json() == b.to_json()


def test_compare_missing_grid(small_compare):
    data, grids = small_compare
    with pytest.raises(ValueError):
        ev.compare_all({"SVM"}, grids, data)


def _report(n):
    entries = tuple(
        ev.ComparisonEntry(tag, ev.metrics(ev.ConfusionMatrix(tp=9, fn=1, tn=8, fp=2)),
                           C.TrainConfig(tag), 0, 1, 0.5)
        for tag in C.ALGORITHMS[:n])
    return ev.ComparisonReport(entries, "abc", 1, 0.7)


def test_emit_report_counts(tmp_path):
    csv_path, svg_path = ev.emit_report(_report(6), tmp_path)
    lines = open(csv_path).read().splitlines()
    assert lines[0] == "algorithm,best_fnr,best_fpr,accuracy,config_id,train_seconds"
    assert len(lines) == 7
    assert lines[1] == "LR,0.1,0.2,0.85,LR-0,"
    svg = open(svg_path).read()
    assert len(re.findall(r'<rect class="bar ', svg)) == 12
    for tag in C.ALGORITHMS:
        assert f">{tag}</text>" in svg
    assert ">FNR</text>" in svg and ">FPR</text>" in svg


def test_emit_report_empty(tmp_path):
    csv_path, svg_path = ev.emit_report(_report(0), tmp_path)
    assert open(csv_path).read() == "algorithm,best_fnr,best_fpr,accuracy,config_id,train_seconds\n"
    assert '<rect class="bar ' not in open(svg_path).read()


def test_emit_report_byte_identical(tmp_path):
    a = ev.emit_report(_report(6), tmp_path / "a")
    b = ev.emit_report(_report(6), tmp_path / "b")
    for pa, pb in zip(a, b):
        assert open(pa, "rb").read() == open(pb, "rb").read()


def test_emit_report_timing_opt_in(tmp_path):
    csv_path, _ = ev.emit_report(_report(1), tmp_path, include_timing=True)
    assert open(csv_path).read().splitlines()[1].endswith(",0.500000")


def test_emit_report_undefined_rates(tmp_path):
    e = ev.ComparisonEntry("LR", ev.metrics(ev.ConfusionMatrix(tp=3)), C.TrainConfig("LR"),
                           0, 1, 0.0)
    csv_path, svg_path = ev.emit_report(ev.ComparisonReport((e,), "x", 0, 0.7), tmp_path)
    assert open(csv_path).read().splitlines()[1] == "LR,0.0,undefined,1.0,LR-0,"
    assert "n/a" in open(svg_path).read()


def test_emit_report_unwritable(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError):
        ev.emit_report(_report(1), blocker / "sub")
