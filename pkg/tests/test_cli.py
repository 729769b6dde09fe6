import json
import subprocess
import sys

import numpy as np
import pytest

from gsmemlab import classifiers as C
from gsmemlab import dataset as ds
from gsmemlab.cli import main

SMALL = {
    "generator": {"n_benign": 60, "n_attack": 60},
    "grids": {"LR": {"epochs": [50]}, "RF": {"n_trees": [3], "max_depth": [3]},
              "SVM": {"epochs": [5]}, "BT": {"rounds": [5]},
              "BPNN": {"epochs": [5], "hidden": [3]}},
}


@pytest.fixture
def small_config(tmp_path):
    p = tmp_path / "small.json"
    p.write_text(json.dumps(SMALL))
    return str(p)


@pytest.fixture
def quiet_config(tmp_path):
    p = tmp_path / "quiet.json"
    p.write_text(json.dumps({"noise": {"amplitude_sigma": 0.0, "frequency_jitter_sigma": 0.0}}))
    return str(p)


def test_simulate_zero_noise(tmp_path, capsys, quiet_config):
    out = tmp_path / "trace.csv"
    assert main(["simulate", "--payload", "A5", "--config", quiet_config, "--out", str(out)]) == 0
    assert capsys.readouterr().out == "ber 0.0\n"
    lines = out.read_text().splitlines()
    assert lines[0] == "time_s,frequency_hz,amplitude"
    assert len(lines) == 1 + 8 * 4


def test_simulate_reproducible(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        assert main(["simulate", "--payload", "deadbeef", "--seed", "9", "--out", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_simulate_missing_config(tmp_path, capsys):
    missing = tmp_path / "nope.json"
    rc = main(["simulate", "--payload", "A5", "--config", str(missing),
               "--out", str(tmp_path / "t.csv")])
    assert rc == 2
    assert str(missing) in capsys.readouterr().err
    assert not (tmp_path / "t.csv").exists()


@pytest.mark.parametrize("payload", ["XYZ", "A", ""])
def test_simulate_bad_hex(tmp_path, payload):
    assert main(["simulate", "--payload", payload, "--out", str(tmp_path / "t.csv")]) == 2
    assert not (tmp_path / "t.csv").exists()


def test_bad_config_content(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text('{"modulation": {"amplitude_high": 0.1, "amplitude_low": 0.5}}')
    assert main(["gen-data", "--config", str(p), "--out", str(tmp_path / "d.csv")]) == 2
    assert "bad.json" in capsys.readouterr().err
    p.write_text('{"seed": 1,\n "oops": }')
    assert main(["gen-data", "--config", str(p), "--out", str(tmp_path / "d.csv")]) == 2
    assert "bad.json:2:" in capsys.readouterr().err
    assert not (tmp_path / "d.csv").exists()


def test_gen_data_default(tmp_path):
    out = tmp_path / "d.csv"
    assert main(["gen-data", "--out", str(out)]) == 0
    d = ds.read_csv(out)
    assert len(d) == 2000
    assert d.class_counts() == {ds.Label.BENIGN: 1000, ds.Label.ATTACK: 1000}


def test_gen_data_seed_changes_rows(tmp_path, small_config):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    main(["gen-data", "--config", small_config, "--seed", "1", "--out", str(a)])
    main(["gen-data", "--config", small_config, "--seed", "2", "--out", str(b)])
    ta, tb = a.read_text().splitlines(), b.read_text().splitlines()
    assert ta[0] == tb[0] and len(ta) == len(tb) == 121
    assert ta[1:] != tb[1:]


def test_gen_data_empty(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text('{"generator": {"n_benign": 0, "n_attack": 0}}')
    out = tmp_path / "d.csv"
    assert main(["gen-data", "--config", str(cfg), "--out", str(out)]) == 0
    assert out.read_text() == "frequency_hz,amplitude,label\n"


def test_train_predict_evaluate(tmp_path, capsys, small_config):
    data = tmp_path / "d.csv"
    model = tmp_path / "m.json"
    main(["gen-data", "--config", small_config, "--out", str(data)])
    assert main(["train", "--algorithm", "NBC", "--data", str(data), "--out", str(model)]) == 0
    capsys.readouterr()
    assert main(["predict", "--model", str(model), "--frequency", "850e6",
                 "--amplitude", "3.0"]) == 0
    label, score = capsys.readouterr().out.split()
    assert label == "attack" and float(score) > 0.5
    assert main(["evaluate", "--model", str(model), "--data", str(data)]) == 0
    header, row = capsys.readouterr().out.splitlines()
    assert header == "fpr,fnr,accuracy,tp,fp,tn,fn"
    fpr, fnr = row.split(",")[:2]
    assert float(fpr) <= 0.05 and float(fnr) <= 0.05


def test_predict_majority_tree(tmp_path, capsys):
    x = np.column_stack([np.linspace(8e8, 9e8, 10), np.ones(10)])
    m = C.train(C.TrainConfig("DT", max_depth=0), ds.Dataset(x, [0] * 9 + [1]))
    path = tmp_path / "tree.json"
    C.save_model(m, path)
    assert main(["predict", "--model", str(path), "--frequency", "1", "--amplitude", "1"]) == 0
    assert capsys.readouterr().out == "benign 0.1\n"


def test_evaluate_all_correct(tmp_path, capsys):
    d = ds.Dataset([[0, 0], [0, 2], [4, 0], [4, 2]], [0, 0, 1, 1])
    ds.write_csv(d, tmp_path / "d.csv")
    C.save_model(C.train(C.TrainConfig("DT", max_depth=1), d), tmp_path / "m.json")
    assert main(["evaluate", "--model", str(tmp_path / "m.json"),
                 "--data", str(tmp_path / "d.csv")]) == 0
    row = capsys.readouterr().out.splitlines()[1].split(",")
    assert row[:3] == ["0.0", "0.0", "1.0"]


def test_train_bad_data_names_file_and_line(tmp_path, capsys):
    data = tmp_path / "d.csv"
    data.write_text("frequency_hz,amplitude,label\n1.0,1.0,benign\n1.0,1.0,maybe\n")
    rc = main(["train", "--algorithm", "LR", "--data", str(data), "--out", str(tmp_path / "m.json")])
    assert rc == 1
    assert f"{data}:3:" in capsys.readouterr().err
    assert not (tmp_path / "m.json").exists()


def test_train_missing_data(tmp_path, capsys):
    rc = main(["train", "--algorithm", "LR", "--data", str(tmp_path / "none.csv"),
               "--out", str(tmp_path / "m.json")])
    assert rc == 1
    assert "none.csv" in capsys.readouterr().err


def test_compare_small(tmp_path, small_config, capsys):
    out = tmp_path / "cmp"
    assert main(["compare", "--config", small_config, "--out", str(out)]) == 0
    rows = (out / "comparison.csv").read_text().splitlines()
    assert len(rows) == 7
    assert [r.split(",")[0] for r in rows[1:]] == list(C.ALGORITHMS)
    assert (out / "comparison.svg").read_text().startswith("<svg")
    assert capsys.readouterr().out == (out / "comparison.csv").read_text()


def test_usage_errors_exit_2():
    r = subprocess.run([sys.executable, "-m", "gsmemlab", "train", "--algorithm", "KNN"],
                       capture_output=True, text=True)
    assert r.returncode == 2
    r = subprocess.run([sys.executable, "-m", "gsmemlab"], capture_output=True, text=True)
    assert r.returncode == 2
