import json
import subprocess
import sys

import numpy as np
import pytest

from onlinekm.cli import main
from onlinekm.core import Dataset
from onlinekm.harness import ExperimentReport


@pytest.fixture
def gaps_file(tmp_path):
    path = tmp_path / "gaps.txt"
    assert main(["gen", "increasing_gaps", "c=2", "n=6", "-o", str(path)]) == 0
    return path


def test_gen_writes_points_and_metadata(gaps_file):
    meta = json.loads(gaps_file.with_name(gaps_file.name + ".meta.json").read_text())
    assert meta["generator"] == "increasing_gaps" and meta["n"] == 6
    assert Dataset.load(gaps_file).n == 6


def test_opt_prints_json(tmp_path, capsys):
    path = tmp_path / "p.txt"
    Dataset([0.0, 1.0, 10.0]).save(path)
    assert main(["opt", "-k", "2", "-i", str(path)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["centers"] == [0, 2] and out["cost"] == 1.0 and out["model"] == "squared_euclidean"


def test_trace_one_line_per_arrival(tmp_path, capsys):
    path = tmp_path / "p.txt"
    Dataset([5.0, 1.0, 2.0, 3.0]).save(path)
    assert main(["trace", "-a", "max_distance", "-i", str(path), "--order", "given"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines == ["0\ttake\tFirstPoint", "1\ttake\tMaxDistance", "2\tskip\tSkip", "3\tskip\tSkip"]


def test_trace_random_order_lists_dataset_indices(gaps_file, capsys):
    assert main(["trace", "-a", "fft", "-p", "k=2", "-i", str(gaps_file), "--order", "random:7"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert sorted(int(line.split("\t")[0]) for line in lines) == list(range(6))
    assert main(["trace", "-a", "fft", "-p", "k=2", "-i", str(gaps_file), "--order", "random:7"]) == 0
    assert capsys.readouterr().out.splitlines() == lines


def test_run_writes_report(tmp_path, gaps_file):
    cfg = {"algorithm": {"name": "doubling", "params": {"c": 2}}, "instance": {"file": str(gaps_file)},
           "trials": 5, "seed": 2, "order": "random"}
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    assert main(["run", "-c", str(cfg_path), "-o", str(tmp_path / "rep")]) == 0
    rep = ExperimentReport.load(tmp_path / "rep")
    assert len(rep.rows) == 5


def test_errors_exit_nonzero(tmp_path, capsys):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({"algorithm": {"name": "nope"}, "instance": {"file": "x"}, "output": str(tmp_path)}))
    assert main(["run", "-c", str(cfg_path)]) == 2
    assert "algorithm.name" in capsys.readouterr().err
    path = tmp_path / "big.txt"
    Dataset(np.arange(40.0)).save(path)
    assert main(["opt", "-k", "20", "-i", str(path)]) == 2
    assert "oracle budget" in capsys.readouterr().err
    with pytest.raises(SystemExit):
        main(["trace", "-a", "fft", "-i", str(path), "--order", "sorted"])


def test_module_entry_point(tmp_path):
    path = tmp_path / "p.txt"
    Dataset([0.0, 4.0, 5.0]).save(path)
    out = subprocess.run([sys.executable, "-m", "onlinekm", "opt", "-k", "1", "-i", str(path)],
                         capture_output=True, text=True, check=True).stdout
    assert json.loads(out)["cost"] == 17.0
