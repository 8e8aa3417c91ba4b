import json

import pytest

import ctaea.bench as bench
from ctaea.bench import read_summary
from ctaea.cli import main
from ctaea.decomposition import WeightVectorSet
from ctaea.problems import ReferenceFront


@pytest.fixture(autouse=True)
def _one_worker(monkeypatch):
    monkeypatch.setenv(bench.WORKERS_ENV, "1")


def test_run_summarize_and_scatter(tmp_path, capsys):
    out = tmp_path / "res"
    code = main(["run", "--problem", "c1-dtlz3", "--algorithm", "ctaea", "--algorithm", "baseline",
                 "--seeds", "1-2", "--max-evals", "364", "--out", str(out)])
    assert code == 0
    rows = read_summary(out / "summary.csv")
    assert [r["algorithm"] for r in rows] == ["ctaea", "baseline"]
    assert rows[1]["igd_vs_reference"] == "insufficient_runs"
    assert main(["summarize", str(out)]) == 0
    assert main(["scatter", str(out / "ctaea" / "seed-0001.json"), str(tmp_path / "s.csv")]) == 0
    assert (tmp_path / "s-da.csv").exists()
    assert "igd_median" in capsys.readouterr().out


def test_config_file_with_overrides(tmp_path):
    cfg = tmp_path / "exp.json"
    cfg.write_text(json.dumps({"problem": "c2-dtlz2", "algorithms": ["baseline"], "seeds": [1, 2, 3],
                               "max_evaluations": 300000, "out": str(tmp_path / "ignored")}))
    out = tmp_path / "res"
    assert main(["run", "--config", str(cfg), "--max-evals", "182", "--seeds", "4", "--out", str(out)]) == 0
    assert (out / "baseline" / "seed-0004.json").exists()
    saved = json.loads((out / "experiment.json").read_text())
    assert saved["max_evaluations"] == 182 and saved["seeds"] == [4]


def test_failed_run_gives_nonzero_exit(tmp_path, monkeypatch):
    def broken(*args, **kwargs):
        raise RuntimeError("boom")

    monkeypatch.setattr(bench, "run_single", broken)
    assert main(["run", "--problem", "dtlz2", "--seeds", "1", "--max-evals", "182",
                 "--out", str(tmp_path / "r")]) == 1


@pytest.mark.parametrize("argv", [
    ["run", "--problem", "nope", "--out", "x"],
    ["run", "--problem", "dtlz2", "--seeds", "1,1"],
    ["run", "--max-evals", "100"],
    ["summarize", "/nonexistent/dir"],
])
def test_bad_input_exits_two(argv, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(argv) == 2


def test_front_and_weights(tmp_path):
    assert main(["front", "dtlz1", "--m", "2", "--count", "100", "--out", str(tmp_path / "f.csv")]) == 0
    assert len(ReferenceFront.from_csv(tmp_path / "f.csv")) == 100
    assert main(["weights", "--m", "3", "--out", str(tmp_path / "w.csv")]) == 0
    assert len(WeightVectorSet.from_csv(tmp_path / "w.csv")) == 91
