"""Tests for trimat.cli: commands run as subprocesses, JSON on stdout."""

from __future__ import annotations

import json
import os
import subprocess
import sys
from pathlib import Path
from typing import Any, Callable, Optional

import pytest

from .conftest import LDOS_HEADER

WriteFile = Callable[[str, str], str]


def _run_cli(*args: str, input_text: Optional[str] = None) -> subprocess.CompletedProcess[str]:
    """Run the trimat CLI as a subprocess and return the result."""
    cmd = [sys.executable, "-m", "trimat"] + list(args)
    return subprocess.run(
        cmd,
        capture_output=True,
        text=True,
        input=input_text,
        timeout=300,
    )


def _json(result: subprocess.CompletedProcess[str]) -> Any:
    return json.loads(result.stdout)


@pytest.fixture
def synth_csv(output_dir: str) -> str:
    path = os.path.join(output_dir, "synth.csv")
    result = _run_cli("synth", "--out", path, "--users", "20", "--items", "30", "--interactions", "400",
                      "--zipf", "0", "--seed", "2")
    assert result.returncode == 0, result.stdout
    return path


class TestSystemCommands:
    def test_version(self) -> None:
        result = _run_cli("version")
        assert result.returncode == 0
        assert _json(result)["name"] == "trimat"

    def test_footprint(self) -> None:
        result = _run_cli("footprint", "121", "1232", "30")
        assert result.returncode == 0
        data = _json(result)
        assert data["trimat_param_count"] == 2833
        assert data["classic_param_count"] == 40590
        assert data["verdict"] == "PASS"

    def test_footprint_degenerate(self) -> None:
        data = _json(_run_cli("footprint", "1", "1", "1"))
        assert data["ratio"] == 5.5
        assert data["verdict"] == "FAIL"

    def test_footprint_non_numeric(self) -> None:
        result = _run_cli("footprint", "many", "1232", "30")
        assert result.returncode == 1
        data = _json(result)
        assert data["error"] is True
        assert data["code"] == "INVALID_ARGUMENT"

    def test_bad_option_value(self, output_dir: str) -> None:
        result = _run_cli("synth", "--out", os.path.join(output_dir, "s.csv"), "--users", "lots")
        assert result.returncode == 1
        data = _json(result)
        assert data["error"] is True
        assert data["code"] == "INVALID_ARGUMENT"

    def test_unknown_option(self) -> None:
        result = _run_cli("footprint", "10", "10", "5", "--colour")
        assert result.returncode == 1
        assert _json(result)["code"] == "INVALID_ARGUMENT"

    def test_footprint_zero(self) -> None:
        result = _run_cli("footprint", "0", "10", "30")
        assert result.returncode == 1
        assert _json(result)["code"] == "INVALID_ARGUMENT"

    def test_schema(self) -> None:
        data = _json(_run_cli("schema", "config"))
        assert "learning_rates" in data["properties"]
        assert _json(_run_cli("schema"))["targets"][0] == "index"

    def test_unknown_schema(self) -> None:
        result = _run_cli("schema", "edl")
        assert result.returncode == 1
        assert _json(result)["code"] == "INVALID_ARGUMENT"

    def test_missing_argument(self) -> None:
        result = _run_cli("footprint", "10")
        assert result.returncode == 1
        assert _json(result)["error"] is True


class TestValidateCommand:
    def test_sample(self, sample_csv: str) -> None:
        result = _run_cli("validate", sample_csv)
        assert result.returncode == 0
        summary = _json(result)["summary"]
        assert (summary["n_users"], summary["n_items"], summary["n_interactions"]) == (11, 14, 50)

    def test_missing_rating_column(self, write_file: WriteFile) -> None:
        path = write_file("norating.csv", "userID,itemID,location,mood,weather,season,daytype,endEmo\n1,2,1,1,1,1,1,1\n")
        result = _run_cli("validate", path)
        assert result.returncode == 2
        data = _json(result)
        assert data["valid"] is False
        assert data["errors"][0]["code"] == "SCHEMA_ERROR"
        assert data["errors"][0]["column"] == "rating"

    def test_empty_file(self, write_file: WriteFile) -> None:
        result = _run_cli("validate", write_file("empty.csv", ""))
        assert result.returncode == 2
        assert _json(result)["errors"][0]["code"] == "EMPTY_DATASET"

    def test_mapping_file(self, write_file: WriteFile) -> None:
        data = write_file("r.tsv", "a\tm\t4\t1\t1\t1\t1\t1\t1\nb\tm\t2\t2\t1\t1\t1\t1\t1\n")
        mapping = write_file("map.json", json.dumps({
            "user": 0, "item": 1, "rating": 2, "location": 3, "mood": 4, "weather": 5,
            "season": 6, "daytype": 7, "end_emotion": 8, "delimiter": "\t", "header": False,
        }))
        result = _run_cli("validate", data, "--mapping", mapping)
        assert result.returncode == 0
        assert _json(result)["summary"]["n_users"] == 2

    def test_bad_mapping(self, sample_csv: str, write_file: WriteFile) -> None:
        mapping = write_file("map.json", json.dumps({"user": "userID", "item": "userID"}))
        result = _run_cli("validate", sample_csv, "--mapping", mapping)
        assert result.returncode == 1
        assert _json(result)["code"] == "INVALID_MAPPING"

    def test_rejects_url_like_path(self) -> None:
        result = _run_cli("validate", "ratings.csv?raw=1")
        assert result.returncode == 1
        assert _json(result)["code"] == "INVALID_ARGUMENT"


class TestSynthCommand:
    def test_writes_ldos_layout(self, synth_csv: str) -> None:
        header = Path(synth_csv).read_text(encoding="utf-8").splitlines()[0]
        assert header == LDOS_HEADER
        data = _json(_run_cli("validate", synth_csv))
        assert data["summary"]["n_interactions"] == 400


class TestTrainEvaluate:
    def test_train_then_evaluate(self, synth_csv: str, output_dir: str) -> None:
        model_path = os.path.join(output_dir, "model.json")
        result = _run_cli("train", synth_csv, "--out", model_path, "--epochs", "5", "--lr", "0.05", "--seed", "3")
        assert result.returncode == 0, result.stdout
        trained = _json(result)
        assert trained["success"] is True
        assert (trained["train_size"], trained["test_size"]) == (320, 80)
        assert os.path.isfile(model_path)

        result = _run_cli("evaluate", model_path, synth_csv, "--topk", "5")
        assert result.returncode == 0, result.stdout
        evaluated = _json(result)
        assert evaluated["algorithm"] == "trimat-global"
        assert evaluated["split"]["seed"] == 3
        assert evaluated["test_mae"] == pytest.approx(trained["test_mae"])

    def test_classic(self, synth_csv: str, output_dir: str) -> None:
        model_path = os.path.join(output_dir, "classic.json")
        result = _run_cli("train", synth_csv, "--out", model_path, "--algorithm", "classic-raw",
                          "--k", "4", "--epochs", "3")
        assert result.returncode == 0
        assert _json(result)["param_count"] == 4 * (20 + 30)

    def test_unknown_algorithm(self, synth_csv: str, output_dir: str) -> None:
        result = _run_cli("train", synth_csv, "--out", os.path.join(output_dir, "m.json"), "--algorithm", "svd")
        assert result.returncode == 1
        assert _json(result)["code"] == "INVALID_ARGUMENT"

    def test_diverged_training_exits_2(self, synth_csv: str, output_dir: str) -> None:
        result = _run_cli("train", synth_csv, "--out", os.path.join(output_dir, "m.json"),
                          "--algorithm", "classic-raw", "--lr", "1000000", "--epochs", "20")
        assert result.returncode == 2
        assert _json(result)["code"] == "DIVERGED"

    def test_evaluate_on_other_data(self, synth_csv: str, sample_csv: str, output_dir: str) -> None:
        model_path = os.path.join(output_dir, "model.json")
        assert _run_cli("train", synth_csv, "--out", model_path, "--epochs", "2").returncode == 0
        result = _run_cli("evaluate", model_path, sample_csv)
        assert result.returncode == 2
        assert _json(result)["code"] == "INVALID_MODEL_FILE"

    def test_missing_model(self, sample_csv: str, output_dir: str) -> None:
        result = _run_cli("evaluate", os.path.join(output_dir, "none.json"), sample_csv)
        assert result.returncode == 2
        assert _json(result)["code"] == "INPUT_NOT_FOUND"


class TestGridsearch:
    def test_default_config(self, output_dir: str) -> None:
        result = _run_cli("gridsearch", "--out", output_dir, "-q")
        assert result.returncode == 0, result.stdout
        data = _json(result)
        assert data["success"] is True
        assert data["cells"] == 16
        out = Path(output_dir)
        assert (out / "report.json").is_file()
        assert (out / "report.tsv").is_file()
        assert (out / "plotdata").is_dir()

    def test_seed_override_echoed(self, output_dir: str) -> None:
        result = _run_cli("gridsearch", "--out", output_dir, "--seed", "7", "--epochs", "3",
                          "--lr-grid", "0.01,0.05", "--context-mode", "global", "-q")
        assert result.returncode == 0, result.stdout
        report = json.loads((Path(output_dir) / "report.json").read_text(encoding="utf-8"))
        assert report["config"]["seed"] == 7
        assert report["config"]["overrides"]["seed"] == 7
        assert report["config"]["overrides"]["learning_rates"] == [0.01, 0.05]
        assert "trimat-per-interaction" not in report["config"]["algorithms"]
        assert len(report["cells"]) == 3 * 2

    def test_repeat_runs_identical(self, output_dir: str) -> None:
        first, second = os.path.join(output_dir, "a"), os.path.join(output_dir, "b")
        for out in (first, second):
            assert _run_cli("gridsearch", "--out", out, "--epochs", "3", "--lr-grid", "0.01", "-q").returncode == 0
        assert Path(first, "report.json").read_bytes() == Path(second, "report.json").read_bytes()

    def test_progress_on_stderr(self, output_dir: str) -> None:
        result = _run_cli("gridsearch", "--out", output_dir, "--epochs", "2", "--lr-grid", "0.01")
        assert result.returncode == 0
        events = [json.loads(line)["progress"] for line in result.stderr.splitlines() if line.startswith("{")]
        assert events
        assert events[-1]["step"] == events[-1]["total"] == 4
        assert {"step", "total", "cell", "status"} <= events[0].keys()

    def test_missing_config(self, output_dir: str) -> None:
        result = _run_cli("gridsearch", "--config", os.path.join(output_dir, "nope.json"), "--out", output_dir)
        assert result.returncode == 1
        assert _json(result)["code"] == "CONFIG_NOT_FOUND"

    def test_bad_lr_grid(self, output_dir: str) -> None:
        result = _run_cli("gridsearch", "--out", output_dir, "--lr-grid", "fast,slow")
        assert result.returncode == 1
        assert _json(result)["code"] == "INVALID_ARGUMENT"

    def test_repeated_lr_grid(self, output_dir: str) -> None:
        result = _run_cli("gridsearch", "--out", output_dir, "--lr-grid", "0.01,0.01", "-q")
        assert result.returncode == 1
        assert _json(result)["code"] == "INVALID_CONFIG"

    def test_synthetic_config(self, output_dir: str, write_file: WriteFile) -> None:
        config = write_file("exp.json", json.dumps({
            "version": "1.0",
            "dataset": {"source": "synthetic", "n_users": 20, "n_items": 30, "n_interactions": 400, "seed": 1},
            "algorithms": ["classic-normalized", "trimat-per-interaction"],
            "learning_rates": [0.01],
            "epochs": 3,
            "classic_k": 4,
        }))
        result = _run_cli("gridsearch", "--config", config, "--out", os.path.join(output_dir, "run"), "-q")
        assert result.returncode == 0, result.stdout
        data = _json(result)
        assert data["cells"] == 2
        assert set(data["best"]) == {"classic-normalized", "trimat-per-interaction"}


class TestUsageErrorTypes:
    def test_click_exceptions_caught(self) -> None:
        import click

        from trimat.cli import ABORT_ERRORS, CLICK_ERRORS, MISSING_PARAMETER_ERRORS

        assert click.ClickException in CLICK_ERRORS
        assert click.exceptions.MissingParameter in MISSING_PARAMETER_ERRORS
        assert click.exceptions.Abort in ABORT_ERRORS

    def test_vendored_click_exceptions_caught(self) -> None:
        vendored = pytest.importorskip("typer._click.exceptions")

        from trimat.cli import CLICK_ERRORS, MISSING_PARAMETER_ERRORS

        assert vendored.ClickException in CLICK_ERRORS
        assert vendored.MissingParameter in MISSING_PARAMETER_ERRORS
