"""Tests for trimat.config: config documents and command-line overrides."""

import json
from pathlib import Path

import pytest

from trimat.config import (
    DEFAULT_CONFIG_PATH,
    SAMPLE_DATA_PATH,
    apply_overrides,
    load_config,
    parse_config,
    resolve_dataset_path,
)
from trimat.errors import TrimatError

SYNTHETIC = {
    "version": "1.0",
    "dataset": {"source": "synthetic", "n_users": 20, "n_items": 30, "n_interactions": 400, "seed": 1},
    "algorithms": ["classic-raw", "trimat-global", "trimat-per-interaction"],
    "learning_rates": [0.01, 0.05],
    "epochs": 5,
}


class TestParseConfig:
    def test_minimal(self) -> None:
        cfg = parse_config(json.dumps(SYNTHETIC))
        assert cfg.algorithms == ("classic-raw", "trimat-global", "trimat-per-interaction")
        assert cfg.learning_rates == (0.01, 0.05)
        assert cfg.classic_k == 30
        assert cfg.top_k == 10

    def test_syntax_error_position(self) -> None:
        raw = '{\n  "version": "1.0",\n  "epochs": ,\n}'
        with pytest.raises(TrimatError) as exc_info:
            parse_config(raw)
        assert exc_info.value.code == "INVALID_CONFIG"
        assert exc_info.value.context["line"] == 3
        assert "line 3" in exc_info.value.message

    def test_missing_version(self) -> None:
        with pytest.raises(TrimatError) as exc_info:
            parse_config({"dataset": {"source": "synthetic"}})
        assert exc_info.value.code == "MISSING_FIELD"

    def test_wrong_version(self) -> None:
        with pytest.raises(TrimatError) as exc_info:
            parse_config({**SYNTHETIC, "version": "2.0"})
        assert exc_info.value.code == "INVALID_CONFIG"

    def test_not_an_object(self) -> None:
        with pytest.raises(TrimatError) as exc_info:
            parse_config("[1, 2]")
        assert exc_info.value.code == "INVALID_CONFIG"

    def test_wrong_type(self) -> None:
        with pytest.raises(TrimatError) as exc_info:
            parse_config({**SYNTHETIC, "epochs": "many"})
        assert exc_info.value.code == "INVALID_CONFIG"

    def test_unknown_algorithm(self) -> None:
        with pytest.raises(TrimatError) as exc_info:
            parse_config({**SYNTHETIC, "algorithms": ["classic-raw", "bpr"]})
        assert exc_info.value.code == "UNKNOWN_ALGORITHM"

    def test_control_characters_rejected(self) -> None:
        with pytest.raises(TrimatError) as exc_info:
            parse_config('{"version": "1.0"\x07}')
        assert exc_info.value.code == "INVALID_ARGUMENT"


class TestLoadConfig:
    def test_bundled_default(self) -> None:
        cfg = load_config()
        assert cfg.dataset.source == "csv"
        assert resolve_dataset_path(cfg) == SAMPLE_DATA_PATH.resolve()
        assert cfg.seed == 42
        assert len(cfg.algorithms) == 4

    def test_relative_path_resolves_against_config(self, tmp_path: Path) -> None:
        (tmp_path / "data").mkdir()
        doc = {"version": "1.0", "dataset": {"source": "csv", "path": "data/r.csv"}}
        path = tmp_path / "exp.json"
        path.write_text(json.dumps(doc), encoding="utf-8")
        cfg = load_config(path)
        assert resolve_dataset_path(cfg) == (tmp_path / "data" / "r.csv").resolve()

    def test_not_found(self, tmp_path: Path) -> None:
        with pytest.raises(TrimatError) as exc_info:
            load_config(tmp_path / "missing.json")
        assert exc_info.value.code == "CONFIG_NOT_FOUND"

    def test_default_path_exists(self) -> None:
        assert DEFAULT_CONFIG_PATH.is_file()


class TestOverrides:
    def test_none_values_skipped(self) -> None:
        cfg = parse_config(SYNTHETIC)
        assert apply_overrides(cfg, seed=None, epochs=None) is cfg

    def test_values_applied_and_echoed(self) -> None:
        cfg = apply_overrides(parse_config(SYNTHETIC), seed=7, learning_rates=[0.1, 0.2], k=12)
        assert cfg.seed == 7
        assert cfg.learning_rates == (0.1, 0.2)
        assert (cfg.classic_k, cfg.baseline_k) == (12, 12)
        assert cfg.overrides == {"seed": 7, "learning_rates": [0.1, 0.2], "k": 12}
        assert cfg.to_dict()["overrides"]["seed"] == 7

    def test_context_mode_restricts_trimat(self) -> None:
        cfg = apply_overrides(parse_config(SYNTHETIC), context_mode="global")
        assert cfg.algorithms == ("classic-raw", "trimat-global")

    def test_context_mode_adds_missing_mode(self) -> None:
        base = parse_config({**SYNTHETIC, "algorithms": ["classic-raw"]})
        cfg = apply_overrides(base, context_mode="per-interaction")
        assert cfg.algorithms == ("classic-raw", "trimat-per-interaction")

    def test_train_fraction(self) -> None:
        cfg = apply_overrides(parse_config(SYNTHETIC), train_fraction=0.6)
        assert cfg.split.train_fraction == 0.6

    def test_invalid_value_revalidated(self) -> None:
        with pytest.raises(TrimatError) as exc_info:
            apply_overrides(parse_config(SYNTHETIC), scaling="log")
        assert exc_info.value.code == "INVALID_CONFIG"

    def test_unknown_key(self) -> None:
        with pytest.raises(TrimatError) as exc_info:
            apply_overrides(parse_config(SYNTHETIC), momentum=0.9)
        assert exc_info.value.code == "INVALID_CONFIG"

    def test_workers_not_echoed(self) -> None:
        cfg = apply_overrides(parse_config(SYNTHETIC), workers=2, seed=3)
        assert cfg.workers == 2
        assert cfg.overrides == {"seed": 3}
        assert "workers" not in cfg.to_dict()


class TestGridValidation:
    def test_repeated_learning_rate(self) -> None:
        with pytest.raises(TrimatError) as exc_info:
            parse_config({**SYNTHETIC, "learning_rates": [0.01, 0.05, 0.01]})
        assert exc_info.value.code == "INVALID_CONFIG"
        assert exc_info.value.context["repeated"] == [0.01]

    def test_repeated_algorithm(self) -> None:
        with pytest.raises(TrimatError) as exc_info:
            parse_config({**SYNTHETIC, "algorithms": ["trimat-global", "classic-raw", "trimat-global"]})
        assert exc_info.value.code == "INVALID_CONFIG"
        assert exc_info.value.context["field"] == "algorithms"

    def test_repeated_learning_rate_override(self) -> None:
        with pytest.raises(TrimatError) as exc_info:
            apply_overrides(parse_config(SYNTHETIC), learning_rates=[0.1, 0.1])
        assert exc_info.value.code == "INVALID_CONFIG"

    @pytest.mark.parametrize("value", ["false", 0, 1, None])
    def test_shuffle_must_be_boolean(self, value: object) -> None:
        with pytest.raises(TrimatError) as exc_info:
            parse_config({**SYNTHETIC, "shuffle": value})
        assert exc_info.value.code == "INVALID_CONFIG"

    def test_planted_must_be_boolean(self) -> None:
        doc = {**SYNTHETIC, "dataset": {**SYNTHETIC["dataset"], "planted": "false"}}
        with pytest.raises(TrimatError) as exc_info:
            parse_config(doc)
        assert exc_info.value.code == "INVALID_CONFIG"
        assert exc_info.value.context["field"] == "dataset.planted"

    def test_boolean_false_accepted(self) -> None:
        doc = {**SYNTHETIC, "shuffle": False, "dataset": {**SYNTHETIC["dataset"], "planted": False}}
        cfg = parse_config(doc)
        assert cfg.shuffle is False
        assert cfg.dataset.planted is False
