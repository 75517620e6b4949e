"""Tests for trimat.models and trimat.errors: invariants and JSON round-tripping."""

import pytest

from trimat.errors import (
    EXIT_CONFIG,
    EXIT_DATA,
    TrimatError,
    exit_code_for_error,
    recovery_hints,
)
from trimat.models import (
    CellResult,
    ColumnMapping,
    ContextMaxima,
    ContextVector,
    DatasetSpec,
    ExperimentConfig,
    SplitSpec,
    TrainConfig,
)

# ---------------------------------------------------------------------------
# Context types
# ---------------------------------------------------------------------------

class TestContextVector:
    def test_codes_order(self) -> None:
        ctx = ContextVector(1, 3, 2, 2, 1, 4)
        assert ctx.codes == (1, 3, 2, 2, 1, 4)

    def test_missing_marker(self) -> None:
        ctx = ContextVector.from_codes([1, -1, 2, 2, 1, 4])
        assert ctx.missing == (False, True, False, False, False, False)

    def test_zero_code_rejected(self) -> None:
        with pytest.raises(TrimatError) as exc_info:
            ContextVector(1, 0, 2, 2, 1, 4)
        assert exc_info.value.code == "INVALID_CONTEXT_CODE"
        assert exc_info.value.context["field"] == "mood"

    def test_wrong_length(self) -> None:
        with pytest.raises(TrimatError) as exc_info:
            ContextVector.from_codes([1, 2, 3])
        assert exc_info.value.code == "INVALID_CONTEXT_CODE"

    def test_from_dict_defaults_to_missing(self) -> None:
        ctx = ContextVector.from_dict({"location": 2})
        assert ctx.codes == (2, -1, -1, -1, -1, -1)


class TestContextMaxima:
    def test_round_trip(self) -> None:
        maxima = ContextMaxima(2, 3, 4, 4, 3, 4)
        assert ContextMaxima.from_dict(maxima.to_dict()) == maxima

    def test_nonpositive_rejected(self) -> None:
        with pytest.raises(TrimatError):
            ContextMaxima(0, 1, 1, 1, 1, 1)


# ---------------------------------------------------------------------------
# Specs
# ---------------------------------------------------------------------------

class TestColumnMapping:
    def test_default_layout(self) -> None:
        roles = ColumnMapping().roles()
        assert roles["user"] == "userID"
        assert roles["end_emotion"] == "endEmo"

    def test_duplicate_columns_rejected(self) -> None:
        with pytest.raises(TrimatError) as exc_info:
            ColumnMapping(item="userID")
        assert exc_info.value.code == "INVALID_MAPPING"

    def test_headerless_needs_positions(self) -> None:
        with pytest.raises(TrimatError) as exc_info:
            ColumnMapping(header=False)
        assert exc_info.value.code == "INVALID_MAPPING"

    def test_positions_without_header(self) -> None:
        mapping = ColumnMapping(
            user=0, item=1, rating=2, location=3, mood=4, weather=5, season=6, daytype=7, end_emotion=8,
            header=False,
        )
        assert mapping.roles()["season"] == 6

    def test_bad_delimiter(self) -> None:
        with pytest.raises(TrimatError):
            ColumnMapping(delimiter=";;")


class TestSplitSpec:
    @pytest.mark.parametrize("fraction", [0.0, 1.0, -0.1, 1.5])
    def test_fraction_bounds(self, fraction: float) -> None:
        with pytest.raises(TrimatError) as exc_info:
            SplitSpec(train_fraction=fraction)
        assert exc_info.value.code == "INVALID_SPLIT_SPEC"

    def test_unknown_strategy(self) -> None:
        with pytest.raises(TrimatError):
            SplitSpec(strategy="by-user")

    def test_round_trip(self) -> None:
        spec = SplitSpec(train_fraction=0.7, seed=11)
        assert SplitSpec.from_dict(spec.to_dict()) == spec


class TestTrainConfig:
    def test_zero_learning_rate_allowed(self) -> None:
        assert TrainConfig(learning_rate=0.0).learning_rate == 0.0

    def test_invalid_values_collected(self) -> None:
        with pytest.raises(TrimatError) as exc_info:
            TrainConfig(learning_rate=-1.0, epochs=0)
        assert exc_info.value.code == "INVALID_TRAIN_CONFIG"
        assert len(exc_info.value.context["problems"]) == 2


class TestExperimentConfig:
    def test_unknown_algorithm(self) -> None:
        with pytest.raises(TrimatError) as exc_info:
            ExperimentConfig(dataset=DatasetSpec(source="synthetic"), algorithms=("svd++",))
        assert exc_info.value.code == "UNKNOWN_ALGORITHM"

    def test_csv_needs_path(self) -> None:
        with pytest.raises(TrimatError) as exc_info:
            DatasetSpec(source="csv")
        assert exc_info.value.code == "MISSING_FIELD"

    def test_round_trip(self) -> None:
        cfg = ExperimentConfig(
            dataset=DatasetSpec(source="synthetic", n_users=20, n_items=30, n_interactions=400, seed=3),
            algorithms=("classic-raw", "trimat-global"),
            learning_rates=(0.01, 0.05),
            epochs=5,
        )
        again = ExperimentConfig.from_dict(cfg.to_dict())
        assert again == cfg

    def test_nonpositive_learning_rate(self) -> None:
        with pytest.raises(TrimatError) as exc_info:
            ExperimentConfig(dataset=DatasetSpec(source="synthetic"), learning_rates=(0.01, 0.0))
        assert exc_info.value.code == "INVALID_CONFIG"


class TestCellResult:
    def test_round_trip_drops_plot_data(self) -> None:
        cell = CellResult("trimat-global", 0.01, 5, test_mae=0.8, loss_trace=[1.0, 0.5])
        again = CellResult.from_dict(cell.to_dict())
        assert again == cell
        assert again.loss_trace == []


# ---------------------------------------------------------------------------
# Errors
# ---------------------------------------------------------------------------

class TestErrors:
    def test_to_dict(self) -> None:
        err = TrimatError(code="SCHEMA_ERROR", message="boom", recovery=["fix"], context={"column": "rating"})
        d = err.to_dict()
        assert d["error"] is True
        assert d["code"] == "SCHEMA_ERROR"
        assert d["context"]["column"] == "rating"
        assert str(err) == "[SCHEMA_ERROR] boom"

    @pytest.mark.parametrize("code", ["INVALID_CONFIG", "CONFIG_NOT_FOUND", "UNKNOWN_ALGORITHM", "MISSING_FIELD"])
    def test_config_codes_exit_1(self, code: str) -> None:
        assert exit_code_for_error(code) == EXIT_CONFIG

    @pytest.mark.parametrize("code", ["SCHEMA_ERROR", "EMPTY_DATASET", "DIVERGED", "DEGENERATE_SPLIT"])
    def test_data_codes_exit_2(self, code: str) -> None:
        assert exit_code_for_error(code) == EXIT_DATA

    def test_context_hints(self) -> None:
        hints = recovery_hints("SCHEMA_ERROR", {"column": "rating"})
        assert "rating" in hints[0]
        assert "epoch 4" in recovery_hints("DIVERGED", {"epoch": 4})[0]
