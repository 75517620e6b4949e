"""Tests for trimat.classic: two-factor MF training and prediction."""

import numpy as np
import pytest

from trimat.classic import (
    init_factors,
    predict_classic,
    predict_classic_many,
    train_classic,
)
from trimat.errors import TrimatError
from trimat.ingest import PlantedFactors, synth_zipf
from trimat.models import ClassicModel, Dataset, TrainConfig


def _model(U: np.ndarray, V: np.ndarray, variant: str = "raw") -> ClassicModel:
    return ClassicModel(U=np.asarray(U, dtype=np.float64), V=np.asarray(V, dtype=np.float64),
                        variant=variant, r_min=1.0, r_max=5.0)


class TestTrainClassic:
    def test_zero_learning_rate_keeps_init(self, tiny_dataset: Dataset) -> None:
        cfg = TrainConfig(learning_rate=0.0, epochs=5, seed=3)
        model = train_classic(tiny_dataset, 4, cfg)
        np.testing.assert_array_equal(model.U, init_factors(cfg, "init-U", tiny_dataset.n_users, 4))
        np.testing.assert_array_equal(model.V, init_factors(cfg, "init-V", tiny_dataset.n_items, 4))
        assert len(model.loss_trace) == 5
        assert len(set(model.loss_trace)) == 1

    def test_init_range(self, tiny_dataset: Dataset) -> None:
        cfg = TrainConfig(learning_rate=0.0, epochs=1)
        model = train_classic(tiny_dataset, 30, cfg)
        assert model.U.min() >= 0.01 and model.U.max() < 0.1
        assert model.U.shape == (3, 30)
        assert model.V.shape == (4, 30)

    def test_deterministic(self, tiny_dataset: Dataset) -> None:
        cfg = TrainConfig(learning_rate=0.01, epochs=20, seed=5)
        a = train_classic(tiny_dataset, 3, cfg)
        b = train_classic(tiny_dataset, 3, cfg)
        np.testing.assert_array_equal(a.U, b.U)
        np.testing.assert_array_equal(a.V, b.V)

    def test_loss_decreases(self, tiny_dataset: Dataset) -> None:
        model = train_classic(tiny_dataset, 3, TrainConfig(learning_rate=0.01, epochs=50))
        assert model.loss_trace[-1] < model.loss_trace[0]

    def test_loss_monotone_across_seeds(self) -> None:
        latent = PlantedFactors.random(30, 40, rank=3, seed=4)
        train = synth_zipf(30, 40, 600, zipf_exponent=0.0, latent=latent, seed=4)
        monotone = 0
        seeds = range(20)
        for seed in seeds:
            trace = np.asarray(train_classic(train, 3, TrainConfig(learning_rate=0.002, epochs=30, seed=seed)).loss_trace)
            steps = np.diff(trace[1:])
            monotone += bool((steps <= 1e-12 * trace[1:-1]).all())
        assert monotone >= 0.95 * len(seeds)

    def test_normalized_loss_decreases(self, tiny_dataset: Dataset) -> None:
        model = train_classic(tiny_dataset, 3, TrainConfig(learning_rate=0.05, epochs=50), variant="normalized")
        assert model.variant == "normalized"
        assert model.loss_trace[-1] < model.loss_trace[0]

    def test_divergence_names_epoch(self, tiny_dataset: Dataset) -> None:
        with pytest.raises(TrimatError) as exc_info:
            train_classic(tiny_dataset, 3, TrainConfig(learning_rate=1e6, epochs=50))
        assert exc_info.value.code == "DIVERGED"
        assert exc_info.value.context["epoch"] >= 1
        assert exc_info.value.context["model"] == "classic-raw"

    def test_unknown_variant(self, tiny_dataset: Dataset) -> None:
        with pytest.raises(TrimatError) as exc_info:
            train_classic(tiny_dataset, 3, TrainConfig(learning_rate=0.01), variant="svd")
        assert exc_info.value.code == "INVALID_ARGUMENT"

    def test_param_count(self, tiny_dataset: Dataset) -> None:
        model = train_classic(tiny_dataset, 30, TrainConfig(learning_rate=0.0, epochs=1))
        assert model.param_count == 30 * (3 + 4)

    def test_planted_rank5_recovery(self) -> None:
        latent = PlantedFactors.random(100, 200, rank=5, seed=11)
        train = synth_zipf(100, 200, 8000, zipf_exponent=0.0, latent=latent, seed=11)
        best = np.inf
        for lr in (0.005, 0.01, 0.02):
            try:
                model = train_classic(train, 30, TrainConfig(learning_rate=lr, epochs=300, seed=1))
            except TrimatError:
                continue
            best = min(best, model.loss_trace[-1])
        assert best < 1e-3


class TestPredictClassic:
    def test_identical_vectors_normalized(self) -> None:
        model = _model([[0.3, 0.4]], [[0.3, 0.4]], variant="normalized")
        assert predict_classic(model, 0, 0) == pytest.approx(5.0)

    def test_zero_user_clips_to_min(self) -> None:
        model = _model([[0.0, 0.0]], [[1.0, 2.0]])
        assert predict_classic(model, 0, 0) == 1.0

    def test_large_score_clips_to_max(self) -> None:
        model = _model([[3.0, 4.0]], [[1.0, 2.0]])
        assert predict_classic(model, 0, 0) == 5.0

    def test_matches_dot_product_oracle(self) -> None:
        rng = np.random.default_rng(8)
        model = _model(rng.uniform(0, 0.6, (4, 6)), rng.uniform(0, 0.6, (5, 6)))
        for i in range(4):
            for j in range(5):
                score = sum(model.U[i, f] * model.V[j, f] for f in range(6))
                expected = min(max(score, 1.0), 5.0)
                assert abs(predict_classic(model, i, j) - expected) < 1e-12

    def test_many_matches_single(self) -> None:
        rng = np.random.default_rng(9)
        model = _model(rng.uniform(0, 1, (3, 4)), rng.uniform(0, 1, (4, 4)), variant="normalized")
        users = np.array([0, 1, 2, 2], dtype=np.int64)
        items = np.array([3, 0, 1, 2], dtype=np.int64)
        expected = [predict_classic(model, int(u), int(i)) for u, i in zip(users, items)]
        np.testing.assert_allclose(predict_classic_many(model, users, items), expected)

    @pytest.mark.parametrize("user,item", [(-1, 0), (1, 0), (0, 2)])
    def test_index_out_of_range(self, user: int, item: int) -> None:
        model = _model([[1.0]], [[1.0], [2.0]])
        with pytest.raises(TrimatError) as exc_info:
            predict_classic(model, user, item)
        assert exc_info.value.code == "INDEX_OUT_OF_RANGE"
