"""Tests for trimat.dataset: dense re-indexing."""

import pytest

from trimat.dataset import dense_reindex
from trimat.errors import TrimatError
from trimat.models import Dataset

from .conftest import make_records

CTX = (1, 1, 1, 1, 1, 1)


class TestDenseReindex:
    def test_first_appearance_order(self) -> None:
        ds = dense_reindex(make_records([
            ("alice", "m9", 3.0, CTX),
            ("bob", "m2", 4.0, CTX),
            ("alice", "m2", 5.0, CTX),
        ]))
        assert ds.n_users == 2
        assert ds.n_items == 2
        assert ds.id_maps.users == ("alice", "bob")
        assert ds.id_maps.items == ("m9", "m2")
        assert [x.user_index for x in ds.interactions] == [0, 1, 0]
        assert [x.item_index for x in ds.interactions] == [0, 1, 1]

    def test_stable_under_rerun(self) -> None:
        rows = [("a", "x", 2.0, CTX), ("b", "y", 4.0, CTX), ("a", "y", 5.0, CTX)]
        assert dense_reindex(make_records(rows)) == dense_reindex(make_records(rows))

    def test_rating_bounds(self) -> None:
        ds = dense_reindex(make_records([("a", "x", 2.0, CTX), ("b", "y", 4.0, CTX), ("a", "y", 5.0, CTX)]))
        assert (ds.r_min, ds.r_max) == (2.0, 5.0)

    def test_bijection(self, tiny_dataset: Dataset) -> None:
        maps = tiny_dataset.id_maps
        for idx, uid in enumerate(maps.users):
            assert maps.user_index(uid) == idx
            assert maps.user_id(idx) == uid
        assert len(set(maps.items)) == tiny_dataset.n_items

    def test_empty(self) -> None:
        with pytest.raises(TrimatError) as exc_info:
            dense_reindex([])
        assert exc_info.value.code == "EMPTY_DATASET"

    def test_nonpositive_rating(self) -> None:
        with pytest.raises(TrimatError) as exc_info:
            dense_reindex(make_records([("a", "x", 3.0, CTX), ("a", "y", 0.0, CTX)]))
        assert exc_info.value.code == "INVALID_RATING"
        assert exc_info.value.context["row"] == 2

    def test_context_statistics(self, tiny_dataset: Dataset) -> None:
        assert tiny_dataset.context_maxima.values == (2, 3, 4, 4, 3, 4)
        assert all(0 < m <= 1 for m in tiny_dataset.context_means)


class TestDatasetViews:
    def test_arrays(self, tiny_dataset: Dataset) -> None:
        arrays = tiny_dataset.arrays
        assert arrays.users.shape == (8,)
        assert arrays.codes.shape == (8, 6)
        assert arrays.ratings[0] == 5.0

    def test_item_counts(self, tiny_dataset: Dataset) -> None:
        assert tiny_dataset.item_counts().tolist() == [2, 3, 1, 2]

    def test_seen_items(self, tiny_dataset: Dataset) -> None:
        assert tiny_dataset.seen_items()[0] == {0, 1, 3}
