"""Shared test fixtures: small hand-built datasets and planted synthetic data."""

from pathlib import Path
from typing import Any, Callable

import pytest

from trimat.config import SAMPLE_DATA_PATH
from trimat.dataset import RawRecord, dense_reindex
from trimat.ingest import PlantedTriMat, synth_zipf
from trimat.models import ContextVector, Dataset

LDOS_HEADER = "userID,itemID,rating,location,mood,weather,season,daytype,endEmo"


def make_records(rows: list[tuple[str, str, float, tuple[int, ...]]]) -> list[RawRecord]:
    return [
        RawRecord(user_id=u, item_id=i, rating=r, context=ContextVector.from_codes(c), row=n + 1)
        for n, (u, i, r, c) in enumerate(rows)
    ]


@pytest.fixture
def tiny_dataset() -> Dataset:
    """Three users, four items, eight interactions with full context."""
    return dense_reindex(make_records([
        ("u1", "m1", 5.0, (1, 3, 2, 2, 1, 4)),
        ("u1", "m2", 3.0, (2, 1, 4, 1, 3, 2)),
        ("u2", "m1", 4.0, (1, 2, 1, 4, 2, 1)),
        ("u2", "m3", 2.0, (2, 3, 3, 3, 1, 4)),
        ("u3", "m2", 1.0, (1, 1, 2, 2, 2, 3)),
        ("u3", "m4", 4.0, (2, 2, 4, 1, 3, 2)),
        ("u1", "m4", 2.0, (1, 3, 1, 3, 1, 1)),
        ("u2", "m2", 5.0, (2, 1, 2, 4, 2, 4)),
    ]))


@pytest.fixture
def write_file(tmp_path: Path) -> Callable[[str, str], str]:
    """Write text to a file under tmp_path and return its path."""

    def _write(name: str, text: str) -> str:
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return str(path)

    return _write


@pytest.fixture
def sample_csv() -> str:
    return str(SAMPLE_DATA_PATH)


@pytest.fixture(scope="session")
def planted_dataset() -> Dataset:
    """Noiseless ratings from a planted tri-factor model, Zipf-1 item popularity."""
    latent = PlantedTriMat.random(200, 500, seed=7)
    return synth_zipf(200, 500, 20000, 1.0, latent, seed=7)


@pytest.fixture
def output_dir(tmp_path: Any) -> str:
    """Provide a temporary output directory for each test."""
    return str(tmp_path)
