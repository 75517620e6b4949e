"""Dataset ingestion: delimited files, train/test splits, and synthetic Zipf data."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Protocol

import numpy as np
import pandas as pd

from trimat.dataset import RawRecord, build_dataset, dense_reindex
from trimat.errors import (
    DEGENERATE_SPLIT,
    EMPTY_DATASET,
    INPUT_NOT_FOUND,
    INVALID_ARGUMENT,
    INVALID_CONTEXT_CODE,
    RATING_PARSE_ERROR,
    SCHEMA_ERROR,
    TrimatError,
    recovery_hints,
)
from trimat.models import (
    CONTEXT_FIELDS,
    MISSING_CODE,
    ColumnMapping,
    ContextMaxima,
    ContextVector,
    Dataset,
    FloatArray,
    IdMaps,
    IntArray,
    Interaction,
    SplitSpec,
)
from trimat.rng import RngStream

logger = logging.getLogger(__name__)

# Context code ranges used by the generator when none are given.
DEFAULT_SYNTH_MAXIMA = ContextMaxima(location=3, mood=3, weather=6, season=4, daytype=3, end_emotion=7)
PLANTED_LOW = 0.6
PLANTED_HIGH = 1.0
SYNTH_RATING_MAX = 5.0


# ---------------------------------------------------------------------------
# Delimited files
# ---------------------------------------------------------------------------

def _check_input(path: str | Path) -> Path:
    """Validate that the input file exists."""
    p = Path(path)
    if not p.is_file():
        raise TrimatError(
            code=INPUT_NOT_FOUND,
            message=f"Input file not found: {p}",
            recovery=recovery_hints(INPUT_NOT_FOUND, {"path": str(p)}),
            context={"path": str(p)},
        )
    return p


def _read_frame(path: Path, mapping: ColumnMapping) -> pd.DataFrame:
    try:
        return pd.read_csv(
            path,
            sep=mapping.delimiter,
            header=0 if mapping.header else None,
            dtype=str,
            keep_default_na=False,
            skipinitialspace=True,
        )
    except pd.errors.EmptyDataError as exc:
        raise TrimatError(
            code=EMPTY_DATASET,
            message=f"File is empty: {path}",
            recovery=recovery_hints(EMPTY_DATASET),
            context={"path": str(path)},
        ) from exc
    except pd.errors.ParserError as exc:
        raise TrimatError(
            code=SCHEMA_ERROR,
            message=f"Could not parse delimited file {path}: {exc}",
            recovery=recovery_hints(SCHEMA_ERROR),
            context={"path": str(path)},
        ) from exc


def _column(frame: pd.DataFrame, role: str, ref: str | int) -> pd.Series:
    if isinstance(ref, int) and not isinstance(ref, bool):
        if 0 <= ref < frame.shape[1]:
            return frame.iloc[:, ref].astype(str).str.strip()
        found = False
    else:
        found = ref in frame.columns
    if not found:
        raise TrimatError(
            code=SCHEMA_ERROR,
            message=f"Mapped column {ref!r} for role '{role}' not found",
            recovery=recovery_hints(SCHEMA_ERROR, {"column": ref}),
            context={"column": ref, "role": role, "available": [str(c) for c in frame.columns]},
        )
    return frame[ref].astype(str).str.strip()


def _line_number(row_index: int, mapping: ColumnMapping) -> int:
    return row_index + (2 if mapping.header else 1)


def _parse_codes(frame: pd.DataFrame, mapping: ColumnMapping) -> IntArray:
    codes = np.empty((len(frame), len(CONTEXT_FIELDS)), dtype=np.int64)
    for col, name in enumerate(CONTEXT_FIELDS):
        raw = _column(frame, name, getattr(mapping, name))
        numeric = pd.to_numeric(raw.replace("", str(MISSING_CODE)), errors="coerce")
        invalid = numeric.isna() | (numeric != numeric.round())
        invalid |= (numeric < 1) & (numeric != MISSING_CODE)
        if invalid.any():
            idx = int(np.flatnonzero(invalid.to_numpy())[0])
            raise TrimatError(
                code=INVALID_CONTEXT_CODE,
                message=f"Data row {idx + 1}: context field {name!r} has invalid code {raw.iloc[idx]!r}",
                recovery=recovery_hints(INVALID_CONTEXT_CODE),
                context={"row": idx + 1, "line": _line_number(idx, mapping), "field": name, "value": raw.iloc[idx]},
            )
        codes[:, col] = numeric.to_numpy(dtype=np.float64).astype(np.int64)
    return codes


def load_csv(path: str | Path, mapping: Optional[ColumnMapping] = None) -> Dataset:
    """Load an LDOS-CoMoDa-style delimited file into a Dataset.

    Only the nine mapped columns are read; any other column is ignored.
    A context code of -1 (or an empty cell) marks the field as missing.

    Raises:
        TrimatError: INPUT_NOT_FOUND, SCHEMA_ERROR (column named in context),
            RATING_PARSE_ERROR (row named in context), INVALID_CONTEXT_CODE,
            EMPTY_DATASET, INVALID_RATING.
    """
    mapping = mapping or ColumnMapping()
    p = _check_input(path)
    frame = _read_frame(p, mapping)

    users = _column(frame, "user", mapping.user)
    items = _column(frame, "item", mapping.item)
    raw_ratings = _column(frame, "rating", mapping.rating)
    ratings = pd.to_numeric(raw_ratings, errors="coerce")
    bad = ratings.isna().to_numpy()
    if bad.any():
        idx = int(np.flatnonzero(bad)[0])
        raise TrimatError(
            code=RATING_PARSE_ERROR,
            message=f"Data row {idx + 1}: cannot parse rating {raw_ratings.iloc[idx]!r}",
            recovery=recovery_hints(RATING_PARSE_ERROR, {"row": idx + 1}),
            context={"row": idx + 1, "line": _line_number(idx, mapping), "value": raw_ratings.iloc[idx]},
        )
    empty_ids = ((users == "") | (items == "")).to_numpy()
    if empty_ids.any():
        idx = int(np.flatnonzero(empty_ids)[0])
        raise TrimatError(
            code=SCHEMA_ERROR,
            message=f"Data row {idx + 1}: empty user or item ID",
            recovery=["Every row needs a nonempty user ID and item ID"],
            context={"row": idx + 1, "line": _line_number(idx, mapping)},
        )
    codes = _parse_codes(frame, mapping)

    records = [
        RawRecord(user_id=u, item_id=i, rating=float(r), context=ContextVector.from_codes(c), row=n + 1)
        for n, (u, i, r, c) in enumerate(zip(users, items, ratings.to_numpy(dtype=np.float64), codes.tolist()))
    ]
    if not records:
        raise TrimatError(
            code=EMPTY_DATASET,
            message=f"No data rows in {p}",
            recovery=recovery_hints(EMPTY_DATASET),
            context={"path": str(p)},
        )
    dataset = dense_reindex(records)
    logger.info("loaded %d interactions (%d users, %d items) from %s",
                len(dataset), dataset.n_users, dataset.n_items, p)
    return dataset


def write_csv(ds: Dataset, path: str | Path) -> Path:
    """Write a dataset in the default (LDOS-CoMoDa) column layout."""
    mapping = ColumnMapping()
    arrays = ds.arrays
    frame = pd.DataFrame({
        mapping.user: [ds.id_maps.user_id(int(u)) for u in arrays.users],
        mapping.item: [ds.id_maps.item_id(int(i)) for i in arrays.items],
        mapping.rating: arrays.ratings,
    })
    for col, name in enumerate(CONTEXT_FIELDS):
        frame[getattr(mapping, name)] = arrays.codes[:, col]
    out = Path(path)
    frame.to_csv(out, sep=mapping.delimiter, index=False, lineterminator="\n")
    return out


# ---------------------------------------------------------------------------
# Train / test split
# ---------------------------------------------------------------------------

def split(ds: Dataset, spec: SplitSpec) -> tuple[Dataset, Dataset]:
    """Partition interactions at random into train and test.

    |train| = floor(fraction * N + 0.5). Both halves keep the parent's order,
    id maps and user/item counts; the training half recomputes its rating
    bounds and context statistics from its own rows.

    Raises:
        TrimatError: DEGENERATE_SPLIT when either half would be empty.
    """
    n = len(ds)
    n_train = int(np.floor(spec.train_fraction * n + 0.5))
    if n_train <= 0 or n_train >= n:
        raise TrimatError(
            code=DEGENERATE_SPLIT,
            message=f"train_fraction {spec.train_fraction} on {n} interactions gives sizes ({n_train}, {n - n_train})",
            recovery=recovery_hints(DEGENERATE_SPLIT),
            context={"n": n, "train_size": n_train, "test_size": n - n_train},
        )
    seed = spec.seed if spec.seed is not None else 0
    order = RngStream(seed, "split").generator().permutation(n)
    train_rows = np.sort(order[:n_train])
    test_rows = np.sort(order[n_train:])

    train = build_dataset(
        [ds.interactions[r] for r in train_rows],
        n_users=ds.n_users,
        n_items=ds.n_items,
        id_maps=ds.id_maps,
    )
    test = Dataset(
        interactions=tuple(ds.interactions[r] for r in test_rows),
        n_users=ds.n_users,
        n_items=ds.n_items,
        r_min=ds.r_min,
        r_max=ds.r_max,
        context_maxima=ds.context_maxima,
        context_means=ds.context_means,
        id_maps=ds.id_maps,
    )
    return train, test


# ---------------------------------------------------------------------------
# Synthetic data
# ---------------------------------------------------------------------------

class PlantedModel(Protocol):
    """Ground-truth parameters that generate noiseless scores."""

    def score(self, users: IntArray, items: IntArray) -> FloatArray: ...

    def grid_max(self) -> float: ...


@dataclass(frozen=True)
class PlantedTriMat:
    """Planted tri-factor parameters: score = U_i^T . C . V_j."""
    U: FloatArray
    V: FloatArray
    C: FloatArray

    @classmethod
    def random(cls, n_users: int, n_items: int, seed: int) -> PlantedTriMat:
        rng = RngStream(seed, "planted").generator()
        return cls(
            U=rng.uniform(PLANTED_LOW, PLANTED_HIGH, size=(n_users, 3)),
            V=rng.uniform(PLANTED_LOW, PLANTED_HIGH, size=(n_items, 2)),
            C=rng.uniform(PLANTED_LOW, PLANTED_HIGH, size=(3, 2)),
        )

    def score(self, users: IntArray, items: IntArray) -> FloatArray:
        return np.einsum("na,ab,nb->n", self.U[users], self.C, self.V[items])

    def grid_max(self) -> float:
        return float((self.U @ self.C @ self.V.T).max())


@dataclass(frozen=True)
class PlantedFactors:
    """Planted two-factor parameters: score = U_i . V_j."""
    U: FloatArray
    V: FloatArray

    @classmethod
    def random(cls, n_users: int, n_items: int, rank: int, seed: int) -> PlantedFactors:
        rng = RngStream(seed, "planted").generator()
        return cls(
            U=rng.uniform(PLANTED_LOW, PLANTED_HIGH, size=(n_users, rank)),
            V=rng.uniform(PLANTED_LOW, PLANTED_HIGH, size=(n_items, rank)),
        )

    def score(self, users: IntArray, items: IntArray) -> FloatArray:
        return np.einsum("nk,nk->n", self.U[users], self.V[items])

    def grid_max(self) -> float:
        return float((self.U @ self.V.T).max())


def zipf_probabilities(n_items: int, exponent: float) -> FloatArray:
    """P(item of rank r) proportional to r^(-exponent); item index = rank - 1."""
    weights = np.arange(1, n_items + 1, dtype=np.float64) ** (-exponent)
    return weights / weights.sum()


def synth_zipf(
    n_users: int,
    n_items: int,
    n_interactions: int,
    zipf_exponent: float = 1.0,
    latent: Optional[PlantedModel] = None,
    seed: int = 0,
    context_maxima: ContextMaxima = DEFAULT_SYNTH_MAXIMA,
) -> Dataset:
    """Generate a dataset whose item popularity follows a Zipf law.

    Users are uniform; context codes are uniform over 1..maximum per field.
    With planted parameters the rating is the noiseless planted score rescaled
    by 5 / (maximum score over the full user x item grid); otherwise ratings are
    uniform over {1..5}.
    """
    if min(n_users, n_items, n_interactions) < 1:
        raise TrimatError(
            code=INVALID_ARGUMENT,
            message=f"Counts must be >= 1, got users={n_users}, items={n_items}, interactions={n_interactions}",
            recovery=["Use positive counts"],
            context={"n_users": n_users, "n_items": n_items, "n_interactions": n_interactions},
        )
    if not zipf_exponent >= 0:
        raise TrimatError(
            code=INVALID_ARGUMENT,
            message=f"zipf_exponent must be >= 0, got {zipf_exponent}",
            recovery=["Use 0 for uniform popularity, 1.0 for classic Zipf"],
            context={"zipf_exponent": zipf_exponent},
        )
    if n_interactions < n_users:
        logger.warning(
            "synth_zipf: %d interactions for %d users, some users will have no interactions",
            n_interactions, n_users,
        )

    rng = RngStream(seed, "synth").generator()
    items = rng.choice(n_items, size=n_interactions, p=zipf_probabilities(n_items, zipf_exponent))
    users = rng.integers(0, n_users, size=n_interactions)
    highs = np.asarray(context_maxima.values, dtype=np.int64) + 1
    codes = rng.integers(1, highs, size=(n_interactions, len(CONTEXT_FIELDS)))
    if latent is not None:
        ratings = SYNTH_RATING_MAX * latent.score(users, items) / latent.grid_max()
    else:
        ratings = rng.integers(1, 6, size=n_interactions).astype(np.float64)

    interactions = [
        Interaction(int(u), int(i), float(r), ContextVector.from_codes(c))
        for u, i, r, c in zip(users, items, ratings, codes.tolist())
    ]
    return build_dataset(
        interactions,
        n_users=n_users,
        n_items=n_items,
        id_maps=IdMaps(
            users=tuple(f"u{u}" for u in range(n_users)),
            items=tuple(f"i{i}" for i in range(n_items)),
        ),
    )
