"""Dense re-indexing of raw rating records into a Dataset."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from trimat.context import context_field_means, context_maxima_from_codes
from trimat.errors import EMPTY_DATASET, INVALID_RATING, TrimatError, recovery_hints
from trimat.models import CONTEXT_FIELDS, ContextVector, Dataset, IdMaps, Interaction


@dataclass(frozen=True)
class RawRecord:
    """One parsed input row, still keyed by original user and item IDs."""
    user_id: str
    item_id: str
    rating: float
    context: ContextVector
    row: int = 0  # 1-based source row, 0 when not file-backed


def dense_reindex(raw_records: Iterable[RawRecord]) -> Dataset:
    """Map users and items to contiguous 0-based indices in first-appearance order.

    Raises:
        TrimatError: EMPTY_DATASET for no records, INVALID_RATING for a
            non-positive rating.
    """
    user_index: dict[str, int] = {}
    item_index: dict[str, int] = {}
    interactions: list[Interaction] = []

    for record in raw_records:
        rating = float(record.rating)
        if not rating > 0 or not np.isfinite(rating):
            raise TrimatError(
                code=INVALID_RATING,
                message=f"Rating must be a positive finite number, got {record.rating!r}",
                recovery=recovery_hints(INVALID_RATING),
                context={"row": record.row, "rating": record.rating},
            )
        u = user_index.setdefault(record.user_id, len(user_index))
        i = item_index.setdefault(record.item_id, len(item_index))
        interactions.append(Interaction(u, i, rating, record.context))

    if not interactions:
        raise TrimatError(
            code=EMPTY_DATASET,
            message="No interactions to index",
            recovery=recovery_hints(EMPTY_DATASET),
        )

    return build_dataset(
        interactions,
        n_users=len(user_index),
        n_items=len(item_index),
        id_maps=IdMaps(users=tuple(user_index), items=tuple(item_index)),
    )


def build_dataset(
    interactions: Sequence[Interaction],
    n_users: int,
    n_items: int,
    id_maps: IdMaps,
) -> Dataset:
    """Assemble a Dataset, deriving rating bounds and context statistics from ``interactions``."""
    if not interactions:
        raise TrimatError(
            code=EMPTY_DATASET,
            message="No interactions to build a dataset from",
            recovery=recovery_hints(EMPTY_DATASET),
        )
    codes = np.array([x.context.codes for x in interactions], dtype=np.int64).reshape(-1, len(CONTEXT_FIELDS))
    ratings = [x.rating for x in interactions]
    maxima = context_maxima_from_codes(codes)
    return Dataset(
        interactions=tuple(interactions),
        n_users=n_users,
        n_items=n_items,
        r_min=float(min(ratings)),
        r_max=float(max(ratings)),
        context_maxima=maxima,
        context_means=context_field_means(codes, maxima),
        id_maps=id_maps,
    )
