"""Reference recommenders for popularity-bias comparisons."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from trimat.models import Dataset, FloatArray
from trimat.rng import RngStream


@dataclass(frozen=True)
class MostPopular:
    """Scores every item by its training interaction count."""
    counts: FloatArray

    @classmethod
    def fit(cls, train: Dataset) -> MostPopular:
        return cls(counts=train.item_counts().astype(np.float64))

    def user_scores(self, user_index: int) -> FloatArray:
        return self.counts


@dataclass(frozen=True)
class UniformRandom:
    """Scores items with seeded i.i.d. uniform noise, independently per user."""
    scores: FloatArray

    @classmethod
    def fit(cls, train: Dataset, seed: int = 0) -> UniformRandom:
        rng = RngStream(seed, "random-baseline").generator()
        return cls(scores=rng.random((train.n_users, train.n_items)))

    def user_scores(self, user_index: int) -> FloatArray:
        return self.scores[user_index]
