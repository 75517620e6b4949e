"""Accuracy and popularity-bias metrics.

MAE measures rating accuracy. The Degree of Matthew Effect compares how
concentrated top-K recommendations are against the training popularity
distribution, through the slopes of log-log rank-frequency fits.
"""

from __future__ import annotations

from typing import Any, Callable, Optional, Protocol, Sequence, Union

import numpy as np
import pandas as pd

from trimat.classic import classic_user_scores
from trimat.context import build_context_matrix
from trimat.errors import (
    EMPTY_INPUT,
    INVALID_ARGUMENT,
    LENGTH_MISMATCH,
    UNDEFINED_SLOPE,
    TrimatError,
    recovery_hints,
)
from trimat.models import (
    CONTEXT_FIELDS,
    MISSING_CODE,
    ClassicModel,
    ContextVector,
    Dataset,
    FloatArray,
    RankFrequency,
    TopKLists,
    TriMatModel,
)
from trimat.trifactor import trimat_user_scores

ContextProvider = Callable[[int], Optional[ContextVector]]

_ALL_MISSING = ContextVector.from_codes([MISSING_CODE] * len(CONTEXT_FIELDS))


class UserScorer(Protocol):
    def user_scores(self, user_index: int) -> FloatArray: ...


Recommender = Union[ClassicModel, TriMatModel, UserScorer]


def mae(predictions: Sequence[float] | FloatArray, truths: Sequence[float] | FloatArray) -> float:
    """Mean absolute error.

    Raises:
        TrimatError: LENGTH_MISMATCH or EMPTY_INPUT.
    """
    p = np.asarray(predictions, dtype=np.float64).reshape(-1)
    t = np.asarray(truths, dtype=np.float64).reshape(-1)
    if p.shape != t.shape:
        raise TrimatError(
            code=LENGTH_MISMATCH,
            message=f"predictions ({p.size}) and truths ({t.size}) differ in length",
            recovery=["Pass one prediction per held-out rating"],
            context={"predictions": int(p.size), "truths": int(t.size)},
        )
    if p.size == 0:
        raise TrimatError(
            code=EMPTY_INPUT,
            message="mae needs at least one prediction",
            recovery=["Check that the test split is nonempty"],
        )
    return float(np.mean(np.abs(p - t)))


# ---------------------------------------------------------------------------
# Top-K
# ---------------------------------------------------------------------------

def most_recent_contexts(train: Dataset) -> ContextProvider:
    """Context provider returning each user's last training context (None if the user has none)."""
    latest: dict[int, ContextVector] = {}
    for x in train.interactions:
        latest[x.user_index] = x.context
    return latest.get


def _score_user(
    model: Recommender,
    user_index: int,
    ctx_provider: Optional[ContextProvider],
    out_of_range: str,
) -> FloatArray:
    if isinstance(model, ClassicModel):
        return classic_user_scores(model, user_index)
    if isinstance(model, TriMatModel):
        if model.context_mode == "global":
            return trimat_user_scores(model, user_index)
        ctx = ctx_provider(user_index) if ctx_provider is not None else None
        C = build_context_matrix(
            ctx if ctx is not None else _ALL_MISSING,
            model.context_maxima,
            model.missing_policy,
            model.context_means,
            out_of_range,
        )
        return trimat_user_scores(model, user_index, C)
    return np.asarray(model.user_scores(user_index), dtype=np.float64)


def top_k(
    model: Recommender,
    train: Dataset,
    k: int,
    ctx_provider: Optional[ContextProvider] = None,
    out_of_range: str = "clamp",
) -> TopKLists:
    """Rank every training-unseen item per user, best first, ties by lower item index.

    Per-interaction TriMat models score candidates under the context from
    ``ctx_provider`` (default: the user's most recent training context); a user
    without one is scored under an all-missing context.
    """
    if k < 1:
        raise TrimatError(
            code=INVALID_ARGUMENT,
            message=f"K must be >= 1, got {k}",
            recovery=["The default top-K is 10"],
            context={"k": k},
        )
    if ctx_provider is None and isinstance(model, TriMatModel) and model.context_mode != "global":
        ctx_provider = most_recent_contexts(train)

    all_items = np.arange(train.n_items, dtype=np.int64)
    lists = []
    for user, seen in enumerate(train.seen_items()):
        if seen:
            candidates = all_items[~np.isin(all_items, np.fromiter(seen, dtype=np.int64))]
        else:
            candidates = all_items
        if candidates.size == 0:
            lists.append(())
            continue
        scores = _score_user(model, user, ctx_provider, out_of_range)[candidates]
        order = np.lexsort((candidates, -scores))[:k]
        lists.append(tuple(int(i) for i in candidates[order]))
    return TopKLists(k=k, lists=tuple(lists))


# ---------------------------------------------------------------------------
# Rank-frequency and Matthew effect
# ---------------------------------------------------------------------------

def rank_frequency(source: Union[TopKLists, Sequence[float], FloatArray], n_items: Optional[int] = None) -> RankFrequency:
    """Sort frequencies descending and fit ln(frequency) = slope * ln(rank) + intercept.

    Zero-frequency entries keep their ranks but are excluded from the fit.

    Raises:
        TrimatError: EMPTY_INPUT for no counts, UNDEFINED_SLOPE for fewer than
            two positive frequencies.
    """
    if isinstance(source, TopKLists):
        size = n_items if n_items is not None else 1 + max((i for lst in source.lists for i in lst), default=-1)
        counts = source.item_frequencies(size)
    else:
        counts = np.asarray(source)
    counts = counts.reshape(-1)
    if counts.size == 0:
        raise TrimatError(
            code=EMPTY_INPUT,
            message="rank_frequency needs at least one count",
            recovery=recovery_hints(UNDEFINED_SLOPE),
        )
    ordered = -np.sort(-counts, kind="stable")
    ranks = np.arange(1, ordered.size + 1)
    positive = ordered > 0
    if int(positive.sum()) < 2:
        raise TrimatError(
            code=UNDEFINED_SLOPE,
            message=f"Only {int(positive.sum())} item(s) with positive frequency; the slope is undefined",
            recovery=recovery_hints(UNDEFINED_SLOPE),
            context={"n_positive": int(positive.sum())},
        )
    slope, intercept = np.polyfit(np.log(ranks[positive]), np.log(ordered[positive].astype(np.float64)), 1)
    return RankFrequency(
        ranks=tuple(int(r) for r in ranks),
        frequencies=tuple(ordered.tolist()),
        slope=float(slope),
        intercept=float(intercept),
    )


def popularity_rank_frequency(train: Dataset) -> RankFrequency:
    """Rank-frequency of training interaction counts per item."""
    return rank_frequency(train.item_counts())


def degree_of_matthew_effect(rec: RankFrequency, pop: RankFrequency) -> float:
    """slope(recommendations) - slope(popularity).

    Negative: recommendations concentrate on popular items more than the data
    does. Positive: recommendations are flatter than the data.
    """
    if not (np.isfinite(rec.slope) and np.isfinite(pop.slope)):
        raise TrimatError(
            code=UNDEFINED_SLOPE,
            message="Both rank-frequency slopes must be finite",
            recovery=recovery_hints(UNDEFINED_SLOPE),
            context={"rec_slope": rec.slope, "pop_slope": pop.slope},
        )
    return rec.slope - pop.slope


# ---------------------------------------------------------------------------
# Plot data
# ---------------------------------------------------------------------------

def rank_frequency_table(rf: RankFrequency) -> pd.DataFrame:
    return pd.DataFrame({"rank": list(rf.ranks), "frequency": list(rf.frequencies)})


def loss_trace_table(trace: Sequence[float]) -> pd.DataFrame:
    return pd.DataFrame({"epoch": np.arange(1, len(trace) + 1), "train_loss": list(trace)})


def write_plot_data(table: pd.DataFrame, path: Any) -> None:
    """Write a plot-data table as tab-separated columns with a header row."""
    table.to_csv(path, sep="\t", index=False, lineterminator="\n", float_format="%.6g")
