"""Context-aware tri-factor model: rating ~ U_i^T . C . V_j.

U rows are 3-dimensional and V rows 2-dimensional, matching the 3x2 context
matrix. C starts from the interaction contexts and is trained together with
U and V, either as one shared matrix (``global``) or as one matrix per
training (user, item) pair (``per-interaction``).
"""

from __future__ import annotations

import logging
from typing import Optional

import numpy as np

from trimat import kernels
from trimat.classic import check_index, init_factors, run_epochs
from trimat.context import build_context_matrix, context_matrices, mean_context_matrix
from trimat.errors import INVALID_ARGUMENT, MISSING_CONTEXT, TrimatError, recovery_hints
from trimat.models import (
    CONTEXT_MODES,
    CONTEXT_SHAPE,
    MISSING_POLICIES,
    OUT_OF_RANGE_POLICIES,
    RATING_SCALINGS,
    ContextMatrix,
    ContextVector,
    Dataset,
    FloatArray,
    FootprintReport,
    IntArray,
    TrainConfig,
    TriMatModel,
)

logger = logging.getLogger(__name__)

USER_DIM, ITEM_DIM = CONTEXT_SHAPE


def _check_choice(value: str, choices: tuple[str, ...], name: str) -> None:
    if value not in choices:
        raise TrimatError(
            code=INVALID_ARGUMENT,
            message=f"Unknown {name}: {value!r}",
            recovery=[f"Use one of: {', '.join(choices)}"],
            context={name: value},
        )


def _pair_index(users: IntArray, items: IntArray) -> tuple[dict[tuple[int, int], int], IntArray]:
    """Number distinct (user, item) pairs in first-appearance order."""
    rows: dict[tuple[int, int], int] = {}
    index = np.empty(users.shape[0], dtype=np.int64)
    for n, key in enumerate(zip(users.tolist(), items.tolist())):
        index[n] = rows.setdefault(key, len(rows))
    return rows, index


def _scale(model: TriMatModel) -> float:
    return model.r_max if model.rating_scaling == "scaled" else 1.0


# ---------------------------------------------------------------------------
# Training
# ---------------------------------------------------------------------------

def train_trimat(
    train: Dataset,
    cfg: TrainConfig,
    context_mode: str = "global",
    rating_scaling: str = "scaled",
    missing_policy: str = "mean",
    out_of_range: str = "error",
) -> TriMatModel:
    """Fit U (n_users x 3), V (n_items x 2) and C on ``train``.

    C starts as the mean training context matrix (global mode) or, per
    training pair, the mean context matrix of that pair's interactions
    (per-interaction mode). Targets are R / R_max in scaled mode and R in raw
    mode.

    Raises:
        TrimatError: INVALID_ARGUMENT for unknown modes or policies, DIVERGED
            when a parameter becomes non-finite (context carries the epoch).
    """
    _check_choice(context_mode, CONTEXT_MODES, "context_mode")
    _check_choice(rating_scaling, RATING_SCALINGS, "rating_scaling")
    _check_choice(missing_policy, MISSING_POLICIES, "missing_policy")
    _check_choice(out_of_range, OUT_OF_RANGE_POLICIES, "out_of_range")

    arrays = train.arrays
    context_args = (train.context_maxima, missing_policy, train.context_means, out_of_range)
    if context_mode == "global":
        pair_rows: dict[tuple[int, int], int] = {}
        pairs = np.zeros(len(train), dtype=np.int64)
        C = np.ascontiguousarray(mean_context_matrix(arrays.codes, *context_args)[np.newaxis])
    else:
        matrices = context_matrices(arrays.codes, *context_args)
        pair_rows, pairs = _pair_index(arrays.users, arrays.items)
        sums = np.zeros((len(pair_rows),) + CONTEXT_SHAPE)
        np.add.at(sums, pairs, matrices)
        counts = np.bincount(pairs, minlength=len(pair_rows)).astype(np.float64)
        C = np.ascontiguousarray(sums / counts[:, np.newaxis, np.newaxis])

    targets = arrays.ratings / train.r_max if rating_scaling == "scaled" else arrays.ratings
    U = init_factors(cfg, "init-U", train.n_users, USER_DIM)
    V = init_factors(cfg, "init-V", train.n_items, ITEM_DIM)
    lr = float(cfg.learning_rate)

    def step(order: IntArray) -> None:
        kernels.trimat_epoch(arrays.users, arrays.items, pairs, targets, order, U, V, C, lr)

    def loss() -> float:
        return kernels.trimat_mse(arrays.users, arrays.items, pairs, targets, U, V, C)

    name = f"trimat-{context_mode}"
    logger.info("training %s (%s targets): lr=%g epochs=%d on %d interactions, %d context matrices",
                name, rating_scaling, lr, cfg.epochs, len(train), C.shape[0])
    trace = run_epochs(cfg, len(train), step, loss, lambda: (U, V, C), name)
    return TriMatModel(
        U=U,
        V=V,
        C=C,
        pair_rows=pair_rows,
        context_mode=context_mode,
        rating_scaling=rating_scaling,
        r_min=train.r_min,
        r_max=train.r_max,
        context_maxima=train.context_maxima,
        context_means=train.context_means,
        missing_policy=missing_policy,
        loss_trace=trace,
    )


# ---------------------------------------------------------------------------
# Prediction
# ---------------------------------------------------------------------------

def _missing_context(user_index: int, item_index: int) -> TrimatError:
    return TrimatError(
        code=MISSING_CONTEXT,
        message=f"No trained context for unseen pair (user {user_index}, item {item_index}) and no context given",
        recovery=recovery_hints(MISSING_CONTEXT),
        context={"user": user_index, "item": item_index},
    )


def context_for(
    model: TriMatModel,
    user_index: int,
    item_index: int,
    ctx: Optional[ContextVector] = None,
    out_of_range: str = "error",
) -> ContextMatrix:
    """The C matrix a prediction for (user, item) uses."""
    if model.context_mode == "global":
        return model.C_global
    row = model.pair_rows.get((user_index, item_index))
    if row is not None:
        return model.C[row]
    if ctx is None:
        raise _missing_context(user_index, item_index)
    return build_context_matrix(
        ctx, model.context_maxima, model.missing_policy, model.context_means, out_of_range
    )


def predict_trimat(
    model: TriMatModel,
    user_index: int,
    item_index: int,
    ctx: Optional[ContextVector] = None,
    out_of_range: str = "error",
) -> float:
    """Predicted rating, clipped to the training rating range.

    Global mode ignores ``ctx``. Per-interaction mode uses the trained matrix
    of a seen pair and builds one from ``ctx`` for an unseen pair.

    Raises:
        TrimatError: INDEX_OUT_OF_RANGE, MISSING_CONTEXT (unseen pair, no ctx),
            CONTEXT_OUT_OF_RANGE (unseen code under the 'error' policy).
    """
    check_index(user_index, model.n_users, "user")
    check_index(item_index, model.n_items, "item")
    C = context_for(model, user_index, item_index, ctx, out_of_range)
    score = float(model.U[user_index] @ C @ model.V[item_index]) * _scale(model)
    return float(np.clip(score, model.r_min, model.r_max))


def predict_trimat_many(
    model: TriMatModel,
    users: IntArray,
    items: IntArray,
    codes: Optional[IntArray] = None,
    out_of_range: str = "error",
) -> FloatArray:
    """Clipped predictions for paired index arrays; ``codes`` (N, 6) supplies per-row contexts."""
    if model.context_mode == "global":
        C = np.broadcast_to(model.C_global, (users.shape[0],) + CONTEXT_SHAPE)
    else:
        rows = np.array([model.pair_rows.get(key, -1) for key in zip(users.tolist(), items.tolist())],
                        dtype=np.int64).reshape(-1)
        unseen = rows < 0
        C = np.empty((users.shape[0],) + CONTEXT_SHAPE)
        C[~unseen] = model.C[rows[~unseen]]
        if unseen.any():
            if codes is None:
                first = int(np.flatnonzero(unseen)[0])
                raise _missing_context(int(users[first]), int(items[first]))
            C[unseen] = context_matrices(
                codes[unseen], model.context_maxima, model.missing_policy, model.context_means, out_of_range
            )
    scores = np.einsum("na,nab,nb->n", model.U[users], C, model.V[items]) * _scale(model)
    return np.clip(scores, model.r_min, model.r_max)


def trimat_user_scores(model: TriMatModel, user_index: int, C: Optional[ContextMatrix] = None) -> FloatArray:
    """Unclipped scores of every item for one user under a single context matrix.

    Global mode always uses the trained shared matrix. Per-interaction mode
    scores every item as an unseen pair under ``C``.
    """
    if model.context_mode == "global":
        C = model.C_global
    elif C is None:
        raise _missing_context(user_index, -1)
    return (model.U[user_index] @ C @ model.V.T) * _scale(model)


# ---------------------------------------------------------------------------
# Footprint
# ---------------------------------------------------------------------------

def footprint(
    n_users: int,
    n_items: int,
    baseline_k: int,
    n_pairs: Optional[int] = None,
    element_bytes: int = 8,
) -> FootprintReport:
    """Compare trainable-parameter counts of TriMat and classic MF.

    Global TriMat holds 3n + 2m + 6 parameters, classic MF k(n + m). With
    ``n_pairs`` the per-interaction count 3n + 2m + 6 * n_pairs is reported too.
    """
    values = {"n_users": n_users, "n_items": n_items, "baseline_k": baseline_k, "element_bytes": element_bytes}
    if n_pairs is not None:
        values["n_pairs"] = n_pairs
    bad = {k: v for k, v in values.items() if v < 1}
    if bad:
        raise TrimatError(
            code=INVALID_ARGUMENT,
            message=f"Footprint arguments must be >= 1, got {bad}",
            recovery=["Pass positive user, item and dimension counts"],
            context=bad,
        )
    cells = CONTEXT_SHAPE[0] * CONTEXT_SHAPE[1]
    trimat_count = USER_DIM * n_users + ITEM_DIM * n_items + cells
    classic_count = baseline_k * (n_users + n_items)
    per_interaction = None
    if n_pairs is not None:
        per_interaction = USER_DIM * n_users + ITEM_DIM * n_items + cells * n_pairs
    return FootprintReport(
        n_users=n_users,
        n_items=n_items,
        baseline_k=baseline_k,
        trimat_param_count=trimat_count,
        classic_param_count=classic_count,
        ratio=trimat_count / classic_count,
        element_bytes=element_bytes,
        per_interaction_param_count=per_interaction,
        n_pairs=n_pairs,
    )
