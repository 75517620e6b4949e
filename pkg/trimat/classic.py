"""Classic two-factor matrix factorization trained by SGD.

Two losses are supported:

- ``raw``: (R_ij - U_i . V_j)^2
- ``normalized``: (R_ij / R_max - cos(U_i, V_j))^2, predictions rescaled by R_max
"""

from __future__ import annotations

import logging
from typing import Callable, Iterator

import numpy as np

from trimat import kernels
from trimat.errors import DIVERGED, INDEX_OUT_OF_RANGE, INVALID_ARGUMENT, TrimatError, recovery_hints
from trimat.models import CLASSIC_VARIANTS, ClassicModel, Dataset, FloatArray, IntArray, TrainConfig
from trimat.rng import RngStream

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# SGD plumbing shared with the tri-factor trainer
# ---------------------------------------------------------------------------

def init_factors(cfg: TrainConfig, label: str, rows: int, cols: int) -> FloatArray:
    """Uniform [init_low, init_high) factors drawn from the ``label`` stream."""
    rng = RngStream(cfg.seed, label).generator()
    return np.ascontiguousarray(rng.uniform(cfg.init_low, cfg.init_high, size=(rows, cols)))


def epoch_orders(cfg: TrainConfig, n: int) -> Iterator[IntArray]:
    """Yield the interaction visiting order for each epoch."""
    rng = RngStream(cfg.seed, "shuffle").generator()
    identity = np.arange(n, dtype=np.int64)
    for _ in range(cfg.epochs):
        yield rng.permutation(n).astype(np.int64) if cfg.shuffle else identity


def run_epochs(
    cfg: TrainConfig,
    n: int,
    step: Callable[[IntArray], None],
    loss: Callable[[], float],
    params: Callable[[], tuple[FloatArray, ...]],
    name: str,
) -> list[float]:
    """Drive ``cfg.epochs`` SGD passes, recording the training loss after each.

    Raises:
        TrimatError: DIVERGED as soon as the loss or any parameter is non-finite.
    """
    trace: list[float] = []
    for epoch, order in enumerate(epoch_orders(cfg, n), start=1):
        step(order)
        value = float(loss())
        if not np.isfinite(value) or not all(np.isfinite(p).all() for p in params()):
            logger.warning("%s diverged at epoch %d (lr=%g)", name, epoch, cfg.learning_rate)
            raise TrimatError(
                code=DIVERGED,
                message=f"{name} training diverged at epoch {epoch} (learning_rate={cfg.learning_rate})",
                recovery=recovery_hints(DIVERGED, {"epoch": epoch}),
                context={"epoch": epoch, "learning_rate": cfg.learning_rate, "model": name},
            )
        trace.append(value)
        logger.debug("%s epoch %d/%d loss=%.6g", name, epoch, cfg.epochs, value)
    return trace


def check_index(value: int, size: int, kind: str) -> None:
    if not 0 <= value < size:
        raise TrimatError(
            code=INDEX_OUT_OF_RANGE,
            message=f"{kind} index {value} out of range [0, {size})",
            recovery=recovery_hints(INDEX_OUT_OF_RANGE),
            context={"kind": kind, "index": value, "size": size},
        )


# ---------------------------------------------------------------------------
# Training
# ---------------------------------------------------------------------------

def train_classic(train: Dataset, k: int, cfg: TrainConfig, variant: str = "raw") -> ClassicModel:
    """Fit U (n_users x k) and V (n_items x k) on ``train``.

    Raises:
        TrimatError: INVALID_ARGUMENT for a bad k or variant, DIVERGED when a
            parameter becomes non-finite (context carries the epoch).
    """
    if variant not in CLASSIC_VARIANTS:
        raise TrimatError(
            code=INVALID_ARGUMENT,
            message=f"Unknown classic variant: {variant!r}",
            recovery=[f"Use one of: {', '.join(CLASSIC_VARIANTS)}"],
            context={"variant": variant},
        )
    if k < 1:
        raise TrimatError(
            code=INVALID_ARGUMENT,
            message=f"Latent dimension k must be >= 1, got {k}",
            recovery=["The default classic dimension is 30"],
            context={"k": k},
        )

    arrays = train.arrays
    U = init_factors(cfg, "init-U", train.n_users, k)
    V = init_factors(cfg, "init-V", train.n_items, k)
    lr = float(cfg.learning_rate)
    eps = kernels.NORM_EPS

    if variant == "raw":
        targets = arrays.ratings

        def step(order: IntArray) -> None:
            kernels.classic_raw_epoch(arrays.users, arrays.items, targets, order, U, V, lr)

        def loss() -> float:
            return kernels.classic_raw_mse(arrays.users, arrays.items, targets, U, V)
    else:
        targets = arrays.ratings / train.r_max

        def step(order: IntArray) -> None:
            kernels.classic_normalized_epoch(arrays.users, arrays.items, targets, order, U, V, lr, eps)

        def loss() -> float:
            return kernels.classic_normalized_mse(arrays.users, arrays.items, targets, U, V, eps)

    logger.info("training classic-%s: k=%d lr=%g epochs=%d on %d interactions",
                variant, k, lr, cfg.epochs, len(train))
    trace = run_epochs(cfg, len(train), step, loss, lambda: (U, V), f"classic-{variant}")
    return ClassicModel(U=U, V=V, variant=variant, r_min=train.r_min, r_max=train.r_max, loss_trace=trace)


# ---------------------------------------------------------------------------
# Prediction
# ---------------------------------------------------------------------------

def classic_scores(model: ClassicModel, users: IntArray, items: IntArray) -> FloatArray:
    """Unclipped rating-scale scores for paired index arrays."""
    Ui = model.U[users]
    Vj = model.V[items]
    dots = np.einsum("nk,nk->n", Ui, Vj)
    if model.variant == "raw":
        return dots
    eps = kernels.NORM_EPS
    norms = np.maximum(np.linalg.norm(Ui, axis=1), eps) * np.maximum(np.linalg.norm(Vj, axis=1), eps)
    return model.r_max * dots / norms


def classic_user_scores(model: ClassicModel, user_index: int) -> FloatArray:
    """Unclipped scores of every item for one user."""
    items = np.arange(model.n_items, dtype=np.int64)
    return classic_scores(model, np.full(model.n_items, user_index, dtype=np.int64), items)


def predict_classic(model: ClassicModel, user_index: int, item_index: int) -> float:
    """Predicted rating, clipped to the training rating range."""
    check_index(user_index, model.n_users, "user")
    check_index(item_index, model.n_items, "item")
    score = classic_scores(model, np.array([user_index]), np.array([item_index]))[0]
    return float(np.clip(score, model.r_min, model.r_max))


def predict_classic_many(model: ClassicModel, users: IntArray, items: IntArray) -> FloatArray:
    return np.clip(classic_scores(model, users, items), model.r_min, model.r_max)
