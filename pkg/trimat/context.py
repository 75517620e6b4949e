"""Context matrix construction from ordinal context codes."""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from trimat.errors import (
    CONTEXT_OUT_OF_RANGE,
    INVALID_ARGUMENT,
    TrimatError,
    recovery_hints,
)
from trimat.models import (
    CONTEXT_FIELDS,
    CONTEXT_SHAPE,
    MISSING_CODE,
    MISSING_POLICIES,
    OUT_OF_RANGE_POLICIES,
    ContextMatrix,
    ContextMaxima,
    ContextVector,
    FloatArray,
    IntArray,
)

CONST_FILL = 0.5


def _check_policies(missing_policy: str, out_of_range: str, field_means: Optional[Sequence[float]]) -> None:
    if missing_policy not in MISSING_POLICIES:
        raise TrimatError(
            code=INVALID_ARGUMENT,
            message=f"Unknown missing policy: {missing_policy!r}",
            recovery=[f"Use one of: {', '.join(MISSING_POLICIES)}"],
            context={"missing_policy": missing_policy},
        )
    if out_of_range not in OUT_OF_RANGE_POLICIES:
        raise TrimatError(
            code=INVALID_ARGUMENT,
            message=f"Unknown out-of-range policy: {out_of_range!r}",
            recovery=[f"Use one of: {', '.join(OUT_OF_RANGE_POLICIES)}"],
            context={"out_of_range": out_of_range},
        )
    if missing_policy == "mean" and field_means is None:
        raise TrimatError(
            code=INVALID_ARGUMENT,
            message="missing_policy 'mean' needs the training-split field means",
            recovery=["Pass field_means=dataset.context_means", "Or use missing_policy 'const05'"],
            context={"missing_policy": missing_policy},
        )


def context_maxima_from_codes(codes: IntArray) -> ContextMaxima:
    """Per-field maximum over present codes; fields with no present code get 1."""
    maxima = []
    for col in range(len(CONTEXT_FIELDS)):
        present = codes[:, col][codes[:, col] != MISSING_CODE]
        maxima.append(int(present.max()) if present.size else 1)
    return ContextMaxima(*maxima)


def context_field_means(codes: IntArray, maxima: ContextMaxima) -> tuple[float, ...]:
    """Per-field mean of present normalized values (code / maximum); 0.5 when none is present."""
    means = []
    for col, maximum in enumerate(maxima.values):
        present = codes[:, col][codes[:, col] != MISSING_CODE]
        means.append(float(np.mean(present / maximum)) if present.size else CONST_FILL)
    return tuple(means)


def build_context_matrix(
    ctx: ContextVector,
    maxima: ContextMaxima,
    missing_policy: str = "mean",
    field_means: Optional[Sequence[float]] = None,
    out_of_range: str = "error",
) -> ContextMatrix:
    """Build the 3x2 context matrix of one interaction.

    Args:
        ctx: The interaction's context codes.
        maxima: Per-field maxima from the training split.
        missing_policy: 'mean' fills a missing field with its training mean,
            'const05' with 0.5.
        field_means: Training-split field means, required for 'mean'.
        out_of_range: 'error' rejects a code above its maximum, 'clamp' maps it to 1.0.

    Returns:
        float64 array [[location, mood], [weather, season], [daytype, end_emotion]].

    Raises:
        TrimatError: CONTEXT_OUT_OF_RANGE for an unseen code under the 'error' policy.
    """
    _check_policies(missing_policy, out_of_range, field_means)
    values = np.empty(len(CONTEXT_FIELDS), dtype=np.float64)
    for col, (name, code, maximum) in enumerate(zip(CONTEXT_FIELDS, ctx.codes, maxima.values)):
        if code == MISSING_CODE:
            values[col] = field_means[col] if missing_policy == "mean" and field_means is not None else CONST_FILL
        elif code > maximum:
            if out_of_range != "clamp":
                raise TrimatError(
                    code=CONTEXT_OUT_OF_RANGE,
                    message=f"Context field {name!r} code {code} exceeds training maximum {maximum}",
                    recovery=recovery_hints(CONTEXT_OUT_OF_RANGE),
                    context={"field": name, "code": code, "maximum": maximum},
                )
            values[col] = 1.0
        else:
            values[col] = code / maximum
    return values.reshape(CONTEXT_SHAPE)


def context_matrices(
    codes: IntArray,
    maxima: ContextMaxima,
    missing_policy: str = "mean",
    field_means: Optional[Sequence[float]] = None,
    out_of_range: str = "error",
) -> FloatArray:
    """Vectorized build_context_matrix over an (N, 6) code array, returning (N, 3, 2)."""
    _check_policies(missing_policy, out_of_range, field_means)
    codes = np.asarray(codes, dtype=np.int64).reshape(-1, len(CONTEXT_FIELDS))
    denom = np.asarray(maxima.values, dtype=np.float64)
    missing = codes == MISSING_CODE
    over = (codes > denom) & ~missing
    if over.any() and out_of_range != "clamp":
        row, col = (int(v) for v in np.argwhere(over)[0])
        raise TrimatError(
            code=CONTEXT_OUT_OF_RANGE,
            message=(
                f"Context field {CONTEXT_FIELDS[col]!r} code {int(codes[row, col])} "
                f"exceeds training maximum {maxima.values[col]}"
            ),
            recovery=recovery_hints(CONTEXT_OUT_OF_RANGE),
            context={"field": CONTEXT_FIELDS[col], "row": row, "code": int(codes[row, col])},
        )
    values = np.minimum(codes / denom, 1.0)
    if missing_policy == "mean" and field_means is not None:
        fill = np.asarray(field_means, dtype=np.float64)
    else:
        fill = np.full(len(CONTEXT_FIELDS), CONST_FILL)
    values = np.where(missing, fill, values)
    return np.ascontiguousarray(values.reshape((-1,) + CONTEXT_SHAPE))


def mean_context_matrix(
    codes: IntArray,
    maxima: ContextMaxima,
    missing_policy: str = "mean",
    field_means: Optional[Sequence[float]] = None,
    out_of_range: str = "error",
) -> ContextMatrix:
    """Field-wise mean of the context matrices of all rows."""
    return np.ascontiguousarray(
        context_matrices(codes, maxima, missing_policy, field_means, out_of_range).mean(axis=0)
    )
