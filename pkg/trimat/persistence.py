"""Versioned JSON model files for classic and tri-factor models.

Layout::

    {"format": "trimat-model", "format_version": 1, "kind": "classic" | "trimat",
     "n_users": .., "n_items": .., "r_min": .., "r_max": .., "U": [[..]], "V": [[..]],
     ...kind-specific fields}

Classic files add ``variant`` and ``k``. TriMat files add ``context_mode``,
``rating_scaling``, ``missing_policy``, ``context_maxima``, ``context_means``
and either ``C_global`` or ``C_per`` (rows of user, item, C sorted by user
then item).
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np

from trimat.errors import INPUT_NOT_FOUND, INVALID_MODEL_FILE, TrimatError, recovery_hints
from trimat.input_hardening import safe_json_loads
from trimat.models import (
    CLASSIC_VARIANTS,
    CONTEXT_MODES,
    CONTEXT_SHAPE,
    MISSING_POLICIES,
    RATING_SCALINGS,
    ClassicModel,
    ContextMaxima,
    TriMatModel,
)

MODEL_FORMAT = "trimat-model"
MODEL_FORMAT_VERSION = 1

Model = Union[ClassicModel, TriMatModel]


def model_to_dict(model: Model) -> dict[str, Any]:
    d: dict[str, Any] = {
        "format": MODEL_FORMAT,
        "format_version": MODEL_FORMAT_VERSION,
        "kind": "classic" if isinstance(model, ClassicModel) else "trimat",
        "n_users": model.n_users,
        "n_items": model.n_items,
        "r_min": model.r_min,
        "r_max": model.r_max,
    }
    if isinstance(model, ClassicModel):
        d["variant"] = model.variant
        d["k"] = model.k
    else:
        d["context_mode"] = model.context_mode
        d["rating_scaling"] = model.rating_scaling
        d["missing_policy"] = model.missing_policy
        d["context_maxima"] = model.context_maxima.to_dict()
        d["context_means"] = list(model.context_means)
    d["U"] = model.U.tolist()
    d["V"] = model.V.tolist()
    if isinstance(model, TriMatModel):
        if model.context_mode == "global":
            d["C_global"] = model.C_global.tolist()
        else:
            d["C_per"] = [
                {"user": u, "item": i, "C": model.C[row].tolist()}
                for (u, i), row in sorted(model.pair_rows.items())
            ]
    d["loss_trace"] = list(model.loss_trace)
    return d


def _invalid(message: str, **context: Any) -> TrimatError:
    return TrimatError(
        code=INVALID_MODEL_FILE,
        message=message,
        recovery=recovery_hints(INVALID_MODEL_FILE),
        context=context,
    )


def _matrix(data: dict[str, Any], key: str, rows: int, cols: int) -> np.ndarray:
    try:
        arr = np.ascontiguousarray(np.asarray(data[key], dtype=np.float64).reshape(rows, cols))
    except (KeyError, TypeError, ValueError) as exc:
        raise _invalid(f"Field {key!r} is missing or not a {rows}x{cols} matrix", field=key) from exc
    return arr


def model_from_dict(data: Any) -> Model:
    """Rebuild a model from its JSON container.

    Raises:
        TrimatError: INVALID_MODEL_FILE for a malformed or wrong-version container.
    """
    if not isinstance(data, dict) or data.get("format") != MODEL_FORMAT:
        raise _invalid(f"Not a {MODEL_FORMAT} file")
    if data.get("format_version") != MODEL_FORMAT_VERSION:
        raise _invalid(
            f"Unsupported model format_version: {data.get('format_version')!r}",
            supported=MODEL_FORMAT_VERSION,
        )
    try:
        kind = data["kind"]
        n_users = int(data["n_users"])
        n_items = int(data["n_items"])
        r_min = float(data["r_min"])
        r_max = float(data["r_max"])
        trace = [float(x) for x in data.get("loss_trace", [])]

        if kind == "classic":
            if data["variant"] not in CLASSIC_VARIANTS:
                raise _invalid(f"Unknown classic variant: {data['variant']!r}")
            k = int(data["k"])
            return ClassicModel(
                U=_matrix(data, "U", n_users, k),
                V=_matrix(data, "V", n_items, k),
                variant=data["variant"],
                r_min=r_min,
                r_max=r_max,
                loss_trace=trace,
            )
        if kind != "trimat":
            raise _invalid(f"Unknown model kind: {kind!r}")

        mode = data["context_mode"]
        if mode not in CONTEXT_MODES:
            raise _invalid(f"Unknown context mode: {mode!r}")
        if data["rating_scaling"] not in RATING_SCALINGS:
            raise _invalid(f"Unknown rating scaling: {data['rating_scaling']!r}")
        missing_policy = data.get("missing_policy", "mean")
        if missing_policy not in MISSING_POLICIES:
            raise _invalid(f"Unknown missing policy: {missing_policy!r}")
        rows, cols = CONTEXT_SHAPE
        pair_rows: dict[tuple[int, int], int] = {}
        if mode == "global":
            C = _matrix(data, "C_global", rows, cols)[np.newaxis]
        else:
            entries = data["C_per"]
            C = np.empty((len(entries), rows, cols))
            for n, entry in enumerate(entries):
                pair_rows[(int(entry["user"]), int(entry["item"]))] = n
                C[n] = _matrix(entry, "C", rows, cols)
        return TriMatModel(
            U=_matrix(data, "U", n_users, rows),
            V=_matrix(data, "V", n_items, cols),
            C=np.ascontiguousarray(C),
            pair_rows=pair_rows,
            context_mode=mode,
            rating_scaling=data["rating_scaling"],
            r_min=r_min,
            r_max=r_max,
            context_maxima=ContextMaxima.from_dict(data["context_maxima"]),
            context_means=tuple(float(x) for x in data["context_means"]),
            missing_policy=missing_policy,
            loss_trace=trace,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise _invalid(f"Malformed model file: {exc}") from exc


def save_model(model: Model, path: str | Path, metadata: Optional[dict[str, Any]] = None) -> Path:
    """Write ``model`` as JSON; ``metadata`` (e.g. the training split) is stored alongside."""
    d = model_to_dict(model)
    if metadata:
        d["metadata"] = metadata
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(d) + "\n", encoding="utf-8")
    return out


def load_model(path: str | Path) -> Model:
    return load_model_file(path)[0]


def load_model_file(path: str | Path) -> tuple[Model, dict[str, Any]]:
    """Load a model file, returning the model and its stored metadata."""
    p = Path(path)
    if not p.is_file():
        raise TrimatError(
            code=INPUT_NOT_FOUND,
            message=f"Model file not found: {p}",
            recovery=recovery_hints(INPUT_NOT_FOUND, {"path": str(p)}),
            context={"path": str(p)},
        )
    try:
        data = safe_json_loads(p.read_text(encoding="utf-8"), "model")
    except TrimatError as exc:
        raise _invalid(f"Model file is not valid JSON: {exc.message}", path=str(p)) from exc
    metadata = data.get("metadata", {}) if isinstance(data, dict) else {}
    return model_from_dict(data), dict(metadata)
