"""Dataset validation: summary statistics plus data-quality warnings."""

from __future__ import annotations

from pathlib import Path
from typing import Any, Optional

import numpy as np

from trimat.errors import TrimatError
from trimat.ingest import load_csv
from trimat.models import CONTEXT_FIELDS, MISSING_CODE, ColumnMapping, Dataset

HIGH_MISSING_RATE = 0.5

HIGH_MISSING_CONTEXT = "HIGH_MISSING_CONTEXT"
SINGLE_INTERACTION_USERS = "SINGLE_INTERACTION_USERS"
SINGLE_INTERACTION_ITEMS = "SINGLE_INTERACTION_ITEMS"
FEW_INTERACTIONS = "FEW_INTERACTIONS"


class ValidationResult:
    """Collects errors, warnings and the dataset summary of one validation."""

    def __init__(self) -> None:
        self.errors: list[dict[str, Any]] = []
        self.warnings: list[dict[str, Any]] = []
        self.summary: Optional[dict[str, Any]] = None

    @property
    def valid(self) -> bool:
        return len(self.errors) == 0

    def add_error(self, code: str, message: str, **context: Any) -> None:
        self.errors.append({"code": code, "message": message, **context})

    def add_warning(self, code: str, message: str, **context: Any) -> None:
        self.warnings.append({"code": code, "message": message, **context})

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {
            "valid": self.valid,
            "errors": self.errors,
            "warnings": self.warnings,
        }
        if self.summary is not None:
            d["summary"] = self.summary
        return d


def missing_rates(ds: Dataset) -> dict[str, float]:
    """Fraction of interactions with each context field missing."""
    missing = ds.arrays.codes == MISSING_CODE
    return {name: float(missing[:, col].mean()) for col, name in enumerate(CONTEXT_FIELDS)}


def summarize(ds: Dataset) -> dict[str, Any]:
    user_counts = np.bincount(ds.arrays.users, minlength=ds.n_users)
    item_counts = ds.item_counts()
    return {
        **ds.summary(),
        "missing_context_rate": missing_rates(ds),
        "interactions_per_user": {
            "min": int(user_counts.min()),
            "max": int(user_counts.max()),
            "mean": round(float(user_counts.mean()), 3),
        },
        "interactions_per_item": {
            "min": int(item_counts.min()),
            "max": int(item_counts.max()),
            "mean": round(float(item_counts.mean()), 3),
        },
    }


def validate_dataset(ds: Dataset) -> ValidationResult:
    result = ValidationResult()
    result.summary = summarize(ds)

    for name, rate in result.summary["missing_context_rate"].items():
        if rate > HIGH_MISSING_RATE:
            result.add_warning(
                HIGH_MISSING_CONTEXT,
                f"Context field {name!r} is missing in {rate:.0%} of interactions",
                field=name,
                rate=round(rate, 4),
            )

    lonely_users = int((np.bincount(ds.arrays.users, minlength=ds.n_users) == 1).sum())
    if lonely_users:
        result.add_warning(
            SINGLE_INTERACTION_USERS,
            f"{lonely_users} user(s) have a single interaction and may land entirely in the test split",
            count=lonely_users,
        )
    lonely_items = int((ds.item_counts() == 1).sum())
    if lonely_items:
        result.add_warning(
            SINGLE_INTERACTION_ITEMS,
            f"{lonely_items} item(s) have a single interaction",
            count=lonely_items,
        )
    if len(ds) < 2:
        result.add_warning(FEW_INTERACTIONS, "A train/test split needs at least two interactions", count=len(ds))
    return result


def validate_file(path: str | Path, mapping: Optional[ColumnMapping] = None) -> ValidationResult:
    """Load and validate a delimited file; load failures become result errors."""
    try:
        ds = load_csv(path, mapping)
    except TrimatError as exc:
        result = ValidationResult()
        result.add_error(exc.code, exc.message, **exc.context)
        return result
    return validate_dataset(ds)
