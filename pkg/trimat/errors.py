"""Structured error handling with error codes and recovery suggestions."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

# ---------------------------------------------------------------------------
# Error codes
# ---------------------------------------------------------------------------

# Configuration / usage
INVALID_ARGUMENT = "INVALID_ARGUMENT"
MISSING_FIELD = "MISSING_FIELD"
INVALID_CONFIG = "INVALID_CONFIG"
CONFIG_NOT_FOUND = "CONFIG_NOT_FOUND"
UNKNOWN_ALGORITHM = "UNKNOWN_ALGORITHM"
INVALID_MAPPING = "INVALID_MAPPING"
INVALID_SPLIT_SPEC = "INVALID_SPLIT_SPEC"
INVALID_TRAIN_CONFIG = "INVALID_TRAIN_CONFIG"

# Data / schema
INPUT_NOT_FOUND = "INPUT_NOT_FOUND"
SCHEMA_ERROR = "SCHEMA_ERROR"
EMPTY_DATASET = "EMPTY_DATASET"
INVALID_RATING = "INVALID_RATING"
RATING_PARSE_ERROR = "RATING_PARSE_ERROR"
INVALID_CONTEXT_CODE = "INVALID_CONTEXT_CODE"
CONTEXT_OUT_OF_RANGE = "CONTEXT_OUT_OF_RANGE"
DEGENERATE_SPLIT = "DEGENERATE_SPLIT"

# Computation
DIVERGED = "DIVERGED"
MISSING_CONTEXT = "MISSING_CONTEXT"
INDEX_OUT_OF_RANGE = "INDEX_OUT_OF_RANGE"
LENGTH_MISMATCH = "LENGTH_MISMATCH"
EMPTY_INPUT = "EMPTY_INPUT"
UNDEFINED_SLOPE = "UNDEFINED_SLOPE"
INVALID_MODEL_FILE = "INVALID_MODEL_FILE"

# Exit codes for CLI
EXIT_SUCCESS = 0
EXIT_CONFIG = 1
EXIT_DATA = 2
EXIT_SYSTEM = 3


# Error code classification for CLI exit behavior.
_CONFIG_ERROR_CODES = {
    INVALID_ARGUMENT,
    MISSING_FIELD,
    INVALID_CONFIG,
    CONFIG_NOT_FOUND,
    UNKNOWN_ALGORITHM,
    INVALID_MAPPING,
    INVALID_SPLIT_SPEC,
    INVALID_TRAIN_CONFIG,
}


def exit_code_for_error(code: str) -> int:
    """Map a structured error code to a process exit code."""
    if code in _CONFIG_ERROR_CODES:
        return EXIT_CONFIG
    return EXIT_DATA


# ---------------------------------------------------------------------------
# TrimatError exception
# ---------------------------------------------------------------------------

@dataclass
class TrimatError(Exception):
    """Structured error with code, message, recovery hints, and context."""
    code: str
    message: str
    recovery: list[str] = field(default_factory=list)
    context: dict[str, Any] = field(default_factory=dict)

    def __str__(self) -> str:
        return f"[{self.code}] {self.message}"

    def to_dict(self) -> dict[str, Any]:
        return {
            "error": True,
            "code": self.code,
            "message": self.message,
            "recovery": self.recovery,
            "context": self.context,
        }


# ---------------------------------------------------------------------------
# Recovery hint factory
# ---------------------------------------------------------------------------

_RECOVERY_MAP: dict[str, list[str]] = {
    INPUT_NOT_FOUND: [
        "Check the file path for typos",
        "Relative dataset paths in a config resolve against the config file's directory",
    ],
    CONFIG_NOT_FOUND: [
        "Check the --config path",
        "Omit --config to use the bundled default config and sample data",
    ],
    INVALID_CONFIG: [
        "Run 'trimat schema config' to see the config document schema",
        "Validate JSON syntax (quotes, commas, braces)",
    ],
    UNKNOWN_ALGORITHM: [
        "Use one of: classic-raw, classic-normalized, trimat-global, trimat-per-interaction",
    ],
    SCHEMA_ERROR: [
        "Check the column mapping against the file header",
        "Use 0-based column positions when the file has no header row",
    ],
    INVALID_MAPPING: [
        "Map user, item, rating and the six context roles to nine distinct columns",
    ],
    EMPTY_DATASET: [
        "The input produced zero usable interactions",
        "Check the delimiter and header settings of the column mapping",
    ],
    INVALID_RATING: [
        "Ratings must be strictly positive so they can be normalized by the maximum rating",
    ],
    RATING_PARSE_ERROR: [
        "Fix or remove the offending row",
        "Check that the rating column is mapped to the right column",
    ],
    INVALID_CONTEXT_CODE: [
        "Context codes are 1-based ordinals; use -1 (or leave the cell empty) for missing values",
    ],
    CONTEXT_OUT_OF_RANGE: [
        "The code was never observed in the training split",
        "Use out_of_range='clamp' to cap the normalized value at 1.0",
    ],
    DEGENERATE_SPLIT: [
        "Choose a train_fraction that leaves at least one interaction on each side",
    ],
    INVALID_SPLIT_SPEC: [
        "train_fraction must lie strictly between 0 and 1",
    ],
    INVALID_TRAIN_CONFIG: [
        "learning_rate must be > 0 (or exactly 0 to freeze parameters), epochs >= 1, init low < high",
    ],
    DIVERGED: [
        "Lower the learning rate",
        "Grid search records diverged cells instead of aborting",
    ],
    MISSING_CONTEXT: [
        "Per-interaction models need a context for (user, item) pairs not seen in training",
        "Pass a context vector, or train in global context mode",
    ],
    INDEX_OUT_OF_RANGE: [
        "User and item indices are 0-based dense indices from the training dataset",
    ],
    UNDEFINED_SLOPE: [
        "At least two items with positive frequency are needed to fit a rank-frequency slope",
        "Increase top-K or the number of users",
    ],
    INVALID_MODEL_FILE: [
        "Model files are written by 'trimat train'; re-train to regenerate the file",
    ],
}


def recovery_hints(code: str, context: dict[str, Any] | None = None) -> list[str]:
    """Return recovery suggestions for a given error code."""
    hints = list(_RECOVERY_MAP.get(code, []))
    context = context or {}

    if code == SCHEMA_ERROR and "column" in context:
        hints.insert(0, f"Column not found: {context['column']!r}")

    if code == INPUT_NOT_FOUND and "path" in context:
        hints.insert(0, f"File not found: {context['path']}")

    if code == RATING_PARSE_ERROR and "row" in context:
        hints.insert(0, f"Data row {context['row']} has an unparseable rating")

    if code == DIVERGED and "epoch" in context:
        hints.insert(0, f"Parameters became non-finite during epoch {context['epoch']}")

    return hints
