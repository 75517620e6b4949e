"""Input hardening for CLI paths and JSON payloads."""

from __future__ import annotations

import json
import re
from pathlib import Path
from typing import Any

from trimat.errors import INVALID_ARGUMENT, TrimatError

_CONTROL_CHAR_RE = re.compile(r"[\x00-\x08\x0b\x0c\x0e-\x1f]")
_DANGEROUS_TOKEN_RE = re.compile(r"[?#%]")


def reject_control_chars(value: str, field_name: str) -> None:
    """Reject strings containing non-printable control characters."""
    if _CONTROL_CHAR_RE.search(value):
        raise TrimatError(
            code=INVALID_ARGUMENT,
            message=f"{field_name} contains control characters",
            recovery=[
                "Remove non-printable characters from the input",
                "Ensure values are plain UTF-8 text",
            ],
            context={"field": field_name},
        )


def validate_path_token(value: str, field_name: str) -> None:
    """Reject path arguments carrying URL-style fragments or encodings."""
    reject_control_chars(value, field_name)
    if _DANGEROUS_TOKEN_RE.search(value):
        raise TrimatError(
            code=INVALID_ARGUMENT,
            message=f"{field_name} contains forbidden characters (?, #, %)",
            recovery=["Pass a plain file path"],
            context={"field": field_name, "value": value},
        )


def validate_safe_output_path(path_value: str, field_name: str = "out") -> Path:
    """Validate and normalize an output path for CLI writes."""
    validate_path_token(path_value, field_name)
    candidate = Path(path_value).expanduser()
    if any(part == ".." for part in candidate.parts):
        raise TrimatError(
            code=INVALID_ARGUMENT,
            message=f"{field_name} must not contain parent traversal ('..')",
            recovery=[
                "Provide a direct path without '..'",
                "Use a dedicated output directory under your workspace",
            ],
            context={"field": field_name, "path": path_value},
        )
    return candidate


def safe_json_loads(raw: str, field_name: str) -> Any:
    """Strict JSON parsing with structured error output."""
    reject_control_chars(raw, field_name)
    try:
        return json.loads(raw)
    except json.JSONDecodeError as exc:
        raise TrimatError(
            code=INVALID_ARGUMENT,
            message=f"Invalid JSON in {field_name}: {exc.msg} (line {exc.lineno}, column {exc.colno})",
            recovery=["Validate JSON syntax (quotes, commas, braces)"],
            context={"field": field_name, "line": exc.lineno, "column": exc.colno},
        ) from exc


def parse_float_list(raw: str, field_name: str) -> list[float]:
    """Parse a comma-separated list of numbers such as '0.001,0.01,0.1'."""
    reject_control_chars(raw, field_name)
    try:
        values = [float(tok) for tok in raw.split(",") if tok.strip()]
    except ValueError as exc:
        raise TrimatError(
            code=INVALID_ARGUMENT,
            message=f"{field_name} must be a comma-separated list of numbers, got {raw!r}",
            recovery=["Use e.g. 0.001,0.005,0.01"],
            context={"field": field_name, "value": raw},
        ) from exc
    if not values:
        raise TrimatError(
            code=INVALID_ARGUMENT,
            message=f"{field_name} is empty",
            recovery=["Use e.g. 0.001,0.005,0.01"],
            context={"field": field_name},
        )
    return values
