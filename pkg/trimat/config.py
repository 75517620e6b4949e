"""Experiment config documents: parsing, defaults, and command-line overrides."""

from __future__ import annotations

import json
from dataclasses import replace
from pathlib import Path
from typing import Any, Optional

from trimat.errors import (
    CONFIG_NOT_FOUND,
    INVALID_CONFIG,
    MISSING_FIELD,
    TrimatError,
    recovery_hints,
)
from trimat.input_hardening import reject_control_chars
from trimat.models import ALGORITHMS, CONFIG_VERSION, CONTEXT_MODES, ExperimentConfig, SplitSpec

DATA_DIR = Path(__file__).parent / "data"
DEFAULT_CONFIG_PATH = DATA_DIR / "default_config.json"
SAMPLE_DATA_PATH = DATA_DIR / "sample_comoda.csv"


def parse_config(raw: str | dict[str, Any], base_dir: Optional[str] = None) -> ExperimentConfig:
    """Parse a JSON config document (string or already-decoded dict).

    Raises:
        TrimatError: INVALID_CONFIG (with line/column for JSON syntax errors),
            MISSING_FIELD, UNKNOWN_ALGORITHM.
    """
    if isinstance(raw, str):
        reject_control_chars(raw, "config")
        try:
            data = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise TrimatError(
                code=INVALID_CONFIG,
                message=f"Invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}",
                recovery=recovery_hints(INVALID_CONFIG),
                context={"line": exc.lineno, "column": exc.colno, "parse_error": exc.msg},
            ) from exc
    else:
        data = raw

    if not isinstance(data, dict):
        raise TrimatError(
            code=INVALID_CONFIG,
            message=f"Config must be a JSON object, got {type(data).__name__}",
            recovery=recovery_hints(INVALID_CONFIG),
        )
    if "version" not in data:
        raise TrimatError(
            code=MISSING_FIELD,
            message="Config missing required field: 'version'",
            recovery=[f"Add \"version\": \"{CONFIG_VERSION}\" to the top-level object"],
            context={"missing_field": "version"},
        )
    if data["version"] != CONFIG_VERSION:
        raise TrimatError(
            code=INVALID_CONFIG,
            message=f"Unsupported config version: {data['version']!r}",
            recovery=[f"Use version '{CONFIG_VERSION}'"],
            context={"supported_version": CONFIG_VERSION, "provided_version": data["version"]},
        )
    return ExperimentConfig.from_dict(data, base_dir=base_dir)


def load_config(path: Optional[str | Path] = None) -> ExperimentConfig:
    """Load a config file; ``None`` loads the bundled default (sample data, full grid)."""
    p = Path(path) if path is not None else DEFAULT_CONFIG_PATH
    if not p.is_file():
        raise TrimatError(
            code=CONFIG_NOT_FOUND,
            message=f"Config file not found: {p}",
            recovery=recovery_hints(CONFIG_NOT_FOUND),
            context={"path": str(p)},
        )
    return parse_config(p.read_text(encoding="utf-8"), base_dir=str(p.resolve().parent))


def resolve_dataset_path(cfg: ExperimentConfig) -> Optional[Path]:
    """Absolute dataset path; relative paths resolve against the config file's directory."""
    if cfg.dataset.path is None:
        return None
    p = Path(cfg.dataset.path).expanduser()
    if not p.is_absolute() and cfg.base_dir is not None:
        p = Path(cfg.base_dir) / p
    return p.resolve()


def _select_context_mode(algorithms: tuple[str, ...], mode: str) -> tuple[str, ...]:
    if mode not in CONTEXT_MODES:
        raise TrimatError(
            code=INVALID_CONFIG,
            message=f"Invalid context mode: {mode!r}",
            recovery=[f"Use one of: {', '.join(CONTEXT_MODES)}"],
            context={"field": "context_mode", "value": mode},
        )
    wanted = f"trimat-{mode}"
    picked: list[str] = []
    for algo in algorithms:
        name = wanted if algo.startswith("trimat-") else algo
        if name not in picked:
            picked.append(name)
    if wanted not in picked:
        picked.append(wanted)
    return tuple(a for a in ALGORITHMS if a in picked)


def apply_overrides(cfg: ExperimentConfig, **overrides: Any) -> ExperimentConfig:
    """Return ``cfg`` with command-line overrides applied and recorded.

    Recognized keys: seed, learning_rates, epochs, k, context_mode, scaling,
    missing_policy, train_fraction, top_k, workers. ``None`` values are skipped.
    ``k`` sets both the classic dimension and the footprint baseline dimension.
    ``context_mode`` restricts TriMat runs to that mode.
    """
    given = {key: value for key, value in overrides.items() if value is not None}
    if not given:
        return cfg

    changes: dict[str, Any] = {}
    for key, value in given.items():
        if key in ("seed", "epochs", "top_k", "workers"):
            changes[key] = int(value)
        elif key == "learning_rates":
            changes["learning_rates"] = tuple(float(lr) for lr in value)
        elif key == "k":
            changes["classic_k"] = int(value)
            changes["baseline_k"] = int(value)
        elif key in ("scaling", "missing_policy"):
            changes[key] = str(value)
        elif key == "context_mode":
            changes["algorithms"] = _select_context_mode(cfg.algorithms, str(value))
        elif key == "train_fraction":
            changes["split"] = SplitSpec(
                train_fraction=float(value), seed=cfg.split.seed, strategy=cfg.split.strategy
            )
        else:
            raise TrimatError(
                code=INVALID_CONFIG,
                message=f"Unknown override: {key!r}",
                recovery=recovery_hints(INVALID_CONFIG),
                context={"override": key},
            )

    # workers is execution-only and stays out of the report
    echo = dict(cfg.overrides)
    echo.update({
        key: list(value) if isinstance(value, (list, tuple)) else value
        for key, value in given.items()
        if key != "workers"
    })
    return replace(cfg, overrides=echo, **changes)
