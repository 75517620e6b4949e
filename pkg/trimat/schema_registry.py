"""Machine-readable schemas for config documents, reports, model files and commands."""

from __future__ import annotations

from typing import Any

from trimat.models import (
    ALGORITHMS,
    CONFIG_VERSION,
    CONTEXT_FIELDS,
    DEFAULT_LR_GRID,
    MISSING_POLICIES,
    OUT_OF_RANGE_POLICIES,
    RATING_SCALINGS,
    SPLIT_STRATEGIES,
)

SCHEMA_TARGETS = ("index", "config", "report", "model", "command")

_COLUMN_REF: dict[str, Any] = {"type": ["string", "integer"], "description": "Column name, or 0-based position"}


def mapping_schema() -> dict[str, Any]:
    properties: dict[str, Any] = {role: _COLUMN_REF for role in ("user", "item", "rating") + CONTEXT_FIELDS}
    properties["delimiter"] = {"type": "string", "minLength": 1, "maxLength": 1, "default": ","}
    properties["header"] = {"type": "boolean", "default": True}
    return {"type": "object", "properties": properties, "additionalProperties": False}


def config_schema() -> dict[str, Any]:
    """Return the experiment config document schema."""
    return {
        "type": "object",
        "properties": {
            "version": {"type": "string", "enum": [CONFIG_VERSION]},
            "dataset": {
                "oneOf": [
                    {
                        "type": "object",
                        "properties": {
                            "source": {"const": "csv"},
                            "path": {"type": "string", "description": "Relative paths resolve against the config file"},
                            "mapping": mapping_schema(),
                        },
                        "required": ["source", "path"],
                    },
                    {
                        "type": "object",
                        "properties": {
                            "source": {"const": "synthetic"},
                            "n_users": {"type": "integer", "minimum": 1, "default": 200},
                            "n_items": {"type": "integer", "minimum": 1, "default": 500},
                            "n_interactions": {"type": "integer", "minimum": 1, "default": 20000},
                            "zipf_exponent": {"type": "number", "minimum": 0, "default": 1.0},
                            "planted": {"type": "boolean", "default": True},
                            "seed": {"type": "integer"},
                        },
                        "required": ["source"],
                    },
                ]
            },
            "split": {
                "type": "object",
                "properties": {
                    "train_fraction": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1, "default": 0.8},
                    "strategy": {"type": "string", "enum": list(SPLIT_STRATEGIES)},
                    "seed": {"type": "integer"},
                },
            },
            "algorithms": {"type": "array", "items": {"type": "string", "enum": list(ALGORITHMS)}, "minItems": 1},
            "learning_rates": {
                "type": "array",
                "items": {"type": "number", "exclusiveMinimum": 0},
                "minItems": 1,
                "default": list(DEFAULT_LR_GRID),
            },
            "epochs": {"type": "integer", "minimum": 1, "default": 200},
            "classic_k": {"type": "integer", "minimum": 1, "default": 30},
            "baseline_k": {"type": "integer", "minimum": 1, "default": 30},
            "top_k": {"type": "integer", "minimum": 1, "default": 10},
            "scaling": {"type": "string", "enum": list(RATING_SCALINGS), "default": "scaled"},
            "missing_policy": {"type": "string", "enum": list(MISSING_POLICIES), "default": "mean"},
            "out_of_range": {"type": "string", "enum": list(OUT_OF_RANGE_POLICIES), "default": "clamp"},
            "init": {
                "type": "object",
                "properties": {"low": {"type": "number", "default": 0.01}, "high": {"type": "number", "default": 0.1}},
            },
            "shuffle": {"type": "boolean", "default": True},
            "seed": {"type": "integer", "default": 42},
            "workers": {"type": "integer", "minimum": 1, "default": 1},
        },
        "required": ["version", "dataset"],
    }


def report_schema() -> dict[str, Any]:
    """Return a summary of the structured report document."""
    cell = {
        "type": "object",
        "properties": {
            "algorithm": {"type": "string", "enum": list(ALGORITHMS)},
            "learning_rate": {"type": "number"},
            "seed": {"type": "integer"},
            "diverged": {"type": "boolean"},
            "diverged_epoch": {"type": ["integer", "null"]},
            "test_mae": {"type": ["number", "null"]},
            "dme": {"type": ["number", "null"]},
            "rec_slope": {"type": ["number", "null"]},
            "final_train_loss": {"type": ["number", "null"]},
            "param_count": {"type": ["integer", "null"]},
            "notes": {"type": "array", "items": {"type": "string"}},
        },
    }
    return {
        "type": "object",
        "properties": {
            "format_version": {"type": "string"},
            "config": {"type": "object", "description": "Config echo, including overrides"},
            "dataset": {"type": "object"},
            "split": {"type": "object"},
            "prediction_clip": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
            "dme_definition": {"type": "string"},
            "popularity": {"type": ["object", "null"]},
            "footprint": {"type": "object"},
            "cells": {"type": "array", "items": cell},
            "best": {"type": "object", "additionalProperties": {"type": ["object", "null"]}},
            "all_diverged": {"type": "array", "items": {"type": "string"}},
        },
        "numbers": "6 significant digits",
    }


def model_schema() -> dict[str, Any]:
    return {
        "type": "object",
        "properties": {
            "format": {"const": "trimat-model"},
            "format_version": {"const": 1},
            "kind": {"type": "string", "enum": ["classic", "trimat"]},
            "U": {"type": "array", "description": "n_users rows, row-major"},
            "V": {"type": "array", "description": "n_items rows, row-major"},
            "C_global": {"type": "array", "description": "3x2, global TriMat models"},
            "C_per": {"type": "array", "description": "{user, item, C} rows, per-interaction TriMat models"},
        },
        "required": ["format", "format_version", "kind", "U", "V"],
    }


def cli_command_schema() -> dict[str, Any]:
    """Return schema metadata for the top-level commands."""
    return {
        "commands": {
            "validate": {"args": ["data"], "options": ["--mapping"], "output": "json"},
            "synth": {
                "args": [],
                "options": ["--out", "--users", "--items", "--interactions", "--zipf", "--planted/--no-planted", "--seed"],
                "output": "json",
            },
            "train": {
                "args": ["data"],
                "options": [
                    "--out", "--algorithm", "--lr", "--epochs", "--k", "--scaling", "--missing",
                    "--out-of-range", "--split-frac", "--seed", "--mapping",
                ],
                "output": "json",
            },
            "evaluate": {
                "args": ["model", "data"],
                "options": ["--topk", "--split-frac", "--seed", "--mapping"],
                "output": "json",
            },
            "gridsearch": {
                "args": [],
                "options": [
                    "--config", "--out", "--seed", "--lr-grid", "--epochs", "--k", "--context-mode",
                    "--scaling", "--missing", "--split-frac", "--topk", "--workers", "--quiet",
                ],
                "output": "json",
            },
            "footprint": {"args": ["n_users", "n_items", "k"], "options": ["--pairs", "--element-bytes"], "output": "json"},
            "schema": {"args": ["target"], "targets": list(SCHEMA_TARGETS), "output": "json"},
            "version": {"args": [], "options": [], "output": "json"},
        }
    }


def schema_index() -> dict[str, Any]:
    return {"targets": list(SCHEMA_TARGETS)}
