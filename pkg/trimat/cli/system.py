from typing import Any, Optional

import typer

from trimat.cli.utils import json_error, json_out
from trimat.errors import INVALID_ARGUMENT, TrimatError
from trimat.schema_registry import (
    SCHEMA_TARGETS,
    cli_command_schema,
    config_schema,
    model_schema,
    report_schema,
    schema_index,
)

app = typer.Typer(help="Footprint arithmetic and schemas")

_SCHEMAS = {
    "index": schema_index,
    "config": config_schema,
    "report": report_schema,
    "model": model_schema,
    "command": cli_command_schema,
}


@app.command("footprint")
def cmd_footprint(
    n_users: int = typer.Argument(..., help="Number of users"),
    n_items: int = typer.Argument(..., help="Number of items"),
    k: int = typer.Argument(..., help="Classic MF latent dimension"),
    pairs: Optional[int] = typer.Option(None, "--pairs", help="Distinct (user, item) pairs for the per-interaction count"),
    element_bytes: int = typer.Option(8, "--element-bytes", help="Bytes per stored parameter"),
) -> int:
    """Compare TriMat and classic MF parameter counts against the 10% threshold."""
    from trimat.trifactor import footprint
    try:
        report = footprint(n_users, n_items, k, n_pairs=pairs, element_bytes=element_bytes)
    except TrimatError as exc:
        return json_error(exc)
    return json_out(report.to_dict())


@app.command("schema")
def cmd_schema(
    target: str = typer.Argument("index", help=f"One of: {', '.join(SCHEMA_TARGETS)}"),
) -> int:
    """Print a machine-readable schema."""
    builder = _SCHEMAS.get(target)
    if builder is None:
        return json_error(TrimatError(
            code=INVALID_ARGUMENT,
            message=f"Unknown schema target: {target!r}",
            recovery=[f"Use one of: {', '.join(SCHEMA_TARGETS)}"],
            context={"target": target, "targets": list(SCHEMA_TARGETS)},
        ))
    payload: dict[str, Any] = builder()
    return json_out(payload)


@app.command("version")
def cmd_version() -> int:
    """Print the package version."""
    from trimat import __version__
    return json_out({"name": "trimat", "version": __version__})
