from pathlib import Path
from typing import Optional

import typer

from trimat.cli.utils import check_input_arg, json_error, json_out
from trimat.errors import EXIT_SUCCESS, INPUT_NOT_FOUND, INVALID_MAPPING, TrimatError, exit_code_for_error, recovery_hints
from trimat.input_hardening import safe_json_loads, validate_safe_output_path
from trimat.models import ColumnMapping

app = typer.Typer(help="Dataset validation and synthetic data")


def read_mapping(mapping_path: Optional[str]) -> Optional[ColumnMapping]:
    """Load a column mapping JSON file; None keeps the LDOS-CoMoDa default layout."""
    if mapping_path is None:
        return None
    check_input_arg(mapping_path, "mapping")
    p = Path(mapping_path)
    if not p.is_file():
        raise TrimatError(
            code=INPUT_NOT_FOUND,
            message=f"Mapping file not found: {p}",
            recovery=recovery_hints(INPUT_NOT_FOUND, {"path": str(p)}),
            context={"path": str(p)},
        )
    data = safe_json_loads(p.read_text(encoding="utf-8"), "mapping")
    if not isinstance(data, dict):
        raise TrimatError(
            code=INVALID_MAPPING,
            message="Mapping file must hold a JSON object of role -> column",
            recovery=["Run 'trimat schema config' and see dataset.mapping"],
            context={"path": str(p)},
        )
    return ColumnMapping.from_dict(data)


@app.command("validate")
def cmd_validate(
    data: str = typer.Argument(..., help="Delimited interaction file"),
    mapping: Optional[str] = typer.Option(None, "--mapping", help="JSON file mapping roles to columns"),
) -> int:
    """Validate a dataset and print its summary."""
    from trimat.validation import validate_file
    try:
        check_input_arg(data, "data")
        result = validate_file(data, read_mapping(mapping))
    except TrimatError as exc:
        return json_error(exc)
    code = EXIT_SUCCESS if result.valid else exit_code_for_error(result.errors[0]["code"])
    return json_out(result.to_dict(), code)


@app.command("synth")
def cmd_synth(
    out: str = typer.Option(..., "--out", help="Output CSV path"),
    users: int = typer.Option(200, "--users", help="Number of users"),
    items: int = typer.Option(500, "--items", help="Number of items"),
    interactions: int = typer.Option(20000, "--interactions", help="Number of interactions"),
    zipf: float = typer.Option(1.0, "--zipf", help="Zipf exponent of item popularity"),
    planted: bool = typer.Option(True, "--planted/--no-planted", help="Noiseless ratings from a planted TriMat model"),
    seed: int = typer.Option(0, "--seed", help="Generator seed"),
) -> int:
    """Generate a Zipf-popularity dataset in the LDOS-CoMoDa column layout."""
    from trimat.ingest import PlantedTriMat, synth_zipf, write_csv
    try:
        path = validate_safe_output_path(out, "out")
        latent = PlantedTriMat.random(users, items, seed) if planted and users > 0 and items > 0 else None
        ds = synth_zipf(users, items, interactions, zipf, latent, seed)
        written = write_csv(ds, path)
    except TrimatError as exc:
        return json_error(exc)
    return json_out({
        "success": True,
        "output_path": str(written),
        "planted": planted,
        "seed": seed,
        "summary": ds.summary(),
    })
