from typing import Optional

import typer

from trimat.cli.utils import check_input_arg, json_error, json_out, make_progress_callback
from trimat.errors import TrimatError

app = typer.Typer(help="Learning-rate grid search")


@app.command("gridsearch")
def cmd_gridsearch(
    config: Optional[str] = typer.Option(None, "--config", help="Experiment config JSON (default: bundled sample)"),
    out: str = typer.Option("trimat-out", "--out", help="Output directory for report and plot data"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Master seed"),
    lr_grid: Optional[str] = typer.Option(None, "--lr-grid", help="Comma-separated learning rates"),
    epochs: Optional[int] = typer.Option(None, "--epochs", help="Training epochs per cell"),
    k: Optional[int] = typer.Option(None, "--k", help="Classic latent dimension (also the footprint baseline)"),
    context_mode: Optional[str] = typer.Option(None, "--context-mode", help="TriMat context mode: global or per-interaction"),
    scaling: Optional[str] = typer.Option(None, "--scaling", help="TriMat target scaling: scaled or raw"),
    missing: Optional[str] = typer.Option(None, "--missing", help="Missing-context fill: mean or const05"),
    split_frac: Optional[float] = typer.Option(None, "--split-frac", help="Training fraction of the interactions"),
    topk: Optional[int] = typer.Option(None, "--topk", help="Recommendation list length"),
    workers: Optional[int] = typer.Option(None, "--workers", help="Cells trained concurrently"),
    quiet: bool = typer.Option(False, "-q", "--quiet", help="Suppress progress output on stderr"),
) -> int:
    """Run the (algorithm x learning rate) grid and write report.json, report.tsv and plotdata/."""
    from trimat.config import apply_overrides, load_config
    from trimat.experiment import run_experiment, write_artifacts
    from trimat.input_hardening import parse_float_list, validate_safe_output_path

    try:
        if config is not None:
            check_input_arg(config, "config")
        out_dir = validate_safe_output_path(out, "out")
        cfg = apply_overrides(
            load_config(config),
            seed=seed,
            learning_rates=parse_float_list(lr_grid, "lr_grid") if lr_grid is not None else None,
            epochs=epochs,
            k=k,
            context_mode=context_mode,
            scaling=scaling,
            missing_policy=missing,
            train_fraction=split_frac,
            top_k=topk,
            workers=workers,
        )
        report = run_experiment(cfg, progress_callback=make_progress_callback(quiet))
        written = write_artifacts(report, out_dir)
    except TrimatError as exc:
        return json_error(exc)
    return json_out({
        "success": True,
        "output_dir": str(out_dir),
        "files": written,
        "cells": len(report.cells),
        "diverged_cells": sum(1 for cell in report.cells if cell.diverged),
        "best": report.best,
        "all_diverged": report.all_diverged,
    })
