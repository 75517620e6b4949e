from typing import Any, Optional

import typer

from trimat.cli.data import read_mapping
from trimat.cli.utils import check_input_arg, json_error, json_out
from trimat.errors import INVALID_ARGUMENT, INVALID_MODEL_FILE, TrimatError, recovery_hints
from trimat.models import ALGORITHMS, MISSING_POLICIES, OUT_OF_RANGE_POLICIES, RATING_SCALINGS, SplitSpec

app = typer.Typer(help="Single-model training and evaluation")


def _check_choice(value: str, choices: tuple[str, ...], option: str) -> str:
    if value not in choices:
        raise TrimatError(
            code=INVALID_ARGUMENT,
            message=f"{option} must be one of {', '.join(choices)}, got {value!r}",
            recovery=[f"Use {option} {choices[0]}"],
            context={"option": option, "value": value},
        )
    return value


@app.command("train")
def cmd_train(
    data: str = typer.Argument(..., help="Delimited interaction file"),
    out: str = typer.Option(..., "--out", help="Model file to write"),
    algorithm: str = typer.Option("trimat-global", "--algorithm", help=f"One of: {', '.join(ALGORITHMS)}"),
    lr: float = typer.Option(0.005, "--lr", help="SGD learning rate"),
    epochs: int = typer.Option(200, "--epochs", help="Training epochs"),
    k: int = typer.Option(30, "--k", help="Latent dimension of the classic variants"),
    scaling: str = typer.Option("scaled", "--scaling", help="TriMat target scaling: scaled or raw"),
    missing: str = typer.Option("mean", "--missing", help="Missing-context fill: mean or const05"),
    out_of_range: str = typer.Option("clamp", "--out-of-range", help="Unseen context codes: error or clamp"),
    split_frac: float = typer.Option(0.8, "--split-frac", help="Training fraction of the interactions"),
    seed: int = typer.Option(0, "--seed", help="Seed for the split, initialization and shuffling"),
    mapping: Optional[str] = typer.Option(None, "--mapping", help="JSON file mapping roles to columns"),
) -> int:
    """Train one model on the training split and report its test MAE."""
    from trimat.experiment import fit_algorithm, predict_test
    from trimat.ingest import load_csv, split
    from trimat.input_hardening import validate_safe_output_path
    from trimat.metrics import mae
    from trimat.models import TrainConfig
    from trimat.persistence import save_model
    from trimat.rng import derive_seed

    try:
        check_input_arg(data, "data")
        out_path = validate_safe_output_path(out, "out")
        _check_choice(algorithm, ALGORITHMS, "--algorithm")
        _check_choice(scaling, RATING_SCALINGS, "--scaling")
        _check_choice(missing, MISSING_POLICIES, "--missing")
        _check_choice(out_of_range, OUT_OF_RANGE_POLICIES, "--out-of-range")
        split_spec = SplitSpec(train_fraction=split_frac, seed=seed)
        tc = TrainConfig(learning_rate=lr, epochs=epochs, seed=derive_seed(seed, algorithm))

        ds = load_csv(data, read_mapping(mapping))
        train, test = split(ds, split_spec)
        model = fit_algorithm(algorithm, train, tc, k, scaling, missing, out_of_range)
        test_mae = mae(predict_test(model, test, out_of_range), test.arrays.ratings)
        metadata: dict[str, Any] = {
            "algorithm": algorithm,
            "split": split_spec.to_dict(),
            "out_of_range": out_of_range,
            "train": tc.to_dict(),
            "n_interactions": len(ds),
        }
        written = save_model(model, out_path, metadata)
    except TrimatError as exc:
        return json_error(exc)
    return json_out({
        "success": True,
        "algorithm": algorithm,
        "model_path": str(written),
        "train_size": len(train),
        "test_size": len(test),
        "test_mae": test_mae,
        "final_train_loss": model.loss_trace[-1],
        "param_count": model.param_count,
    })


@app.command("evaluate")
def cmd_evaluate(
    model: str = typer.Argument(..., help="Model file written by 'trimat train'"),
    data: str = typer.Argument(..., help="The delimited file the model was trained on"),
    topk: int = typer.Option(10, "--topk", help="Recommendation list length"),
    split_frac: Optional[float] = typer.Option(None, "--split-frac", help="Override the stored training fraction"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Override the stored split seed"),
    mapping: Optional[str] = typer.Option(None, "--mapping", help="JSON file mapping roles to columns"),
) -> int:
    """Re-create the model's split and report test MAE, recommendation slope and DME."""
    from trimat.experiment import evaluate_model
    from trimat.ingest import load_csv, split
    from trimat.persistence import load_model_file

    try:
        check_input_arg(model, "model")
        check_input_arg(data, "data")
        loaded, metadata = load_model_file(model)
        stored = SplitSpec.from_dict(metadata.get("split", {}))
        split_spec = SplitSpec(
            train_fraction=split_frac if split_frac is not None else stored.train_fraction,
            seed=seed if seed is not None else stored.seed,
        )
        ds = load_csv(data, read_mapping(mapping))
        if (ds.n_users, ds.n_items) != (loaded.n_users, loaded.n_items):
            raise TrimatError(
                code=INVALID_MODEL_FILE,
                message=(
                    f"Model covers {loaded.n_users} users x {loaded.n_items} items, "
                    f"data has {ds.n_users} x {ds.n_items}"
                ),
                recovery=recovery_hints(INVALID_MODEL_FILE) + ["Evaluate against the file the model was trained on"],
                context={"model": [loaded.n_users, loaded.n_items], "data": [ds.n_users, ds.n_items]},
            )
        train, test = split(ds, split_spec)
        result = evaluate_model(loaded, train, test, topk, metadata.get("out_of_range", "clamp"))
    except TrimatError as exc:
        return json_error(exc)
    return json_out({
        "model_path": model,
        "algorithm": metadata.get("algorithm"),
        "split": {**split_spec.to_dict(), "train_size": len(train), "test_size": len(test)},
        "top_k": topk,
        **result,
    })
