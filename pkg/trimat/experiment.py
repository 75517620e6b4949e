"""Learning-rate grid search: train, evaluate, and report every (algorithm, lr) cell."""

from __future__ import annotations

import json
import logging
import math
import threading
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Callable, Optional, Sequence, Union

import pandas as pd

from trimat.classic import predict_classic_many, train_classic
from trimat.config import resolve_dataset_path
from trimat.errors import DIVERGED, INVALID_ARGUMENT, UNDEFINED_SLOPE, UNKNOWN_ALGORITHM, TrimatError, recovery_hints
from trimat.ingest import PlantedTriMat, load_csv, split, synth_zipf
from trimat.metrics import (
    degree_of_matthew_effect,
    loss_trace_table,
    mae,
    popularity_rank_frequency,
    rank_frequency,
    rank_frequency_table,
    top_k,
    write_plot_data,
)
from trimat.models import (
    CellResult,
    ClassicModel,
    Dataset,
    ExperimentConfig,
    ExperimentReport,
    FloatArray,
    RankFrequency,
    SplitSpec,
    TrainConfig,
    TriMatModel,
)
from trimat.rng import derive_seed
from trimat.trifactor import footprint, predict_trimat_many, train_trimat

logger = logging.getLogger(__name__)

ProgressCallback = Callable[[int, int, str, str], None]
CellKey = tuple[str, float]

REPORT_JSON = "report.json"
REPORT_TSV = "report.tsv"
PLOT_DIR = "plotdata"
SIGNIFICANT_DIGITS = 6

TSV_COLUMNS = (
    "algorithm", "learning_rate", "seed", "diverged", "diverged_epoch", "test_mae",
    "dme", "rec_slope", "final_train_loss", "param_count", "best",
)


# ---------------------------------------------------------------------------
# Data
# ---------------------------------------------------------------------------

def load_dataset(cfg: ExperimentConfig) -> Dataset:
    """Load the configured file, or generate the configured synthetic dataset."""
    spec = cfg.dataset
    if spec.source == "csv":
        path = resolve_dataset_path(cfg)
        assert path is not None
        return load_csv(path, spec.mapping)
    seed = spec.seed if spec.seed is not None else derive_seed(cfg.seed, "dataset")
    latent = PlantedTriMat.random(spec.n_users, spec.n_items, seed) if spec.planted else None
    return synth_zipf(spec.n_users, spec.n_items, spec.n_interactions, spec.zipf_exponent, latent, seed)


def resolved_split(cfg: ExperimentConfig) -> SplitSpec:
    seed = cfg.split.seed if cfg.split.seed is not None else derive_seed(cfg.seed, "split")
    return SplitSpec(train_fraction=cfg.split.train_fraction, seed=seed, strategy=cfg.split.strategy)


def cell_seed(master: int, algorithm: str, learning_rate: float) -> int:
    """Per-cell seed, a function of the master seed and the cell key only."""
    return derive_seed(master, f"{algorithm}|{learning_rate!r}")


# ---------------------------------------------------------------------------
# One cell
# ---------------------------------------------------------------------------

Model = Union[ClassicModel, TriMatModel]


def fit_algorithm(
    algorithm: str,
    train: Dataset,
    tc: TrainConfig,
    k: int = 30,
    scaling: str = "scaled",
    missing_policy: str = "mean",
    out_of_range: str = "clamp",
) -> Model:
    """Train one of ALGORITHMS by name; ``k`` applies to the classic variants only."""
    if algorithm == "classic-raw":
        return train_classic(train, k, tc, "raw")
    if algorithm == "classic-normalized":
        return train_classic(train, k, tc, "normalized")
    if algorithm in ("trimat-global", "trimat-per-interaction"):
        mode = algorithm.removeprefix("trimat-")
        return train_trimat(train, tc, mode, scaling, missing_policy, out_of_range)
    raise TrimatError(
        code=UNKNOWN_ALGORITHM,
        message=f"Unknown algorithm: {algorithm!r}",
        recovery=recovery_hints(UNKNOWN_ALGORITHM),
        context={"algorithm": algorithm},
    )


def train_model(algorithm: str, train: Dataset, cfg: ExperimentConfig, tc: TrainConfig) -> Model:
    return fit_algorithm(algorithm, train, tc, cfg.classic_k, cfg.scaling, cfg.missing_policy, cfg.out_of_range)


def predict_test(model: Model, test: Dataset, out_of_range: str) -> FloatArray:
    arrays = test.arrays
    if isinstance(model, ClassicModel):
        return predict_classic_many(model, arrays.users, arrays.items)
    return predict_trimat_many(model, arrays.users, arrays.items, arrays.codes, out_of_range)


def _evaluate(
    model: Model,
    train: Dataset,
    test: Dataset,
    k: int,
    out_of_range: str,
    popularity: Optional[RankFrequency],
) -> tuple[dict[str, Any], Optional[RankFrequency]]:
    result: dict[str, Any] = {
        "test_mae": mae(predict_test(model, test, out_of_range), test.arrays.ratings),
        "rec_slope": None,
        "popularity_slope": popularity.slope if popularity is not None else None,
        "dme": None,
        "notes": [],
    }
    try:
        rec = rank_frequency(top_k(model, train, k, out_of_range=out_of_range), train.n_items)
    except TrimatError as exc:
        if exc.code != UNDEFINED_SLOPE:
            raise
        result["notes"].append(f"recommendation slope undefined: {exc.message}")
        return result, None
    result["rec_slope"] = rec.slope
    if popularity is not None:
        result["dme"] = degree_of_matthew_effect(rec, popularity)
    return result, rec


def evaluate_model(model: Model, train: Dataset, test: Dataset, k: int = 10, out_of_range: str = "clamp") -> dict[str, Any]:
    """Test MAE plus top-k popularity statistics of an already trained model.

    Slopes that cannot be fitted are reported as None with a note.
    """
    notes: list[str] = []
    try:
        popularity: Optional[RankFrequency] = popularity_rank_frequency(train)
    except TrimatError as exc:
        if exc.code != UNDEFINED_SLOPE:
            raise
        notes.append(f"popularity slope undefined: {exc.message}")
        popularity = None
    result, _ = _evaluate(model, train, test, k, out_of_range, popularity)
    result["notes"].extend(notes)
    return result


def run_cell(
    algorithm: str,
    learning_rate: float,
    cfg: ExperimentConfig,
    train: Dataset,
    test: Dataset,
    popularity: Optional[RankFrequency],
) -> CellResult:
    """Train and evaluate one grid cell; divergence is recorded, not raised."""
    seed = cell_seed(cfg.seed, algorithm, learning_rate)
    tc = TrainConfig(
        learning_rate=learning_rate,
        epochs=cfg.epochs,
        init_low=cfg.init_low,
        init_high=cfg.init_high,
        seed=seed,
        shuffle=cfg.shuffle,
    )
    try:
        model = train_model(algorithm, train, cfg, tc)
    except TrimatError as exc:
        if exc.code != DIVERGED:
            raise
        return CellResult(
            algorithm=algorithm,
            learning_rate=learning_rate,
            seed=seed,
            diverged=True,
            diverged_epoch=exc.context.get("epoch"),
            notes=[exc.message],
        )

    evaluation, rec = _evaluate(model, train, test, cfg.top_k, cfg.out_of_range, popularity)
    return CellResult(
        algorithm=algorithm,
        learning_rate=learning_rate,
        seed=seed,
        test_mae=evaluation["test_mae"],
        rec_slope=evaluation["rec_slope"],
        dme=evaluation["dme"],
        final_train_loss=model.loss_trace[-1],
        param_count=model.param_count,
        loss_trace=list(model.loss_trace),
        notes=evaluation["notes"],
        rec_frequency=rec,
    )


# ---------------------------------------------------------------------------
# Grid
# ---------------------------------------------------------------------------

def grid_keys(cfg: ExperimentConfig) -> list[CellKey]:
    return [(algo, lr) for algo in cfg.algorithms for lr in cfg.learning_rates]


def select_best(cells: Sequence[CellResult]) -> tuple[dict[str, Optional[dict[str, Any]]], list[str]]:
    """Per algorithm, the non-diverged cell with minimum MAE (ties: smaller learning rate)."""
    best: dict[str, Optional[dict[str, Any]]] = {}
    all_diverged: list[str] = []
    for algo in dict.fromkeys(c.algorithm for c in cells):
        scored = [c for c in cells if c.algorithm == algo and not c.diverged and c.test_mae is not None]
        if not scored:
            best[algo] = None
            all_diverged.append(algo)
            continue
        winner = min(scored, key=lambda c: (c.test_mae, c.learning_rate))
        best[algo] = {"learning_rate": winner.learning_rate, "test_mae": winner.test_mae, "dme": winner.dme}
    return best, all_diverged


def run_experiment(
    cfg: ExperimentConfig,
    progress_callback: Optional[ProgressCallback] = None,
    cell_order: Optional[Sequence[CellKey]] = None,
) -> ExperimentReport:
    """Run the full grid and assemble the report.

    Args:
        cfg: Validated experiment config.
        progress_callback: Optional callable(step, total, cell_label, status).
        cell_order: Execution order of the cells (default: config order). The
            report does not depend on it.

    Returns:
        ExperimentReport with cells in (algorithm, learning rate) config order.
    """
    dataset = load_dataset(cfg)
    split_spec = resolved_split(cfg)
    train, test = split(dataset, split_spec)
    # materialize cached views before cells share them across threads
    _ = train.arrays, test.arrays

    try:
        popularity: Optional[RankFrequency] = popularity_rank_frequency(train)
    except TrimatError as exc:
        if exc.code != UNDEFINED_SLOPE:
            raise
        logger.warning("training popularity slope undefined, DME will be omitted: %s", exc.message)
        popularity = None

    keys = grid_keys(cfg)
    order = list(cell_order) if cell_order is not None else keys
    if sorted(order) != sorted(keys):
        raise TrimatError(
            code=INVALID_ARGUMENT,
            message="cell_order must be a permutation of the grid cells",
            recovery=["Pass every (algorithm, learning_rate) pair exactly once"],
            context={"expected": len(keys), "given": len(order)},
        )

    total = len(order)
    done = 0
    lock = threading.Lock()
    logger.info("grid search: %d cells on %d train / %d test interactions",
                total, len(train), len(test))

    def execute(key: CellKey) -> CellResult:
        nonlocal done
        label = f"{key[0]}@{key[1]!r}"
        if progress_callback:
            with lock:
                progress_callback(done + 1, total, label, "running")
        result = run_cell(key[0], key[1], cfg, train, test, popularity)
        with lock:
            done += 1
            if progress_callback:
                progress_callback(done, total, label, "diverged" if result.diverged else "done")
        return result

    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            results = dict(zip(order, pool.map(execute, order)))
    else:
        results = {key: execute(key) for key in order}

    cells = [results[key] for key in keys]
    best, all_diverged = select_best(cells)
    for algo in all_diverged:
        logger.warning("every learning rate diverged for %s", algo)

    dataset_info: dict[str, Any] = {"source": cfg.dataset.source, **dataset.summary()}
    if cfg.dataset.source == "csv":
        dataset_info["path"] = str(resolve_dataset_path(cfg))
    n_pairs = len(set(zip(train.arrays.users.tolist(), train.arrays.items.tolist())))

    return ExperimentReport(
        config=cfg.to_dict(),
        dataset=dataset_info,
        split={**split_spec.to_dict(), "train_size": len(train), "test_size": len(test)},
        popularity=popularity.to_dict() if popularity is not None else None,
        footprint=footprint(train.n_users, train.n_items, cfg.baseline_k, n_pairs=n_pairs).to_dict(),
        prediction_clip=[train.r_min, train.r_max],
        cells=cells,
        best=best,
        all_diverged=all_diverged,
        popularity_frequency=popularity,
    )


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def _round_sig(value: Any) -> Any:
    if isinstance(value, float):
        if not math.isfinite(value):
            return None
        return float(f"{value:.{SIGNIFICANT_DIGITS}g}")
    if isinstance(value, dict):
        return {k: _round_sig(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_round_sig(v) for v in value]
    return value


def report_table(report: ExperimentReport) -> pd.DataFrame:
    best_keys = {
        (algo, row["learning_rate"]) for algo, row in report.best.items() if row is not None
    }
    rows = []
    for cell in report.cells:
        row = _round_sig(cell.to_dict())
        row["best"] = cell.key in best_keys
        rows.append({col: row.get(col) for col in TSV_COLUMNS})
    # object dtype keeps integer columns with gaps printing as integers
    return pd.DataFrame(rows, columns=list(TSV_COLUMNS), dtype=object)


def serialize_report(report: ExperimentReport, fmt: str = "json") -> bytes:
    """Serialize with stable field order and 6 significant digits.

    ``json`` is the structured document, ``tsv`` the delimited table (one row
    per cell plus a header).
    """
    if fmt == "json":
        return (json.dumps(_round_sig(report.to_dict()), indent=2) + "\n").encode("utf-8")
    if fmt == "tsv":
        return report_table(report).to_csv(sep="\t", index=False, lineterminator="\n", na_rep="").encode("utf-8")
    raise TrimatError(
        code=INVALID_ARGUMENT,
        message=f"Unknown report format: {fmt!r}",
        recovery=["Use 'json' or 'tsv'"],
        context={"format": fmt},
    )


def parse_report(raw: bytes | str) -> ExperimentReport:
    text = raw.decode("utf-8") if isinstance(raw, bytes) else raw
    return ExperimentReport.from_dict(json.loads(text))


def _slug(name: str) -> str:
    return name.replace("-", "_")


def write_artifacts(report: ExperimentReport, out_dir: str | Path) -> dict[str, str]:
    """Write report.json, report.tsv and plotdata/*.tsv; return the written paths."""
    out = Path(out_dir)
    plots = out / PLOT_DIR
    plots.mkdir(parents=True, exist_ok=True)

    written: dict[str, str] = {}
    (out / REPORT_JSON).write_bytes(serialize_report(report, "json"))
    written["report_json"] = str(out / REPORT_JSON)
    (out / REPORT_TSV).write_bytes(serialize_report(report, "tsv"))
    written["report_tsv"] = str(out / REPORT_TSV)

    if report.popularity_frequency is not None:
        path = plots / "popularity_rank_frequency.tsv"
        write_plot_data(rank_frequency_table(report.popularity_frequency), path)
        written["popularity_rank_frequency"] = str(path)

    by_key = {cell.key: cell for cell in report.cells}
    for algo, row in report.best.items():
        if row is None:
            continue
        cell = by_key[(algo, row["learning_rate"])]
        if cell.rec_frequency is not None:
            path = plots / f"{_slug(algo)}_rank_frequency.tsv"
            write_plot_data(rank_frequency_table(cell.rec_frequency), path)
            written[f"{algo}_rank_frequency"] = str(path)
        if cell.loss_trace:
            path = plots / f"{_slug(algo)}_loss.tsv"
            write_plot_data(loss_trace_table(cell.loss_trace), path)
            written[f"{algo}_loss"] = str(path)
    return written
