"""trimat: context-aware tri-matrix factorization for recommender experiments.

Public API:
    load_csv, split, synth_zipf, write_csv                  ingestion and synthetic data
    build_context_matrix, dense_reindex                     core transforms
    train_classic, predict_classic                          two-factor MF baseline
    train_trimat, predict_trimat, footprint                 tri-factor model U^T C V
    mae, top_k, rank_frequency, degree_of_matthew_effect    evaluation
    MostPopular, UniformRandom                              reference recommenders
    load_config, run_experiment, serialize_report           grid search
    save_model, load_model                                  model files
    validate_dataset, validate_file                         data checks
    TrimatError                                             structured errors
"""

from trimat.baselines import MostPopular, UniformRandom
from trimat.classic import predict_classic, predict_classic_many, train_classic
from trimat.config import apply_overrides, load_config, parse_config
from trimat.context import build_context_matrix
from trimat.dataset import RawRecord, dense_reindex
from trimat.errors import TrimatError
from trimat.experiment import run_experiment, serialize_report, write_artifacts
from trimat.ingest import load_csv, split, synth_zipf, write_csv
from trimat.metrics import degree_of_matthew_effect, mae, rank_frequency, top_k
from trimat.models import (
    CellResult,
    ClassicModel,
    ColumnMapping,
    ContextMaxima,
    ContextVector,
    Dataset,
    ExperimentConfig,
    ExperimentReport,
    FootprintReport,
    IdMaps,
    Interaction,
    RankFrequency,
    SplitSpec,
    TopKLists,
    TrainConfig,
    TriMatModel,
)
from trimat.persistence import load_model, save_model
from trimat.trifactor import footprint, predict_trimat, predict_trimat_many, train_trimat
from trimat.validation import validate_dataset, validate_file

__version__ = "0.1.0"

__all__ = [
    # Ingestion
    "load_csv",
    "split",
    "synth_zipf",
    "write_csv",
    # Core
    "build_context_matrix",
    "dense_reindex",
    "RawRecord",
    # Models
    "train_classic",
    "predict_classic",
    "predict_classic_many",
    "train_trimat",
    "predict_trimat",
    "predict_trimat_many",
    "footprint",
    # Evaluation
    "mae",
    "top_k",
    "rank_frequency",
    "degree_of_matthew_effect",
    "MostPopular",
    "UniformRandom",
    # Experiments
    "load_config",
    "parse_config",
    "apply_overrides",
    "run_experiment",
    "serialize_report",
    "write_artifacts",
    # Persistence
    "save_model",
    "load_model",
    # Validation
    "validate_dataset",
    "validate_file",
    # Types
    "ContextVector",
    "ContextMaxima",
    "Interaction",
    "IdMaps",
    "Dataset",
    "ColumnMapping",
    "SplitSpec",
    "TrainConfig",
    "ClassicModel",
    "TriMatModel",
    "FootprintReport",
    "TopKLists",
    "RankFrequency",
    "ExperimentConfig",
    "CellResult",
    "ExperimentReport",
    "TrimatError",
]
