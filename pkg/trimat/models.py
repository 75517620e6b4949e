"""Data models for trimat: all JSON-serializable via to_dict / from_dict."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Optional, Union

import numpy as np
import numpy.typing as npt

from trimat.errors import (
    INVALID_CONFIG,
    INVALID_CONTEXT_CODE,
    INVALID_MAPPING,
    INVALID_RATING,
    INVALID_SPLIT_SPEC,
    INVALID_TRAIN_CONFIG,
    MISSING_FIELD,
    UNKNOWN_ALGORITHM,
    TrimatError,
    recovery_hints,
)

FloatArray = npt.NDArray[np.float64]
IntArray = npt.NDArray[np.int64]

# A 3x2 float64 array laid out [[location, mood], [weather, season], [daytype, end_emotion]].
ContextMatrix = FloatArray

# ---------------------------------------------------------------------------
# Vocabulary
# ---------------------------------------------------------------------------

CONTEXT_FIELDS = ("location", "mood", "weather", "season", "daytype", "end_emotion")
CONTEXT_SHAPE = (3, 2)
MISSING_CODE = -1

MISSING_POLICIES = ("mean", "const05")
OUT_OF_RANGE_POLICIES = ("error", "clamp")
CLASSIC_VARIANTS = ("raw", "normalized")
CONTEXT_MODES = ("global", "per-interaction")
RATING_SCALINGS = ("scaled", "raw")
SPLIT_STRATEGIES = ("interaction-random",)

ALGORITHMS = ("classic-raw", "classic-normalized", "trimat-global", "trimat-per-interaction")
DEFAULT_LR_GRID = (1e-4, 5e-4, 1e-3, 5e-3, 1e-2, 5e-2)
CONFIG_VERSION = "1.0"


def _require_choice(value: str, choices: tuple[str, ...], name: str) -> str:
    if value not in choices:
        raise TrimatError(
            code=INVALID_CONFIG,
            message=f"Invalid {name}: {value!r}",
            recovery=[f"Use one of: {', '.join(choices)}"],
            context={"field": name, "value": value, "supported": list(choices)},
        )
    return value


def _require_bool(value: Any, name: str) -> bool:
    if not isinstance(value, bool):
        raise TrimatError(
            code=INVALID_CONFIG,
            message=f"{name} must be true or false, got {value!r}",
            recovery=["Use a JSON boolean, not a string or number"],
            context={"field": name, "value": value},
        )
    return value


# ---------------------------------------------------------------------------
# Context
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ContextVector:
    """The six ordinal context codes of one interaction; -1 marks a missing code."""
    location: int
    mood: int
    weather: int
    season: int
    daytype: int
    end_emotion: int

    def __post_init__(self) -> None:
        for name, code in zip(CONTEXT_FIELDS, self.codes):
            if code != MISSING_CODE and code < 1:
                raise TrimatError(
                    code=INVALID_CONTEXT_CODE,
                    message=f"Context field {name!r} has invalid code {code}",
                    recovery=recovery_hints(INVALID_CONTEXT_CODE),
                    context={"field": name, "value": code},
                )

    @property
    def codes(self) -> tuple[int, ...]:
        return (self.location, self.mood, self.weather, self.season, self.daytype, self.end_emotion)

    @property
    def missing(self) -> tuple[bool, ...]:
        return tuple(code == MISSING_CODE for code in self.codes)

    @classmethod
    def from_codes(cls, codes: Any) -> ContextVector:
        values = [int(c) for c in codes]
        if len(values) != len(CONTEXT_FIELDS):
            raise TrimatError(
                code=INVALID_CONTEXT_CODE,
                message=f"Expected {len(CONTEXT_FIELDS)} context codes, got {len(values)}",
                recovery=[f"Provide codes for: {', '.join(CONTEXT_FIELDS)}"],
                context={"count": len(values)},
            )
        return cls(*values)

    def to_dict(self) -> dict[str, Any]:
        return dict(zip(CONTEXT_FIELDS, self.codes))

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ContextVector:
        return cls.from_codes([data.get(name, MISSING_CODE) for name in CONTEXT_FIELDS])


@dataclass(frozen=True)
class ContextMaxima:
    """Per-field maximum observed code over a training split."""
    location: int = 1
    mood: int = 1
    weather: int = 1
    season: int = 1
    daytype: int = 1
    end_emotion: int = 1

    def __post_init__(self) -> None:
        for name, value in zip(CONTEXT_FIELDS, self.values):
            if value < 1:
                raise TrimatError(
                    code=INVALID_CONTEXT_CODE,
                    message=f"Context maximum for {name!r} must be >= 1, got {value}",
                    recovery=recovery_hints(INVALID_CONTEXT_CODE),
                    context={"field": name, "value": value},
                )

    @property
    def values(self) -> tuple[int, ...]:
        return (self.location, self.mood, self.weather, self.season, self.daytype, self.end_emotion)

    def to_dict(self) -> dict[str, Any]:
        return dict(zip(CONTEXT_FIELDS, self.values))

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ContextMaxima:
        return cls(*(int(data.get(name, 1)) for name in CONTEXT_FIELDS))


# ---------------------------------------------------------------------------
# Dataset
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Interaction:
    """One (user, item, rating, context) event."""
    user_index: int
    item_index: int
    rating: float
    context: ContextVector


@dataclass(frozen=True)
class IdMaps:
    """Original-ID <-> dense-index bijections; position in the tuple is the index."""
    users: tuple[str, ...]
    items: tuple[str, ...]

    @cached_property
    def _user_lookup(self) -> dict[str, int]:
        return {uid: idx for idx, uid in enumerate(self.users)}

    @cached_property
    def _item_lookup(self) -> dict[str, int]:
        return {iid: idx for idx, iid in enumerate(self.items)}

    def user_index(self, user_id: str) -> int:
        return self._user_lookup[user_id]

    def item_index(self, item_id: str) -> int:
        return self._item_lookup[item_id]

    def user_id(self, index: int) -> str:
        return self.users[index]

    def item_id(self, index: int) -> str:
        return self.items[index]


@dataclass(frozen=True)
class DatasetArrays:
    """Columnar view of a dataset's interactions, in interaction order."""
    users: IntArray
    items: IntArray
    ratings: FloatArray
    codes: IntArray  # (N, 6), MISSING_CODE where missing


@dataclass(frozen=True)
class Dataset:
    """An immutable set of interactions plus the statistics derived from them."""
    interactions: tuple[Interaction, ...]
    n_users: int
    n_items: int
    r_min: float
    r_max: float
    context_maxima: ContextMaxima
    context_means: tuple[float, ...]
    id_maps: IdMaps

    def __post_init__(self) -> None:
        if not (self.r_max >= self.r_min > 0):
            raise TrimatError(
                code=INVALID_RATING,
                message=f"Rating bounds must satisfy r_max >= r_min > 0, got [{self.r_min}, {self.r_max}]",
                recovery=recovery_hints(INVALID_RATING),
                context={"r_min": self.r_min, "r_max": self.r_max},
            )

    def __len__(self) -> int:
        return len(self.interactions)

    @cached_property
    def arrays(self) -> DatasetArrays:
        n = len(self.interactions)
        users = np.fromiter((x.user_index for x in self.interactions), dtype=np.int64, count=n)
        items = np.fromiter((x.item_index for x in self.interactions), dtype=np.int64, count=n)
        ratings = np.fromiter((x.rating for x in self.interactions), dtype=np.float64, count=n)
        codes = np.array([x.context.codes for x in self.interactions], dtype=np.int64).reshape(n, 6)
        return DatasetArrays(users=users, items=items, ratings=ratings, codes=codes)

    def item_counts(self) -> IntArray:
        """Interaction count per item index (length n_items)."""
        return np.bincount(self.arrays.items, minlength=self.n_items).astype(np.int64)

    def seen_items(self) -> list[set[int]]:
        """Per-user set of item indices this dataset contains."""
        seen: list[set[int]] = [set() for _ in range(self.n_users)]
        for x in self.interactions:
            seen[x.user_index].add(x.item_index)
        return seen

    def summary(self) -> dict[str, Any]:
        return {
            "n_interactions": len(self.interactions),
            "n_users": self.n_users,
            "n_items": self.n_items,
            "r_min": self.r_min,
            "r_max": self.r_max,
            "context_maxima": self.context_maxima.to_dict(),
        }


# ---------------------------------------------------------------------------
# Ingestion specs
# ---------------------------------------------------------------------------

_MAPPING_ROLES = ("user", "item", "rating") + CONTEXT_FIELDS

ColumnRef = Union[str, int]


@dataclass(frozen=True)
class ColumnMapping:
    """Column name (or 0-based position) per role, defaulting to the LDOS-CoMoDa layout."""
    user: ColumnRef = "userID"
    item: ColumnRef = "itemID"
    rating: ColumnRef = "rating"
    location: ColumnRef = "location"
    mood: ColumnRef = "mood"
    weather: ColumnRef = "weather"
    season: ColumnRef = "season"
    daytype: ColumnRef = "daytype"
    end_emotion: ColumnRef = "endEmo"
    delimiter: str = ","
    header: bool = True

    def __post_init__(self) -> None:
        columns = list(self.roles().values())
        if len(set(columns)) != len(columns):
            dupes = sorted({str(c) for c in columns if columns.count(c) > 1})
            raise TrimatError(
                code=INVALID_MAPPING,
                message=f"Column mapping assigns several roles to the same column: {dupes}",
                recovery=recovery_hints(INVALID_MAPPING),
                context={"duplicates": dupes},
            )
        if len(self.delimiter) != 1:
            raise TrimatError(
                code=INVALID_MAPPING,
                message=f"Delimiter must be a single character, got {self.delimiter!r}",
                recovery=["Use e.g. ',' or '\\t'"],
                context={"delimiter": self.delimiter},
            )
        if not self.header and any(isinstance(c, str) for c in columns):
            raise TrimatError(
                code=INVALID_MAPPING,
                message="Files without a header row must be mapped by 0-based column position",
                recovery=recovery_hints(INVALID_MAPPING),
                context={"header": False},
            )

    def roles(self) -> dict[str, ColumnRef]:
        return {role: getattr(self, role) for role in _MAPPING_ROLES}

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = dict(self.roles())
        d["delimiter"] = self.delimiter
        d["header"] = self.header
        return d

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ColumnMapping:
        known = {k: v for k, v in data.items() if k in cls.__dataclass_fields__}
        return cls(**known)


@dataclass(frozen=True)
class SplitSpec:
    """Train/test split parameters."""
    train_fraction: float = 0.8
    seed: Optional[int] = None
    strategy: str = "interaction-random"

    def __post_init__(self) -> None:
        if not 0.0 < self.train_fraction < 1.0:
            raise TrimatError(
                code=INVALID_SPLIT_SPEC,
                message=f"train_fraction must lie in (0, 1), got {self.train_fraction}",
                recovery=recovery_hints(INVALID_SPLIT_SPEC),
                context={"train_fraction": self.train_fraction},
            )
        if self.strategy not in SPLIT_STRATEGIES:
            raise TrimatError(
                code=INVALID_SPLIT_SPEC,
                message=f"Unknown split strategy: {self.strategy!r}",
                recovery=[f"Use one of: {', '.join(SPLIT_STRATEGIES)}"],
                context={"strategy": self.strategy},
            )

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {"train_fraction": self.train_fraction, "strategy": self.strategy}
        if self.seed is not None:
            d["seed"] = self.seed
        return d

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> SplitSpec:
        seed = data.get("seed")
        return cls(
            train_fraction=float(data.get("train_fraction", 0.8)),
            seed=int(seed) if seed is not None else None,
            strategy=str(data.get("strategy", "interaction-random")),
        )


# ---------------------------------------------------------------------------
# Training
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TrainConfig:
    """SGD hyperparameters shared by classic MF and TriMat."""
    learning_rate: float
    epochs: int = 200
    init_low: float = 0.01
    init_high: float = 0.1
    seed: int = 0
    shuffle: bool = True

    def __post_init__(self) -> None:
        problems = []
        if not (self.learning_rate >= 0.0 and np.isfinite(self.learning_rate)):
            problems.append(f"learning_rate={self.learning_rate}")
        if self.epochs < 1:
            problems.append(f"epochs={self.epochs}")
        if not self.init_low < self.init_high:
            problems.append(f"init_low={self.init_low} >= init_high={self.init_high}")
        if problems:
            raise TrimatError(
                code=INVALID_TRAIN_CONFIG,
                message=f"Invalid training config: {', '.join(problems)}",
                recovery=recovery_hints(INVALID_TRAIN_CONFIG),
                context={"problems": problems},
            )

    def to_dict(self) -> dict[str, Any]:
        return {
            "learning_rate": self.learning_rate,
            "epochs": self.epochs,
            "init_low": self.init_low,
            "init_high": self.init_high,
            "seed": self.seed,
            "shuffle": self.shuffle,
        }


@dataclass
class ClassicModel:
    """Trained two-factor model: rating ~ U_i . V_j (raw) or R_max * cos(U_i, V_j) (normalized)."""
    U: FloatArray
    V: FloatArray
    variant: str
    r_min: float
    r_max: float
    loss_trace: list[float] = field(default_factory=list)

    @property
    def k(self) -> int:
        return int(self.U.shape[1])

    @property
    def n_users(self) -> int:
        return int(self.U.shape[0])

    @property
    def n_items(self) -> int:
        return int(self.V.shape[0])

    @property
    def param_count(self) -> int:
        return int(self.U.size + self.V.size)


@dataclass
class TriMatModel:
    """Trained tri-factor model: rating ~ U_i^T . C . V_j with a context-derived C.

    ``C`` holds one 3x2 matrix in global mode, or one per training (user, item)
    pair in per-interaction mode, addressed through ``pair_rows``.
    """
    U: FloatArray
    V: FloatArray
    C: FloatArray
    pair_rows: dict[tuple[int, int], int]
    context_mode: str
    rating_scaling: str
    r_min: float
    r_max: float
    context_maxima: ContextMaxima
    context_means: tuple[float, ...]
    missing_policy: str = "mean"
    loss_trace: list[float] = field(default_factory=list)

    @property
    def C_global(self) -> ContextMatrix:
        return self.C[0]

    @property
    def n_users(self) -> int:
        return int(self.U.shape[0])

    @property
    def n_items(self) -> int:
        return int(self.V.shape[0])

    @property
    def param_count(self) -> int:
        return int(self.U.size + self.V.size + self.C.size)


# ---------------------------------------------------------------------------
# Footprint
# ---------------------------------------------------------------------------

FOOTPRINT_THRESHOLD = 0.10


@dataclass(frozen=True)
class FootprintReport:
    """Trainable-parameter counts of TriMat versus classic MF at the same data size."""
    n_users: int
    n_items: int
    baseline_k: int
    trimat_param_count: int
    classic_param_count: int
    ratio: float
    element_bytes: int = 8
    per_interaction_param_count: Optional[int] = None
    n_pairs: Optional[int] = None

    @property
    def trimat_bytes(self) -> int:
        return self.trimat_param_count * self.element_bytes

    @property
    def classic_bytes(self) -> int:
        return self.classic_param_count * self.element_bytes

    @property
    def passes(self) -> bool:
        # exact integer comparison: trimat / classic < 1/10
        return self.trimat_param_count * 10 < self.classic_param_count

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {
            "n_users": self.n_users,
            "n_items": self.n_items,
            "baseline_k": self.baseline_k,
            "trimat_param_count": self.trimat_param_count,
            "classic_param_count": self.classic_param_count,
            "ratio": self.ratio,
            "ratio_exact": f"{self.trimat_param_count}/{self.classic_param_count}",
            "element_bytes": self.element_bytes,
            "trimat_bytes": self.trimat_bytes,
            "classic_bytes": self.classic_bytes,
            "threshold": FOOTPRINT_THRESHOLD,
            "verdict": "PASS" if self.passes else "FAIL",
        }
        if self.per_interaction_param_count is not None:
            d["n_pairs"] = self.n_pairs
            d["per_interaction_param_count"] = self.per_interaction_param_count
        return d

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> FootprintReport:
        return cls(
            n_users=int(data["n_users"]),
            n_items=int(data["n_items"]),
            baseline_k=int(data["baseline_k"]),
            trimat_param_count=int(data["trimat_param_count"]),
            classic_param_count=int(data["classic_param_count"]),
            ratio=float(data["ratio"]),
            element_bytes=int(data.get("element_bytes", 8)),
            per_interaction_param_count=data.get("per_interaction_param_count"),
            n_pairs=data.get("n_pairs"),
        )


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TopKLists:
    """Per-user ranked recommendation lists; lists[u] holds item indices, best first."""
    k: int
    lists: tuple[tuple[int, ...], ...]

    def item_frequencies(self, n_items: int) -> IntArray:
        counts = np.zeros(n_items, dtype=np.int64)
        for ranked in self.lists:
            for item in ranked:
                counts[item] += 1
        return counts


@dataclass(frozen=True)
class RankFrequency:
    """Frequencies sorted descending with their log-log OLS fit."""
    ranks: tuple[int, ...]
    frequencies: tuple[float, ...]
    slope: float
    intercept: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "n_positive": sum(1 for f in self.frequencies if f > 0),
        }


# ---------------------------------------------------------------------------
# Experiment config
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DatasetSpec:
    """Where an experiment's interactions come from: a delimited file or the Zipf generator."""
    source: str = "csv"
    path: Optional[str] = None
    mapping: ColumnMapping = field(default_factory=ColumnMapping)
    n_users: int = 200
    n_items: int = 500
    n_interactions: int = 20000
    zipf_exponent: float = 1.0
    planted: bool = True
    seed: Optional[int] = None

    def __post_init__(self) -> None:
        _require_choice(self.source, ("csv", "synthetic"), "dataset.source")
        if self.source == "csv" and not self.path:
            raise TrimatError(
                code=MISSING_FIELD,
                message="dataset.path is required when dataset.source is 'csv'",
                recovery=["Add a 'path' to the dataset section", "Or use source 'synthetic'"],
                context={"missing_field": "dataset.path"},
            )

    def to_dict(self) -> dict[str, Any]:
        if self.source == "csv":
            return {"source": "csv", "path": self.path, "mapping": self.mapping.to_dict()}
        d: dict[str, Any] = {
            "source": "synthetic",
            "n_users": self.n_users,
            "n_items": self.n_items,
            "n_interactions": self.n_interactions,
            "zipf_exponent": self.zipf_exponent,
            "planted": self.planted,
        }
        if self.seed is not None:
            d["seed"] = self.seed
        return d

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> DatasetSpec:
        seed = data.get("seed")
        return cls(
            source=str(data.get("source", "csv")),
            path=data.get("path"),
            mapping=ColumnMapping.from_dict(data.get("mapping", {})),
            n_users=int(data.get("n_users", 200)),
            n_items=int(data.get("n_items", 500)),
            n_interactions=int(data.get("n_interactions", 20000)),
            zipf_exponent=float(data.get("zipf_exponent", 1.0)),
            planted=_require_bool(data.get("planted", True), "dataset.planted"),
            seed=int(seed) if seed is not None else None,
        )


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce one learning-rate grid search."""
    dataset: DatasetSpec
    split: SplitSpec = field(default_factory=SplitSpec)
    algorithms: tuple[str, ...] = ("classic-raw", "classic-normalized", "trimat-global", "trimat-per-interaction")
    learning_rates: tuple[float, ...] = DEFAULT_LR_GRID
    epochs: int = 200
    classic_k: int = 30
    baseline_k: int = 30
    top_k: int = 10
    scaling: str = "scaled"
    missing_policy: str = "mean"
    out_of_range: str = "clamp"
    init_low: float = 0.01
    init_high: float = 0.1
    shuffle: bool = True
    seed: int = 42
    workers: int = 1
    overrides: dict[str, Any] = field(default_factory=dict, compare=False)
    base_dir: Optional[str] = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if not self.algorithms:
            raise TrimatError(
                code=INVALID_CONFIG,
                message="At least one algorithm must be selected",
                recovery=recovery_hints(UNKNOWN_ALGORITHM),
                context={"field": "algorithms"},
            )
        for algo in self.algorithms:
            if algo not in ALGORITHMS:
                raise TrimatError(
                    code=UNKNOWN_ALGORITHM,
                    message=f"Unknown algorithm: {algo!r}",
                    recovery=recovery_hints(UNKNOWN_ALGORITHM),
                    context={"algorithm": algo, "supported": list(ALGORITHMS)},
                )
        if not self.learning_rates or any(not lr > 0 for lr in self.learning_rates):
            raise TrimatError(
                code=INVALID_CONFIG,
                message=f"learning_rates must be a nonempty list of positive numbers, got {list(self.learning_rates)}",
                recovery=["Use e.g. [0.0001, 0.001, 0.01]"],
                context={"field": "learning_rates"},
            )
        for name in ("algorithms", "learning_rates"):
            values = getattr(self, name)
            repeated = sorted({v for v in values if values.count(v) > 1}, key=str)
            if repeated:
                raise TrimatError(
                    code=INVALID_CONFIG,
                    message=f"{name} lists {repeated} more than once; each grid cell must be unique",
                    recovery=[f"Remove the repeated entries from {name}"],
                    context={"field": name, "repeated": repeated},
                )
        for name in ("epochs", "classic_k", "baseline_k", "top_k", "workers"):
            if getattr(self, name) < 1:
                raise TrimatError(
                    code=INVALID_CONFIG,
                    message=f"{name} must be >= 1, got {getattr(self, name)}",
                    recovery=["Run 'trimat schema config' to see field constraints"],
                    context={"field": name},
                )
        _require_choice(self.scaling, RATING_SCALINGS, "scaling")
        _require_choice(self.missing_policy, MISSING_POLICIES, "missing_policy")
        _require_choice(self.out_of_range, OUT_OF_RANGE_POLICIES, "out_of_range")
        if not self.init_low < self.init_high:
            raise TrimatError(
                code=INVALID_CONFIG,
                message=f"init.low must be < init.high, got [{self.init_low}, {self.init_high})",
                recovery=["The default initialization is uniform [0.01, 0.1)"],
                context={"field": "init"},
            )

    def to_dict(self) -> dict[str, Any]:
        """Config echo for reports; ``workers`` is left out since it never changes results."""
        return {
            "version": CONFIG_VERSION,
            "dataset": self.dataset.to_dict(),
            "split": self.split.to_dict(),
            "algorithms": list(self.algorithms),
            "learning_rates": list(self.learning_rates),
            "epochs": self.epochs,
            "classic_k": self.classic_k,
            "baseline_k": self.baseline_k,
            "top_k": self.top_k,
            "scaling": self.scaling,
            "missing_policy": self.missing_policy,
            "out_of_range": self.out_of_range,
            "init": {"low": self.init_low, "high": self.init_high},
            "shuffle": self.shuffle,
            "seed": self.seed,
            "overrides": dict(sorted(self.overrides.items())),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any], base_dir: Optional[str] = None) -> ExperimentConfig:
        if "dataset" not in data:
            raise TrimatError(
                code=MISSING_FIELD,
                message="Config missing required field: 'dataset'",
                recovery=["Add a 'dataset' section", "Run 'trimat schema config' to see the schema"],
                context={"missing_field": "dataset"},
            )
        init = data.get("init", {})
        try:
            return cls(
                dataset=DatasetSpec.from_dict(data["dataset"]),
                split=SplitSpec.from_dict(data.get("split", {})),
                algorithms=tuple(data.get("algorithms", ALGORITHMS)),
                learning_rates=tuple(float(lr) for lr in data.get("learning_rates", DEFAULT_LR_GRID)),
                epochs=int(data.get("epochs", 200)),
                classic_k=int(data.get("classic_k", 30)),
                baseline_k=int(data.get("baseline_k", 30)),
                top_k=int(data.get("top_k", 10)),
                scaling=str(data.get("scaling", "scaled")),
                missing_policy=str(data.get("missing_policy", "mean")),
                out_of_range=str(data.get("out_of_range", "clamp")),
                init_low=float(init.get("low", 0.01)),
                init_high=float(init.get("high", 0.1)),
                shuffle=_require_bool(data.get("shuffle", True), "shuffle"),
                seed=int(data.get("seed", 42)),
                workers=int(data.get("workers", 1)),
                overrides=dict(data.get("overrides", {})),
                base_dir=base_dir,
            )
        except (TypeError, ValueError) as exc:
            raise TrimatError(
                code=INVALID_CONFIG,
                message=f"Config has a field of the wrong type: {exc}",
                recovery=recovery_hints(INVALID_CONFIG),
                context={"detail": str(exc)},
            ) from exc


# ---------------------------------------------------------------------------
# Experiment report
# ---------------------------------------------------------------------------

@dataclass
class CellResult:
    """Outcome of training and evaluating one (algorithm, learning rate) grid cell."""
    algorithm: str
    learning_rate: float
    seed: int
    diverged: bool = False
    diverged_epoch: Optional[int] = None
    test_mae: Optional[float] = None
    dme: Optional[float] = None
    rec_slope: Optional[float] = None
    final_train_loss: Optional[float] = None
    param_count: Optional[int] = None
    notes: list[str] = field(default_factory=list)
    # Plot data, kept in memory only
    loss_trace: list[float] = field(default_factory=list, compare=False, repr=False)
    rec_frequency: Optional[RankFrequency] = field(default=None, compare=False, repr=False)

    @property
    def key(self) -> tuple[str, float]:
        return (self.algorithm, self.learning_rate)

    def to_dict(self) -> dict[str, Any]:
        return {
            "algorithm": self.algorithm,
            "learning_rate": self.learning_rate,
            "seed": self.seed,
            "diverged": self.diverged,
            "diverged_epoch": self.diverged_epoch,
            "test_mae": self.test_mae,
            "dme": self.dme,
            "rec_slope": self.rec_slope,
            "final_train_loss": self.final_train_loss,
            "param_count": self.param_count,
            "notes": list(self.notes),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> CellResult:
        return cls(
            algorithm=data["algorithm"],
            learning_rate=float(data["learning_rate"]),
            seed=int(data["seed"]),
            diverged=bool(data.get("diverged", False)),
            diverged_epoch=data.get("diverged_epoch"),
            test_mae=data.get("test_mae"),
            dme=data.get("dme"),
            rec_slope=data.get("rec_slope"),
            final_train_loss=data.get("final_train_loss"),
            param_count=data.get("param_count"),
            notes=list(data.get("notes", [])),
        )


DME_DEFINITION = (
    "DME = slope(log frequency vs log rank of top-K recommendations) "
    "- slope(same fit on training popularity); zero-frequency items excluded from both fits. "
    "DME < 0: recommendations more popularity-concentrated than the data; "
    "DME > 0: flatter than the data; 0: matched."
)


@dataclass
class ExperimentReport:
    """Full grid-search result with the config echo needed to re-run it."""
    config: dict[str, Any]
    dataset: dict[str, Any]
    split: dict[str, Any]
    popularity: Optional[dict[str, Any]]
    footprint: dict[str, Any]
    prediction_clip: list[float]
    cells: list[CellResult] = field(default_factory=list)
    best: dict[str, Optional[dict[str, Any]]] = field(default_factory=dict)
    all_diverged: list[str] = field(default_factory=list)
    dme_definition: str = DME_DEFINITION
    format_version: str = "1.0"
    popularity_frequency: Optional[RankFrequency] = field(default=None, compare=False, repr=False)

    def to_dict(self) -> dict[str, Any]:
        return {
            "format_version": self.format_version,
            "config": self.config,
            "dataset": self.dataset,
            "split": self.split,
            "prediction_clip": list(self.prediction_clip),
            "dme_definition": self.dme_definition,
            "popularity": self.popularity,
            "footprint": self.footprint,
            "cells": [cell.to_dict() for cell in self.cells],
            "best": self.best,
            "all_diverged": list(self.all_diverged),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ExperimentReport:
        return cls(
            config=data.get("config", {}),
            dataset=data.get("dataset", {}),
            split=data.get("split", {}),
            popularity=data.get("popularity"),
            footprint=data.get("footprint", {}),
            prediction_clip=list(data.get("prediction_clip", [])),
            cells=[CellResult.from_dict(c) for c in data.get("cells", [])],
            best=data.get("best", {}),
            all_diverged=list(data.get("all_diverged", [])),
            dme_definition=data.get("dme_definition", DME_DEFINITION),
            format_version=data.get("format_version", "1.0"),
        )
