"""Datasets: the synthetic benchmark generator, CSV ingestion, categorical
encoding, min-max scaling and train/test splitting.

The synthetic benchmark draws covariates on the 11-point grid {0, 0.1,
..., 1}^2 with unit exposure, claim counts from a zero-inflated Poisson
with log-mean (x1-0.5)^2 + (x2-0.5)^2 and zero inflation 0.2, and average
severities from a Gamma with log-mean x1^2 + x2^2 + 0.5 N and dispersion
1/N given N claims.  The closed-form truth functions are exported for grid
evaluation.
"""

from __future__ import annotations

import configparser
import csv
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import moments
from .families import Gamma, ZeroInflatedPoisson

__all__ = [
    "Dataset",
    "ColumnSpec",
    "DataSchema",
    "RawTable",
    "PreprocMeta",
    "DataError",
    "TRUE_PI",
    "TRUE_GAMMA",
    "TRUE_PHI",
    "true_log_frequency",
    "true_log_severity",
    "true_aggregate_mean",
    "true_functions",
    "generate_synthetic",
    "load_table",
    "fit_preproc",
    "apply_preproc",
    "train_test_split",
    "write_dataset_csv",
]

TRUE_PI = 0.2
TRUE_GAMMA = 0.5
TRUE_PHI = 1.0

_MISSING_TOKENS = {"", "NA", "NaN", "nan", "N/A"}


class DataError(ValueError):
    """Raised for malformed input data (bad cells, schema mismatches)."""


@dataclass
class Dataset:
    """Covariate matrix plus claim count, exposure and average severity."""

    x: np.ndarray
    n: np.ndarray
    t: np.ndarray
    ybar: np.ndarray
    feature_names: list[str] | None = None

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=np.float64)
        self.n = np.asarray(self.n, dtype=np.int64)
        self.t = np.asarray(self.t, dtype=np.float64)
        self.ybar = np.asarray(self.ybar, dtype=np.float64)
        m = len(self.n)
        if self.x.shape[0] != m or len(self.t) != m or len(self.ybar) != m:
            raise ValueError("dataset arrays have inconsistent lengths")
        if np.any(self.n < 0):
            raise ValueError("claim counts must be non-negative")
        if np.any(self.t <= 0):
            raise ValueError("exposures must be positive")
        if np.any(self.ybar[self.n == 0] != 0):
            raise ValueError("average severity must be zero for claim-free records")

    def __len__(self) -> int:
        return len(self.n)

    def subset(self, idx) -> "Dataset":
        return Dataset(self.x[idx], self.n[idx], self.t[idx], self.ybar[idx], self.feature_names)

    def claims_only(self) -> "Dataset":
        """Records with at least one claim (the severity training set)."""
        return self.subset(self.n > 0)


def true_log_frequency(x):
    """(x1 - 0.5)^2 + (x2 - 0.5)^2 on [0, 1]^2."""
    x = np.asarray(x, dtype=np.float64)
    return ((x[..., 0] - 0.5) ** 2 + (x[..., 1] - 0.5) ** 2)


def true_log_severity(x):
    """x1^2 + x2^2 on [0, 1]^2."""
    x = np.asarray(x, dtype=np.float64)
    return x[..., 0] ** 2 + x[..., 1] ** 2


def true_aggregate_mean(x):
    """Aggregate-loss mean under the generating process (unit exposure)."""
    lam = np.exp(true_log_frequency(x))
    return moments.aggregate_mean(ZeroInflatedPoisson(TRUE_PI), lam, true_log_severity(x), TRUE_GAMMA)


def true_functions(x):
    """Triple of log-frequency, log-severity level and aggregate mean."""
    return true_log_frequency(x), true_log_severity(x), true_aggregate_mean(x)


def generate_synthetic(m: int, seed) -> Dataset:
    """Draw ``m`` records from the benchmark generating process."""
    if m < 1:
        raise ValueError(f"need at least one record, got {m}")
    rng = np.random.default_rng(seed)
    x = rng.integers(0, 11, size=(m, 2)) / 10.0
    lam = np.exp(true_log_frequency(x))
    n = ZeroInflatedPoisson(TRUE_PI).sample(lam, rng)
    ybar = np.zeros(m)
    pos = n > 0
    if np.any(pos):
        npos = n[pos].astype(np.float64)
        mu = np.exp(true_log_severity(x[pos]) + TRUE_GAMMA * npos)
        ybar[pos] = Gamma(TRUE_PHI).sample(mu, TRUE_PHI / npos, rng)
    return Dataset(x, n, np.ones(m), ybar, feature_names=["x1", "x2"])


# ---------------------------------------------------------------------------
# CSV ingestion and preprocessing
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ColumnSpec:
    name: str
    kind: str  # "numeric" or "categorical"
    log_transform: bool = False

    def __post_init__(self):
        if self.kind not in ("numeric", "categorical"):
            raise ValueError(f"column kind must be numeric or categorical, got '{self.kind}'")
        if self.log_transform and self.kind != "numeric":
            raise ValueError(f"log transform only applies to numeric columns ('{self.name}')")


@dataclass
class DataSchema:
    """Names the covariate columns and the count/exposure/severity roles."""

    covariates: list[ColumnSpec]
    count: str = "n"
    exposure: str = "t"
    severity: str = "ybar"

    @classmethod
    def synthetic(cls) -> "DataSchema":
        return cls(covariates=[ColumnSpec("x1", "numeric"), ColumnSpec("x2", "numeric")])

    @classmethod
    def from_ini(cls, path) -> "DataSchema":
        parser = configparser.ConfigParser()
        parser.optionxform = str  # keep column-name case
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
        if "covariates" not in parser or "roles" not in parser:
            raise DataError(f"schema file {path} needs [covariates] and [roles] sections")
        covs = []
        for name, value in parser["covariates"].items():
            kind, _, transform = value.partition(":")
            covs.append(ColumnSpec(name, kind.strip(), log_transform=transform.strip() == "log"))
        roles = parser["roles"]
        return cls(
            covariates=covs,
            count=roles.get("count", "n"),
            exposure=roles.get("exposure", "t"),
            severity=roles.get("severity", "ybar"),
        )

    def to_ini(self, path) -> None:
        parser = configparser.ConfigParser()
        parser.optionxform = str
        parser["covariates"] = {
            c.name: c.kind + (":log" if c.log_transform else "") for c in self.covariates
        }
        parser["roles"] = {"count": self.count, "exposure": self.exposure, "severity": self.severity}
        with open(path, "w", encoding="utf-8") as fh:
            parser.write(fh)

    def to_dict(self) -> dict:
        return {
            "covariates": [
                {"name": c.name, "kind": c.kind, "log_transform": c.log_transform}
                for c in self.covariates
            ],
            "count": self.count,
            "exposure": self.exposure,
            "severity": self.severity,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DataSchema":
        return cls(
            covariates=[
                ColumnSpec(c["name"], c["kind"], bool(c.get("log_transform", False)))
                for c in d["covariates"]
            ],
            count=d["count"],
            exposure=d["exposure"],
            severity=d["severity"],
        )


@dataclass
class RawTable:
    """Validated rows prior to encoding; covariate columns stay per-column."""

    schema: DataSchema
    columns: dict[str, list]
    n: np.ndarray
    t: np.ndarray
    ybar: np.ndarray
    n_dropped_missing: int = 0
    n_dropped_exposure: int = 0

    def __len__(self) -> int:
        return len(self.n)


def _parse_float(value: str, row: int, column: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise DataError(f"row {row}, column '{column}': cannot parse '{value}' as a number") from None


def load_table(path, schema: DataSchema, count_optional: bool = False) -> RawTable:
    """Read an RFC 4180 CSV with a header row into a validated table.

    Rows with any missing field are dropped and counted; rows with
    non-positive exposure are rejected and counted.  Unparseable numeric
    cells raise :class:`DataError` with the row and column.  When
    ``count_optional`` is set and the count column is absent, counts are
    reported as -1 (prediction-only data).
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise DataError(f"{path} is empty; a header row is required")
        fields = set(reader.fieldnames)
        required = {c.name for c in schema.covariates} | {schema.exposure}
        if not count_optional:
            required.add(schema.count)
        missing_cols = sorted(required - fields)
        if missing_cols:
            raise DataError(f"{path} is missing required columns: {', '.join(missing_cols)}")
        has_count = schema.count in fields
        has_severity = schema.severity in fields

        columns: dict[str, list] = {c.name: [] for c in schema.covariates}
        counts, exposures, ybars = [], [], []
        n_missing = 0
        n_exposure = 0
        for i, row in enumerate(reader):
            cells = {c.name: (row.get(c.name) or "").strip() for c in schema.covariates}
            cells[schema.exposure] = (row.get(schema.exposure) or "").strip()
            if has_count:
                cells[schema.count] = (row.get(schema.count) or "").strip()
            if has_severity:
                cells[schema.severity] = (row.get(schema.severity) or "").strip()
            if any(v in _MISSING_TOKENS for v in cells.values()):
                n_missing += 1
                continue
            t = _parse_float(cells[schema.exposure], i, schema.exposure)
            if t <= 0:
                n_exposure += 1
                continue
            if has_count:
                n_val = _parse_float(cells[schema.count], i, schema.count)
                if n_val < 0 or n_val != int(n_val):
                    raise DataError(f"row {i}, column '{schema.count}': bad claim count '{cells[schema.count]}'")
                n_val = int(n_val)
            else:
                n_val = -1
            ybar = _parse_float(cells[schema.severity], i, schema.severity) if has_severity else 0.0
            for c in schema.covariates:
                if c.kind == "numeric":
                    columns[c.name].append(_parse_float(cells[c.name], i, c.name))
                else:
                    columns[c.name].append(cells[c.name])
            counts.append(n_val)
            exposures.append(t)
            # severity is only meaningful alongside a positive claim count
            ybars.append(ybar if n_val != 0 else 0.0)

    return RawTable(
        schema=schema,
        columns=columns,
        n=np.asarray(counts, dtype=np.int64),
        t=np.asarray(exposures, dtype=np.float64),
        ybar=np.asarray(ybars, dtype=np.float64),
        n_dropped_missing=n_missing,
        n_dropped_exposure=n_exposure,
    )


@dataclass
class PreprocMeta:
    """Fitted encoding state: vocabularies and numeric ranges per column.

    Each entry of ``columns`` is a dict with "name", "kind" and either
    "categories" (sorted vocabulary) or "min"/"max"/"log".  Feature names
    and index groups describe the encoded matrix layout; groups map one
    original column to its block of encoded columns, which is also the
    attribution unit for explanations.
    """

    columns: list[dict]
    feature_names: list[str] = field(default_factory=list)
    groups: list[tuple[str, list[int]]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "columns": self.columns,
            "feature_names": self.feature_names,
            "groups": [[name, idx] for name, idx in self.groups],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PreprocMeta":
        return cls(
            columns=d["columns"],
            feature_names=list(d["feature_names"]),
            groups=[(name, list(idx)) for name, idx in d["groups"]],
        )


def fit_preproc(table: RawTable) -> PreprocMeta:
    """Fit one-hot vocabularies and min-max ranges on a (training) table."""
    columns = []
    feature_names: list[str] = []
    groups: list[tuple[str, list[int]]] = []
    offset = 0
    for spec in table.schema.covariates:
        values = table.columns[spec.name]
        if spec.kind == "categorical":
            cats = sorted(set(values))
            columns.append({"name": spec.name, "kind": "categorical", "categories": cats})
            names = [f"{spec.name}={c}" for c in cats]
            width = len(cats)
        else:
            arr = np.asarray(values, dtype=np.float64)
            if spec.log_transform:
                if np.any(arr <= 0):
                    raise DataError(f"column '{spec.name}': log transform needs positive values")
                arr = np.log(arr)
            columns.append(
                {
                    "name": spec.name,
                    "kind": "numeric",
                    "min": float(arr.min()),
                    "max": float(arr.max()),
                    "log": spec.log_transform,
                }
            )
            names = [spec.name]
            width = 1
        feature_names.extend(names)
        groups.append((spec.name, list(range(offset, offset + width))))
        offset += width
    return PreprocMeta(columns=columns, feature_names=feature_names, groups=groups)


def apply_preproc(table: RawTable, meta: PreprocMeta) -> Dataset:
    """Encode a table with fitted state: one-hot blocks and [0, 1] scaling.

    Categories unseen at fit time encode as an all-zero block with a
    warning.  Numeric values outside the fitted range extrapolate linearly.
    """
    m = len(table)
    blocks = []
    for col in meta.columns:
        values = table.columns[col["name"]]
        if col["kind"] == "categorical":
            cats = col["categories"]
            index = {c: j for j, c in enumerate(cats)}
            block = np.zeros((m, len(cats)))
            unknown = set()
            for i, v in enumerate(values):
                j = index.get(v)
                if j is None:
                    unknown.add(v)
                else:
                    block[i, j] = 1.0
            if unknown:
                warnings.warn(
                    f"column '{col['name']}': unseen categories {sorted(unknown)} encoded as zeros",
                    stacklevel=2,
                )
        else:
            arr = np.asarray(values, dtype=np.float64)
            if col["log"]:
                if np.any(arr <= 0):
                    raise DataError(f"column '{col['name']}': log transform needs positive values")
                arr = np.log(arr)
            span = col["max"] - col["min"]
            block = ((arr - col["min"]) / span if span > 0 else np.zeros(m))[:, None]
        blocks.append(block)
    x = np.hstack(blocks) if blocks else np.zeros((m, 0))
    return Dataset(x, table.n, table.t, table.ybar, feature_names=list(meta.feature_names))


def train_test_split(dataset: Dataset, test_fraction: float, seed) -> tuple[Dataset, Dataset]:
    """Seeded permutation split into (train, test); disjoint and exhaustive."""
    if not 0.0 < test_fraction < 1.0:
        raise ValueError(f"test fraction must lie in (0, 1), got {test_fraction}")
    m = len(dataset)
    n_test = int(round(m * test_fraction))
    n_test = min(max(n_test, 1), m - 1)
    perm = np.random.default_rng(seed).permutation(m)
    return dataset.subset(perm[n_test:]), dataset.subset(perm[:n_test])


def write_dataset_csv(dataset: Dataset, path) -> None:
    """Write a dataset (encoded covariate columns) as a canonical CSV.

    Floats use their shortest round-trip representation, so identical
    datasets always produce byte-identical files.
    """
    names = dataset.feature_names or [f"x{j + 1}" for j in range(dataset.x.shape[1])]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([*names, "n", "t", "ybar"])
        for i in range(len(dataset)):
            writer.writerow(
                [*(repr(float(v)) for v in dataset.x[i]), int(dataset.n[i]),
                 repr(float(dataset.t[i])), repr(float(dataset.ybar[i]))]
            )
