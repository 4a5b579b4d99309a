"""Command-line entry points: simulate, train, predict, evaluate, explain.

Configuration is INI-style (key/value sections).  All outputs are plain
CSV or INI text with shortest round-trip float formatting, so every
command is byte-reproducible under a fixed seed.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical
failure.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import sys
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import metrics, shapley
from .data import (
    DataError,
    Dataset,
    DataSchema,
    RawTable,
    apply_preproc,
    fit_preproc,
    generate_synthetic,
    load_table,
    write_dataset_csv,
)
from .model_io import load_model, save_model
from .training import (
    FrequencySeverityModel,
    TrainConfig,
    TrainingDiverged,
    fit_dglm,
    fit_glm,
    fit_model,
    predict,
)

__all__ = ["main", "ConfigError"]


class ConfigError(Exception):
    """Invalid configuration; the message lists every offending key."""


def _fmt(value) -> str:
    """Shortest round-trip text for CSV cells."""
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def _write_csv(path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) if not isinstance(v, str) else v for v in row])


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

_TRAIN_KEYS = {
    "epochs",
    "optimizer",
    "learning_rate",
    "batch_size",
    "hidden_dims",
    "dropout_rate",
    "batch_normalization",
    "activation",
    "lr_schedule",
    "lr_decay_factor",
    "lr_decay_every",
    "early_stopping_patience",
    "early_stopping_decay",
    "early_stop",
    "validation_fraction",
}


@dataclass
class RunSpec:
    dataset: str
    schema_path: str | None
    count_family: str
    severity_family: str
    preprocess: bool
    test_fraction: float
    baseline: str
    seed: int
    freq: TrainConfig
    sev: TrainConfig


def _parse_train_section(section, name: str, seed: int, errors: list[str]) -> TrainConfig:
    kwargs = {"seed": seed}

    def grab(key, conv, target=None, check=None, message=None):
        if key not in section:
            return
        raw = section.get(key)
        try:
            value = conv(raw)
        except ValueError:
            errors.append(f"[{name}] {key}: cannot parse '{raw}'")
            return
        if check is not None and not check(value):
            errors.append(f"[{name}] {key}: {message} (got '{raw}')")
            return
        kwargs[target or key] = value

    def parse_bool(raw):
        lowered = raw.strip().lower()
        if lowered in ("true", "yes", "on", "1"):
            return True
        if lowered in ("false", "no", "off", "0"):
            return False
        raise ValueError(raw)

    def parse_dims(raw):
        raw = raw.strip()
        if raw in ("", "none"):
            return ()
        return tuple(int(part) for part in raw.split(","))

    grab("epochs", int, check=lambda v: v >= 1, message="must be at least 1")
    grab(
        "optimizer",
        str.lower,
        check=lambda v: v in ("sgd", "adam", "amsgrad"),
        message="must be sgd, adam or amsgrad",
    )
    grab("learning_rate", float, check=lambda v: v > 0, message="must be positive")
    grab("batch_size", int, check=lambda v: v >= 1, message="must be at least 1")
    grab("hidden_dims", parse_dims, check=lambda v: all(d >= 1 for d in v), message="dims must be positive")
    grab("dropout_rate", float, check=lambda v: 0 <= v < 1, message="must lie in [0, 1)")
    grab("batch_normalization", parse_bool, target="batch_norm")
    grab(
        "lr_schedule",
        str.lower,
        check=lambda v: v in ("constant", "step", "plateau"),
        message="must be constant, step or plateau",
    )
    grab("lr_decay_factor", float, check=lambda v: 0 < v <= 1, message="must lie in (0, 1]")
    grab("lr_decay_every", int, check=lambda v: v >= 1, message="must be at least 1")
    grab("early_stopping_patience", int, target="plateau_patience", check=lambda v: v >= 1, message="must be at least 1")
    grab("early_stopping_decay", float, target="plateau_factor", check=lambda v: 0 < v <= 1, message="must lie in (0, 1]")
    grab("early_stop", parse_bool)
    grab("validation_fraction", float, check=lambda v: 0 <= v < 1, message="must lie in [0, 1)")
    if "activation" in section and section.get("activation").strip().lower() != "elu":
        errors.append(f"[{name}] activation: only 'elu' is supported (got '{section.get('activation')}')")
    for key in section:
        if key not in _TRAIN_KEYS:
            errors.append(f"[{name}] {key}: unknown key")
    try:
        return TrainConfig(**kwargs)
    except ValueError as err:
        errors.append(f"[{name}]: {err}")
        return TrainConfig(seed=seed)


def load_run_config(path, seed_override: int | None = None) -> RunSpec:
    parser = configparser.ConfigParser()
    parser.optionxform = str
    read = parser.read(path, encoding="utf-8")
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    errors: list[str] = []

    data_sec = parser["data"] if "data" in parser else {}
    dataset = data_sec.get("dataset", "")
    if not dataset:
        errors.append("[data] dataset: required")
    schema_path = data_sec.get("schema") or None
    count_family = data_sec.get("count_family", "zip").strip().lower()
    if count_family not in ("zip", "poisson"):
        errors.append(f"[data] count_family: must be zip or poisson (got '{count_family}')")
    severity_family = data_sec.get("severity_family", "gamma").strip().lower()
    if severity_family not in ("gamma", "inverse_gaussian", "normal"):
        errors.append(
            f"[data] severity_family: must be gamma, inverse_gaussian or normal (got '{severity_family}')"
        )
    preprocess = False
    if "preprocess" in data_sec:
        try:
            preprocess = data_sec.getboolean("preprocess")
        except ValueError:
            errors.append(f"[data] preprocess: cannot parse '{data_sec.get('preprocess')}' as a boolean")
    test_fraction = 0.0
    if "test_fraction" in data_sec:
        try:
            test_fraction = float(data_sec.get("test_fraction"))
        except ValueError:
            errors.append(f"[data] test_fraction: cannot parse '{data_sec.get('test_fraction')}'")
        if not 0.0 <= test_fraction < 1.0:
            errors.append(f"[data] test_fraction: must lie in [0, 1) (got {test_fraction})")

    baseline = "none"
    if "model" in parser and "baseline" in parser["model"]:
        baseline = parser["model"].get("baseline").strip().lower()
        if baseline not in ("none", "glm", "dglm"):
            errors.append(f"[model] baseline: must be none, glm or dglm (got '{baseline}')")

    seed = 0
    if "run" in parser and "seed" in parser["run"]:
        try:
            seed = int(parser["run"].get("seed"))
        except ValueError:
            errors.append(f"[run] seed: cannot parse '{parser['run'].get('seed')}'")
    if seed_override is not None:
        seed = seed_override

    freq = _parse_train_section(parser["frequency"] if "frequency" in parser else {}, "frequency", seed, errors)
    sev = _parse_train_section(parser["severity"] if "severity" in parser else {}, "severity", seed, errors)

    if errors:
        raise ConfigError("invalid configuration:\n  " + "\n  ".join(errors))
    return RunSpec(
        dataset=dataset,
        schema_path=schema_path,
        count_family=count_family,
        severity_family=severity_family,
        preprocess=preprocess,
        test_fraction=test_fraction,
        baseline=baseline,
        seed=seed,
        freq=freq,
        sev=sev,
    )


def _write_effective_config(spec: RunSpec, path) -> None:
    parser = configparser.ConfigParser()
    parser.optionxform = str
    parser["data"] = {
        "dataset": spec.dataset,
        "count_family": spec.count_family,
        "severity_family": spec.severity_family,
        "preprocess": str(spec.preprocess).lower(),
        "test_fraction": repr(spec.test_fraction),
    }
    if spec.schema_path:
        parser["data"]["schema"] = spec.schema_path
    parser["model"] = {"baseline": spec.baseline}
    parser["run"] = {"seed": str(spec.seed)}
    for name, cfg in (("frequency", spec.freq), ("severity", spec.sev)):
        parser[name] = {
            "epochs": str(cfg.epochs),
            "optimizer": cfg.optimizer,
            "learning_rate": repr(cfg.learning_rate),
            "batch_size": str(cfg.batch_size),
            "hidden_dims": ",".join(str(d) for d in cfg.hidden_dims),
            "dropout_rate": repr(cfg.dropout_rate),
            "batch_normalization": str(cfg.batch_norm).lower(),
            "activation": "elu",
            "lr_schedule": cfg.lr_schedule,
            "lr_decay_factor": repr(cfg.lr_decay_factor),
            "lr_decay_every": str(cfg.lr_decay_every),
            "early_stopping_patience": str(cfg.plateau_patience),
            "early_stopping_decay": repr(cfg.plateau_factor),
            "early_stop": str(cfg.early_stop).lower(),
            "validation_fraction": repr(cfg.validation_fraction),
        }
    with open(path, "w", encoding="utf-8") as fh:
        parser.write(fh)


# ---------------------------------------------------------------------------
# shared data plumbing
# ---------------------------------------------------------------------------


def _load_dataset_for_training(spec: RunSpec):
    schema = DataSchema.from_ini(spec.schema_path) if spec.schema_path else DataSchema.synthetic()
    table = load_table(spec.dataset, schema)
    if len(table) == 0:
        raise DataError(f"{spec.dataset} has no usable rows")
    if spec.preprocess:
        meta = fit_preproc(table)
        dataset = apply_preproc(table, meta)
    else:
        bad = [c.name for c in schema.covariates if c.kind != "numeric"]
        if bad:
            raise ConfigError(
                "categorical columns need [data] preprocess = true: " + ", ".join(bad)
            )
        meta = None
        x = np.column_stack([np.asarray(table.columns[c.name], dtype=np.float64) for c in schema.covariates])
        dataset = Dataset(x, table.n, table.t, table.ybar, feature_names=[c.name for c in schema.covariates])
    return schema, table, meta, dataset


def _table_for_model(model: FrequencySeverityModel, path, count_optional: bool = False) -> RawTable:
    if model.schema is None:
        raise DataError("model file carries no data schema; cannot ingest raw CSV")
    table = load_table(path, model.schema, count_optional=count_optional)
    if len(table) == 0:
        raise DataError(f"{path} has no usable rows")
    return table


def _encode_table(model: FrequencySeverityModel, table: RawTable) -> Dataset:
    """Encode covariates with the model's fitted preprocessing state.

    Counts of -1 mark prediction-only data without a count column; the
    returned dataset zeroes them (with severities) to satisfy invariants.
    """
    schema = model.schema
    has_counts = bool(np.all(table.n >= 0))
    if not has_counts:
        table = replace(table, n=np.zeros(len(table), dtype=np.int64), ybar=np.zeros(len(table)))
    if model.preproc is not None:
        return apply_preproc(table, model.preproc)
    bad = [c.name for c in schema.covariates if c.kind != "numeric"]
    if bad:
        raise DataError("model has no preprocessing state for categorical columns: " + ", ".join(bad))
    x = np.column_stack(
        [np.asarray(table.columns[c.name], dtype=np.float64) for c in schema.covariates]
    )
    return Dataset(x, table.n, table.t, table.ybar, feature_names=[c.name for c in schema.covariates])


def _write_table_csv(table: RawTable, idx, path) -> None:
    schema = table.schema
    header = [c.name for c in schema.covariates] + [schema.count, schema.exposure, schema.severity]
    rows = []
    for i in idx:
        row = []
        for c in schema.covariates:
            v = table.columns[c.name][i]
            row.append(v if isinstance(v, str) else _fmt(v))
        row.extend([_fmt(table.n[i]), _fmt(table.t[i]), _fmt(table.ybar[i])])
        rows.append(row)
    _write_csv(path, header, rows)


def _history_rows(history):
    for rec in history:
        yield [rec.epoch, rec.loss, rec.lr, rec.val_loss, rec.pi, rec.gamma, rec.phi]


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_simulate(args) -> int:
    if args.m < 1:
        raise ConfigError(f"--m must be at least 1, got {args.m}")
    dataset = generate_synthetic(args.m, args.seed)
    write_dataset_csv(dataset, args.out)
    print(f"wrote {len(dataset)} records to {args.out}")
    return 0


def cmd_train(args) -> int:
    spec = load_run_config(args.config, seed_override=args.seed)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    schema, table, meta, dataset = _load_dataset_for_training(spec)

    if spec.test_fraction > 0.0:
        m = len(dataset)
        n_test = min(max(int(round(m * spec.test_fraction)), 1), m - 1)
        perm = np.random.default_rng(spec.seed).permutation(m)
        test_idx, train_idx = perm[:n_test], perm[n_test:]
        _write_table_csv(table, test_idx, out_dir / "test_split.csv")
        dataset = dataset.subset(train_idx)

    fitter = {"none": fit_model, "glm": fit_glm, "dglm": fit_dglm}[spec.baseline]
    model = fitter(
        dataset,
        spec.freq,
        spec.sev,
        count_kind=spec.count_family,
        severity_kind=spec.severity_family,
        schema=schema,
        preproc=meta,
    )

    save_model(model, out_dir / "model.json")
    _write_csv(
        out_dir / "history_frequency.csv",
        ["epoch", "loss", "lr", "val_loss", "pi", "gamma", "phi"],
        _history_rows(model.freq_history),
    )
    _write_csv(
        out_dir / "history_severity.csv",
        ["epoch", "loss", "lr", "val_loss", "pi", "gamma", "phi"],
        _history_rows(model.sev_history),
    )
    _write_effective_config(spec, out_dir / "effective_config.ini")

    final_freq = model.freq_history[-1].loss if model.freq_history else float("nan")
    final_sev = model.sev_history[-1].loss if model.sev_history else float("nan")
    pi_txt = "n/a" if model.pi is None else f"{model.pi:.6f}"
    print(f"frequency loss {final_freq:.6f}  severity loss {final_sev:.6f}")
    print(f"pi {pi_txt}  gamma {model.gamma:.6f}  phi {model.phi:.6f}")
    print(f"model written to {out_dir / 'model.json'}")
    return 0


def cmd_predict(args) -> int:
    model = load_model(args.model)
    table = _table_for_model(model, args.data, count_optional=True)
    dataset = _encode_table(model, table)
    has_counts = bool(np.all(table.n >= 0))
    preds = predict(model, dataset.x, table.t, table.n if has_counts else None)
    rows = []
    for i in range(len(table)):
        rows.append(
            [
                i,
                preds.lam[i],
                preds.mu[i] if preds.mu is not None else None,
                preds.agg_mean[i],
                preds.agg_var[i],
            ]
        )
    _write_csv(args.out, ["record", "lam", "mu", "agg_mean", "agg_var"], rows)
    print(f"wrote {len(table)} predictions to {args.out}")
    return 0


def cmd_evaluate(args) -> int:
    names, models = [], []
    for path in args.model:
        stem = Path(path).stem
        name = stem
        k = 2
        while name in names:
            name = f"{stem}_{k}"
            k += 1
        names.append(name)
        models.append(load_model(path))
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    metric_rows = []
    agg_means = {}
    observed_loss = None
    for name, model in zip(names, models):
        table = _table_for_model(model, args.data)
        dataset = _encode_table(model, table)
        preds = predict(model, dataset.x, dataset.t, dataset.n)
        loss = dataset.n * dataset.ybar
        observed_loss = loss
        claims = dataset.n > 0
        freq_mae = metrics.mae(preds.lam, dataset.n)
        freq_rmse = metrics.rmse(preds.lam, dataset.n)
        if np.any(claims):
            sev_mae = metrics.mae(preds.mu[claims], dataset.ybar[claims])
            sev_rmse = metrics.rmse(preds.mu[claims], dataset.ybar[claims])
        else:
            sev_mae = sev_rmse = float("nan")
        agg_mae = metrics.mae(preds.agg_mean, loss)
        agg_rmse = metrics.rmse(preds.agg_mean, loss)
        agg_means[name] = preds.agg_mean
        metric_rows.append([name, freq_mae, freq_rmse, sev_mae, sev_rmse, agg_mae, agg_rmse])
    _write_csv(
        out_dir / "metrics.csv",
        ["model", "freq_mae", "freq_rmse", "sev_mae", "sev_rmse", "agg_mae", "agg_rmse"],
        metric_rows,
    )

    gini_rows = []
    for base in names:
        row = [base]
        for comp in names:
            if base == comp:
                row.append(0.0)
                continue
            curve = metrics.ordered_lorenz(agg_means[base], agg_means[comp], observed_loss)
            gini = metrics.gini_index(curve)
            row.append(gini)
            _write_csv(
                out_dir / f"lorenz_{base}_vs_{comp}.csv",
                ["premium_share", "loss_share"],
                zip(curve.premium_share, curve.loss_share),
            )
        gini_rows.append(row)
    _write_csv(out_dir / "gini_matrix.csv", ["base", *names], gini_rows)

    for row in metric_rows:
        print(
            f"{row[0]}: freq MAE {row[1]:.4f}  sev MAE {row[3]:.4f}  agg MAE {row[5]:.4f}"
        )
    print(f"reports written to {out_dir}")
    return 0


def cmd_explain(args) -> int:
    if args.record_ids is None and not args.global_importance:
        raise ConfigError("explain needs --record-ids or --global")
    model = load_model(args.model)
    table = _table_for_model(model, args.data, count_optional=True)
    dataset = _encode_table(model, table)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    if args.target == "frequency":
        value_fn = lambda z: np.exp(np.atleast_1d(model.log_frequency(z)))
    else:
        value_fn = lambda z: np.exp(np.atleast_1d(model.log_severity(z)))

    if model.preproc is not None:
        group_names = [name for name, _ in model.preproc.groups]
        groups = [np.asarray(idx) for _, idx in model.preproc.groups]
    else:
        p = dataset.x.shape[1]
        group_names = dataset.feature_names or [f"x{j+1}" for j in range(p)]
        groups = [np.asarray([j]) for j in range(p)]

    rng = np.random.default_rng(args.seed)
    m = len(dataset)
    n_bg = min(args.background, m)
    background = dataset.x[rng.choice(m, size=n_bg, replace=False)]

    if args.record_ids:
        try:
            ids = [int(part) for part in args.record_ids.split(",")]
        except ValueError:
            raise ConfigError(f"--record-ids must be comma-separated integers, got '{args.record_ids}'")
        bad = [i for i in ids if i < 0 or i >= m]
        if bad:
            raise DataError(f"unknown record ids {bad}; data has {m} records")
    else:
        if m == 0:
            raise DataError("no records to explain")
        k = min(args.max_records, m)
        ids = sorted(int(i) for i in rng.choice(m, size=k, replace=False))

    attributions = []
    rows = []
    for i in ids:
        if args.sampled:
            att = shapley.shapley_sampled(
                value_fn, dataset.x[i], background, groups,
                n_permutations=args.permutations, seed=args.seed,
            )
        else:
            att = shapley.shapley_exact(value_fn, dataset.x[i], background, groups)
        attributions.append(att)
        for name, phi in zip(group_names, att.values):
            rows.append([i, name, phi, att.base_value, att.model_output])
    _write_csv(
        out_dir / "attributions.csv",
        ["record", "feature", "phi", "base_value", "model_output"],
        rows,
    )

    if args.global_importance:
        importance = shapley.global_importance(attributions)
        order = np.argsort(-importance, kind="stable")
        _write_csv(
            out_dir / "global_importance.csv",
            ["feature", "mean_abs_phi"],
            ([group_names[j], importance[j]] for j in order),
        )
        top = order[0]
        print(f"most important {args.target} feature: {group_names[top]} ({importance[top]:.6g})")
    print(f"explained {len(ids)} records; output in {out_dir}")
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="freqsev", description="frequency-severity claim modelling toolkit"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="write a synthetic benchmark dataset")
    p.add_argument("--m", type=int, required=True, help="number of records")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("train", help="fit a model from an INI config")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="per-record predictions from a model file")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--seed", type=int, default=0, help="accepted for uniformity; prediction is deterministic")
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="metrics and pairwise Lorenz/Gini reports")
    p.add_argument("--model", action="append", required=True, help="model file (repeatable)")
    p.add_argument("--data", required=True)
    p.add_argument("--seed", type=int, default=0, help="accepted for uniformity; evaluation is deterministic")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("explain", help="Shapley attributions for a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--record-ids", default=None, help="comma-separated record indices")
    p.add_argument("--global", dest="global_importance", action="store_true",
                   help="aggregate mean absolute attributions over sampled records")
    p.add_argument("--target", choices=("frequency", "severity"), default="frequency")
    p.add_argument("--background", type=int, default=100)
    p.add_argument("--max-records", type=int, default=100)
    p.add_argument("--sampled", action="store_true", help="permutation sampling instead of exact")
    p.add_argument("--permutations", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_explain)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return 2
    except (DataError, FileNotFoundError) as err:
        print(f"data error: {err}", file=sys.stderr)
        return 3
    except (TrainingDiverged, FloatingPointError, ArithmeticError) as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    raise SystemExit(main())
