"""Model file format: self-describing JSON, bit-exact round trips.

The file carries the layer dimensions, all matrices row-major, the
auxiliary scalars, batch-norm running statistics, the data schema and the
fitted preprocessing state, plus a format version.  Floats are written in
their shortest round-trip representation, so save/load reproduces every
parameter bit for bit and files for identical models are byte-identical.
"""

from __future__ import annotations

import json

from .data import DataSchema, PreprocMeta
from .network import params_from_dict, params_to_dict
from .training import FrequencySeverityModel

__all__ = ["MODEL_FORMAT", "MODEL_VERSION", "model_to_dict", "model_from_dict", "save_model", "load_model"]

MODEL_FORMAT = "freqsev-model"
MODEL_VERSION = 1


def model_to_dict(model: FrequencySeverityModel) -> dict:
    return {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "count_family": model.count_kind,
        "severity_family": model.severity_kind,
        "freq_net": params_to_dict(model.freq_net),
        "sev_net": params_to_dict(model.sev_net),
        "schema": None if model.schema is None else model.schema.to_dict(),
        "preproc": None if model.preproc is None else model.preproc.to_dict(),
    }


def model_from_dict(d: dict) -> FrequencySeverityModel:
    if d.get("format") != MODEL_FORMAT:
        raise ValueError(f"not a model file (format tag {d.get('format')!r})")
    if d.get("version") != MODEL_VERSION:
        raise ValueError(f"unsupported model file version {d.get('version')!r}")
    return FrequencySeverityModel(
        freq_net=params_from_dict(d["freq_net"]),
        sev_net=params_from_dict(d["sev_net"]),
        count_kind=d["count_family"],
        severity_kind=d["severity_family"],
        schema=None if d.get("schema") is None else DataSchema.from_dict(d["schema"]),
        preproc=None if d.get("preproc") is None else PreprocMeta.from_dict(d["preproc"]),
    )


def save_model(model: FrequencySeverityModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh, sort_keys=True, indent=1)
        fh.write("\n")


def load_model(path) -> FrequencySeverityModel:
    with open(path, encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))
