"""Report serialization: JSON with sorted keys, versioned schema, atomic writes."""

from __future__ import annotations

import datetime as _dt
import json
import math
import os
import tempfile
from pathlib import Path

import jsonschema
import numpy as np

SCHEMA_VERSION = "1.0.0"

_number_or_null = {"type": ["number", "null", "string", "boolean", "array", "object"]}

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["schema_version", "command", "scenario", "seed", "tolerance", "stages",
                 "pass", "failed_stage", "assumptions", "generated_at"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "command": {"enum": ["certify", "classify", "scan-curvature", "ode", "product"]},
        "scenario": {"type": "object"},
        "seed": {"type": "integer"},
        "tolerance": {"type": "number"},
        "pass": {"type": "boolean"},
        "failed_stage": {"type": ["string", "null"]},
        "assumptions": {"type": "array", "items": {"type": "string"}},
        "generated_at": {"type": "string"},
        "extra": {"type": "object"},
        "stages": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["name", "producer", "value", "tolerance", "pass"],
                "properties": {
                    "name": {"type": "string"},
                    "producer": {"type": "string", "pattern": r"^[a-z_]+\.[a-z_0-9]+$"},
                    "value": _number_or_null,
                    "tolerance": {"type": "number"},
                    "pass": {"type": "boolean"},
                    "detail": {"type": "object"},
                },
            },
        },
    },
}


def report_schema_version() -> str:
    return SCHEMA_VERSION


def jsonable(obj):
    """Convert numpy scalars/arrays and non-finite floats into plain JSON values."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isfinite(x):
            return x
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return obj


def build_report(command: str, scenario: dict, seed: int, tolerance: float, certificate,
                 extra: dict | None = None, timestamp: str | None = None) -> dict:
    cert = certificate.to_dict()
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "scenario": scenario,
        "seed": int(seed),
        "tolerance": float(tolerance),
        "stages": cert["stages"],
        "pass": cert["pass"],
        "failed_stage": cert["failed_stage"],
        "assumptions": cert["assumptions"],
        "generated_at": timestamp or _dt.datetime.now(_dt.timezone.utc).isoformat(),
    }
    if extra:
        report["extra"] = extra
    return jsonable(report)


def dumps(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2, allow_nan=False) + "\n"


def validate_report(report: dict) -> None:
    jsonschema.validate(report, REPORT_SCHEMA)


def body_without_timestamp(text: str) -> str:
    data = json.loads(text)
    data.pop("generated_at", None)
    return dumps(data)


def write_atomic(path: str | os.PathLike, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
