"""Deterministic JSON/CSV output and the JSON schemas of experiment configs."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import jsonschema
import numpy as np

from .errors import InputError


def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return "%.17g" % x


def _plain(obj: Any) -> Any:
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps(obj: Any, indent: int = 2) -> str:
    """JSON text with sorted keys and floats printed with 17 significant digits.

    Non-finite floats become the strings "nan", "inf" and "-inf", so the
    output is strict JSON and byte-identical across runs.
    """

    def emit(o: Any, level: int) -> str:
        o = _plain(o)
        pad = " " * (indent * (level + 1))
        end = " " * (indent * level)
        if o is None or isinstance(o, bool):
            return json.dumps(o)
        if isinstance(o, int):
            return str(o)
        if isinstance(o, float):
            return _fmt_float(o)
        if isinstance(o, str):
            return json.dumps(o)
        if isinstance(o, Mapping):
            if not o:
                return "{}"
            items = sorted((str(k), v) for k, v in o.items())
            body = ",\n".join(f"{pad}{json.dumps(k)}: {emit(v, level + 1)}" for k, v in items)
            return "{\n" + body + "\n" + end + "}"
        if isinstance(o, (list, tuple)):
            if not o:
                return "[]"
            if all(isinstance(_plain(x), (int, float, bool, str)) or x is None for x in o):
                return "[" + ", ".join(emit(x, level + 1) for x in o) + "]"
            body = ",\n".join(pad + emit(x, level + 1) for x in o)
            return "[\n" + body + "\n" + end + "]"
        raise TypeError(f"cannot serialize {type(o).__name__}")

    return emit(obj, 0) + "\n"


def write_json(path: str | Path, obj: Any) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(obj), encoding="utf-8")


def csv_text(columns: Sequence[str], rows: Iterable[Sequence], comment: str | None = None) -> str:
    """CSV with an optional leading ``# comment`` line; floats use 17 significant digits."""
    buf = io.StringIO()
    if comment:
        buf.write(f"# {comment}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow(["%.17g" % v if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def write_csv(path: str | Path, columns: Sequence[str], rows: Iterable[Sequence], comment: str | None = None) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(csv_text(columns, rows, comment), encoding="utf-8")


# ---------------------------------------------------------------------------
# config schemas

_NUMBER_LIST = {"type": "array", "items": {"type": "number"}, "minItems": 1}
_OUTPUT = {
    "type": "object",
    "properties": {"csv": {"type": "string"}, "json": {"type": "string"}},
    "additionalProperties": False,
}
_TOLERANCES = {"type": "object", "additionalProperties": {"type": "number", "exclusiveMinimum": 0}}

SCHEMAS: dict = {
    "shift-experiment": {
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": "shift-experiment",
        "type": "object",
        "required": ["kind", "Q", "output"],
        "properties": {
            "kind": {"const": "shift-experiment"},
            "shift": {"type": "object"},
            "shift_file": {"type": "string"},
            "family": {"type": "object"},
            "family_file": {"type": "string"},
            "Q": {
                "oneOf": [
                    {"const": "default"},
                    {"type": "array", "items": {"type": "array", "minItems": 1}, "minItems": 1},
                ]
            },
            "depth": {"type": "integer", "minimum": 1},
            "eps": _NUMBER_LIST,
            "tolerances": _TOLERANCES,
            "test_functions": {"const": "states"},
            "output": _OUTPUT,
            "seed": {"type": "integer"},
        },
        "oneOf": [{"required": ["family"]}, {"required": ["family_file"]}],
        "additionalProperties": False,
    },
    "interval-experiment": {
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": "interval-experiment",
        "type": "object",
        "required": ["kind", "output"],
        "properties": {
            "kind": {"const": "interval-experiment"},
            "system": {"type": "object"},
            "system_file": {"type": "string"},
            "eps": _NUMBER_LIST,
            "Q": {"oneOf": [{"const": "all"}, {"type": "array", "minItems": 1}]},
            "depth": {"type": "integer", "minimum": 1},
            "cell_depth": {"type": "integer", "minimum": 1, "maximum": 16},
            "lebesgue_depth": {"type": "integer", "minimum": 1, "maximum": 16},
            "monte_carlo": {
                "type": "object",
                "properties": {
                    "iterates": {"type": "integer", "minimum": 0},
                    "orbits": {"type": "integer", "minimum": 1},
                    "eps": {"type": "number", "exclusiveMinimum": 0},
                },
                "additionalProperties": False,
            },
            "tolerances": _TOLERANCES,
            "output": _OUTPUT,
            "seed": {"type": "integer"},
        },
        "oneOf": [{"required": ["system"]}, {"required": ["system_file"]}],
        "additionalProperties": False,
    },
    "verify-suite": {
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": "verify-suite",
        "type": "object",
        "required": ["kind", "suite"],
        "properties": {
            "kind": {"const": "verify-suite"},
            "suite": {"enum": ["complement-identities", "coupling-identities", "pressure-oracles", "interval-checks"]},
            "seed": {"type": "integer"},
            "output": _OUTPUT,
        },
        "additionalProperties": False,
    },
}


def validate_config(doc: Any) -> dict:
    """Check a config against the schema of its ``kind``; raise InputError naming the offending field."""
    if not isinstance(doc, dict):
        raise InputError("config must be a JSON object")
    kind = doc.get("kind")
    if kind not in SCHEMAS:
        raise InputError(f"config field 'kind' must be one of {sorted(SCHEMAS)}, got {kind!r}")
    validator = jsonschema.Draft202012Validator(SCHEMAS[kind])
    errors = sorted(validator.iter_errors(doc), key=lambda e: (list(e.path), e.message))
    if errors:
        err = errors[0]
        where = "/".join(str(p) for p in err.path) or "<root>"
        raise InputError(f"invalid {kind} config at {where}: {err.message}")
    return doc
