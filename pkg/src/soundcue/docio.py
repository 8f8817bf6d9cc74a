"""Helpers for reading structured JSON documents with field-path diagnostics."""

from __future__ import annotations

import json

from .errors import SchemaError


def parse_json(text: str, what: str = "document") -> object:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError("", f"{what} is not valid JSON: {exc}") from exc


def dump_json(obj) -> str:
    """Canonical rendering: sorted keys, 2-space indent, trailing newline.

    Floats go through repr (shortest round-trip form), so serialization is
    byte-deterministic and loads back to bit-identical values.
    """
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def as_object(value, path: str) -> dict:
    if not isinstance(value, dict):
        raise SchemaError(path, f"expected an object, got {type(value).__name__}")
    return value


def as_array(value, path: str) -> list:
    if not isinstance(value, list):
        raise SchemaError(path, f"expected an array, got {type(value).__name__}")
    return value


def as_string(value, path: str) -> str:
    if not isinstance(value, str):
        raise SchemaError(path, f"expected a string, got {type(value).__name__}")
    return value


def as_number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(path, f"expected a number, got {type(value).__name__}")
    return float(value)


def as_integer(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError(path, f"expected an integer, got {type(value).__name__}")
    return value


def as_boolean(value, path: str) -> bool:
    if not isinstance(value, bool):
        raise SchemaError(path, f"expected a boolean, got {type(value).__name__}")
    return value


def get(obj: dict, key: str, path: str):
    """Fetch a required field; the error names the missing field's full path."""
    if key not in obj:
        raise SchemaError(f"{path}.{key}" if path else key, "missing required field")
    return obj[key]


def reject_unknown(obj: dict, known, path: str) -> None:
    for key in obj:
        if key not in known:
            raise SchemaError(f"{path}.{key}" if path else key, "unknown field")
