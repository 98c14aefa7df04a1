"""Checks an evaluation report against the JSON schema shipped in ``schema/``.

Only the keywords the shipped file uses are understood: ``type`` (one name),
``required``, ``properties`` and ``items``.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from src.core.errors import DataError

SCHEMA_PATH = Path(__file__).resolve().parents[2] / "schema" / "report.schema.json"

_TYPES: dict[str, tuple[type, ...]] = {
    "object": (dict,),
    "array": (list,),
    "number": (int, float),
    "integer": (int,),
    "boolean": (bool,),
}


def load_schema(path: str | Path = SCHEMA_PATH) -> dict[str, Any]:
    source = Path(path)
    try:
        return json.loads(source.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"invalid schema ({exc})", path=str(source)) from exc


def _matches_type(value: Any, expected: str) -> bool:
    kinds = _TYPES.get(expected)
    if kinds is None:
        raise ValueError(f"unsupported schema type {expected!r}")
    # bool is an int subclass; keep it out of number/integer
    if expected in ("number", "integer") and isinstance(value, bool):
        return False
    return isinstance(value, kinds)


def schema_problems(payload: Any, schema: dict[str, Any], where: str = "$") -> list[str]:
    expected = schema.get("type")
    if expected is not None and not _matches_type(payload, expected):
        return [f"{where}: expected {expected}, got {type(payload).__name__}"]
    problems: list[str] = []
    if isinstance(payload, dict):
        for key in schema.get("required", []):
            if key not in payload:
                problems.append(f"{where}: missing key {key!r}")
        for key, sub in schema.get("properties", {}).items():
            if key in payload:
                problems.extend(schema_problems(payload[key], sub, f"{where}.{key}"))
    if isinstance(payload, list) and "items" in schema:
        for index, item in enumerate(payload):
            problems.extend(schema_problems(item, schema["items"], f"{where}[{index}]"))
    return problems
