# src/data/report_writer/report_writer.py

import io
import json
import os
from datetime import datetime, timezone
from typing import Any, Dict, List, Mapping, Optional

import jsonschema
import pandas as pd

SIGNIFICANT_DIGITS = 9
SCHEMA_PATH = os.path.join(os.path.dirname(__file__), "report_schema.json")
VERSION = "1.0"

_schema_cache: Optional[Dict[str, Any]] = None


def rounded(value: Any) -> Any:
    """Round every float (nested in dicts/lists/tuples) to 9 significant digits."""
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, float):
        return float(f"{value:.{SIGNIFICANT_DIGITS}g}")
    if isinstance(value, Mapping):
        return {str(k): rounded(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [rounded(v) for v in value]
    return value


def load_schema() -> Dict[str, Any]:
    global _schema_cache
    if _schema_cache is None:
        if not os.path.exists(SCHEMA_PATH):
            raise FileNotFoundError(f"Report schema not found: {SCHEMA_PATH}")
        with open(SCHEMA_PATH, encoding="utf-8") as f:
            _schema_cache = json.load(f)
    return _schema_cache


def validate_payload(payload: Mapping[str, Any], kind: str) -> None:
    """
    1) Pick the definition for `kind` out of the shipped schema.
    2) Validate; jsonschema.ValidationError propagates.
    """
    schema = dict(load_schema())
    if kind not in schema.get("$defs", {}):
        raise RuntimeError(f"No schema definition for report kind {kind!r}")
    schema["$ref"] = f"#/$defs/{kind}"
    jsonschema.validate(instance=payload, schema=schema)


def meta_block() -> Dict[str, str]:
    return {"timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"), "version": VERSION}


def to_json(payload: Mapping[str, Any], kind: str, meta: bool = False) -> str:
    """
    Deterministic JSON for a report payload: 9 significant digits, keys in
    insertion order. With meta the payload moves under "data" next to a "meta" object.
    """
    data = rounded(payload)
    validate_payload(data, kind)
    document: Any = {"data": data, "meta": meta_block()} if meta else data
    return json.dumps(document, indent=2, allow_nan=False) + "\n"


def to_csv(rows: List[Mapping[str, Any]]) -> str:
    """One header line, then one line per row in the given order."""
    if not rows:
        raise RuntimeError("Nothing to write: no rows")
    frame = pd.DataFrame([dict(r) for r in rows])
    buffer = io.StringIO()
    frame.to_csv(buffer, index=False, float_format=f"%.{SIGNIFICANT_DIGITS}g", lineterminator="\n")
    return buffer.getvalue()


def _text_lines(value: Any, indent: int) -> List[str]:
    pad = "  " * indent
    lines: List[str] = []
    for key, item in value.items():
        if isinstance(item, Mapping):
            lines.append(f"{pad}{key}:")
            lines.extend(_text_lines(item, indent + 1))
        elif isinstance(item, list) and item and isinstance(item[0], Mapping):
            lines.append(f"{pad}{key}:")
            for entry in item:
                lines.append(f"{pad}  -")
                lines.extend(_text_lines(entry, indent + 2))
        else:
            lines.append(f"{pad}{key}: {_text_value(item)}")
    return lines


def _text_value(item: Any) -> str:
    if isinstance(item, float):
        return f"{item:.{SIGNIFICANT_DIGITS}g}"
    if isinstance(item, list):
        return ", ".join(_text_value(v) for v in item)
    if item is None:
        return "-"
    return str(item)


def to_text(payload: Mapping[str, Any]) -> str:
    return "\n".join(_text_lines(payload, 0)) + "\n"


def write_report(
    payload: Mapping[str, Any],
    kind: str,
    fmt: str,
    meta: bool = False,
    rows: Optional[List[Mapping[str, Any]]] = None,
) -> str:
    """
    Render a payload in the requested format. csv writes `rows` when given,
    else the payload's own "rows", else its scalar fields as a one-row table.
    """
    if fmt == "json":
        return to_json(payload, kind, meta)
    if fmt == "csv":
        if rows is None:
            rows = payload.get("rows")
        if rows is None:
            rows = [{k: v for k, v in payload.items() if not isinstance(v, (Mapping, list))}]
        return to_csv(rows)
    if fmt == "text":
        return to_text(payload)
    raise RuntimeError(f"Unknown output format {fmt!r}")
