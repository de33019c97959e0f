"""
Report Writer

Writes command results as CSV or JSON with a metadata block (version,
command, parameters, tolerances, seed and an optional timestamp).

CSV layout: `# key: value` metadata lines, a header row, then one row per
record with floats at 17 significant digits. JSON layout:
{"metadata": {...}, "rows": [...], "summary": {...}}.

Primary functions:
  - build_metadata(command, parameters, tolerances, seed)
  - write_report(rows, metadata, fmt, output, summary)
"""

import csv
import datetime
import io
import json
import logging
import sys
from typing import Optional

import numpy as np

from configs.defaults import REPORT_TIMESTAMP
from configs.version import __version__

FORMATS = ("csv", "json")


def _coerce(value):
    """Plain Python types for numpy scalars, arrays, complex numbers and tuples."""
    if isinstance(value, np.ndarray):
        return [_coerce(v) for v in value.tolist()]
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return value.item()
    if isinstance(value, (complex, np.complexfloating)):
        return {"re": float(value.real), "im": float(value.imag)}
    if isinstance(value, (list, tuple)):
        return [_coerce(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _coerce(v) for k, v in value.items()}
    return value


def format_value(value) -> str:
    value = _coerce(value)
    if isinstance(value, float):
        return f"{value:.17g}"
    if isinstance(value, (list, dict)):
        return json.dumps(value, sort_keys=True)
    return str(value)


def build_metadata(command: str, parameters: dict, tolerances: Optional[dict] = None,
                   seed: Optional[int] = None) -> dict:
    meta = {
        "version": __version__,
        "command": command,
        "parameters": _coerce(parameters),
        "tolerances": _coerce(tolerances or {}),
        "seed": seed,
    }
    if REPORT_TIMESTAMP:
        meta["generated_at"] = datetime.datetime.now(datetime.timezone.utc).isoformat()
    return meta


def render_csv(rows: list, metadata: dict, summary: Optional[dict] = None) -> str:
    buffer = io.StringIO()
    for key, value in metadata.items():
        buffer.write(f"# {key}: {format_value(value)}\n")
    for key, value in (summary or {}).items():
        buffer.write(f"# summary.{key}: {format_value(value)}\n")
    if rows:
        fields = list(dict.fromkeys(name for row in rows for name in row))
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(fields)
        for row in rows:
            writer.writerow([format_value(row.get(name, "")) for name in fields])
    return buffer.getvalue()


def render_json(rows: list, metadata: dict, summary: Optional[dict] = None) -> str:
    payload = {
        "metadata": _coerce(metadata),
        "rows": [_coerce(row) for row in rows],
        "summary": _coerce(summary or {}),
    }
    return json.dumps(payload, indent=2, sort_keys=True, allow_nan=True) + "\n"


def write_report(rows: list, metadata: dict, fmt: str = "csv", output: Optional[str] = None,
                 summary: Optional[dict] = None) -> str:
    """Render and write to `output` (stdout when None). Returns the rendered text."""
    if fmt not in FORMATS:
        raise ValueError(f"unknown report format '{fmt}', expected one of {FORMATS}")
    text = render_csv(rows, metadata, summary) if fmt == "csv" else render_json(rows, metadata, summary)
    if output:
        with open(output, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        logging.info(f"Wrote {len(rows)} rows to {output} ({fmt})")
    else:
        sys.stdout.write(text)
    return text
