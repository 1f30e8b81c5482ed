"""Deterministic CSV/JSON emission with the run configuration echoed.

Every data file starts with comment lines recording the scientific
configuration that produced it (never the worker count, which must not
change the bytes).  Floats are written with repr, the shortest exact
round-trip form, so re-runs with the same seed are byte-identical.
"""

from __future__ import annotations

import json
from pathlib import Path

SCHEMA_VERSION = 1


def fmt_value(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, float):
        return repr(x)
    return str(x)


def header_lines(command: str, pairs: list[tuple[str, object]]) -> list[str]:
    lines = [f"# cbsfs {command}", f"# schema_version={SCHEMA_VERSION}"]
    lines.extend(f"# {key}={fmt_value(value)}" for key, value in pairs)
    return lines


def write_csv(
    path: str | Path,
    command: str,
    pairs: list[tuple[str, object]],
    columns: list[str],
    rows: list[list],
) -> None:
    out = header_lines(command, pairs)
    out.append(",".join(columns))
    for row in rows:
        out.append(",".join(fmt_value(x) for x in row))
    Path(path).write_text("\n".join(out) + "\n")


def write_json_doc(
    path: str | Path, command: str, pairs: list[tuple[str, object]], payload
) -> None:
    doc = {
        "command": command,
        "schema_version": SCHEMA_VERSION,
        "config": {key: value for key, value in pairs},
        "data": payload,
    }
    Path(path).write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")


def write_text(path: str | Path, lines: list[str]) -> None:
    Path(path).write_text("\n".join(lines) + "\n")
