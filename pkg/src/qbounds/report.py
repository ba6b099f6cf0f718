"""Report documents: JSON and CSV serialization with atomic writes."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass, field

import numpy as np

SCHEMA_VERSION = 1
SIG_DIGITS = 12


def _round(v: float):
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return float(f"{v:.{SIG_DIGITS}g}")


def normalize(obj):
    """Convert numpy scalars, complex numbers, and tuples into JSON-ready values."""
    if isinstance(obj, dict):
        return {str(k): normalize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [normalize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return normalize(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _round(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": _round(obj.real), "im": _round(obj.imag)}
    return obj


@dataclass
class ReportDocument:
    command: str
    scenario: dict
    results: list[dict] = field(default_factory=list)
    environment: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)
    schema_version: int = SCHEMA_VERSION

    def to_dict(self) -> dict:
        return normalize({
            "schema_version": self.schema_version,
            "command": self.command,
            "scenario": self.scenario,
            "results": self.results,
            "summary": self.summary,
            "environment": self.environment,
        })

    def to_json(self) -> str:
        return dumps(self.to_dict())

    def to_csv(self) -> str:
        return rows_to_csv(self.results)


def dumps(obj) -> str:
    return json.dumps(normalize(obj), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def rows_to_csv(rows: list[dict], columns: list[str] | None = None) -> str:
    rows = [normalize(r) for r in rows]
    if columns is None:
        columns = []
        for r in rows:
            columns += [k for k in r if k not in columns and not isinstance(r[k], (dict, list))]
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: r.get(k, "") for k in columns})
    return buf.getvalue()


def write_atomic(path: str, text: str) -> None:
    """Write to a temporary file in the target directory, then rename over the target."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".qbounds-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
