"""Delimited-text and JSON output with an embedded run manifest."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, is_dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__


@dataclass
class RunManifest:
    command: str
    model: dict | None
    parameters: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    outputs: list[str] = field(default_factory=list)
    version: str = __version__
    timestamp: str | None = None

    def stamp(self):
        self.timestamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
        return self

    def to_dict(self) -> dict:
        d = asdict(self)
        if d["timestamp"] is None:
            del d["timestamp"]
        return d


def _clean(obj):
    if is_dataclass(obj) and not isinstance(obj, type):
        return _clean(asdict(obj))
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": _clean(float(obj.real)), "im": _clean(float(obj.imag))}
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        if math.isnan(f):
            return None
        if math.isinf(f):
            return "inf" if f > 0 else "-inf"
        return f
    if isinstance(obj, np.bool_):
        return bool(obj)
    if hasattr(obj, "value") and not isinstance(obj, (int, str)):
        return obj.value
    return obj


def to_jsonable(obj):
    return _clean(obj)


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_tsv(path, manifest: RunManifest, columns, rows) -> Path:
    """Tab-separated table; the first line is ``# manifest: <json>``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    manifest.outputs.append(path.name)
    with path.open("w") as fh:
        fh.write("# manifest: " + json.dumps(to_jsonable(manifest.to_dict()), sort_keys=True) + "\n")
        fh.write("\t".join(columns) + "\n")
        for row in rows:
            fh.write("\t".join(_fmt(v) for v in row) + "\n")
    return path


def write_json(path, manifest: RunManifest, payload: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    manifest.outputs.append(path.name)
    doc = {"manifest": manifest.to_dict(), **payload}
    path.write_text(json.dumps(to_jsonable(doc), indent=2, sort_keys=True) + "\n")
    return path


def _cell(x: str):
    try:
        return float(x)
    except ValueError:
        return x


def read_tsv(path):
    """Returns (manifest dict, column names, rows).

    Rows are a float array when every cell is numeric, otherwise an object
    array holding floats and strings.
    """
    lines = Path(path).read_text().splitlines()
    manifest = json.loads(lines[0].split(":", 1)[1])
    columns = lines[1].split("\t")
    rows = [[_cell(x) for x in ln.split("\t")] for ln in lines[2:]]
    if not rows:
        return manifest, columns, np.empty((0, len(columns)))
    numeric = all(isinstance(x, float) for r in rows for x in r)
    return manifest, columns, np.array(rows, dtype=float if numeric else object)
