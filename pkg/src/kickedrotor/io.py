"""CSV and manifest output.

CSV layout: one ``# key=value ...`` metadata line, one column-header line,
then comma-separated rows with LF endings. Floats use ``repr`` (shortest
string that round-trips).
"""
from __future__ import annotations

import csv
import json
import os
import platform
from pathlib import Path
from typing import Iterable, List, Sequence, Tuple

import numpy as np
import scipy

__all__ = ["format_value", "write_csv", "read_csv", "write_manifest", "library_versions"]


def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path, meta: str, columns: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write("# " + meta.replace("\n", " ") + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([format_value(v) for v in row])
    return path


def read_csv(path) -> Tuple[str, List[str], np.ndarray]:
    """Return ``(meta, columns, data)``; ``data`` is a float array."""
    with open(path, newline="") as fh:
        meta = fh.readline()
        if not meta.startswith("#"):
            raise ValueError(f"{path}: missing metadata line")
        reader = csv.reader(fh)
        columns = next(reader)
        rows = [[_parse(v) for v in r] for r in reader if r]
    data = np.array(rows, dtype=float).reshape(-1, len(columns))
    return meta[1:].strip(), columns, data


def _parse(v: str) -> float:
    if v == "true":
        return 1.0
    if v == "false":
        return 0.0
    return float(v)


def library_versions() -> dict:
    from . import __version__
    return {"kickedrotor": __version__, "numpy": np.__version__,
            "scipy": scipy.__version__, "python": platform.python_version()}


def write_manifest(path, config: dict, outputs: Sequence, extra: dict = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    doc = {"config": config, "versions": library_versions(),
           "outputs": [os.fspath(p) for p in outputs]}
    if extra:
        doc.update(extra)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True, default=format_value) + "\n")
    return path
