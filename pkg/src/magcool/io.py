"""Run records and data export: canonical CSV/JSON writers and hashing.

CSV files are UTF-8 with LF line endings, mandatory headers, and floats
rendered by shortest round-trip formatting so identical inputs produce
byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
import time
from pathlib import Path


def fmt(value) -> str:
    """Shortest round-trip text for a cell (floats via repr)."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def fmt17(value: float) -> float:
    """Float restricted to 17 significant digits (full double precision)."""
    return float(f"{value:.17g}")


def write_csv(path, header, rows) -> Path:
    """Write rows of cells under a header; returns the path."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt(cell) for cell in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    return path


def read_csv(path):
    """Header and float-typed rows of a CSV written by ``write_csv``."""
    text = Path(path).read_text(encoding="utf-8")
    lines = [ln for ln in text.split("\n") if ln]
    header = lines[0].split(",")
    rows = []
    for ln in lines[1:]:
        cells = []
        for cell in ln.split(","):
            try:
                cells.append(float(cell))
            except ValueError:
                cells.append(cell)
        rows.append(cells)
    return header, rows


def write_json(path, payload) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8", newline="\n"
    )
    return path


def params_hash(snapshot: dict) -> str:
    """Deterministic 12-hex digest of a parameter snapshot."""
    canonical = json.dumps(snapshot, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()[:12]


def run_directory(base, snapshot: dict, timestamp: float | None = None) -> Path:
    """Per-run output directory named by parameter hash plus UTC timestamp.

    Reruns with an identical configuration share the hash prefix, which makes
    them easy to group and diff.
    """
    stamp = time.strftime("%Y%m%dT%H%M%SZ", time.gmtime(timestamp))
    path = Path(base) / f"{params_hash(snapshot)}-{stamp}"
    path.mkdir(parents=True, exist_ok=True)
    return path
