"""CSV traces and JSON sidecars."""

from __future__ import annotations

import csv
import json
from dataclasses import astuple, dataclass, fields
from pathlib import Path

TRACE_HEADER = ("seed", "step", "loss", "dmin_rad", "dmin_deg", "svar", "wall_ms")
CONVERGENCE_HEADER = ("seed", "circles", "estimate", "stderr")


@dataclass(frozen=True)
class TraceRow:
    seed: int
    step: int
    loss: float
    dmin_rad: float
    dmin_deg: float
    svar: float
    wall_ms: float


@dataclass(frozen=True)
class ConvergenceRow:
    seed: int
    circles: int
    estimate: float
    stderr: float


def _fmt(value) -> str:
    # repr round-trips floats exactly
    if isinstance(value, bool):
        raise TypeError("booleans are not valid trace values")
    if isinstance(value, int):
        return str(value)
    return repr(float(value))


def _write(rows, header, key, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    ordered = sorted(rows, key=key)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in ordered:
            w.writerow([_fmt(v) for v in astuple(row)])
    return path


def emit_csv(rows, path) -> Path:
    """Write trace rows sorted by ``(seed, step)``; steps must be unique per seed."""
    rows = list(rows)
    seen = set()
    for r in rows:
        if (r.seed, r.step) in seen:
            raise ValueError(f"duplicate trace row for seed {r.seed}, step {r.step}")
        seen.add((r.seed, r.step))
    return _write(rows, TRACE_HEADER, lambda r: (r.seed, r.step), path)


def emit_convergence_csv(rows, path) -> Path:
    return _write(list(rows), CONVERGENCE_HEADER, lambda r: (r.seed, r.circles), path)


def _read(path, cls, header):
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        got = tuple(next(reader))
        if got != header:
            raise ValueError(f"{path}: unexpected header {got}")
        types = [f.type for f in fields(cls)]
        out = []
        for line in reader:
            vals = [int(v) if t in (int, "int") else float(v) for v, t in zip(line, types)]
            out.append(cls(*vals))
    return out


def read_csv(path) -> list[TraceRow]:
    return _read(path, TraceRow, TRACE_HEADER)


def read_convergence_csv(path) -> list[ConvergenceRow]:
    return _read(path, ConvergenceRow, CONVERGENCE_HEADER)


def write_json(data, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path
