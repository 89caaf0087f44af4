"""Dataset serialization: CSV tables and JSON run manifests.

Floats are written with 17 significant digits so that every value survives a
parse/format round trip unchanged.
"""

from __future__ import annotations

import json
import math
import platform
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import __version__

TRAJECTORY_HEADER = ("t", "p1_dia", "p2_dia", "p1_adi", "p2_adi", "re_rho12", "im_rho12", "purity")
SWEEP_HEADER = ("z", "lambda", "survival", "spread", "converged")


class CsvFormatError(ValueError):
    def __init__(self, path, line: int, message: str):
        super().__init__(f"{path}:{line}: {message}")
        self.line = line


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    x = float(value)
    if math.isnan(x):
        return "nan"
    if x == 0.0:
        return "0"
    return format(x, ".17g")


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(header)]
    lines.extend(",".join(fmt(v) for v in row) for row in rows)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def _parse_cell(cell: str) -> float:
    if cell == "true":
        return 1.0
    if cell == "false":
        return 0.0
    return float(cell)


def read_csv(path) -> tuple[list[str], np.ndarray]:
    """Read a numeric CSV written by :func:`write_csv`."""
    path = Path(path)
    text = path.read_text(encoding="utf-8").splitlines()
    if not text:
        raise CsvFormatError(path, 1, "empty file")
    header = text[0].split(",")
    rows = []
    for lineno, line in enumerate(text[1:], start=2):
        if not line.strip():
            continue
        cells = line.split(",")
        if len(cells) != len(header):
            raise CsvFormatError(path, lineno, f"expected {len(header)} fields, found {len(cells)}")
        try:
            rows.append([_parse_cell(c) for c in cells])
        except ValueError:
            raise CsvFormatError(path, lineno, f"non-numeric field in {line!r}") from None
    return header, np.array(rows, dtype=float).reshape(len(rows), len(header))


def trajectory_rows(traj) -> np.ndarray:
    c = traj.coherence
    return np.column_stack([
        traj.t, traj.p1_dia, traj.p2_dia, traj.p1_adi, traj.p2_adi,
        c.real, c.imag, traj.purity(),
    ])


def write_trajectory(path, traj) -> Path:
    return write_csv(path, TRAJECTORY_HEADER, trajectory_rows(traj))


def sweep_rows(result) -> list[tuple]:
    return [(c.z, c.lambda_tilde, c.survival, c.spread, c.converged) for c in result.cells]


def write_sweep(path, result) -> Path:
    return write_csv(path, SWEEP_HEADER, sweep_rows(result))


def build_manifest(command: str, config: dict, outputs: Sequence, *, integrator: dict | None = None,
                   wall_clock: float | None = None, invariants: dict | None = None) -> dict:
    return {
        "tool": "lzzeno",
        "version": __version__,
        "command": command,
        "config": config,
        "integrator": integrator or {},
        "outputs": [str(Path(p).name) for p in outputs],
        "wall_clock_seconds": wall_clock,
        "invariants": invariants or {},
        "python": platform.python_version(),
        "numpy": np.__version__,
    }


def write_manifest(path, manifest: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True, default=_jsonable) + "\n", encoding="utf-8")
    return path


def manifest_path(dataset) -> Path:
    dataset = Path(dataset)
    return dataset.with_name(dataset.stem + ".manifest.json")


def _jsonable(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")
