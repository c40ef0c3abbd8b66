"""Run audits and on-disk artifacts: time-series CSV, entropy report, field snapshots, manifest."""

from __future__ import annotations

import csv
import hashlib
import json
import struct
from pathlib import Path

import numpy as np

from .checks import (
    Verdict,
    check_apriori,
    check_conservation,
    check_entropy_monotone,
    check_positivity,
    check_reaction_energy_bound,
    check_w_bound,
)
from .entropy import constants
from .system import CHECK_NAMES

TIMESERIES_HEADER = (
    "t", "int_E", "int_p", "grad_E_sq", "inv_a1a2", "inv_a3a4", "inv_a1a4",
    "sup_weighted", "lhs_cubed", "w_margin", "dt",
)
SNAPSHOT_MAGIC = b"RDF1"
SNAPSHOT_HEADER = struct.Struct("<4sI3q")  # 32 bytes


def audit(traj, names=CHECK_NAMES) -> list[Verdict]:
    """Run the named trajectory checkers in a fixed order."""
    bundle = constants(traj.grid, traj.cfg.diff, traj.cfg.horizon, traj.states[0])
    table = {
        "entropy": lambda: check_entropy_monotone(traj),
        "conservation": lambda: check_conservation(traj),
        "positivity": lambda: check_positivity(traj),
        "w_bound": lambda: check_w_bound(traj),
        "apriori": lambda: check_apriori(traj, bundle),
        "reaction_energy": lambda: check_reaction_energy_bound(traj),
    }
    return [table[n]() for n in CHECK_NAMES if n in names]


def timeseries_rows(traj) -> list[tuple]:
    """One row per stored snapshot, matched to the step record at that time."""
    by_t = {r.t: r for r in traj.records}
    rows = []
    for s in traj.states:
        r = by_t[s.t]
        rows.append((r.t, r.int_E, r.int_p, r.grad_E_sq, *r.invariants, r.sup_weighted, r.lhs_cubed, r.w_margin, r.dt))
    return rows


def write_timeseries(path: Path, traj) -> Path:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TIMESERIES_HEADER)
        for row in timeseries_rows(traj):
            w.writerow([repr(float(v)) for v in row])
    return path


def read_timeseries(path: Path) -> tuple[list[str], np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array([[float(v) for v in r] for r in rows[1:]])


def write_entropy_report(path: Path, verdicts: list[Verdict], extra: dict | None = None) -> Path:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["check", "lhs", "rhs", "margin", "status"])
        for v in verdicts:
            w.writerow([v.name, repr(float(v.lhs)), repr(float(v.rhs)), repr(float(v.margin)), v.status])
        for k, val in (extra or {}).items():
            w.writerow([k, repr(float(val)), "", "", "info"])
    return path


def write_field(path: Path, values: np.ndarray, *, t: float, species: str, extent) -> tuple[Path, Path]:
    """Binary field: 32-byte header then row-major float64 LE values; text sidecar alongside."""
    values = np.ascontiguousarray(values, dtype="<f8")
    dims = list(values.shape) + [1] * (3 - values.ndim)
    with open(path, "wb") as fh:
        fh.write(SNAPSHOT_HEADER.pack(SNAPSHOT_MAGIC, values.ndim, *dims))
        fh.write(values.tobytes(order="C"))
    side = path.with_suffix(".txt")
    side.write_text(f"t = {t!r}\nspecies = {species}\nextent = {' '.join(repr(float(e)) for e in extent)}\n")
    return path, side


def read_field(path: Path) -> np.ndarray:
    raw = Path(path).read_bytes()
    magic, dim, *dims = SNAPSHOT_HEADER.unpack_from(raw)
    if magic != SNAPSHOT_MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    shape = tuple(dims[:dim])
    data = np.frombuffer(raw, dtype="<f8", offset=SNAPSHOT_HEADER.size)
    if data.size != int(np.prod(shape)):
        raise ValueError(f"{path}: expected {np.prod(shape)} values, found {data.size}")
    return data.reshape(shape).copy()


def sha256(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(path: Path, *, config_text: str, version: str, started: str, finished: str,
                   artifacts: list[Path], exit_code: int) -> Path:
    base = Path(path).parent
    manifest = {
        "config": config_text,
        "version": version,
        "started": started,
        "finished": finished,
        "exit_code": exit_code,
        "artifacts": [{"path": str(Path(a).relative_to(base)), "sha256": sha256(a)} for a in artifacts],
    }
    Path(path).write_text(json.dumps(manifest, indent=2) + "\n")
    return path

