"""On-disk formats for simulation data.

Density file: one ASCII header line ``n_r n_z d_r d_z`` followed by the
raw row-major field as little-endian 64-bit floats.  Feature file: plain
text, two lines per time step (shock coefficients, then edge
coefficients) as decimal numbers.  Both formats round-trip float64
exactly (headers and feature lines use repr, which is shortest-exact).

The manifest is a JSON document mapping sim_id to parameter levels and
file locations, plus the ensemble-wide settings needed to interpret them.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import MalformedFile
from .model import CylGrid, DensityField, FeatureSet, SimulationRecord, PARAM_NAMES

MANIFEST_NAME = "manifest.json"


def write_density(field: DensityField, path) -> None:
    g = field.grid
    header = f"{g.n_r} {g.n_z} {g.d_r!r} {g.d_z!r}\n"
    payload = np.ascontiguousarray(field.values, dtype="<f8").tobytes()
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(payload)


def read_density(path) -> DensityField:
    with open(path, "rb") as fh:
        header = fh.readline()
        payload = fh.read()
    if not header:
        raise MalformedFile(f"{path}: empty file")
    try:
        parts = header.decode("ascii").split()
        n_r, n_z = int(parts[0]), int(parts[1])
        d_r, d_z = float(parts[2]), float(parts[3])
        if len(parts) != 4:
            raise ValueError
    except (ValueError, IndexError, UnicodeDecodeError):
        raise MalformedFile(f"{path}: bad header {header!r}") from None
    expected = n_r * n_z * 8
    if len(payload) != expected:
        raise MalformedFile(
            f"{path}: payload is {len(payload)} bytes, header implies {expected}"
        )
    values = np.frombuffer(payload, dtype="<f8").astype(np.float64)
    return DensityField(CylGrid(n_r, n_z, d_r, d_z), values)


def write_features(per_step: list[FeatureSet], path) -> None:
    lines = []
    for fs in per_step:
        lines.append(" ".join(repr(c) for c in fs.shock_coeffs))
        lines.append(" ".join(repr(c) for c in fs.edge_coeffs))
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def read_features(path) -> list[FeatureSet]:
    text = Path(path).read_text(encoding="ascii")
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise MalformedFile(f"{path}: empty feature file")
    if len(lines) % 2 != 0:
        raise MalformedFile(f"{path}: odd number of coefficient lines")
    out = []
    try:
        for i in range(0, len(lines), 2):
            shock = tuple(float(tok) for tok in lines[i].split())
            edge = tuple(float(tok) for tok in lines[i + 1].split())
            out.append(FeatureSet(shock, edge))
    except ValueError:
        raise MalformedFile(f"{path}: non-numeric coefficient") from None
    return out


def density_path_for(record: SimulationRecord, t: int) -> str:
    """Resolve the per-time-step density file from the record's pattern."""
    return record.density_path.format(t=t)


def write_manifest(
    out_dir,
    records: list[SimulationRecord],
    *,
    grid: CylGrid,
    t_steps: int,
    n_modes: int,
    n_theta: int,
    level_counts: dict[str, int],
    master_seed: int,
) -> Path:
    doc = {
        "format_version": 1,
        "grid": {"n_r": grid.n_r, "n_z": grid.n_z, "d_r": grid.d_r, "d_z": grid.d_z},
        "t_steps": t_steps,
        "n_modes": n_modes,
        "n_theta": n_theta,
        "level_counts": {name: level_counts[name] for name in PARAM_NAMES},
        "master_seed": master_seed,
        "simulations": [
            {
                "sim_id": r.sim_id,
                "params": {name: lvl for name, lvl in zip(PARAM_NAMES, r.params)},
                "density_path": r.density_path,
                "feature_path": r.feature_path,
            }
            for r in records
        ],
    }
    path = Path(out_dir) / MANIFEST_NAME
    path.write_text(json.dumps(doc, indent=1), encoding="utf-8")
    return path


def read_manifest(path) -> dict:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError):
        raise MalformedFile(f"{path}: not a JSON manifest") from None
    for key in ("grid", "t_steps", "simulations", "level_counts"):
        if key not in doc:
            raise MalformedFile(f"{path}: manifest missing {key!r}")
    return doc


def manifest_records(doc: dict) -> list[SimulationRecord]:
    return [
        SimulationRecord(
            sim_id=entry["sim_id"],
            params=tuple(entry["params"][name] for name in PARAM_NAMES),
            density_path=entry["density_path"],
            feature_path=entry["feature_path"],
        )
        for entry in doc["simulations"]
    ]
