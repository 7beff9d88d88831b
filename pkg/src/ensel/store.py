"""Embedded relational metadata store (SQLite).

Single source of truth for simulations, ground truths, methods,
post-processed records, and training datasets.  Writes are serialized by
SQLite itself; every public operation commits atomically.

Geometry is persisted as a canonical text blob so replay never depends
on a binary layout:

    box <x_min> <x_max> <y_min> <y_max>
    lasso <x1> <y1> <x2> <y2> ...

Numbers use repr, which round-trips float64 exactly.
"""

from __future__ import annotations

import datetime as _dt
import json
import sqlite3
from pathlib import Path

from .errors import (
    CorruptStore,
    DuplicateKey,
    EmptySelection,
    NotFound,
    ValidationError,
)
from .model import (
    BoxGeometry,
    FilterExpr,
    LassoGeometry,
    MethodInfo,
    NormKind,
    PARAM_NAMES,
    PostRecord,
    SelectionSpec,
    SimulationRecord,
    TrainingDataset,
    validate,
)
from .selection import parse_filter, serialize_filter

SCHEMA_VERSION = 1

_PARAM_COLS = ", ".join(f"{name} INTEGER NOT NULL" for name in PARAM_NAMES)

_SCHEMA = f"""
CREATE TABLE IF NOT EXISTS simulation (
    sim_id TEXT PRIMARY KEY,
    {_PARAM_COLS},
    density_path TEXT NOT NULL,
    feature_path TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS ground_truth (
    gt_id INTEGER PRIMARY KEY AUTOINCREMENT,
    sim_id TEXT NOT NULL REFERENCES simulation(sim_id)
);
CREATE TABLE IF NOT EXISTS method_info (
    method_id INTEGER PRIMARY KEY AUTOINCREMENT,
    gt_id INTEGER NOT NULL REFERENCES ground_truth(gt_id),
    gt_time_step INTEGER NOT NULL,
    norm TEXT NOT NULL,
    description TEXT NOT NULL DEFAULT ''
);
CREATE TABLE IF NOT EXISTS postprocessed_data (
    method_id INTEGER NOT NULL REFERENCES method_info(method_id),
    sim_id TEXT NOT NULL REFERENCES simulation(sim_id),
    time_step INTEGER NOT NULL,
    delta_shock REAL,
    delta_edge REAL,
    delta_rho REAL,
    invalid INTEGER NOT NULL DEFAULT 0,
    UNIQUE (method_id, sim_id, time_step)
);
CREATE TABLE IF NOT EXISTS training_dataset (
    dataset_id INTEGER NOT NULL REFERENCES training_dataset_info(dataset_id),
    sim_id TEXT NOT NULL REFERENCES simulation(sim_id)
);
CREATE TABLE IF NOT EXISTS training_dataset_info (
    dataset_id INTEGER PRIMARY KEY AUTOINCREMENT,
    description TEXT NOT NULL,
    created_at TEXT NOT NULL,
    selection_type TEXT NOT NULL,
    geometry TEXT NOT NULL,
    filter_string TEXT NOT NULL,
    w_shock REAL NOT NULL,
    w_edge REAL NOT NULL,
    time_step INTEGER NOT NULL,
    color_by TEXT NOT NULL,
    subsample_p REAL NOT NULL,
    subsample_seed INTEGER NOT NULL,
    method_id INTEGER NOT NULL REFERENCES method_info(method_id)
);
"""


def serialize_geometry(geom) -> str:
    if isinstance(geom, BoxGeometry):
        return f"box {geom.x_min!r} {geom.x_max!r} {geom.y_min!r} {geom.y_max!r}"
    if isinstance(geom, LassoGeometry):
        coords = " ".join(f"{x!r} {y!r}" for x, y in geom.vertices)
        return f"lasso {coords}"
    raise ValidationError(f"unknown geometry type {type(geom).__name__}")


def parse_geometry(text: str):
    parts = text.split()
    if parts and parts[0] == "box" and len(parts) == 5:
        return BoxGeometry(*(float(v) for v in parts[1:]))
    if parts and parts[0] == "lasso" and len(parts) >= 7 and len(parts) % 2 == 1:
        vals = [float(v) for v in parts[1:]]
        return LassoGeometry(tuple(zip(vals[0::2], vals[1::2])))
    raise CorruptStore(f"bad geometry blob {text!r}")


class Store:
    """Handle to one on-disk metadata store."""

    def __init__(self, path):
        self.path = str(path)
        self._conn = sqlite3.connect(self.path)
        self._conn.row_factory = sqlite3.Row
        self._conn.execute("PRAGMA foreign_keys = ON")
        self._check_or_init()

    def _check_or_init(self):
        try:
            version = self._conn.execute("PRAGMA user_version").fetchone()[0]
            existing = {
                row[0]
                for row in self._conn.execute(
                    "SELECT name FROM sqlite_master WHERE type = 'table'"
                )
            }
        except sqlite3.DatabaseError as exc:
            self._conn.close()
            raise CorruptStore(f"{self.path}: not a metadata store ({exc})") from None
        if existing and version != SCHEMA_VERSION:
            self._conn.close()
            raise CorruptStore(
                f"{self.path}: schema version {version}, expected {SCHEMA_VERSION}"
            )
        self._conn.executescript(_SCHEMA)
        self._conn.execute(f"PRAGMA user_version = {SCHEMA_VERSION}")
        self._conn.commit()

    def close(self):
        self._conn.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    # -- simulations --------------------------------------------------------

    def insert_simulations(self, records: list[SimulationRecord]) -> None:
        for r in records:
            validate(r)
        cols = ", ".join(PARAM_NAMES)
        marks = ", ".join("?" for _ in PARAM_NAMES)
        try:
            with self._conn:
                self._conn.executemany(
                    f"INSERT INTO simulation (sim_id, {cols}, density_path, feature_path)"
                    f" VALUES (?, {marks}, ?, ?)",
                    [
                        (r.sim_id, *r.params, r.density_path, r.feature_path)
                        for r in records
                    ],
                )
        except sqlite3.IntegrityError as exc:
            raise DuplicateKey(f"simulation already present: {exc}") from None

    def _sim_from_row(self, row) -> SimulationRecord:
        return SimulationRecord(
            sim_id=row["sim_id"],
            params=tuple(row[name] for name in PARAM_NAMES),
            density_path=row["density_path"],
            feature_path=row["feature_path"],
        )

    def list_simulations(self) -> list[SimulationRecord]:
        rows = self._conn.execute(
            "SELECT * FROM simulation ORDER BY sim_id"
        ).fetchall()
        return [self._sim_from_row(r) for r in rows]

    def get_simulation(self, sim_id: str) -> SimulationRecord:
        row = self._conn.execute(
            "SELECT * FROM simulation WHERE sim_id = ?", (sim_id,)
        ).fetchone()
        if row is None:
            raise NotFound(f"simulation {sim_id!r} not found")
        return self._sim_from_row(row)

    # -- ground truths and methods ------------------------------------------

    def register_ground_truth(self, sim_id: str) -> int:
        self.get_simulation(sim_id)  # existence check
        with self._conn:
            cur = self._conn.execute(
                "INSERT INTO ground_truth (sim_id) VALUES (?)", (sim_id,)
            )
        return cur.lastrowid

    def get_ground_truth_sim(self, gt_id: int) -> SimulationRecord:
        row = self._conn.execute(
            "SELECT sim_id FROM ground_truth WHERE gt_id = ?", (gt_id,)
        ).fetchone()
        if row is None:
            raise NotFound(f"ground truth {gt_id} not found")
        return self.get_simulation(row["sim_id"])

    def create_method(
        self, gt_id: int, gt_time_step: int, norm: NormKind, description: str = ""
    ) -> int:
        self.get_ground_truth_sim(gt_id)
        norm = NormKind(norm)
        with self._conn:
            cur = self._conn.execute(
                "INSERT INTO method_info (gt_id, gt_time_step, norm, description)"
                " VALUES (?, ?, ?, ?)",
                (gt_id, gt_time_step, norm.value, description),
            )
        return cur.lastrowid

    def _method_from_row(self, row) -> MethodInfo:
        return MethodInfo(
            method_id=row["method_id"],
            gt_id=row["gt_id"],
            gt_time_step=row["gt_time_step"],
            norm=NormKind(row["norm"]),
            description=row["description"],
        )

    def list_methods(self) -> list[MethodInfo]:
        rows = self._conn.execute(
            "SELECT * FROM method_info ORDER BY method_id"
        ).fetchall()
        return [self._method_from_row(r) for r in rows]

    def get_method(self, method_id: int) -> MethodInfo:
        row = self._conn.execute(
            "SELECT * FROM method_info WHERE method_id = ?", (method_id,)
        ).fetchone()
        if row is None:
            raise NotFound(f"method {method_id} not found")
        return self._method_from_row(row)

    # -- post-processed records ----------------------------------------------

    def bulk_insert_records(
        self, records: list[PostRecord], *, upsert: bool = False
    ) -> None:
        if not records:
            return
        self.get_method(records[0].method_id)
        verb = "INSERT OR REPLACE" if upsert else "INSERT"
        try:
            with self._conn:
                self._conn.executemany(
                    f"{verb} INTO postprocessed_data"
                    " (method_id, sim_id, time_step, delta_shock, delta_edge,"
                    "  delta_rho, invalid) VALUES (?, ?, ?, ?, ?, ?, ?)",
                    [
                        (
                            r.method_id,
                            r.sim_id,
                            r.time_step,
                            None if r.invalid else r.delta_shock,
                            None if r.invalid else r.delta_edge,
                            None if r.invalid else r.delta_rho,
                            int(r.invalid),
                        )
                        for r in records
                    ],
                )
        except sqlite3.IntegrityError as exc:
            raise DuplicateKey(f"post record already present: {exc}") from None

    def existing_record_keys(self, method_id: int) -> set[tuple[str, int]]:
        rows = self._conn.execute(
            "SELECT sim_id, time_step FROM postprocessed_data WHERE method_id = ?",
            (method_id,),
        ).fetchall()
        return {(r["sim_id"], r["time_step"]) for r in rows}

    def time_step_range(self, method_id: int) -> tuple[int, int] | None:
        row = self._conn.execute(
            "SELECT MIN(time_step) lo, MAX(time_step) hi FROM postprocessed_data"
            " WHERE method_id = ?",
            (method_id,),
        ).fetchone()
        if row["lo"] is None:
            return None
        return (row["lo"], row["hi"])

    def query_records(self, method_id: int, time_step: int) -> list[dict]:
        """Post records joined with simulation parameters, one dict per sim."""
        self.get_method(method_id)
        cols = ", ".join(f"s.{name}" for name in PARAM_NAMES)
        rows = self._conn.execute(
            f"SELECT p.sim_id, p.time_step, p.delta_shock, p.delta_edge,"
            f" p.delta_rho, p.invalid, {cols}"
            " FROM postprocessed_data p JOIN simulation s ON s.sim_id = p.sim_id"
            " WHERE p.method_id = ? AND p.time_step = ? ORDER BY p.sim_id",
            (method_id, time_step),
        ).fetchall()
        return [
            {
                "sim_id": r["sim_id"],
                "time_step": r["time_step"],
                "dshock": r["delta_shock"],
                "dedge": r["delta_edge"],
                "drho": r["delta_rho"],
                "invalid": bool(r["invalid"]),
                **{name: r[name] for name in PARAM_NAMES},
            }
            for r in rows
        ]

    # -- training datasets ----------------------------------------------------

    def save_dataset(self, member_sim_ids, spec: SelectionSpec) -> int:
        members = sorted(set(member_sim_ids))
        if not members:
            raise EmptySelection("refusing to save a dataset with no members")
        validate(spec)
        self.get_method(spec.method_id)
        for sim_id in members:
            self.get_simulation(sim_id)
        created = spec.created_at or _dt.datetime.now(_dt.timezone.utc).isoformat()
        with self._conn:
            cur = self._conn.execute(
                "INSERT INTO training_dataset_info"
                " (description, created_at, selection_type, geometry,"
                "  filter_string, w_shock, w_edge, time_step, color_by,"
                "  subsample_p, subsample_seed, method_id)"
                " VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?)",
                (
                    spec.description,
                    created,
                    spec.selection_type,
                    serialize_geometry(spec.geometry),
                    serialize_filter(spec.filter),
                    spec.w_shock,
                    spec.w_edge,
                    spec.time_step,
                    spec.color_by,
                    spec.subsample_p,
                    spec.subsample_seed,
                    spec.method_id,
                ),
            )
            dataset_id = cur.lastrowid
            self._conn.executemany(
                "INSERT INTO training_dataset (dataset_id, sim_id) VALUES (?, ?)",
                [(dataset_id, sim_id) for sim_id in members],
            )
        return dataset_id

    def _spec_from_row(self, row) -> SelectionSpec:
        return SelectionSpec(
            method_id=row["method_id"],
            time_step=row["time_step"],
            w_shock=row["w_shock"],
            w_edge=row["w_edge"],
            color_by=row["color_by"],
            filter=parse_filter(row["filter_string"]),
            geometry=parse_geometry(row["geometry"]),
            subsample_p=row["subsample_p"],
            subsample_seed=row["subsample_seed"],
            description=row["description"],
            created_at=row["created_at"],
        )

    def load_settings(self, dataset_id: int) -> SelectionSpec:
        row = self._conn.execute(
            "SELECT * FROM training_dataset_info WHERE dataset_id = ?",
            (dataset_id,),
        ).fetchone()
        if row is None:
            raise NotFound(f"dataset {dataset_id} not found")
        return self._spec_from_row(row)

    def load_dataset(self, dataset_id: int) -> TrainingDataset:
        spec = self.load_settings(dataset_id)
        rows = self._conn.execute(
            "SELECT sim_id FROM training_dataset WHERE dataset_id = ?"
            " ORDER BY sim_id",
            (dataset_id,),
        ).fetchall()
        return TrainingDataset(
            dataset_id=dataset_id,
            member_sim_ids=frozenset(r["sim_id"] for r in rows),
            spec=spec,
        )

    def list_datasets(self) -> list[TrainingDataset]:
        ids = self._conn.execute(
            "SELECT dataset_id FROM training_dataset_info ORDER BY dataset_id"
        ).fetchall()
        return [self.load_dataset(r["dataset_id"]) for r in ids]

    def delete_dataset(self, dataset_id: int) -> None:
        self.load_settings(dataset_id)
        with self._conn:
            self._conn.execute(
                "DELETE FROM training_dataset WHERE dataset_id = ?", (dataset_id,)
            )
            self._conn.execute(
                "DELETE FROM training_dataset_info WHERE dataset_id = ?",
                (dataset_id,),
            )

    def export_dataset_doc(self, dataset_id: int) -> dict:
        """JSON-ready export document for one dataset (stable field names)."""
        ds = self.load_dataset(dataset_id)
        spec = ds.spec
        members = []
        for sim_id in sorted(ds.member_sim_ids):
            sim = self.get_simulation(sim_id)
            members.append(
                {
                    "sim_id": sim_id,
                    "params": {
                        name: lvl for name, lvl in zip(PARAM_NAMES, sim.params)
                    },
                }
            )
        return {
            "dataset_id": dataset_id,
            "description": spec.description,
            "created_at": spec.created_at,
            "spec": {
                "method_id": spec.method_id,
                "time_step": spec.time_step,
                "w_shock": spec.w_shock,
                "w_edge": spec.w_edge,
                "color_by": spec.color_by,
                "filter_string": serialize_filter(spec.filter),
                "selection_type": spec.selection_type,
                "geometry": serialize_geometry(spec.geometry),
                "subsample_p": spec.subsample_p,
                "subsample_seed": spec.subsample_seed,
            },
            "members": members,
        }

    def export_dataset(self, dataset_id: int, path) -> None:
        doc = self.export_dataset_doc(dataset_id)
        Path(path).write_text(json.dumps(doc, indent=1), encoding="utf-8")


def open_store(path) -> Store:
    """Open (and initialize if needed) the store at path.  Idempotent."""
    return Store(path)


def ingest_manifest(store: Store, manifest_path) -> list[SimulationRecord]:
    """Load an ensemble manifest and register its simulations.

    Relative file paths in the manifest are resolved against the manifest's
    directory before insertion, so the store always holds usable paths.
    """
    from . import fileio

    doc = fileio.read_manifest(manifest_path)
    base = Path(manifest_path).resolve().parent
    records = []
    for r in fileio.manifest_records(doc):
        records.append(
            SimulationRecord(
                sim_id=r.sim_id,
                params=r.params,
                density_path=str(base / r.density_path),
                feature_path=str(base / r.feature_path),
            )
        )
    store.insert_simulations(records)
    return records
