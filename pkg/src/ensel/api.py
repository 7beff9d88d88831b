"""HTTP/JSON service exposing the store, pipeline, and selection engine.

The server is the membership authority: dataset saves recompute the
selection from the stored spec and reject client lists that disagree
(409), so the stored metadata is guaranteed to reproduce the dataset.

Every non-2xx response carries ``{"code": ..., "message": ...}``.
"""

from __future__ import annotations

import threading
from pathlib import Path
from typing import Literal

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from . import errors as err
from .fileio import read_features
from .model import (
    BoxGeometry,
    LassoGeometry,
    NormKind,
    PARAM_NAMES,
    SelectionSpec,
    TrainingDataset,
)
from .pipeline import postprocess
from .selection import parse_filter, replay, scatter_points, serialize_filter
from .store import Store, serialize_geometry

# Method creation runs post-processing synchronously when the record count
# (n_sims * T) is at or below this; larger runs go to a background thread
# and the request returns 202 with a poll URL.
DEFAULT_SYNC_THRESHOLD = 20_000

_ERROR_STATUS = {
    err.NotFound: 404,
    err.DuplicateKey: 409,
    err.EmptySelection: 422,
    err.ValidationError: 422,
    err.StaleRecords: 409,
    err.InvalidProbability: 422,
    err.InvertedRect: 422,
    err.DegeneratePolygon: 422,
    err.FilterError: 422,
    err.EmptyOverlap: 422,
    err.MalformedFile: 500,
    err.CorruptStore: 500,
}


def _error_response(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"code": code, "message": message})


class GeometryBody(BaseModel):
    type: Literal["box", "lasso"]
    x_min: float | None = None
    x_max: float | None = None
    y_min: float | None = None
    y_max: float | None = None
    vertices: list[tuple[float, float]] | None = None

    def to_geometry(self):
        if self.type == "box":
            if None in (self.x_min, self.x_max, self.y_min, self.y_max):
                raise err.ValidationError("box geometry needs x_min/x_max/y_min/y_max")
            return BoxGeometry(self.x_min, self.x_max, self.y_min, self.y_max)
        if not self.vertices or len(self.vertices) < 3:
            raise err.ValidationError("lasso geometry needs >= 3 vertices")
        return LassoGeometry(tuple(self.vertices))


def geometry_body(geom) -> dict:
    if isinstance(geom, BoxGeometry):
        return {
            "type": "box",
            "x_min": geom.x_min,
            "x_max": geom.x_max,
            "y_min": geom.y_min,
            "y_max": geom.y_max,
        }
    return {"type": "lasso", "vertices": [list(v) for v in geom.vertices]}


class SpecBody(BaseModel):
    method_id: int
    time_step: int
    w_shock: float = 1.0
    w_edge: float = 1.0
    color_by: str = "profile"
    filter: str = ""
    geometry: GeometryBody
    subsample_p: float = 1.0
    subsample_seed: int = 0
    description: str

    def to_spec(self) -> SelectionSpec:
        return SelectionSpec(
            method_id=self.method_id,
            time_step=self.time_step,
            w_shock=self.w_shock,
            w_edge=self.w_edge,
            color_by=self.color_by,
            filter=parse_filter(self.filter),
            geometry=self.geometry.to_geometry(),
            subsample_p=self.subsample_p,
            subsample_seed=self.subsample_seed,
            description=self.description,
        )


class SaveDatasetBody(BaseModel):
    spec: SpecBody
    client_selected_ids: list[str] | None = None


class CreateMethodBody(BaseModel):
    gt_sim_id: str
    gt_time_step: int
    norm: str
    description: str = ""


def spec_payload(spec: SelectionSpec) -> dict:
    return {
        "method_id": spec.method_id,
        "time_step": spec.time_step,
        "w_shock": spec.w_shock,
        "w_edge": spec.w_edge,
        "color_by": spec.color_by,
        "filter": serialize_filter(spec.filter),
        "selection_type": spec.selection_type,
        "geometry": geometry_body(spec.geometry),
        "subsample_p": spec.subsample_p,
        "subsample_seed": spec.subsample_seed,
        "description": spec.description,
        "created_at": spec.created_at,
    }


def dataset_payload(ds: TrainingDataset) -> dict:
    return {
        "dataset_id": ds.dataset_id,
        "description": ds.spec.description,
        "created_at": ds.spec.created_at,
        "member_count": len(ds.member_sim_ids),
        "members": sorted(ds.member_sim_ids),
        "spec": spec_payload(ds.spec),
    }


def create_app(
    store_path,
    *,
    sync_threshold: int = DEFAULT_SYNC_THRESHOLD,
    static_dir=None,
) -> FastAPI:
    app = FastAPI(title="ensel", version="1")
    app.state.store_path = str(store_path)
    app.state.jobs = {}  # method_id -> "running" | "done" | error string
    app.state.jobs_lock = threading.Lock()

    def store() -> Store:
        return Store(app.state.store_path)

    @app.exception_handler(err.EnselError)
    async def _ensel_error(_req: Request, exc: err.EnselError):
        status = 500
        for klass, code in _ERROR_STATUS.items():
            if isinstance(exc, klass):
                status = code
                break
        return _error_response(status, type(exc).__name__, str(exc))

    @app.exception_handler(RequestValidationError)
    async def _invalid_request(_req: Request, exc: RequestValidationError):
        return _error_response(422, "RequestValidationError", str(exc.errors()))

    # -- methods ------------------------------------------------------------

    @app.get("/api/methods")
    def list_methods():
        with store() as st:
            out = []
            for m in st.list_methods():
                gt_sim = st.get_ground_truth_sim(m.gt_id)
                out.append(
                    {
                        "method_id": m.method_id,
                        "gt_id": m.gt_id,
                        "gt_sim_id": gt_sim.sim_id,
                        "gt_time_step": m.gt_time_step,
                        "norm": m.norm.value,
                        "description": m.description,
                    }
                )
            return out

    @app.post("/api/methods", status_code=201)
    def create_method(body: CreateMethodBody):
        try:
            norm = NormKind(body.norm)
        except ValueError:
            raise err.ValidationError(
                f"norm must be one of {[n.value for n in NormKind]}, got {body.norm!r}"
            )
        with store() as st:
            gt_sim = st.get_simulation(body.gt_sim_id)
            t_steps = len(read_features(gt_sim.feature_path))
            if not (1 <= body.gt_time_step <= t_steps):
                raise err.ValidationError(
                    f"gt_time_step {body.gt_time_step} outside [1, {t_steps}]"
                )
            gt_id = st.register_ground_truth(body.gt_sim_id)
            method_id = st.create_method(gt_id, body.gt_time_step, norm, body.description)
            n_records = len(st.list_simulations()) * t_steps

        if n_records <= sync_threshold:
            with store() as st:
                report = postprocess(st, method_id)
            return {
                "method_id": method_id,
                "records_written": report.records_written,
                "records_skipped": report.records_skipped,
            }

        def run():
            try:
                with store() as st:
                    postprocess(st, method_id)
                status = "done"
            except Exception as exc:  # surfaced via the poll endpoint
                status = f"error: {exc}"
            with app.state.jobs_lock:
                app.state.jobs[method_id] = status

        with app.state.jobs_lock:
            if app.state.jobs.get(method_id) == "running":
                return JSONResponse(
                    status_code=202,
                    content={"method_id": method_id, "status_url": f"/api/jobs/{method_id}"},
                )
            app.state.jobs[method_id] = "running"
        threading.Thread(target=run, daemon=True).start()
        return JSONResponse(
            status_code=202,
            content={"method_id": method_id, "status_url": f"/api/jobs/{method_id}"},
        )

    @app.get("/api/jobs/{method_id}")
    def job_status(method_id: int):
        with app.state.jobs_lock:
            status = app.state.jobs.get(method_id)
        if status is None:
            raise err.NotFound(f"no post-processing job for method {method_id}")
        return {"method_id": method_id, "status": status}

    # -- records and scatter --------------------------------------------------

    def _checked_rows(st: Store, method_id: int, t: int) -> list[dict]:
        rng = st.time_step_range(method_id)
        if rng is not None and not (rng[0] <= t <= rng[1]):
            raise err.ValidationError(
                f"time step {t} outside post-processed range [{rng[0]}, {rng[1]}]"
            )
        return st.query_records(method_id, t)

    @app.get("/api/records")
    def get_records(method: int, t: int):
        with store() as st:
            return _checked_rows(st, method, t)

    @app.get("/api/scatter")
    def get_scatter(method: int, t: int, ws: float = 1.0, we: float = 1.0):
        for label, w in (("ws", ws), ("we", we)):
            if not (0.0 <= w <= 1.0):
                raise err.ValidationError(f"{label} must be in [0, 1], got {w}")
        with store() as st:
            rows = _checked_rows(st, method, t)
        return scatter_points(rows, ws, we)

    # -- datasets --------------------------------------------------------------

    @app.post("/api/datasets", status_code=201)
    def save_dataset(body: SaveDatasetBody):
        spec = body.spec.to_spec()
        with store() as st:
            members = replay(spec, st)
            if body.client_selected_ids is not None:
                client = set(body.client_selected_ids)
                if client != members:
                    return JSONResponse(
                        status_code=409,
                        content={
                            "code": "SelectionDrift",
                            "message": "client selection disagrees with server replay",
                            "server_members": sorted(members),
                            "client_members": sorted(client),
                        },
                    )
            dataset_id = st.save_dataset(members, spec)
        return {"dataset_id": dataset_id, "members": sorted(members)}

    @app.get("/api/datasets")
    def list_datasets():
        with store() as st:
            return [dataset_payload(ds) for ds in st.list_datasets()]

    @app.get("/api/datasets/{dataset_id}")
    def get_dataset(dataset_id: int):
        with store() as st:
            return dataset_payload(st.load_dataset(dataset_id))

    @app.get("/api/datasets/{dataset_id}/settings")
    def get_settings(dataset_id: int):
        with store() as st:
            return spec_payload(st.load_settings(dataset_id))

    @app.delete("/api/datasets/{dataset_id}", status_code=204)
    def delete_dataset(dataset_id: int):
        with store() as st:
            st.delete_dataset(dataset_id)

    @app.get("/api/datasets/{dataset_id}/export")
    def export_dataset(dataset_id: int):
        with store() as st:
            return st.export_dataset_doc(dataset_id)

    # -- misc -------------------------------------------------------------------

    @app.get("/api/params")
    def param_names():
        return {"params": list(PARAM_NAMES)}

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
