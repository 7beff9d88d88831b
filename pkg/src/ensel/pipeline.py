"""Post-processing orchestration.

For one method, compares every simulation at every time step against the
method's ground truth at its fixed time step, and stores one record per
(simulation, time step).  Work is partitioned per simulation; store
writes happen once, serialized, after all partitions complete, so
parallel and serial runs produce identical stored records.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .distance import density_distance, feature_distance
from .errors import EmptyOverlap, EnselError, MalformedFile, NotFound
from .fileio import density_path_for, read_density, read_features
from .model import DensityField, FeatureSet, NormKind, PostRecord, SimulationRecord


@dataclass
class PipelineReport:
    method_id: int
    records_written: int = 0
    records_skipped: int = 0
    wall_time: float = 0.0
    errors: list[str] = field(default_factory=list)


def _compare_sim(
    sim: SimulationRecord,
    steps: list[int],
    gt_density: DensityField,
    gt_features: FeatureSet,
    norm: NormKind,
    method_id: int,
) -> tuple[list[tuple], str | None]:
    """All requested records for one simulation, or an error message."""
    out = []
    try:
        all_features = read_features(sim.feature_path)
    except (OSError, MalformedFile) as exc:
        return [], f"{sim.sim_id}: {exc}"
    for t in steps:
        try:
            sim_density = read_density(density_path_for(sim, t))
            sim_features = all_features[t - 1]
        except (OSError, MalformedFile, IndexError) as exc:
            return out, f"{sim.sim_id}: {exc}"
        d_shock, d_edge = feature_distance(gt_features, sim_features, norm)
        try:
            d_rho = density_distance(gt_density, sim_density, norm)
            out.append((method_id, sim.sim_id, t, d_shock, d_edge, d_rho, False))
        except EmptyOverlap:
            # flagged, not dropped, so downstream views can show the gap
            out.append((method_id, sim.sim_id, t, 0.0, 0.0, 0.0, True))
    return out, None


def postprocess(store, method_id: int, parallelism: int = 1) -> PipelineReport:
    """Compute and store all missing records for one method.  Idempotent:
    records already present are skipped and counted."""
    if parallelism < 1:
        raise ValueError(f"parallelism must be >= 1, got {parallelism}")
    start = time.monotonic()
    method = store.get_method(method_id)
    gt_sim = store.get_ground_truth_sim(method.gt_id)
    gt_density = read_density(density_path_for(gt_sim, method.gt_time_step))
    gt_feature_list = read_features(gt_sim.feature_path)
    t_steps = len(gt_feature_list)
    gt_features = gt_feature_list[method.gt_time_step - 1]

    sims = store.list_simulations()
    existing = store.existing_record_keys(method_id)

    report = PipelineReport(method_id=method_id)
    work = []
    for sim in sims:
        steps = [t for t in range(1, t_steps + 1) if (sim.sim_id, t) not in existing]
        report.records_skipped += t_steps - len(steps)
        if steps:
            work.append((sim, steps))

    args = [
        (sim, steps, gt_density, gt_features, method.norm, method_id)
        for sim, steps in work
    ]
    if parallelism == 1 or len(args) <= 1:
        results = [_compare_sim(*a) for a in args]
    else:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            results = list(pool.map(_compare_sim, *zip(*args), chunksize=8))

    rows = []
    for tuples, error in results:
        rows.extend(tuples)
        if error is not None:
            report.errors.append(error)
    records = [
        PostRecord(
            method_id=m,
            sim_id=s,
            time_step=t,
            delta_shock=a,
            delta_edge=b,
            delta_rho=c,
            invalid=inv,
        )
        for (m, s, t, a, b, c, inv) in rows
    ]
    store.bulk_insert_records(records)
    report.records_written = len(records)
    report.wall_time = time.monotonic() - start
    return report


def postprocess_all(store, method_ids: list[int], parallelism: int = 1) -> list[PipelineReport]:
    """Sequential postprocess per method; per-method failures are non-fatal."""
    reports = []
    for method_id in method_ids:
        try:
            reports.append(postprocess(store, method_id, parallelism))
        except (NotFound, EnselError, OSError) as exc:
            reports.append(
                PipelineReport(method_id=method_id, errors=[str(exc)])
            )
    return reports
