import shutil

import numpy as np
import pytest

from ensel.fileio import write_density, write_features, write_manifest
from ensel.model import (
    CylGrid,
    DensityField,
    FeatureSet,
    NormKind,
    PARAM_NAMES,
    SimulationRecord,
)
from ensel.pipeline import postprocess, postprocess_all
from ensel.store import ingest_manifest, open_store
from ensel.synth import generate_ensemble

from conftest import tiny_config


def copy_ensemble(tiny_ensemble, tmp_path):
    root = tmp_path / "copy"
    shutil.copytree(tiny_ensemble["root"], root)
    return root, open_store(root / "meta.db")


class TestPostprocess:
    def test_complete_grid_of_records(self, tiny_store, tiny_ensemble):
        cfg = tiny_ensemble["config"]
        method = tiny_ensemble["method_id"]
        for t in range(1, cfg.t_steps + 1):
            rows = tiny_store.query_records(method, t)
            assert len(rows) == cfg.n_sims
        assert tiny_store.time_step_range(method) == (1, cfg.t_steps)

    def test_ground_truth_self_record_is_zero(self, tiny_store, tiny_ensemble):
        cfg = tiny_ensemble["config"]
        rows = tiny_store.query_records(tiny_ensemble["method_id"], cfg.t_steps)
        self_row = next(r for r in rows if r["sim_id"] == "sim_0000")
        assert self_row["dshock"] == 0.0
        assert self_row["dedge"] == 0.0
        assert self_row["drho"] == 0.0

    def test_rerun_is_idempotent(self, tiny_ensemble, tmp_path):
        _, store = copy_ensemble(tiny_ensemble, tmp_path)
        cfg = tiny_ensemble["config"]
        report = postprocess(store, tiny_ensemble["method_id"])
        assert report.records_written == 0
        assert report.records_skipped == cfg.n_sims * cfg.t_steps
        assert report.errors == []
        store.close()

    def test_parallel_matches_serial(self, tiny_ensemble, tmp_path):
        cfg = tiny_config(seed=31)
        rows = {}
        for label, jobs in (("serial", 1), ("parallel", 4)):
            root = tmp_path / label
            generate_ensemble(cfg, root / "data")
            store = open_store(root / "meta.db")
            ingest_manifest(store, root / "data" / "manifest.json")
            gt = store.register_ground_truth("sim_0001")
            method = store.create_method(gt, cfg.t_steps, NormKind.L1)
            report = postprocess(store, method, parallelism=jobs)
            assert report.errors == []
            rows[label] = [
                sorted(
                    (r["sim_id"], r["dshock"], r["dedge"], r["drho"], r["invalid"])
                    for r in store.query_records(method, t)
                )
                for t in range(1, cfg.t_steps + 1)
            ]
            store.close()
        assert rows["serial"] == rows["parallel"]

    def test_missing_file_collected_not_fatal(self, tmp_path):
        cfg = tiny_config(seed=13)
        root = tmp_path / "broken"
        generate_ensemble(cfg, root / "data")
        store = open_store(root / "meta.db")
        ingest_manifest(store, root / "data" / "manifest.json")
        (root / "data" / "sim_0003" / "density_t02.bin").unlink()
        gt = store.register_ground_truth("sim_0000")
        method = store.create_method(gt, cfg.t_steps, NormKind.LINF)
        report = postprocess(store, method)
        assert len(report.errors) == 1
        assert "sim_0003" in report.errors[0]
        # every other simulation still has a full set of records
        rows = store.query_records(method, cfg.t_steps)
        assert len(rows) == cfg.n_sims - 1
        # the broken simulation kept its records up to the failure point
        t1 = store.query_records(method, 1)
        assert any(r["sim_id"] == "sim_0003" for r in t1)
        store.close()

    def test_empty_overlap_yields_invalid_record(self, tmp_path):
        grid = CylGrid(4, 4, 0.5, 0.5)
        data = tmp_path / "data"
        sims = []
        # two hand-built simulations with disjoint supports
        for sim_id, live in (("sim_a", range(0, 8)), ("sim_b", range(8, 16))):
            vals = np.zeros(grid.n_cells)
            vals[list(live)] = 1.0
            d = data / sim_id
            d.mkdir(parents=True)
            write_density(DensityField(grid, vals), d / "density_t01.bin")
            write_features([FeatureSet((1.0, 0.0), (2.0, 0.0))], d / "features.txt")
            sims.append(
                SimulationRecord(
                    sim_id=sim_id,
                    params=(0,) * len(PARAM_NAMES),
                    density_path=f"{sim_id}/density_t{{t:02d}}.bin",
                    feature_path=f"{sim_id}/features.txt",
                )
            )
        write_manifest(
            data,
            sims,
            grid=grid,
            t_steps=1,
            n_modes=2,
            n_theta=8,
            level_counts={name: 1 for name in PARAM_NAMES},
            master_seed=0,
        )
        store = open_store(tmp_path / "m.db")
        ingest_manifest(store, data / "manifest.json")
        gt = store.register_ground_truth("sim_a")
        method = store.create_method(gt, 1, NormKind.L2)
        report = postprocess(store, method)
        assert report.errors == []
        assert report.records_written == 2
        rows = {r["sim_id"]: r for r in store.query_records(method, 1)}
        assert rows["sim_a"]["invalid"] is False
        assert rows["sim_b"]["invalid"] is True
        assert rows["sim_b"]["drho"] is None
        store.close()

    def test_bad_parallelism(self, tiny_ensemble, tmp_path):
        _, store = copy_ensemble(tiny_ensemble, tmp_path)
        with pytest.raises(ValueError):
            postprocess(store, tiny_ensemble["method_id"], parallelism=0)
        store.close()


class TestPostprocessAll:
    def test_unknown_method_is_nonfatal(self, tiny_ensemble, tmp_path):
        _, store = copy_ensemble(tiny_ensemble, tmp_path)
        cfg = tiny_ensemble["config"]
        gt = store.register_ground_truth("sim_0002")
        fresh = store.create_method(gt, cfg.t_steps, NormKind.L2)
        reports = postprocess_all(store, [999, fresh])
        assert reports[0].errors and reports[0].records_written == 0
        assert reports[1].errors == []
        assert reports[1].records_written == cfg.n_sims * cfg.t_steps
        store.close()
