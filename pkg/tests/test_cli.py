import json
import shutil

import pytest

from ensel.cli import main
from ensel.model import BoxGeometry, SelectionSpec
from ensel.selection import parse_filter, replay
from ensel.store import open_store

from conftest import TINY_LEVELS


TINY_CONFIG_DOC = {
    "grid": {"n_r": 16, "n_z": 16, "d_r": 0.2, "d_z": 0.2},
    "level_counts": dict(TINY_LEVELS),
    "t_steps": 4,
    "n_theta": 32,
    "n_modes": 9,
    "master_seed": 7,
}


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture
def workdir(tmp_path):
    cfg = tmp_path / "ensemble.json"
    cfg.write_text(json.dumps(TINY_CONFIG_DOC))
    return tmp_path


class TestWalkthrough:
    def test_generate_ingest_postprocess_replay(self, workdir, capsys):
        store = str(workdir / "meta.db")
        out = str(workdir / "data")

        code, stdout, _ = run(
            capsys, "generate", "--config", str(workdir / "ensemble.json"), "--out", out
        )
        assert code == 0
        assert "generated 8 simulations" in stdout

        code, stdout, _ = run(
            capsys, "--store", store, "ingest", "--manifest", f"{out}/manifest.json"
        )
        assert code == 0
        assert "ingested 8" in stdout

        code, stdout, _ = run(
            capsys,
            "--store", store,
            "method", "create",
            "--gt", "sim_0000", "--t", "4", "--norm", "l2", "--desc", "cli test",
        )
        assert code == 0
        method_id = int(stdout.split()[-1])

        code, stdout, _ = run(
            capsys, "--store", store, "postprocess", "--method", str(method_id)
        )
        assert code == 0
        assert "written=32" in stdout

        # rerun writes nothing
        code, stdout, _ = run(
            capsys, "--store", store, "postprocess", "--method", str(method_id)
        )
        assert code == 0
        assert "written=0" in stdout and "skipped=32" in stdout

        code, stdout, _ = run(capsys, "--store", store, "method", "list")
        assert code == 0
        assert "gt=sim_0000@t4" in stdout and "L2" in stdout

        # save a dataset through the library, then replay it from the CLI
        with open_store(store) as st:
            spec = SelectionSpec(
                method_id=method_id,
                time_step=4,
                w_shock=1.0,
                w_edge=1.0,
                color_by="profile",
                filter=parse_filter("profile 0"),
                geometry=BoxGeometry(-1.0, 100.0, -1.0, 100.0),
                subsample_p=1.0,
                subsample_seed=0,
                description="cli dataset",
            )
            members = replay(spec, st)
            ds_id = st.save_dataset(members, spec)

        code, stdout, _ = run(
            capsys, "--store", store, "datasets", "replay", "--id", str(ds_id)
        )
        assert code == 0
        lines = stdout.strip().splitlines()
        assert lines[-1] == "MATCH"
        assert set(lines[:-1]) == members

        code, stdout, _ = run(capsys, "--store", store, "datasets", "list")
        assert code == 0
        assert f"{ds_id}\t{len(members)} members" in stdout

        export = workdir / "ds.json"
        code, stdout, _ = run(
            capsys, "--store", store,
            "datasets", "export", "--id", str(ds_id), "--out", str(export),
        )
        assert code == 0
        doc = json.loads(export.read_text())
        assert doc["spec"]["filter_string"] == "profile 0"

        code, _, _ = run(
            capsys, "--store", store, "datasets", "delete", "--id", str(ds_id)
        )
        assert code == 0
        code, _, err = run(
            capsys, "--store", store, "datasets", "replay", "--id", str(ds_id)
        )
        assert code == 1
        assert json.loads(err)["error"] == "NotFound"


class TestErrorsAndConfig:
    def test_unknown_method_exits_1_with_json_error(self, tiny_ensemble, tmp_path, capsys):
        db = tmp_path / "m.db"
        shutil.copy(tiny_ensemble["store_path"], db)
        code, _, err = run(
            capsys, "--store", str(db), "postprocess", "--method", "999"
        )
        assert code == 1
        doc = json.loads(err)
        assert doc["error"] == "NotFound"
        assert "999" in doc["message"]

    def test_missing_store_exits_1(self, capsys, monkeypatch):
        monkeypatch.delenv("ENSEL_STORE", raising=False)
        code, _, err = run(capsys, "method", "list")
        assert code == 1
        assert json.loads(err)["error"] == "EnselError"

    def test_usage_error_exits_2(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["postprocess"])  # missing required --method
        assert exc.value.code == 2

    def test_unknown_subcommand_exits_2(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["frobnicate"])
        assert exc.value.code == 2

    def test_store_from_environment(self, tiny_ensemble, tmp_path, capsys, monkeypatch):
        db = tmp_path / "m.db"
        shutil.copy(tiny_ensemble["store_path"], db)
        monkeypatch.setenv("ENSEL_STORE", str(db))
        code, stdout, _ = run(capsys, "method", "list")
        assert code == 0
        assert "gt=sim_0000" in stdout

    def test_store_from_config_file(self, tiny_ensemble, tmp_path, capsys, monkeypatch):
        monkeypatch.delenv("ENSEL_STORE", raising=False)
        db = tmp_path / "m.db"
        shutil.copy(tiny_ensemble["store_path"], db)
        cfg = tmp_path / "ensel.conf"
        cfg.write_text(f"# comment line\nstore = {db}\n")
        code, stdout, _ = run(capsys, "--config-file", str(cfg), "method", "list")
        assert code == 0
        assert "gt=sim_0000" in stdout

    def test_flag_beats_config_file(self, tiny_ensemble, tmp_path, capsys):
        db = tmp_path / "m.db"
        shutil.copy(tiny_ensemble["store_path"], db)
        cfg = tmp_path / "ensel.conf"
        cfg.write_text("store = /nonexistent/other.db\n")
        code, stdout, _ = run(
            capsys, "--config-file", str(cfg), "--store", str(db), "method", "list"
        )
        assert code == 0

    def test_bad_config_line_exits_1(self, tmp_path, capsys):
        cfg = tmp_path / "bad.conf"
        cfg.write_text("this line has no equals sign\n")
        code, _, err = run(capsys, "--config-file", str(cfg), "method", "list")
        assert code == 1

    def test_generate_seed_override_changes_output(self, workdir, capsys):
        a, b, c = (str(workdir / d) for d in ("a", "b", "c"))
        cfg = str(workdir / "ensemble.json")
        run(capsys, "generate", "--config", cfg, "--out", a)
        run(capsys, "generate", "--config", cfg, "--out", b)
        run(capsys, "generate", "--config", cfg, "--seed", "12345", "--out", c)
        same = (workdir / "a" / "sim_0000" / "density_t01.bin").read_bytes()
        assert same == (workdir / "b" / "sim_0000" / "density_t01.bin").read_bytes()
        assert same != (workdir / "c" / "sim_0000" / "density_t01.bin").read_bytes()
