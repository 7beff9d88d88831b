"""Command-line entry point for headless use and CI.

Configuration sources, highest precedence first: command-line flags,
environment variables (ENSEL_STORE, ENSEL_BIND), then an optional config
file of ``key = value`` lines (keys: store, data_dir, bind, verbosity)
passed via --config-file or ENSEL_CONFIG.

Exit codes: 0 success, 1 runtime error (with a machine-readable JSON
error line on stderr), 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .errors import EnselError
from .model import CylGrid, NormKind
from .pipeline import postprocess
from .selection import replay
from .store import open_store, ingest_manifest
from .synth import EnsembleConfig, generate_ensemble

log = logging.getLogger("ensel")


def _read_config_file(path) -> dict:
    settings = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise EnselError(f"bad config line (expected key = value): {line!r}")
        key, _, value = line.partition("=")
        settings[key.strip()] = value.strip()
    return settings


def _resolve(args, key: str, env: str, flag_value):
    if flag_value is not None:
        return flag_value
    if os.environ.get(env):
        return os.environ[env]
    return args._file_settings.get(key)


def _require_store(args):
    store_path = _resolve(args, "store", "ENSEL_STORE", args.store)
    if not store_path:
        raise EnselError("store path required (--store, ENSEL_STORE, or config file)")
    return open_store(store_path)


def _load_ensemble_config(path, seed) -> EnsembleConfig:
    if path is None:
        cfg = EnsembleConfig()
    else:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        grid_doc = doc.get("grid", {})
        defaults = EnsembleConfig()
        grid = CylGrid(
            grid_doc.get("n_r", defaults.grid.n_r),
            grid_doc.get("n_z", defaults.grid.n_z),
            grid_doc.get("d_r", defaults.grid.d_r),
            grid_doc.get("d_z", defaults.grid.d_z),
        )
        cfg = EnsembleConfig(
            grid=grid,
            level_counts={**defaults.level_counts, **doc.get("level_counts", {})},
            t_steps=doc.get("t_steps", defaults.t_steps),
            n_theta=doc.get("n_theta", defaults.n_theta),
            n_modes=doc.get("n_modes", defaults.n_modes),
            master_seed=doc.get("master_seed", defaults.master_seed),
        )
    if seed is not None:
        cfg = EnsembleConfig(
            grid=cfg.grid,
            level_counts=cfg.level_counts,
            t_steps=cfg.t_steps,
            n_theta=cfg.n_theta,
            n_modes=cfg.n_modes,
            master_seed=seed,
        )
    return cfg


def cmd_generate(args) -> int:
    cfg = _load_ensemble_config(args.config, args.seed)
    records = generate_ensemble(cfg, args.out)
    print(f"generated {len(records)} simulations under {args.out}")
    return 0


def cmd_ingest(args) -> int:
    with _require_store(args) as st:
        records = ingest_manifest(st, args.manifest)
    print(f"ingested {len(records)} simulations")
    return 0


def cmd_method_create(args) -> int:
    norm = NormKind(args.norm.upper())
    with _require_store(args) as st:
        gt_id = st.register_ground_truth(args.gt)
        method_id = st.create_method(gt_id, args.t, norm, args.desc)
    print(f"method {method_id}")
    return 0


def cmd_method_list(args) -> int:
    with _require_store(args) as st:
        for m in st.list_methods():
            gt_sim = st.get_ground_truth_sim(m.gt_id)
            print(
                f"{m.method_id}\tgt={gt_sim.sim_id}@t{m.gt_time_step}"
                f"\t{m.norm.value}\t{m.description}"
            )
    return 0


def cmd_postprocess(args) -> int:
    with _require_store(args) as st:
        report = postprocess(st, args.method, parallelism=args.jobs)
    print(
        f"method {report.method_id}: written={report.records_written}"
        f" skipped={report.records_skipped} wall_time={report.wall_time:.2f}s"
    )
    for e in report.errors:
        print(f"warning: {e}", file=sys.stderr)
    return 0


def cmd_datasets_list(args) -> int:
    with _require_store(args) as st:
        for ds in st.list_datasets():
            print(
                f"{ds.dataset_id}\t{len(ds.member_sim_ids)} members"
                f"\t{ds.spec.created_at}\t{ds.spec.description}"
            )
    return 0


def cmd_datasets_export(args) -> int:
    with _require_store(args) as st:
        st.export_dataset(args.id, args.out)
    print(f"exported dataset {args.id} to {args.out}")
    return 0


def cmd_datasets_delete(args) -> int:
    with _require_store(args) as st:
        st.delete_dataset(args.id)
    print(f"deleted dataset {args.id}")
    return 0


def cmd_datasets_replay(args) -> int:
    with _require_store(args) as st:
        ds = st.load_dataset(args.id)
        members = replay(ds.spec, st)
    for sim_id in sorted(members):
        print(sim_id)
    if members == set(ds.member_sim_ids):
        print("MATCH")
        return 0
    print("MISMATCH")
    return 1


def cmd_serve(args) -> int:
    import uvicorn

    from .api import create_app

    store_path = _resolve(args, "store", "ENSEL_STORE", args.store)
    if not store_path:
        raise EnselError("store path required (--store, ENSEL_STORE, or config file)")
    bind = _resolve(args, "bind", "ENSEL_BIND", args.bind) or "127.0.0.1:8050"
    host, _, port = bind.partition(":")
    app = create_app(store_path, static_dir=args.static)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8050))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ensel",
        description="Ensemble training-data selection and metadata tracking",
    )
    parser.add_argument("--config-file", "-C", help="key = value config file")
    parser.add_argument("--store", help="metadata store path")
    parser.add_argument(
        "-v", "--verbose", action="count", default=0, help="increase log verbosity"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a synthetic ensemble")
    p.add_argument("--config", help="ensemble config JSON")
    p.add_argument("--seed", type=int, help="master seed override")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("ingest", help="register an ensemble manifest in the store")
    p.add_argument("--manifest", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("method", help="post-processing methods")
    msub = p.add_subparsers(dest="method_command", required=True)
    pc = msub.add_parser("create")
    pc.add_argument("--gt", required=True, help="ground-truth sim_id")
    pc.add_argument("--t", required=True, type=int, help="ground-truth time step")
    pc.add_argument("--norm", required=True, choices=["L1", "L2", "LINF", "l1", "l2", "linf"])
    pc.add_argument("--desc", default="")
    pc.set_defaults(func=cmd_method_create)
    pl = msub.add_parser("list")
    pl.set_defaults(func=cmd_method_list)

    p = sub.add_parser("postprocess", help="compute distances for one method")
    p.add_argument("--method", required=True, type=int)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_postprocess)

    p = sub.add_parser("datasets", help="training dataset management")
    dsub = p.add_subparsers(dest="datasets_command", required=True)
    dl = dsub.add_parser("list")
    dl.set_defaults(func=cmd_datasets_list)
    de = dsub.add_parser("export")
    de.add_argument("--id", required=True, type=int)
    de.add_argument("--out", required=True)
    de.set_defaults(func=cmd_datasets_export)
    dd = dsub.add_parser("delete")
    dd.add_argument("--id", required=True, type=int)
    dd.set_defaults(func=cmd_datasets_delete)
    dr = dsub.add_parser("replay")
    dr.add_argument("--id", required=True, type=int)
    dr.set_defaults(func=cmd_datasets_replay)

    p = sub.add_parser("serve", help="run the HTTP/JSON service")
    p.add_argument("--bind", help="host:port (default 127.0.0.1:8050)")
    p.add_argument("--static", help="directory of web UI assets to serve")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    config_path = args.config_file or os.environ.get("ENSEL_CONFIG")
    try:
        args._file_settings = _read_config_file(config_path) if config_path else {}
        return args.func(args)
    except (EnselError, OSError, ValueError) as exc:
        print(
            json.dumps({"error": type(exc).__name__, "message": str(exc)}),
            file=sys.stderr,
        )
        return 1


if __name__ == "__main__":
    sys.exit(main())
