"""``emi-ace`` command line: one subcommand per pipeline stage plus ``run``/``report``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import alarms as al
from . import io
from .detectors import DETECTORS
from .errors import EmiAceError, PipelineError
from .pipeline import (
    SEED_ENV,
    PipelineConfig,
    compare_report,
    load_config,
    run_pipeline,
    stage_alarms,
    stage_detect,
    stage_dictionary,
    stage_preprocess,
    stage_score,
    stage_simulate,
    write_report_csv,
)


def _seed(arg):
    env = os.environ.get(SEED_ENV)
    return int(env) if env else arg


def cmd_dict(a):
    d = stage_dictionary(a.count, a.zeta_min, a.zeta_max, a.omega_convention)
    raw, feats = io.write_dictionary(a.out, d)
    print(f"wrote {raw} and {feats}")


def cmd_simulate(a):
    d = stage_dictionary(path=a.dict) if a.dict else stage_dictionary()
    lane, truth = stage_simulate(a.preset, d, _seed(a.seed))
    io.write_lane(a.out_lane, lane)
    io.write_truth(a.out_truth, truth)
    print(f"wrote {len(lane)} samples to {a.out_lane} and {len(truth)} truth entries to {a.out_truth}")


def cmd_preprocess(a):
    lane = io.read_lane(a.inp)
    io.write_lane(a.out, stage_preprocess(lane, a.filter_width))


def cmd_detect(a):
    lane = io.read_lane(a.inp)
    d = stage_dictionary(path=a.dict)
    cfg = PipelineConfig(lam=a.lam, init_n=a.init_n, bg_threshold=a.bg_threshold,
                         update_mode=a.update_mode, offset=a.offset, sparsity=a.sparsity,
                         ridge=a.ridge)
    conf = stage_detect(a.method, lane, d, cfg)
    io.write_trace(a.out, lane.positions, conf)


def cmd_alarms(a):
    pos, conf = io.read_trace(a.inp)
    grid, alarms = stage_alarms(pos, conf, a.cell, a.halo)
    io.write_alarms(a.out, alarms)
    if a.map:
        io.write_pgm(a.map, grid)
        io.write_grid_csv(Path(a.map).with_suffix(".csv"), grid)
    print(f"{len(alarms)} alarms")


def cmd_score(a):
    alarms = io.read_alarms(a.alarms)
    truth = io.read_truth(a.truth)
    if a.area is not None:
        area = a.area
    elif a.lane is not None:
        area = al.lane_area(io.read_lane(a.lane).positions, a.lane_width)
    else:
        plain = [x.alarm if isinstance(x, al.LabeledAlarm) else x for x in alarms]
        area = al.lane_area([[x.easting, x.northing] for x in plain], a.lane_width)
    labeled, curve = stage_score(alarms, truth, area, a.hit_halo, a.max_depth, a.purpose)
    io.write_roc(a.out, curve)
    if a.labeled_out:
        io.write_alarms(a.labeled_out, labeled)
    print(f"final pd={curve.pd[-1]:.4f} far={curve.far[-1]:.4f}/m^2")


def cmd_run(a):
    overrides = {k: v for k, v in vars(a).items()
                 if k not in ("func", "config", "command") and v is not None}
    cfg = load_config(a.config, overrides)
    manifest = run_pipeline(cfg)
    print((Path(cfg.out_dir) / "report.txt").read_text(), end="")
    print(f"{len(manifest['artifacts'])} artifacts listed in {Path(cfg.out_dir) / 'manifest.json'}")


def cmd_report(a):
    text, rows = compare_report(a.rocs)
    print(text, end="")
    if a.out:
        write_report_csv(a.out, rows)


def _purpose(v):
    return None if v.lower() in ("all", "none") else ("other" if v.lower() == "other" else v.upper())


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="emi-ace", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("dict", help="build the DSRF dictionary")
    s.add_argument("--count", type=int, default=100)
    s.add_argument("--zeta-min", type=float, default=45.0)
    s.add_argument("--zeta-max", type=float, default=670_000.0)
    s.add_argument("--omega-convention", choices=("angular", "plain"), default="angular")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_dict)

    s = sub.add_parser("simulate", help="generate a synthetic lane and its truth")
    s.add_argument("--preset", default="easy")
    s.add_argument("--seed", type=int)
    s.add_argument("--dict")
    s.add_argument("--out-lane", required=True)
    s.add_argument("--out-truth", required=True)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("preprocess", help="down-track sine filtering")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--filter-width", type=int, default=9)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_preprocess)

    s = sub.add_parser("detect", help="per-sample detector confidences")
    s.add_argument("--method", choices=DETECTORS, required=True)
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--dict", required=True)
    s.add_argument("--lambda", dest="lam", type=float, default=0.005)
    s.add_argument("--init-n", type=int, default=200)
    s.add_argument("--bg-threshold", type=float, default=0.5)
    s.add_argument("--update-mode", choices=("consistent", "literal"), default="consistent")
    s.add_argument("--offset", type=int, default=5)
    s.add_argument("--sparsity", type=int, default=1)
    s.add_argument("--ridge", type=float, default=1e-6)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_detect)

    s = sub.add_parser("alarms", help="morphological clustering into alarms")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--halo", type=float, default=al.DEFAULT_SUPPRESSION_HALO)
    s.add_argument("--cell", type=float, default=al.DEFAULT_CELL_SIZE)
    s.add_argument("--map", help="also write the confidence map as PGM (+ sidecar and CSV grid)")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_alarms)

    s = sub.add_parser("score", help="halo scoring into a ROC curve")
    s.add_argument("--alarms", required=True)
    s.add_argument("--truth", required=True)
    s.add_argument("--hit-halo", type=float, default=al.DEFAULT_HIT_HALO)
    s.add_argument("--max-depth", type=float, default=al.DEFAULT_MAX_DEPTH_IN)
    s.add_argument("--purpose", type=_purpose, default=None, help="AT, AP, other or all")
    s.add_argument("--lane", help="lane CSV whose bounding box gives the area")
    s.add_argument("--area", type=float, help="lane area in m^2 (overrides --lane)")
    s.add_argument("--lane-width", type=float, default=1.0,
                   help="floor for each bounding-box side, metres")
    s.add_argument("--labeled-out")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_score)

    s = sub.add_parser("run", help="full pipeline from a key=value config and/or flags")
    s.add_argument("--config")
    s.add_argument("--out-dir")
    s.add_argument("--lane")
    s.add_argument("--truth")
    s.add_argument("--dict")
    s.add_argument("--preset")
    s.add_argument("--seed", type=int)
    s.add_argument("--methods", help="comma-separated subset of " + ",".join(DETECTORS))
    s.add_argument("--filter-width", type=int)
    s.add_argument("--lambda", dest="lam", type=float)
    s.add_argument("--init-n", type=int)
    s.add_argument("--bg-threshold", type=float)
    s.add_argument("--update-mode", choices=("consistent", "literal"))
    s.add_argument("--offset", type=int)
    s.add_argument("--sparsity", type=int)
    s.add_argument("--ridge", type=float)
    s.add_argument("--cell", type=float)
    s.add_argument("--halo", type=float)
    s.add_argument("--hit-halo", type=float)
    s.add_argument("--max-depth", type=float)
    s.add_argument("--purpose")
    s.add_argument("--lane-width", type=float)
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("report", help="compare ROC files")
    s.add_argument("rocs", nargs="+")
    s.add_argument("--out")
    s.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    verbose = args.verbose
    del args.verbose
    try:
        args.func(args)
    except PipelineError as exc:
        print(f"emi-ace: error: {exc}", file=sys.stderr)
        return 2
    except (EmiAceError, OSError, ValueError) as exc:
        if verbose:
            raise
        print(f"emi-ace: error: [{args.command}] {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
