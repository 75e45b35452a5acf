"""End-to-end orchestration and detector comparison reports.

Each stage function below is also what the matching CLI subcommand calls,
so running the stages one by one through files gives the same bytes as a
fused `run_pipeline` call.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import os
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import alarms as al
from . import detectors as det
from . import io
from .dictionary import DEFAULT_ATOM_COUNT, DEFAULT_ZETA_RANGE, build_dictionary
from .errors import EmiAceError, InvalidArgumentError, PipelineError
from .lane_sim import generate_lane, preset_scenarios
from .preprocessing import DEFAULT_FILTER_WIDTH, downtrack_filter, lane_features, sine_filter_taps

log = logging.getLogger(__name__)

SEED_ENV = "EMI_ACE_SEED"
DEFAULT_FAR_GRID = (0.01, 0.02, 0.05, 0.1)


@dataclass
class PipelineConfig:
    out_dir: str = "emi_ace_out"
    lane: Optional[str] = None  # raw lane CSV; simulated from `preset` when unset
    truth: Optional[str] = None
    dict: Optional[str] = None  # dictionary CSV; built from the dict_* keys when unset
    preset: str = "easy"
    seed: Optional[int] = None
    methods: tuple = det.DETECTORS
    dict_count: int = DEFAULT_ATOM_COUNT
    zeta_min: float = DEFAULT_ZETA_RANGE[0]
    zeta_max: float = DEFAULT_ZETA_RANGE[1]
    omega_convention: str = "angular"
    filter_width: int = DEFAULT_FILTER_WIDTH
    lam: float = 0.005
    init_n: int = 200
    bg_threshold: float = 0.5
    update_mode: str = "consistent"
    offset: int = 5
    sparsity: int = 1
    ridge: float = det.DEFAULT_RIDGE
    cell: float = al.DEFAULT_CELL_SIZE
    halo: float = al.DEFAULT_SUPPRESSION_HALO
    hit_halo: float = al.DEFAULT_HIT_HALO
    max_depth: float = al.DEFAULT_MAX_DEPTH_IN
    purpose: Optional[str] = None
    lane_width: float = 1.0

    def validate(self):
        for m in self.methods:
            if m not in det.DETECTORS:
                raise InvalidArgumentError(f"unknown detector {m!r}")
        if not self.methods:
            raise InvalidArgumentError("no detectors selected")
        for key in ("lane", "truth", "dict"):
            p = getattr(self, key)
            if p is not None and not Path(p).is_file():
                raise InvalidArgumentError(f"{key} file not found: {p}")
        if self.lane is not None and self.truth is None:
            raise InvalidArgumentError("a truth file is required with an input lane")
        if self.lane is None and self.preset not in preset_scenarios(self.dict_count):
            raise InvalidArgumentError(f"unknown preset {self.preset!r}")
        det.WaceConfig(self.lam, self.init_n, self.bg_threshold, self.update_mode, self.ridge)
        if self.purpose not in (None, "AT", "AP", "other"):
            raise InvalidArgumentError(f"unknown purpose filter {self.purpose!r}")

    @property
    def wace(self) -> det.WaceConfig:
        return det.WaceConfig(self.lam, self.init_n, self.bg_threshold, self.update_mode, self.ridge)


_FIELDS = {f.name: f for f in dataclasses.fields(PipelineConfig)}
_ALIASES = {"lambda": "lam", "count": "dict_count"}


def _coerce(name, value):
    if value is None:
        return None
    default = _FIELDS[name].default
    if name == "methods":
        items = value.split(",") if isinstance(value, str) else value
        return tuple(m.strip() for m in items if m.strip())
    if name == "purpose":
        v = str(value).strip()
        if v.lower() in ("", "none", "all"):
            return None
        return "other" if v.lower() == "other" else v.upper()
    if isinstance(default, bool):
        return str(value).lower() in ("1", "true", "yes")
    if isinstance(default, int) or name == "seed":
        return int(value)
    if isinstance(default, float):
        return float(value)
    return str(value)


def config_key(key: str) -> str:
    k = key.strip().lstrip("-").replace("-", "_").lower()
    k = _ALIASES.get(k, k)
    if k not in _FIELDS:
        raise InvalidArgumentError(f"unknown config key {key!r}")
    return k


def parse_config_text(text: str) -> dict:
    """Parse flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidArgumentError(f"config line {lineno}: expected key=value")
        key, value = line.split("=", 1)
        out[config_key(key)] = value.strip()
    return out


def load_config(path=None, overrides: Optional[dict] = None, env=None) -> PipelineConfig:
    """Merge a config file, explicit overrides, then ``EMI_ACE_SEED``."""
    values = {}
    if path is not None:
        values.update(parse_config_text(Path(path).read_text()))
    for k, v in (overrides or {}).items():
        if v is not None:
            values[config_key(k)] = v
    env = os.environ if env is None else env
    if env.get(SEED_ENV):
        values["seed"] = env[SEED_ENV]
    return PipelineConfig(**{k: _coerce(k, v) for k, v in values.items()})


# ------------------------------------------------------------- stages

def stage_dictionary(count=DEFAULT_ATOM_COUNT, zeta_min=DEFAULT_ZETA_RANGE[0],
                     zeta_max=DEFAULT_ZETA_RANGE[1], omega_convention="angular", path=None):
    if path is not None:
        return io.read_dictionary(path)
    return build_dictionary(atom_count=count, zeta_min=zeta_min, zeta_max=zeta_max,
                            omega_convention=omega_convention)


def stage_simulate(preset: str, dictionary, seed: Optional[int] = None):
    presets = preset_scenarios(len(dictionary))
    if preset not in presets:
        raise InvalidArgumentError(f"unknown preset {preset!r}; choose from {sorted(presets)}")
    return generate_lane(presets[preset], dictionary, seed=seed)


def stage_preprocess(lane, filter_width=DEFAULT_FILTER_WIDTH):
    return downtrack_filter(lane, sine_filter_taps(filter_width))


def stage_detect(method: str, lane, dictionary, cfg: PipelineConfig = None) -> np.ndarray:
    """Per-sample confidences of `method` on a filtered lane.

    Degenerate samples are excluded from detection and get confidence 0.
    """
    cfg = cfg or PipelineConfig()
    if method == "energy":
        return det.detect_energy(lane).confidences
    feats, valid = lane_features(lane)
    x = feats[valid]
    if method == "ace-global":
        conf = det.detect_global_ace(x, dictionary, cfg.ridge).confidences
    elif method == "wace":
        conf = det.detect_wace(x, dictionary, cfg.wace).confidences
    elif method == "jomp":
        conf = det.detect_jomp(x, dictionary, cfg.offset, cfg.sparsity).confidences
    else:
        raise InvalidArgumentError(f"unknown detector {method!r}")
    out = np.zeros(len(lane))
    out[valid] = conf
    return out


def stage_alarms(positions, confidences, cell=al.DEFAULT_CELL_SIZE, halo=al.DEFAULT_SUPPRESSION_HALO):
    grid = al.rasterize(positions, confidences, cell)
    return grid, al.extract_alarms(grid, halo)


def stage_score(alarms, truth, area, hit_halo=al.DEFAULT_HIT_HALO,
                max_depth=al.DEFAULT_MAX_DEPTH_IN, purpose=None):
    plain = [a.alarm if isinstance(a, al.LabeledAlarm) else a for a in alarms]
    labeled, n_scorable = al.match_alarms(plain, truth, hit_halo, max_depth, purpose)
    return labeled, al.roc(labeled, n_scorable, area)


# ------------------------------------------------------------ pipeline

@contextmanager
def _stage(name):
    """Re-raise any failure inside the block as a `PipelineError` tagged `name`."""
    try:
        yield
    except PipelineError:
        raise
    except Exception as exc:
        raise PipelineError(name, str(exc)) from exc


def run_pipeline(cfg: PipelineConfig) -> dict:
    """Run dictionary -> (simulate) -> preprocess -> detect -> alarms -> score -> report.

    Writes every artifact under ``cfg.out_dir`` and returns the manifest,
    which is also saved as ``manifest.json``.
    """
    with _stage("config"):
        cfg.validate()
    out = Path(cfg.out_dir)
    written: list[Path] = []

    with _stage("dict"):
        dictionary = stage_dictionary(cfg.dict_count, cfg.zeta_min, cfg.zeta_max,
                                      cfg.omega_convention, cfg.dict)
        written += io.write_dictionary(out / "dictionary.csv", dictionary)

    if cfg.lane is None:
        with _stage("simulate"):
            lane, truth = stage_simulate(cfg.preset, dictionary, cfg.seed)
            written.append(io.write_lane(out / "lane.csv", lane))
            written.append(io.write_truth(out / "truth.csv", truth))
    else:
        with _stage("load"):
            lane = io.read_lane(cfg.lane)
            truth = io.read_truth(cfg.truth)

    with _stage("preprocess"):
        filtered = stage_preprocess(lane, cfg.filter_width)
        written.append(io.write_lane(out / "filtered.csv", filtered))
        area = al.lane_area(filtered.positions, cfg.lane_width)

    roc_paths = []
    for method in cfg.methods:
        with _stage(f"detect:{method}"):
            conf = stage_detect(method, filtered, dictionary, cfg)
            written.append(io.write_trace(out / f"conf_{method}.csv", filtered.positions, conf))
        with _stage(f"alarms:{method}"):
            grid, alarms = stage_alarms(filtered.positions, conf, cfg.cell, cfg.halo)
            written.append(io.write_alarms(out / f"alarms_{method}.csv", alarms))
            written += io.write_pgm(out / f"map_{method}.pgm", grid)
            written.append(io.write_grid_csv(out / f"grid_{method}.csv", grid))
        with _stage(f"score:{method}"):
            labeled, curve = stage_score(alarms, truth, area, cfg.hit_halo, cfg.max_depth, cfg.purpose)
            written.append(io.write_alarms(out / f"labeled_{method}.csv", labeled))
            roc_paths.append(io.write_roc(out / f"roc_{method}.csv", curve))
            written.append(roc_paths[-1])

    with _stage("report"):
        text, rows = compare_report(roc_paths)
        (out / "report.txt").write_text(text)
        written.append(out / "report.txt")
        written.append(write_report_csv(out / "report.csv", rows))

    manifest = {
        "config": {k: (list(v) if isinstance(v, tuple) else v)
                   for k, v in dataclasses.asdict(cfg).items()},
        "artifacts": [{"path": p.name, "sha256": io.sha256(p)} for p in written],
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest


# -------------------------------------------------------------- report

def detector_name(path) -> str:
    stem = Path(path).stem
    return stem[4:] if stem.startswith("roc_") else stem


def compare_report(roc_paths: Sequence, far_grid: Sequence[float] = DEFAULT_FAR_GRID):
    """Rank detectors by normalized AUC over their common FAR range.

    Returns ``(text, rows)``; each row is a dict with ``detector``, ``auc``,
    ``far_max`` and one ``pd@<far>`` entry per grid point.  Rows are sorted
    by AUC, highest first, then by name.
    """
    if not roc_paths:
        raise InvalidArgumentError("need at least one ROC file")
    curves = [(detector_name(p), io.read_roc(p)) for p in roc_paths]
    far_max = min(float(c.far.max()) for _, c in curves)
    rows = []
    for name, c in curves:
        row = {"detector": name, "auc": al.normalized_auc(c, far_max), "far_max": far_max}
        for f in far_grid:
            row[f"pd@{f:g}"] = al.pd_at_far(c, f)
        rows.append(row)
    rows.sort(key=lambda r: (-r["auc"], r["detector"]))

    cols = ["detector", "auc", "far_max"] + [f"pd@{f:g}" for f in far_grid]
    width = max(len("detector"), *(len(r["detector"]) for r in rows))
    lines = ["  ".join([cols[0].ljust(width)] + [c.rjust(9) for c in cols[1:]])]
    for r in rows:
        lines.append("  ".join([r["detector"].ljust(width)]
                               + [f"{r[c]:9.4f}" for c in cols[1:]]))
    return "\n".join(lines) + "\n", rows


def write_report_csv(path, rows):
    cols = list(rows[0].keys()) if rows else ["detector", "auc", "far_max"]
    body = ([r["detector"]] + [io.fmt(r[c]) for c in cols[1:]] for r in rows)
    return io.write_csv(path, cols, body)


__all__ = [
    "PipelineConfig", "load_config", "parse_config_text", "run_pipeline", "compare_report",
    "stage_dictionary", "stage_simulate", "stage_preprocess", "stage_detect", "stage_alarms",
    "stage_score", "EmiAceError",
]
