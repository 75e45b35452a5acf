"""Readers and writers for the CSV, PGM and manifest artifacts.

Floats are written with ``repr`` so a write/read round trip is exact and
repeated runs produce byte-identical files.
"""

from __future__ import annotations

import csv
import hashlib
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .alarms import Alarm, ConfidenceGrid, GroundTruthEntry, Label, LabeledAlarm, RocCurve
from .dictionary import Dictionary, DictionaryAtom
from .errors import CsvParseError
from .preprocessing import RawLane, normalize_dictionary

N_FREQ = 21
LANE_HEADER = ["easting", "northing"] + [f"re_{i}" for i in range(1, N_FREQ + 1)] \
    + [f"im_{i}" for i in range(1, N_FREQ + 1)]
DICT_HEADER = ["atom_id", "zeta_hz"] + LANE_HEADER[2:]
FEATURE_HEADER = ["atom_id"] + [f"f_{i}" for i in range(1, 2 * N_FREQ + 1)]
TRACE_HEADER = ["easting", "northing", "confidence"]
ALARM_HEADER = ["easting", "northing", "confidence", "label"]
TRUTH_HEADER = ["easting", "northing", "kind", "metal", "depth_in", "purpose"]
ROC_HEADER = ["threshold", "pd", "far_per_m2"]


def fmt(x) -> str:
    return repr(float(x))


def write_csv(path, header, rows: Iterable[Sequence]):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    return path


def _read(path, header):
    """Yield ``(line_number, row)`` after checking the header."""
    path = Path(path)
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise CsvParseError(path, 0, f"cannot open: {exc.strerror}") from exc
    with fh:
        reader = csv.reader(fh)
        first = next(reader, None)
        if first is None:
            raise CsvParseError(path, 1, "empty file, header row is mandatory")
        if [c.strip() for c in first] != header:
            raise CsvParseError(path, 1, f"expected header {','.join(header)}")
        for row in reader:
            if not row:
                continue
            if len(row) != len(header):
                raise CsvParseError(path, reader.line_num,
                                    f"expected {len(header)} fields, got {len(row)}")
            yield reader.line_num, row


def _floats(path, line, values):
    try:
        return [float(v) for v in values]
    except ValueError as exc:
        raise CsvParseError(path, line, str(exc)) from exc


def _complex_block(values):
    v = np.asarray(values, dtype=float)
    return v[:N_FREQ] + 1j * v[N_FREQ:]


def _response_fields(resp):
    return [fmt(v) for v in resp.real] + [fmt(v) for v in resp.imag]


# ---------------------------------------------------------------- lanes

def write_lane(path, lane: RawLane):
    rows = ([fmt(e), fmt(n)] + _response_fields(r) for (e, n), r in zip(lane.positions, lane.responses))
    return write_csv(path, LANE_HEADER, rows)


def read_lane(path, lane_id: Optional[str] = None, operating_freqs=None) -> RawLane:
    pos, resp = [], []
    for line, row in _read(path, LANE_HEADER):
        vals = _floats(path, line, row)
        pos.append(vals[:2])
        resp.append(_complex_block(vals[2:]))
    if not pos:
        raise CsvParseError(path, 2, "lane has no samples")
    return RawLane(lane_id or Path(path).stem, np.array(pos), np.array(resp), operating_freqs)


# ----------------------------------------------------------- dictionary

def features_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.stem + "_features" + path.suffix)


def write_dictionary(path, dictionary: Dictionary):
    """Write raw responses to `path` and normalized features next to it."""
    rows = ([str(a.id), fmt(a.relaxation_freq)] + _response_fields(a.raw_response)
            for a in dictionary.atoms)
    out = write_csv(path, DICT_HEADER, rows)
    feats = ([str(a.id)] + [fmt(v) for v in a.feature] for a in dictionary.atoms)
    return out, write_csv(features_path(path), FEATURE_HEADER, feats)


def read_dictionary(path, operating_freqs=None) -> Dictionary:
    """Load raw atom responses and re-derive features by normalization."""
    atoms = []
    for line, row in _read(path, DICT_HEADER):
        vals = _floats(path, line, row[1:])
        try:
            atom_id = int(row[0])
        except ValueError as exc:
            raise CsvParseError(path, line, "atom_id must be an integer") from exc
        atoms.append(DictionaryAtom(atom_id, vals[0], _complex_block(vals[1:])))
    if not atoms:
        raise CsvParseError(path, 2, "dictionary has no atoms")
    return normalize_dictionary(Dictionary(operating_freqs, tuple(atoms)))


# ---------------------------------------------------------------- truth

def write_truth(path, truth: Sequence[GroundTruthEntry]):
    rows = ([fmt(t.easting), fmt(t.northing), t.kind, t.metal, fmt(t.depth_in), t.purpose]
            for t in truth)
    return write_csv(path, TRUTH_HEADER, rows)


def read_truth(path) -> list[GroundTruthEntry]:
    out = []
    for line, row in _read(path, TRUTH_HEADER):
        e, n, depth = _floats(path, line, [row[0], row[1], row[4]])
        try:
            out.append(GroundTruthEntry(e, n, row[2].strip(), row[3].strip(), depth, row[5].strip()))
        except ValueError as exc:
            raise CsvParseError(path, line, str(exc)) from exc
    return out


# ------------------------------------------------------ traces / alarms

def write_trace(path, positions, confidences):
    rows = ([fmt(e), fmt(n), fmt(c)] for (e, n), c in zip(positions, confidences))
    return write_csv(path, TRACE_HEADER, rows)


def read_trace(path):
    rows = [_floats(path, line, row) for line, row in _read(path, TRACE_HEADER)]
    if not rows:
        raise CsvParseError(path, 2, "trace is empty")
    arr = np.array(rows)
    return arr[:, :2], arr[:, 2]


def write_alarms(path, alarms):
    """Accepts plain `Alarm`s (label left blank) or `LabeledAlarm`s."""
    def row(a):
        if isinstance(a, LabeledAlarm):
            return [fmt(a.alarm.easting), fmt(a.alarm.northing), fmt(a.alarm.confidence), a.label.value]
        return [fmt(a.easting), fmt(a.northing), fmt(a.confidence), ""]
    return write_csv(path, ALARM_HEADER, (row(a) for a in alarms))


def read_alarms(path) -> list:
    out = []
    for line, row in _read(path, ALARM_HEADER):
        alarm = Alarm(*_floats(path, line, row[:3]))
        label = row[3].strip()
        if label:
            try:
                out.append(LabeledAlarm(alarm, Label(label)))
            except ValueError as exc:
                raise CsvParseError(path, line, f"unknown label {label!r}") from exc
        else:
            out.append(alarm)
    return out


# ------------------------------------------------------------------ ROC

def write_roc(path, curve: RocCurve):
    rows = ([fmt(t), fmt(p), fmt(f)] for t, p, f in curve.points)
    return write_csv(path, ROC_HEADER, rows)


def read_roc(path) -> RocCurve:
    rows = []
    for line, row in _read(path, ROC_HEADER):
        vals = _floats(path, line, row)
        if np.isnan(vals).any() or not (0.0 <= vals[1] <= 1.0) or vals[2] < 0:
            raise CsvParseError(path, line, "pd must lie in [0, 1] and far must be >= 0")
        rows.append(vals)
    if not rows:
        raise CsvParseError(path, 2, "ROC has no points")
    arr = np.array(rows)
    if np.any(np.diff(arr[:, 1]) < 0) or np.any(np.diff(arr[:, 2]) < 0):
        raise CsvParseError(path, 2, "pd and far must be non-decreasing down the file")
    return RocCurve(arr[:, 0], arr[:, 1], arr[:, 2])


# ----------------------------------------------------------------- maps

def write_pgm(path, grid: ConfidenceGrid):
    """Binary 8-bit PGM, north up, scaled linearly over the grid's min-max.

    A sidecar ``<path>.txt`` records origin (centre of the south-west cell)
    and cell size.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    cells = grid.cells
    lo, hi = float(cells.min()), float(cells.max())
    scaled = np.zeros_like(cells) if hi <= lo else (cells - lo) / (hi - lo) * 255.0
    img = np.round(scaled[::-1]).astype(np.uint8)
    rows, cols = img.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{cols} {rows}\n255\n".encode("ascii"))
        fh.write(img.tobytes())
    side = path.with_name(path.name + ".txt")
    side.write_text(
        f"origin_easting={fmt(grid.origin[0])}\norigin_northing={fmt(grid.origin[1])}\n"
        f"cell_size={fmt(grid.cell_size)}\nrows={rows}\ncols={cols}\n"
        f"min={fmt(lo)}\nmax={fmt(hi)}\n")
    return path, side


def read_pgm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    parts = data.split(b"\n", 3)
    if parts[0] != b"P5":
        raise CsvParseError(path, 1, "not a binary PGM")
    cols, rows = map(int, parts[1].split())
    return np.frombuffer(parts[3], dtype=np.uint8).reshape(rows, cols)


def write_grid_csv(path, grid: ConfidenceGrid):
    """Long-format grid: one row per cell with its centre coordinates."""
    E, N = grid.cell_centers()
    rows = ([fmt(e), fmt(n), fmt(c)] for e, n, c in zip(E.ravel(), N.ravel(), grid.cells.ravel()))
    return write_csv(path, TRACE_HEADER, rows)


def sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
