"""Alarm generation by morphological clustering, halo scoring and ROC curves."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidArgumentError

DEFAULT_CELL_SIZE = 0.05
DEFAULT_SUPPRESSION_HALO = 0.5
DEFAULT_HIT_HALO = 0.25
DEFAULT_MAX_DEPTH_IN = 8.0


class Label(str, enum.Enum):
    HIT = "HIT"
    IGNORED = "IGNORED"
    FALSE_ALARM = "FALSE_ALARM"


@dataclass
class ConfidenceGrid:
    """Rasterized confidence map.

    ``cells[r, c]`` is centred at ``origin + (c, r) * cell_size``; row index
    grows with northing.  ``occupied_mask`` marks cells holding a sample or an
    interpolated value.
    """

    origin: tuple
    cell_size: float
    cells: np.ndarray
    occupied_mask: np.ndarray

    def cell_centers(self):
        rows, cols = self.cells.shape
        e = self.origin[0] + np.arange(cols) * self.cell_size
        n = self.origin[1] + np.arange(rows) * self.cell_size
        return np.meshgrid(e, n)


@dataclass(frozen=True)
class Alarm:
    easting: float
    northing: float
    confidence: float


@dataclass(frozen=True)
class GroundTruthEntry:
    easting: float
    northing: float
    kind: str  # "target" | "clutter"
    metal: str  # MT | LMT | NMT | CL
    depth_in: float
    purpose: str = "other"  # AT | AP | other

    def __post_init__(self):
        if self.kind not in ("target", "clutter"):
            raise InvalidArgumentError(f"unknown kind {self.kind!r}")
        if self.metal not in ("MT", "LMT", "NMT", "CL"):
            raise InvalidArgumentError(f"unknown metal class {self.metal!r}")
        if self.purpose not in ("AT", "AP", "other"):
            raise InvalidArgumentError(f"unknown purpose {self.purpose!r}")
        if (self.metal == "CL") != (self.kind == "clutter"):
            raise InvalidArgumentError("clutter entries must have metal class CL")
        if self.depth_in < 0:
            raise InvalidArgumentError("depth must be non-negative")


@dataclass(frozen=True)
class LabeledAlarm:
    alarm: Alarm
    label: Label


@dataclass
class RocCurve:
    thresholds: np.ndarray
    pd: np.ndarray
    far: np.ndarray

    @property
    def points(self):
        return list(zip(self.thresholds.tolist(), self.pd.tolist(), self.far.tolist()))


# ---------------------------------------------------------------- rasterize

def _fill_line(values: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Linearly interpolate `values` between occupied entries of a 1-D line."""
    idx = np.flatnonzero(mask)
    out = np.where(mask, values, 0.0)
    if idx.size >= 2:
        span = np.arange(idx[0], idx[-1] + 1)
        out[span] = np.interp(span, idx, values[idx])
    return out


def rasterize(positions, confidences, cell_size: float = DEFAULT_CELL_SIZE) -> ConfidenceGrid:
    """Map per-sample confidences onto a regular grid.

    Samples land in their containing cell (max on collision).  Empty cells
    between occupied ones in the same row or column are filled by 1-D linear
    interpolation; the larger of the row and column fills is kept.
    """
    pos = np.asarray(positions, dtype=float).reshape(-1, 2)
    conf = np.asarray(confidences, dtype=float).ravel()
    if pos.shape[0] == 0:
        raise InvalidArgumentError("cannot rasterize an empty trace")
    if pos.shape[0] != conf.size:
        raise InvalidArgumentError("positions and confidences differ in length")
    if not cell_size > 0:
        raise InvalidArgumentError("cell size must be positive")
    lo = pos.min(axis=0)
    idx = np.floor((pos - lo) / cell_size + 0.5).astype(int)
    cols, rows = idx.max(axis=0) + 1
    cells = np.full((rows, cols), -np.inf)
    np.maximum.at(cells, (idx[:, 1], idx[:, 0]), conf)
    sampled = np.isfinite(cells)
    cells[~sampled] = 0.0

    by_row = np.zeros_like(cells)
    row_mask = np.zeros_like(sampled)
    for r in range(rows):
        by_row[r] = _fill_line(cells[r], sampled[r])
        hit = np.flatnonzero(sampled[r])
        if hit.size:
            row_mask[r, hit[0]:hit[-1] + 1] = True
    by_col = np.zeros_like(cells)
    col_mask = np.zeros_like(sampled)
    for c in range(cols):
        by_col[:, c] = _fill_line(cells[:, c], sampled[:, c])
        hit = np.flatnonzero(sampled[:, c])
        if hit.size:
            col_mask[hit[0]:hit[-1] + 1, c] = True

    occupied = row_mask | col_mask
    filled = np.where(sampled, cells, np.maximum(np.where(row_mask, by_row, -np.inf),
                                                 np.where(col_mask, by_col, -np.inf)))
    filled[~occupied] = 0.0
    return ConfidenceGrid((float(lo[0]), float(lo[1])), float(cell_size), filled, occupied)


# ------------------------------------------------------------------ alarms

def extract_alarms(grid: ConfidenceGrid, halo_m: float = DEFAULT_SUPPRESSION_HALO) -> list[Alarm]:
    """Iteratively take the grid maximum and zero everything within `halo_m`.

    Runs until no occupied cell is left unsuppressed, so zero-confidence
    stretches of the lane still get (confidence 0) alarms and every occupied
    cell ends up within `halo_m` of an alarm.  Ties go to the first cell in
    row-major order.  Negative cells are treated as 0.
    """
    if not halo_m > 0:
        raise InvalidArgumentError("halo must be positive")
    work = np.clip(grid.cells, 0.0, None).astype(float)
    live = np.asarray(grid.occupied_mask, dtype=bool) | (work > 0)
    rows, cols = work.shape
    reach = int(np.ceil(halo_m / grid.cell_size))
    # integer cell offsets keep cells exactly on the halo circle consistent
    k = np.arange(-reach, reach + 1)
    disk = (k[:, None] ** 2 + k[None, :] ** 2) <= (halo_m / grid.cell_size) ** 2 * (1 + 1e-12)
    alarms = []
    while live.any():
        flat = int(np.argmax(np.where(live, work, -1.0)))
        r, c = divmod(flat, cols)
        alarms.append(Alarm(grid.origin[0] + c * grid.cell_size,
                            grid.origin[1] + r * grid.cell_size, float(work[r, c])))
        r0, r1 = max(r - reach, 0), min(r + reach + 1, rows)
        c0, c1 = max(c - reach, 0), min(c + reach + 1, cols)
        sub = disk[r0 - r + reach:r1 - r + reach, c0 - c + reach:c1 - c + reach]
        work[r0:r1, c0:c1][sub] = 0.0
        live[r0:r1, c0:c1][sub] = False
    return alarms


# ----------------------------------------------------------------- scoring

def scorable(entry: GroundTruthEntry, max_depth_in: float, purpose_filter: Optional[str]) -> bool:
    if entry.kind != "target" or entry.depth_in > max_depth_in:
        return False
    return purpose_filter is None or entry.purpose == purpose_filter


def match_alarms(alarms: Sequence[Alarm], truth: Sequence[GroundTruthEntry],
                 hit_halo_m: float = DEFAULT_HIT_HALO,
                 max_depth_in: float = DEFAULT_MAX_DEPTH_IN,
                 purpose_filter: Optional[str] = None):
    """Label alarms against ground truth.

    Returns ``(labeled, n_scorable)``; `labeled` keeps the input order.
    Alarms are visited by descending confidence and each scorable target is
    credited at most once (to its nearest uncredited match).  Anything else
    inside the halo of a truth object is ignored, including repeat alarms on
    a target that has already been credited.
    """
    if hit_halo_m < 0:
        raise InvalidArgumentError("hit halo must be non-negative")
    if purpose_filter is not None:
        purpose_filter = purpose_filter.upper() if purpose_filter.lower() != "other" else "other"
    truth = list(truth)
    keep = np.array([scorable(t, max_depth_in, purpose_filter) for t in truth], dtype=bool)
    n_scorable = int(keep.sum())
    labels: list[Optional[Label]] = [None] * len(alarms)
    if not alarms:
        return [], n_scorable
    tpos = np.array([[t.easting, t.northing] for t in truth]).reshape(-1, 2)
    credited = np.zeros(len(truth), dtype=bool)
    order = sorted(range(len(alarms)), key=lambda i: -alarms[i].confidence)
    for i in order:
        a = alarms[i]
        dist = np.hypot(tpos[:, 0] - a.easting, tpos[:, 1] - a.northing)
        near = dist <= hit_halo_m
        candidates = np.flatnonzero(near & keep & ~credited)
        if candidates.size:
            j = candidates[np.argmin(dist[candidates])]
            credited[j] = True
            labels[i] = Label.HIT
        elif near.any():
            labels[i] = Label.IGNORED
        else:
            labels[i] = Label.FALSE_ALARM
    return [LabeledAlarm(a, lab) for a, lab in zip(alarms, labels)], n_scorable


def lane_area(positions, min_width: float = 1.0) -> float:
    """Bounding-box area of sample positions, each side floored at `min_width`."""
    pos = np.asarray(positions, dtype=float).reshape(-1, 2)
    if pos.shape[0] == 0:
        raise InvalidArgumentError("no positions")
    ext = np.maximum(pos.max(axis=0) - pos.min(axis=0), min_width)
    return float(ext[0] * ext[1])


def roc(labeled: Sequence[LabeledAlarm], scorable_target_count: int, lane_area_m2: float) -> RocCurve:
    """Sweep a threshold down through the distinct alarm confidences.

    Ends with a point at threshold ``-inf`` that includes every alarm.
    """
    if not lane_area_m2 > 0:
        raise InvalidArgumentError("lane area must be positive")
    if scorable_target_count < 0:
        raise InvalidArgumentError("scorable target count must be non-negative")
    conf = np.array([la.alarm.confidence for la in labeled], dtype=float)
    hit = np.array([la.label == Label.HIT for la in labeled], dtype=bool)
    fa = np.array([la.label == Label.FALSE_ALARM for la in labeled], dtype=bool)
    thresholds = np.append(np.unique(conf)[::-1], -np.inf)
    denom = scorable_target_count if scorable_target_count > 0 else None
    pd, far = [], []
    for thr in thresholds:
        above = conf >= thr
        pd.append(hit[above].sum() / denom if denom else 0.0)
        far.append(fa[above].sum() / lane_area_m2)
    return RocCurve(thresholds, np.array(pd, dtype=float), np.array(far, dtype=float))


# ------------------------------------------------------------------ curves

def _pd_of_far(curve: RocCurve):
    """Breakpoints of the ROC as a monotone curve starting at the origin."""
    far = np.concatenate([[0.0], curve.far])
    pd = np.concatenate([[0.0], curve.pd])
    return far, pd


def pd_at_far(curve: RocCurve, far_value: float) -> float:
    """Best detection rate reachable at a false-alarm rate <= `far_value`."""
    far, pd = _pd_of_far(curve)
    ok = far <= far_value
    return float(pd[ok].max()) if ok.any() else 0.0


def normalized_auc(curve: RocCurve, far_max: float) -> float:
    """Trapezoidal area under the ROC on ``[0, far_max]`` divided by `far_max`.

    With ``far_max == 0`` this is the detection rate reached at zero false
    alarms.
    """
    far, pd = _pd_of_far(curve)
    if far_max <= 0:
        return pd_at_far(curve, 0.0)
    # points are ordered by threshold, so far and pd are both non-decreasing
    inside = far < far_max
    xs = np.concatenate([far[inside], [far_max]])
    after = np.flatnonzero(~inside)
    if after.size:
        k = after[0]
        f0, p0 = far[k - 1], pd[k - 1]
        f1, p1 = far[k], pd[k]
        end = p0 + (p1 - p0) * (far_max - f0) / (f1 - f0) if f1 > f0 else p1
    else:
        end = pd[-1]
    ys = np.concatenate([pd[inside], [end]])
    return float(np.trapezoid(ys, xs) / far_max)
