"""Down-track filtering and feature normalization of sweep samples."""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import DegenerateSampleError, InvalidArgumentError

log = logging.getLogger(__name__)

DEFAULT_FILTER_WIDTH = 9
_DEGENERATE_NORM = 1e-12


@dataclass(frozen=True)
class SweepSample:
    easting: float
    northing: float
    response: np.ndarray  # complex, one value per operating frequency


@dataclass(frozen=True)
class RawLane:
    """Samples of one lane in down-track order.

    ``positions`` is (n, 2) easting/northing in metres and ``responses`` is
    (n, n_freqs) complex.
    """

    lane_id: str
    positions: np.ndarray
    responses: np.ndarray
    operating_freqs: Optional[np.ndarray] = None

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        resp = np.asarray(self.responses, dtype=complex)
        if pos.ndim != 2 or pos.shape[1] != 2:
            raise InvalidArgumentError("positions must be (n, 2)")
        if resp.ndim != 2 or resp.shape[0] != pos.shape[0]:
            raise InvalidArgumentError("responses must be (n, n_freqs) aligned with positions")
        if not np.all(np.isfinite(pos)):
            raise InvalidArgumentError("positions must be finite")
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "responses", resp)

    def __len__(self):
        return self.positions.shape[0]

    def sample(self, i: int) -> SweepSample:
        e, n = self.positions[i]
        return SweepSample(float(e), float(n), self.responses[i].copy())

    @classmethod
    def from_samples(cls, lane_id, samples, operating_freqs=None) -> "RawLane":
        pos = np.array([[s.easting, s.northing] for s in samples], dtype=float).reshape(-1, 2)
        resp = np.array([s.response for s in samples], dtype=complex)
        return cls(lane_id, pos, resp, operating_freqs)


def sine_filter_taps(width: int = DEFAULT_FILTER_WIDTH) -> np.ndarray:
    """Zero-mean, unit-norm sine filter taps.

    One positive half period of a sine sampled at the interior points
    ``pi*(n+1)/(width+1)``, with its mean removed.  The taps are symmetric,
    so a symmetric target bump keeps its peak at the bump centre, while
    constant and linear trends (ground level and slow drift) are rejected.
    """
    if int(width) != width or width < 3 or width % 2 == 0:
        raise InvalidArgumentError(f"filter width must be an odd integer >= 3, got {width}")
    n = np.arange(width)
    taps = np.sin(np.pi * (n + 1) / (width + 1))
    taps -= taps.mean()
    return taps / np.linalg.norm(taps)


def downtrack_filter(lane: RawLane, taps) -> RawLane:
    """Convolve every real and imaginary channel with `taps` along the lane.

    Uses zero-padded "same" alignment, so output sample ``i`` is centred on
    input sample ``i`` and positions carry through unchanged.
    """
    taps = np.asarray(taps, dtype=float)
    if len(lane) < taps.size:
        raise InvalidArgumentError(
            f"lane has {len(lane)} samples, shorter than the {taps.size}-tap filter")
    half = taps.size // 2
    padded = np.pad(lane.responses, ((half, half), (0, 0)))
    # full convolution along axis 0, then crop to "same"
    out = np.zeros_like(lane.responses)
    n = len(lane)
    for k, h in enumerate(taps):
        out += h * padded[2 * half - k: 2 * half - k + n]
    return replace(lane, responses=out)


def _stack(responses: np.ndarray) -> np.ndarray:
    return np.concatenate([responses.real, responses.imag], axis=-1)


def to_features(responses) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized feature normalization.

    Returns ``(features, valid)`` where `features` is (n, 2*n_freqs) and
    `valid` flags the rows that were not degenerate.  Degenerate rows are
    left as zeros.
    """
    resp = np.atleast_2d(np.asarray(responses, dtype=complex))
    n_freq = resp.shape[1]
    x = _stack(resp)
    x[:, :n_freq] -= x[:, :n_freq].mean(axis=1, keepdims=True)
    norms = np.linalg.norm(x, axis=1)
    valid = np.isfinite(norms) & (norms > _DEGENERATE_NORM)
    x[valid] /= norms[valid, None]
    x[~valid] = 0.0
    return x, valid


def to_feature_vector(sample) -> np.ndarray:
    """Map one sample (a `SweepSample` or a complex response) to its feature.

    Real parts come first, then imaginary parts.  The mean of the real parts
    is removed from the real parts only, then the whole vector is scaled to
    unit L2 norm.
    """
    resp = sample.response if isinstance(sample, SweepSample) else sample
    resp = np.asarray(resp, dtype=complex)
    if not np.all(np.isfinite(resp)):
        raise InvalidArgumentError("sample response must be finite")
    x, valid = to_features(resp[None, :])
    if not valid[0]:
        raise DegenerateSampleError("sample has zero norm after real-mean removal")
    return x[0]


def feature_as_response(feature) -> np.ndarray:
    """Inverse of the real/imag stacking, used to re-feed features as samples."""
    feature = np.asarray(feature, dtype=float)
    half = feature.size // 2
    return feature[:half] + 1j * feature[half:]


def lane_features(lane: RawLane) -> tuple[np.ndarray, np.ndarray]:
    """Features of every lane sample; degenerate samples are logged and flagged."""
    feats, valid = to_features(lane.responses)
    n_bad = int((~valid).sum())
    if n_bad:
        log.warning("lane %s: skipping %d degenerate sample(s)", lane.lane_id, n_bad)
    return feats, valid


def normalize_dictionary(dictionary):
    atoms = []
    for atom in dictionary.atoms:
        try:
            feat = to_feature_vector(atom.raw_response)
        except DegenerateSampleError as exc:
            raise InvalidArgumentError(f"dictionary atom {atom.id} is degenerate") from exc
        atoms.append(replace(atom, feature=feat))
    return replace(dictionary, atoms=tuple(atoms))
