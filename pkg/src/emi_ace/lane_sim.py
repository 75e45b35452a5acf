"""Synthetic lanes with known ground truth.

The simulator is a desk-scale stand-in for field data: a Gaussian background
with exponentially correlated channels, a slow sinusoidal drift, and buried
objects rendered as a Gaussian bump along track times a dictionary atom's
raw response.  None of the parameters are fitted to real sensor data.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .alarms import GroundTruthEntry
from .errors import InvalidArgumentError
from .preprocessing import RawLane

N_CHANNELS = 42
ORIGIN = (500_000.0, 4_200_000.0)  # arbitrary UTM origin for simulated lanes


def exponential_covariance(dim: int = N_CHANNELS, rho: float = 0.7, scale: float = 1.0) -> np.ndarray:
    idx = np.arange(dim)
    return scale * rho ** np.abs(idx[:, None] - idx[None, :])


def ground_direction(quadrature: float = 0.1) -> np.ndarray:
    """Unit signature of ground-response variation: flat in-phase, weak quadrature."""
    g = np.r_[np.ones(21), quadrature * np.ones(21)]
    return g / np.linalg.norm(g)


def ground_covariance(ground_variance: float, rho: float = 0.7, quadrature: float = 0.1) -> np.ndarray:
    """Exponentially correlated channel noise plus a ground-response component."""
    g = ground_direction(quadrature)
    return exponential_covariance(rho=rho) + ground_variance * np.outer(g, g)


@dataclass(frozen=True)
class TargetSpec:
    along_track_m: float
    atom_index: int
    amplitude_snr_db: float
    spatial_sigma_m: float = 0.15
    depth_in: float = 2.0
    kind: str = "target"
    metal: str = "MT"
    purpose: str = "other"


@dataclass(frozen=True)
class Background:
    mean: np.ndarray = field(default_factory=lambda: np.r_[np.full(21, 3.0), np.zeros(21)])
    covariance: np.ndarray = field(default_factory=exponential_covariance)
    drift_amplitude: float = 2.0
    drift_period_m: float = 25.0

    @property
    def energy(self) -> float:
        """Expected energy of the fluctuating background (noise plus drift)."""
        return float(np.trace(self.covariance) + 0.5 * self.drift_amplitude ** 2)


@dataclass(frozen=True)
class Scenario:
    lane_length_m: float
    sample_spacing_m: float = 0.05
    track_width_m: float = 1.0
    background: Background = field(default_factory=Background)
    targets: tuple = ()
    rng_seed: int = 0
    name: str = "custom"

    def validate(self, n_atoms: Optional[int] = None):
        if not self.sample_spacing_m > 0 or not self.lane_length_m > 0:
            raise InvalidArgumentError("lane length and sample spacing must be positive")
        cov = np.asarray(self.background.covariance)
        if cov.shape != (N_CHANNELS, N_CHANNELS) or not np.allclose(cov, cov.T):
            raise InvalidArgumentError("background covariance must be symmetric 42x42")
        if np.linalg.eigvalsh(cov)[0] <= 0:
            raise InvalidArgumentError("background covariance must be positive definite")
        for t in self.targets:
            if not 0 <= t.along_track_m <= self.lane_length_m:
                raise InvalidArgumentError(f"target at {t.along_track_m} m lies outside the lane")
            if not t.spatial_sigma_m > 0:
                raise InvalidArgumentError("spatial sigma must be positive")
            if n_atoms is not None and not 0 <= t.atom_index < n_atoms:
                raise InvalidArgumentError(f"atom index {t.atom_index} out of range")


def generate_lane(scenario: Scenario, dictionary, seed: Optional[int] = None):
    """Render a scenario into a raw lane and its ground-truth list.

    `seed` overrides ``scenario.rng_seed``.  Target amplitude is chosen so
    the target component at its centre carries ``amplitude_snr_db`` of energy
    relative to `Background.energy`.
    """
    scenario.validate(len(dictionary))
    rng = np.random.default_rng(scenario.rng_seed if seed is None else seed)
    bg = scenario.background
    n = int(np.floor(scenario.lane_length_m / scenario.sample_spacing_m + 1e-9)) + 1
    along = np.arange(n) * scenario.sample_spacing_m

    x = rng.multivariate_normal(np.asarray(bg.mean, float), np.asarray(bg.covariance, float),
                                size=n, method="cholesky")
    drift_dir = rng.standard_normal(N_CHANNELS)
    drift_dir /= np.linalg.norm(drift_dir)
    phase = rng.uniform(0, 2 * np.pi)
    x += bg.drift_amplitude * np.sin(2 * np.pi * along / bg.drift_period_m + phase)[:, None] * drift_dir
    responses = x[:, :21] + 1j * x[:, 21:]

    truth = []
    for t in scenario.targets:
        atom = dictionary.atoms[t.atom_index].raw_response
        atom_energy = float(np.sum(np.abs(atom) ** 2))
        amp = np.sqrt(bg.energy * 10 ** (t.amplitude_snr_db / 10) / atom_energy)
        profile = np.exp(-(along - t.along_track_m) ** 2 / (2 * t.spatial_sigma_m ** 2))
        responses = responses + amp * profile[:, None] * atom[None, :]
        truth.append(GroundTruthEntry(ORIGIN[0] + t.along_track_m, ORIGIN[1],
                                      t.kind, t.metal, float(t.depth_in), t.purpose))

    positions = np.column_stack([ORIGIN[0] + along, np.full(n, ORIGIN[1])])
    lane = RawLane(scenario.name, positions, responses, getattr(dictionary, "operating_freqs", None))
    return lane, truth


# ---------------------------------------------------------------- presets

# Object counts per lane: (MT, LMT, NMT, CL)
LANE_COUNTS = {
    "lane1": (4, 7, 0, 6),
    "lane2": (4, 10, 0, 4),
    "lane3": (4, 7, 0, 8),
    "lane4": (6, 6, 3, 0),
    "lane5": (7, 5, 5, 0),
    "lane6": (6, 6, 2, 3),
}
# Reference totals row.  Its CL entry (11) disagrees with the column sum (21).
LANE_TOTALS = (31, 41, 10, 11)

# Atom index ranges per class.  With the default bands, atoms 20-78 relax
# inside the 300 Hz - 90 kHz operating band: metal-rich objects relax slowly,
# low-metal ones quickly.
ATOM_RANGES = {"MT": (15, 45), "LMT": (45, 75), "NMT": (55, 90), "CL": (10, 80)}
BASE_SNR_DB = {"MT": 15.0, "LMT": 8.0, "NMT": -10.0, "CL": 10.0}
_DEPTH_CYCLE = (1.0, 3.0, 2.0, 5.0, 4.0, 6.0)
PRESET_GROUND_VARIANCE = 100.0
LEAD_IN_M = 24.0  # keeps the first WACE initialization window free of objects
OBJECT_SPACING_M = 3.0


def depth_attenuated_snr(base_snr_db: float, depth_in: float) -> float:
    """SNR after the synthetic ``2**(-depth/4)`` amplitude attenuation."""
    return base_snr_db + 20.0 * np.log10(2.0 ** (-depth_in / 4.0))


def _layout(name, classes, seed, n_atoms, base_snr=None, depths=_DEPTH_CYCLE, attenuate=True):
    """Place objects of the given metal classes at fixed spacing along a lane."""
    base_snr = base_snr or BASE_SNR_DB
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(classes))
    targets = []
    n_targets = 0
    for slot, ci in enumerate(order):
        metal = classes[ci]
        depth = depths[slot % len(depths)]
        if metal == "CL":
            kind, purpose = "clutter", "other"
        else:
            kind = "target"
            purpose = "AT" if metal == "MT" and n_targets % 2 == 0 else "AP"
            n_targets += 1
        lo, hi = ATOM_RANGES[metal]
        atom = int(rng.integers(lo, min(hi, n_atoms - 1) + 1)) if n_atoms > 1 else 0
        snr = base_snr[metal]
        if attenuate:
            snr = depth_attenuated_snr(snr, depth)
        targets.append(TargetSpec(LEAD_IN_M + slot * OBJECT_SPACING_M, atom, snr,
                                  depth_in=depth, kind=kind, metal=metal, purpose=purpose))
    length = LEAD_IN_M + max(len(classes) - 1, 0) * OBJECT_SPACING_M + LEAD_IN_M / 4
    return Scenario(lane_length_m=length, targets=tuple(targets), rng_seed=seed, name=name,
                    background=Background(covariance=ground_covariance(PRESET_GROUND_VARIANCE)))


def preset_scenarios(n_atoms: int = 100) -> dict:
    """Named scenarios: six reference lane object mixes, plus easy/hard.

    Every preset adds a strong ground-response component to the channel
    noise.  Lane presets use base SNRs of 15 dB (MT), 8 dB (LMT), -10 dB (NMT)
    and 10 dB (clutter), attenuated by burial depth (1-6 in).  ``easy`` has
    ten 15 dB targets and two clutter objects at the same shallow depths;
    ``hard`` has mostly low-metal and non-metal targets over a stronger drift.
    """
    out = {}
    for i, (name, counts) in enumerate(LANE_COUNTS.items(), start=1):
        classes = [m for m, c in zip(("MT", "LMT", "NMT", "CL"), counts) for _ in range(c)]
        out[name] = _layout(name, classes, seed=i, n_atoms=n_atoms)
    out["easy"] = _layout("easy", ["MT"] * 6 + ["LMT"] * 4 + ["CL"] * 2, seed=101, n_atoms=n_atoms,
                          base_snr=dict.fromkeys(BASE_SNR_DB, 15.0))
    hard = _layout("hard", ["MT"] * 2 + ["LMT"] * 6 + ["NMT"] * 3 + ["CL"] * 4, seed=202,
                   n_atoms=n_atoms, base_snr={"MT": 8.0, "LMT": 3.0, "NMT": -10.0, "CL": 8.0})
    out["hard"] = replace(hard, background=replace(hard.background, drift_amplitude=6.0,
                                                   drift_period_m=5.0))
    return out
