"""DSRF target-signature dictionary.

Each atom is the frequency response of a single relaxation term,
``H(w) = c0 + sum_k c_k / (1 + j w / zeta_k)``, sampled at the sensor's
operating frequencies and then normalized exactly like sensor data.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidArgumentError

N_OPERATING_FREQS = 21
DEFAULT_OPERATING_FREQ_RANGE = (300.0, 90_000.0)
DEFAULT_ATOM_COUNT = 100
DEFAULT_ZETA_RANGE = (45.0, 670_000.0)
OMEGA_CONVENTIONS = ("angular", "plain")


def log_spaced(count: int, f_min: float, f_max: float) -> np.ndarray:
    """Geometric sequence from `f_min` to `f_max` with exact endpoints.

    ``count == 1`` is accepted as a degenerate case and returns ``[f_min]``.
    """
    if count < 1:
        raise InvalidArgumentError(f"count must be >= 1, got {count}")
    if not (np.isfinite(f_min) and np.isfinite(f_max)) or f_min <= 0 or f_max <= f_min:
        raise InvalidArgumentError(f"need 0 < f_min < f_max, got ({f_min}, {f_max})")
    if count == 1:
        return np.array([float(f_min)])
    out = np.geomspace(f_min, f_max, count)
    out[0], out[-1] = f_min, f_max
    return out


def default_operating_freqs() -> np.ndarray:
    return log_spaced(N_OPERATING_FREQS, *DEFAULT_OPERATING_FREQ_RANGE)


@dataclass(frozen=True)
class RelaxationModel:
    """Parameters of the relaxation-frequency response model.

    ``relaxation_freqs_zeta`` are expressed in the same units as the angular
    evaluation frequency ``w = 2*pi*f`` (rad/s).
    """

    shift_c0: float
    amplitudes_ck: tuple
    relaxation_freqs_zeta: tuple

    def __post_init__(self):
        if len(self.amplitudes_ck) != len(self.relaxation_freqs_zeta):
            raise InvalidArgumentError("amplitudes and relaxation frequencies differ in length")
        if len(self.amplitudes_ck) == 0:
            raise InvalidArgumentError("model order must be positive")

    @property
    def model_order(self) -> int:
        return len(self.amplitudes_ck)


def dsrf_response(model: RelaxationModel, eval_freqs, signed: bool = False) -> np.ndarray:
    """Evaluate the relaxation model at frequencies given in Hz.

    Parameters
    ----------
    model : RelaxationModel
    eval_freqs : array_like
        Frequencies in Hz.  Must be non-negative unless ``signed`` is set,
        which allows negative frequencies (used to check conjugate symmetry).

    Returns
    -------
    ndarray of complex, same length as `eval_freqs`.
    """
    f = np.asarray(eval_freqs, dtype=float)
    if f.ndim != 1 or f.size == 0:
        raise InvalidArgumentError("eval_freqs must be a non-empty 1-D sequence")
    if not signed and np.any(f < 0):
        raise InvalidArgumentError("eval_freqs must be non-negative")
    zeta = np.asarray(model.relaxation_freqs_zeta, dtype=float)
    if np.any(zeta == 0) or not np.all(np.isfinite(zeta)):
        raise InvalidArgumentError("relaxation frequencies must be finite and non-zero")
    if np.any(zeta < 0):
        raise InvalidArgumentError("relaxation frequencies must be positive")
    c = np.asarray(model.amplitudes_ck, dtype=float)
    omega = 2.0 * np.pi * f
    terms = c[None, :] / (1.0 + 1j * omega[:, None] / zeta[None, :])
    return model.shift_c0 + terms.sum(axis=1)


@dataclass(frozen=True)
class DictionaryAtom:
    id: int
    relaxation_freq: float  # Hz, as swept
    raw_response: np.ndarray
    feature: Optional[np.ndarray] = None


@dataclass(frozen=True)
class Dictionary:
    operating_freqs: Optional[np.ndarray]
    atoms: tuple = field(default_factory=tuple)

    def __len__(self):
        return len(self.atoms)

    @cached_property
    def features(self) -> np.ndarray:
        """(n_atoms, 42) matrix of normalized atom features."""
        if any(a.feature is None for a in self.atoms):
            raise InvalidArgumentError("dictionary has not been normalized")
        return np.vstack([a.feature for a in self.atoms])

    @cached_property
    def raw_responses(self) -> np.ndarray:
        return np.vstack([a.raw_response for a in self.atoms])

    @property
    def relaxation_freqs(self) -> np.ndarray:
        return np.array([a.relaxation_freq for a in self.atoms])


def build_dictionary(
    operating_freqs: Optional[Sequence[float]] = None,
    atom_count: int = DEFAULT_ATOM_COUNT,
    zeta_min: float = DEFAULT_ZETA_RANGE[0],
    zeta_max: float = DEFAULT_ZETA_RANGE[1],
    omega_convention: str = "angular",
) -> Dictionary:
    """Build and normalize a single-pole DSRF dictionary.

    Atom ``i`` uses ``c0 = 0``, ``c1 = 1`` and the i-th log-spaced relaxation
    frequency between `zeta_min` and `zeta_max` (Hz).  With the ``angular``
    convention the relaxation frequency is converted to rad/s with the same
    ``2*pi`` factor applied to the operating frequencies; ``plain`` uses the
    Hz value directly as rad/s.
    """
    from .preprocessing import normalize_dictionary

    if omega_convention not in OMEGA_CONVENTIONS:
        raise InvalidArgumentError(f"unknown omega convention {omega_convention!r}")
    freqs = default_operating_freqs() if operating_freqs is None else np.asarray(operating_freqs, float)
    if freqs.ndim != 1 or freqs.size < 1 or np.any(np.diff(freqs) <= 0):
        raise InvalidArgumentError("operating frequencies must be strictly increasing")
    scale = 2.0 * np.pi if omega_convention == "angular" else 1.0
    atoms = []
    for i, zeta_hz in enumerate(log_spaced(atom_count, zeta_min, zeta_max)):
        model = RelaxationModel(0.0, (1.0,), (scale * zeta_hz,))
        atoms.append(DictionaryAtom(i, float(zeta_hz), dsrf_response(model, freqs)))
    return normalize_dictionary(Dictionary(freqs, tuple(atoms)))
