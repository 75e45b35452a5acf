"""Detection statistics: Global ACE, WACE, JOMP and Energy.

All detectors take a (n, d) feature matrix (rows are normalized samples) and
return a `ConfidenceTrace` aligned with the rows.  Energy is the exception:
it needs magnitudes, so it consumes the filtered but un-normalized lane.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import EstimationError, InvalidArgumentError, UndefinedStatisticError

log = logging.getLogger(__name__)

UPDATE_MODES = ("consistent", "literal")
DEFAULT_RIDGE = 1e-6
_TINY = 1e-12


@dataclass(frozen=True)
class BackgroundModel:
    mean: np.ndarray
    inv_cov: np.ndarray

    @property
    def dim(self) -> int:
        return self.mean.size


@dataclass(frozen=True)
class WaceConfig:
    lam: float = 0.005
    init_n: int = 200
    background_threshold: float = 0.5
    update_mode: str = "consistent"
    ridge: float = DEFAULT_RIDGE

    def __post_init__(self):
        if not 0.0 < self.lam < 1.0:
            raise InvalidArgumentError(f"lambda must lie in (0, 1), got {self.lam}")
        if self.init_n < 43:
            raise InvalidArgumentError(f"init_n must be >= 43 for a full-rank start, got {self.init_n}")
        if not 0.0 <= self.background_threshold <= 1.0:
            raise InvalidArgumentError("background_threshold must lie in [0, 1]")
        if self.update_mode not in UPDATE_MODES:
            raise InvalidArgumentError(f"unknown update mode {self.update_mode!r}")


@dataclass(frozen=True)
class OmpResult:
    selected_atoms: tuple
    weights: tuple
    residual_sq: float
    degenerate: bool = False


@dataclass
class ConfidenceTrace:
    confidences: np.ndarray
    detector_name: str
    positions: Optional[np.ndarray] = field(default=None, repr=False)

    def __len__(self):
        return self.confidences.size


def _as_features(features) -> np.ndarray:
    x = np.asarray(features, dtype=float)
    if x.ndim != 2:
        raise InvalidArgumentError("features must be a 2-D (n, d) array")
    return x


def _atom_matrix(dictionary) -> np.ndarray:
    """Accept a `Dictionary` or a bare (n_atoms, d) matrix."""
    mat = dictionary.features if hasattr(dictionary, "features") else np.asarray(dictionary, float)
    if mat.ndim != 2 or mat.shape[0] == 0:
        raise InvalidArgumentError("dictionary must be non-empty")
    return mat


# ---------------------------------------------------------------- background

def estimate_background(features, ridge: float = DEFAULT_RIDGE) -> BackgroundModel:
    """Sample mean and ridge-loaded inverse covariance of `features`.

    The covariance uses denominator ``n``; the ridge adds
    ``ridge * trace(C) / d`` to the diagonal.
    """
    x = _as_features(features)
    n, d = x.shape
    if ridge < 0:
        raise InvalidArgumentError("ridge must be non-negative")
    if n == 0:
        raise EstimationError("no samples to estimate a background from")
    mu = x.mean(axis=0)
    xc = x - mu
    cov = xc.T @ xc / n
    if ridge > 0:
        cov = cov + ridge * (np.trace(cov) / d) * np.eye(d)
    elif n < d + 1:
        raise EstimationError(f"{n} samples cannot give a full-rank {d}-dim covariance; raise the ridge")
    evals = np.linalg.eigvalsh(cov)
    if evals[0] <= max(evals[-1], 0.0) * 1e-13 or not np.all(np.isfinite(evals)):
        raise EstimationError("background covariance is singular; raise the ridge")
    inv = np.linalg.inv(cov)
    return BackgroundModel(mu, 0.5 * (inv + inv.T))


def update_mean(mu, x, lam: float, mode: str = "consistent") -> np.ndarray:
    """Exponential-forgetting mean update.

    ``consistent`` gives ``(1-lam)*mu + lam*x``.  ``literal`` evaluates
    ``(1-lam)*mu + lam*(x - mu)``, which reduces to ``(1-2*lam)*mu + lam*x``
    and settles at half of a constant input.
    """
    mu = np.asarray(mu, dtype=float)
    x = np.asarray(x, dtype=float)
    if mode == "consistent":
        return (1.0 - lam) * mu + lam * x
    if mode == "literal":
        return (1.0 - lam) * mu + lam * (x - mu)
    raise InvalidArgumentError(f"unknown update mode {mode!r}")


def update_inverse_covariance(bg: BackgroundModel, x, lam: float,
                              mode: str = "consistent") -> BackgroundModel:
    """Rank-one update of the inverse covariance with sample `x`.

    ``d = x - bg.mean`` uses the pre-update mean.  In ``consistent`` mode the
    result is the exact Sherman-Morrison inverse of
    ``(1-lam)*Sigma + lam*d d^T``.  ``literal`` mode uses ``d d^T`` and
    ``d^T d`` in place of the ``Sigma^-1``-weighted terms.  The mean is
    returned unchanged; update it separately with `update_mean`.
    """
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise InvalidArgumentError("sample must be finite")
    d = x - bg.mean
    P = bg.inv_cov
    a = (1.0 - lam) / lam
    if mode == "consistent":
        Pd = P @ d
        new = (P - np.outer(Pd, Pd) / (a + d @ Pd)) / (1.0 - lam)
    elif mode == "literal":
        new = (P - np.outer(d, d) / (a + d @ d)) / (1.0 - lam)
    else:
        raise InvalidArgumentError(f"unknown update mode {mode!r}")
    return BackgroundModel(bg.mean, 0.5 * (new + new.T))


# ---------------------------------------------------------------------- ACE

def ace_statistic(x, t, bg: BackgroundModel) -> float:
    r"""Adaptive coherence estimate of target `t` in sample `x`.

    .. math::

        \frac{[(t-\mu)^T\Sigma^{-1}(x-\mu)]^2}
             {[(t-\mu)^T\Sigma^{-1}(t-\mu)][(x-\mu)^T\Sigma^{-1}(x-\mu)]}
    """
    xd = np.asarray(x, dtype=float) - bg.mean
    td = np.asarray(t, dtype=float) - bg.mean
    if np.linalg.norm(xd) < _TINY or np.linalg.norm(td) < _TINY:
        raise UndefinedStatisticError("sample or target coincides with the background mean")
    Pt = bg.inv_cov @ td
    tt = td @ Pt
    xx = xd @ bg.inv_cov @ xd
    if tt <= 0 or xx <= 0:
        raise UndefinedStatisticError("non-positive Mahalanobis norm")
    # a squared cosine; clamp round-off above 1
    return float(min((Pt @ xd) ** 2 / (tt * xx), 1.0))


class _AceScorer:
    """Precomputes the target side of ACE for one background model."""

    def __init__(self, atoms: np.ndarray, bg: BackgroundModel):
        self.bg = bg
        td = atoms - bg.mean
        usable = np.linalg.norm(td, axis=1) >= _TINY
        self.PT = td[usable] @ bg.inv_cov  # rows: Sigma^-1 (t - mu)
        tt = np.einsum("ij,ij->i", self.PT, td[usable])
        keep = tt > 0
        self.PT, self.tt = self.PT[keep], tt[keep]
        n_skipped = atoms.shape[0] - self.tt.size
        if n_skipped:
            log.warning("skipping %d atom(s) with undefined ACE", n_skipped)

    def score(self, x: np.ndarray) -> np.ndarray:
        """Max-over-atoms ACE for each row of `x` (0 where undefined)."""
        x = np.atleast_2d(x)
        xd = x - self.bg.mean
        xx = np.einsum("ij,jk,ik->i", xd, self.bg.inv_cov, xd)
        out = np.zeros(x.shape[0])
        ok = (xx > 0) & (np.linalg.norm(xd, axis=1) >= _TINY)
        if self.tt.size == 0 or not ok.any():
            if self.tt.size == 0:
                log.warning("no usable atoms; confidence set to 0")
            return out
        num = (xd[ok] @ self.PT.T) ** 2
        out[ok] = np.minimum((num / (self.tt[None, :] * xx[ok, None])).max(axis=1), 1.0)
        return out


def ace_confidence(x, dictionary, bg: BackgroundModel) -> float:
    """Maximum ACE over all dictionary atoms."""
    return float(_AceScorer(_atom_matrix(dictionary), bg).score(np.asarray(x, float))[0])


def detect_global_ace(features, dictionary, ridge: float = DEFAULT_RIDGE) -> ConfidenceTrace:
    x = _as_features(features)
    bg = estimate_background(x, ridge)
    return ConfidenceTrace(_AceScorer(_atom_matrix(dictionary), bg).score(x), "ace-global")


def detect_wace(features, dictionary, cfg: WaceConfig = WaceConfig()) -> ConfidenceTrace:
    """Causal ACE with a lagging-window, Woodbury-updated background.

    The first ``N`` samples initialize the background and the first ``2N``
    are scored with that frozen model.  For each later sample ``k`` the
    sample ``k - N`` is folded into the background if its confidence was
    below the threshold, and then sample ``k`` is scored.
    """
    x = _as_features(features)
    n = x.shape[0]
    N = cfg.init_n
    if n < 2 * N:
        raise InvalidArgumentError(f"WACE needs at least {2 * N} samples, got {n}")
    atoms = _atom_matrix(dictionary)
    bg = estimate_background(x[:N], cfg.ridge)
    conf = np.empty(n)
    conf[:2 * N] = _AceScorer(atoms, bg).score(x[:2 * N])
    for k in range(2 * N, n):
        lagged = k - N
        if conf[lagged] < cfg.background_threshold:
            bg = update_inverse_covariance(bg, x[lagged], cfg.lam, cfg.update_mode)
            bg = BackgroundModel(update_mean(bg.mean, x[lagged], cfg.lam, cfg.update_mode),
                                 bg.inv_cov)
        conf[k] = _AceScorer(atoms, bg).score(x[k])[0]
    return ConfidenceTrace(conf, "wace")


# --------------------------------------------------------------------- OMP

def _omp_stacked(Y: np.ndarray, D: np.ndarray, m: int):
    """Greedy OMP shared across the columns of `Y` (d, n_samples).

    The atom picked at each step maximizes the summed squared correlation
    with the current residuals; weights are refit per column.
    """
    residual = Y.copy()
    selected: list[int] = []
    W = np.zeros((0, Y.shape[1]))
    for _ in range(m):
        score = ((D @ residual) ** 2).sum(axis=1)
        if selected:
            score[selected] = -np.inf
        best = int(np.argmax(score))
        if score[best] <= 0:
            break
        selected.append(best)
        A = D[selected].T
        W, *_ = np.linalg.lstsq(A, Y, rcond=None)
        residual = Y - A @ W
    return selected, W, (residual ** 2).sum(axis=0)


def omp(x, dictionary, sparsity_m: int = 1) -> OmpResult:
    """Orthogonal matching pursuit of `x` over the dictionary atoms."""
    D = _atom_matrix(dictionary)
    if not 1 <= sparsity_m <= D.shape[0]:
        raise InvalidArgumentError(f"sparsity must lie in [1, {D.shape[0]}]")
    x = np.asarray(x, dtype=float)
    if np.linalg.norm(x) < _TINY:
        return OmpResult((), (), 0.0, degenerate=True)
    sel, W, res = _omp_stacked(x[:, None], D, sparsity_m)
    return OmpResult(tuple(sel), tuple(float(w) for w in W[:, 0]), float(res[0]))


def jomp_confidence(residuals: Sequence[float]) -> float:
    r = np.asarray(residuals, dtype=float)
    if r.size == 0:
        raise InvalidArgumentError("need at least one residual")
    if np.any(r < 0):
        raise InvalidArgumentError("residuals must be non-negative")
    return float(1.0 / (1.0 + r.mean()))


def joint_residuals(samples, dictionary, sparsity_m: int = 1) -> np.ndarray:
    """Per-sample squared residuals of a joint OMP over the rows of `samples`."""
    D = _atom_matrix(dictionary)
    Y = np.asarray(samples, dtype=float).T
    _, _, res = _omp_stacked(Y, D, sparsity_m)
    return res


def detect_jomp(features, dictionary, offset_s: int = 5, sparsity_m: int = 1) -> ConfidenceTrace:
    """JOMP confidence from the two samples ``offset_s`` either side of each index.

    Indices without both neighbours get confidence 0.
    """
    x = _as_features(features)
    n = x.shape[0]
    if offset_s < 1 or sparsity_m < 1:
        raise InvalidArgumentError("offset and sparsity must be positive")
    if n <= 2 * offset_s:
        raise InvalidArgumentError(f"lane of {n} samples too short for offset {offset_s}")
    D = _atom_matrix(dictionary)
    conf = np.zeros(n)
    for i in range(offset_s, n - offset_s):
        res = joint_residuals(x[[i - offset_s, i + offset_s]], D, sparsity_m)
        conf[i] = jomp_confidence(res)
    return ConfidenceTrace(conf, "jomp")


# ------------------------------------------------------------------ energy

def detect_energy(lane) -> ConfidenceTrace:
    """Sum of response magnitudes per sample, on filtered un-normalized data."""
    resp = lane.responses if hasattr(lane, "responses") else np.asarray(lane, complex)
    if len(resp) == 0:
        raise InvalidArgumentError("lane is empty")
    return ConfidenceTrace(np.abs(resp).sum(axis=1), "energy",
                           getattr(lane, "positions", None))


DETECTORS = ("ace-global", "wace", "jomp", "energy")
