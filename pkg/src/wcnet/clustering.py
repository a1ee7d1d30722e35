"""Dissimilarities, PAM k-medoids and Gap-statistic selection of k."""

from dataclasses import dataclass, field
import logging

import numpy as np

from . import _kernels
from ._parallel import pmap
from .coherence import DEFAULT_BANDS, SmoothingParams, band_matrices
from .cwt import MorletParams

log = logging.getLogger(__name__)

LOG_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class DissimMatrix:
    assets: tuple
    values: np.ndarray

    def __post_init__(self):
        v = self.values
        if v.ndim != 2 or v.shape[0] != v.shape[1] or v.shape[0] != len(self.assets):
            raise ValueError("dissimilarity matrix must be square and match the asset list")


@dataclass(frozen=True, eq=False)
class ClusterAssignment:
    k: int
    medoids: np.ndarray  # asset indices, ascending
    labels: np.ndarray  # cluster id = position of the medoid in ``medoids``
    total_cost: float
    n_swaps: int = 0

    def to_dict(self):
        return {"k": self.k, "medoids": self.medoids.tolist(), "labels": self.labels.tolist(),
                "total_cost": self.total_cost}


def dissimilarity_matrix(band_matrix):
    """``1 - mean_r2`` with a zero diagonal."""
    d = 1.0 - np.asarray(band_matrix.mean_r2, dtype=float)
    d = np.clip(0.5 * (d + d.T), 0.0, 1.0)
    np.fill_diagonal(d, 0.0)
    return DissimMatrix(tuple(band_matrix.assets), d)


def _values(d):
    return np.ascontiguousarray(d.values if isinstance(d, DissimMatrix) else d, dtype=float)


def assign(d, medoids):
    """Nearest-medoid labels; ties go to the lower medoid index."""
    d = _values(d)
    medoids = np.sort(np.asarray(medoids, dtype=np.int64))
    labels = np.argmin(d[:, medoids], axis=1)
    labels[medoids] = np.arange(len(medoids))
    cost = float(d[np.arange(d.shape[0]), medoids[labels]].sum())
    return medoids, labels, cost


def pam(d, k, seed=None, restarts=0, max_iter=1000):
    """Partitioning Around Medoids.

    Greedy BUILD followed by SWAP: the best cost-reducing (medoid, non-medoid)
    exchange is applied until none is left. ``restarts`` extra SWAP runs start
    from random medoid sets drawn with ``seed``; the cheapest result wins.
    """
    dv = _values(d)
    n = dv.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k={k} must be between 1 and n={n}")
    tol = 1e-12 * max(1.0, float(np.abs(dv).max()))
    medoids, cost, n_swaps = _kernels.pam_swap(dv, _kernels.pam_build(dv, k), tol, max_iter)
    if restarts:
        rng = np.random.default_rng(seed)
        for _ in range(restarts):
            start = np.sort(rng.choice(n, size=k, replace=False)).astype(np.int64)
            cand, c_cost, c_swaps = _kernels.pam_swap(dv, start, tol, max_iter)
            if c_cost < cost - tol:
                medoids, cost, n_swaps = cand, c_cost, c_swaps
    medoids, labels, total = assign(dv, medoids)
    return ClusterAssignment(k, medoids, labels, total, int(n_swaps))


def within_dispersion(d, labels):
    """``sum_C 1/(2|C|) sum_{i,j in C} D[i, j]``."""
    dv = _values(d)
    labels = np.asarray(labels)
    total = 0.0
    for c in np.unique(labels):
        idx = np.flatnonzero(labels == c)
        total += dv[np.ix_(idx, idx)].sum() / (2.0 * idx.size)
    return total


def _log_dispersions(d, k_max):
    return np.array([np.log(max(within_dispersion(d, pam(d, k).labels), LOG_FLOOR))
                     for k in range(1, k_max + 1)])


@dataclass(frozen=True, eq=False)
class GapResult:
    k: int
    ks: np.ndarray
    log_w: np.ndarray
    log_w_ref: np.ndarray  # mean over references
    sd: np.ndarray  # sd_k * sqrt(1 + 1/B)
    gap: np.ndarray
    num_refs: int
    degenerate: bool = False
    rule: str = "one-se"

    def to_dict(self):
        return {"k": self.k, "ks": self.ks.tolist(), "log_w": self.log_w.tolist(),
                "log_w_ref": self.log_w_ref.tolist(), "sd": self.sd.tolist(),
                "gap": self.gap.tolist(), "num_refs": self.num_refs,
                "degenerate": self.degenerate, "rule": self.rule}


def gap_statistic(d_real, references, k_max, n_jobs=1):
    """Gap curve from a real dissimilarity matrix and reference matrices.

    ``k`` is the smallest value with ``Gap(k) >= Gap(k+1) - s(k+1)``; the
    argmax of the curve is used when no ``k`` satisfies it.
    """
    dv = _values(d_real)
    n = dv.shape[0]
    if not 1 <= k_max < n:
        raise ValueError(f"k_max={k_max} must satisfy 1 <= k_max < n={n}")
    references = list(references)
    if not references:
        raise ValueError("at least one reference matrix is needed")
    ks = np.arange(1, k_max + 1)
    if not np.any(dv > 0):
        nan = np.full(k_max, np.nan)
        return GapResult(1, ks, nan, nan, nan, nan, len(references), degenerate=True)
    log_w = _log_dispersions(dv, k_max)
    ref = np.array(pmap(lambda r: _log_dispersions(_values(r), k_max), references, n_jobs))
    b = ref.shape[0]
    log_w_ref = ref.mean(axis=0)
    sd = ref.std(axis=0) * np.sqrt(1.0 + 1.0 / b)
    gap = log_w_ref - log_w
    k, rule = None, "one-se"
    for i in range(k_max - 1):
        if gap[i] >= gap[i + 1] - sd[i + 1]:
            k = i + 1
            break
    if k is None:
        k, rule = int(np.argmax(gap)) + 1, "argmax"
    return GapResult(int(k), ks, log_w, log_w_ref, sd, gap, b, rule=rule)


def uniform_reference_dissimilarities(d_real, num_refs, seed=None):
    """Cheap references: symmetric matrices with iid uniform off-diagonal
    entries over the range of the real off-diagonal dissimilarities."""
    dv = _values(d_real)
    n = dv.shape[0]
    iu = np.triu_indices(n, 1)
    lo, hi = dv[iu].min(), dv[iu].max()
    out = []
    for child in np.random.SeedSequence(seed).spawn(num_refs):
        r = np.zeros((n, n))
        r[iu] = np.random.default_rng(child).uniform(lo, hi, size=len(iu[0]))
        out.append(r + r.T)
    return out


def reference_panel(values, rng):
    """Uniform series spanning, at each date, the cross-asset range of ``values``."""
    values = np.asarray(values, dtype=float)
    lo = values.min(axis=1, keepdims=True)
    hi = values.max(axis=1, keepdims=True)
    return lo + (hi - lo) * rng.random(values.shape)


def wavelet_reference_dissimilarities(values, assets, grid, num_refs, seed=None,
                                      params=MorletParams(), bands=DEFAULT_BANDS, windows=None,
                                      coi_policy="include", smoothing=SmoothingParams(),
                                      n_jobs=1):
    """Full references: each replicate panel goes through the wavelet pipeline.

    Returns ``{(window_label, band_label): [reference matrices]}``.
    """
    children = np.random.SeedSequence(seed).spawn(num_refs)

    def one(child):
        panel = reference_panel(values, np.random.default_rng(child))
        mats = band_matrices(panel, assets, grid, params, bands, windows, coi_policy, smoothing)
        return {(bm.window_label, bm.band.label): dissimilarity_matrix(bm).values for bm in mats}

    out = {}
    for rep in pmap(one, children, n_jobs):
        for key, mat in rep.items():
            out.setdefault(key, []).append(mat)
    return out


def gap_select_k(panel_values, d_real, k_max, num_refs=50, seed=None, mode="full", grid=None,
                 params=MorletParams(), band=DEFAULT_BANDS[0], window=None,
                 coi_policy="include", smoothing=SmoothingParams(), n_jobs=1):
    """Choose the number of clusters for one (band, window).

    ``mode='full'`` pushes ``num_refs`` uniform reference panels through the
    wavelet pipeline; ``mode='cheap'`` draws uniform dissimilarity matrices.
    """
    if num_refs < 1:
        raise ValueError("num_refs must be >= 1")
    if mode == "cheap":
        refs = uniform_reference_dissimilarities(d_real, num_refs, seed)
    elif mode == "full":
        if grid is None:
            raise ValueError("full reference mode needs the scale grid")
        assets = tuple(getattr(d_real, "assets", range(_values(d_real).shape[0])))
        windows = {"w": window}
        refs = wavelet_reference_dissimilarities(
            panel_values, assets, grid, num_refs, seed, params, (band,), windows,
            coi_policy, smoothing, n_jobs)[("w", band.label)]
    else:
        raise ValueError(f"unknown reference mode {mode!r}")
    return gap_statistic(d_real, refs, k_max, n_jobs).k
