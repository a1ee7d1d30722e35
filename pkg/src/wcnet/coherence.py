"""Smoothed wavelet coherence, phase difference and band averages.

Smoothing follows the Torrence & Webster recipe: a Gaussian in time whose
width grows with scale, then a boxcar across neighbouring scales. Time
smoothing is done in Fourier space on a half-sample symmetric extension of
the field, which keeps constants constant and conserves mass.
"""

from dataclasses import dataclass, field
from itertools import combinations
import logging
import math

import numpy as np
from scipy import fft as sp_fft

from . import _kernels
from .cwt import MorletParams, ScaleGrid, cone_of_influence, cwt

log = logging.getLogger(__name__)

POWER_FLOOR = 1e-300


@dataclass(frozen=True)
class SmoothingParams:
    """Widths of the smoothing operator.

    time_factor
        Standard deviation of the time Gaussian, as a multiple of the scale.
        1 matches the modulus of the Morlet envelope.
    truncate
        Gaussian support in standard deviations.
    scale_window
        Boxcar width across scales, in octaves.
    scale_taps
        How the boxcar is sampled on the grid. ``"points"`` follows the widely
        used wtc/biwavelet kernel (``2*round(h)-1`` unit taps plus two end taps
        of ``h mod 1``, ``h`` the half-width in grid steps); ``"cells"`` gives
        each scale the overlap of its cell with the window.
    """

    time_factor: float = 1.0
    truncate: float = 4.0
    scale_window: float = 0.6
    scale_taps: str = "points"

    def __post_init__(self):
        if self.time_factor <= 0 or self.truncate <= 0 or self.scale_window < 0:
            raise ValueError("smoothing widths must be positive")
        if self.scale_taps not in ("points", "cells"):
            raise ValueError(f"unknown scale_taps {self.scale_taps!r}")


def scale_kernel(grid, width_octaves, taps="points"):
    """Normalized boxcar of ``width_octaves`` across scales."""
    if taps == "points":
        steps = 0.5 * width_octaves * grid.voices_per_octave
        n_unit = 2 * int(math.floor(steps + 0.5)) - 1
        if n_unit < 1:
            return np.array([1.0])
        frac = steps % 1.0
        w = np.concatenate(([frac], np.ones(n_unit), [frac]))
        return w / w.sum()
    if taps != "cells":
        raise ValueError(f"unknown scale_taps {taps!r}")
    half = 0.5 * width_octaves * grid.voices_per_octave
    m = int(math.ceil(half - 0.5)) if half > 0.5 else 0
    offsets = np.arange(-m, m + 1)
    w = np.clip(half + 0.5 - np.abs(offsets), 0.0, 1.0)
    if w.sum() == 0:
        w = np.array([1.0])
    return w / w.sum()


class Smoother:
    """Smoothing operator for fields of ``n`` times on ``grid``.

    Kernel spectra are built once; the object can be reused across many
    fields of the same shape (pairs, Monte Carlo replicates).
    """

    def __init__(self, grid, n, params=SmoothingParams()):
        self.grid = grid
        self.n = int(n)
        self.params = params
        sigma = params.time_factor * grid.scales / grid.dt  # in samples
        halves = np.minimum(np.ceil(params.truncate * sigma), 10 * self.n).astype(int)
        # one FFT size per octave of scales so small scales are not padded for large ones
        self._groups = []
        step = grid.voices_per_octave
        for start in range(0, grid.num_scales, step):
            cols = slice(start, min(start + step, grid.num_scales))
            pad = int(halves[cols].max())
            n_fft = sp_fft.next_fast_len(self.n + 2 * pad)
            kern = np.zeros((n_fft, cols.stop - cols.start))
            for j, (sd, h) in enumerate(zip(sigma[cols], halves[cols])):
                taps = np.arange(-h, h + 1)
                g = np.exp(-0.5 * (taps / sd) ** 2)
                kern[taps % n_fft, j] = g / g.sum()
            # symmetric kernels: the spectra are real
            self._groups.append((cols, pad, n_fft,
                                 sp_fft.rfft(kern, axis=0).real,
                                 sp_fft.fft(kern, axis=0).real))
        self._scale_kernel = scale_kernel(grid, params.scale_window, params.scale_taps)

    def smooth_time(self, values):
        values = np.asarray(values)
        if values.shape != (self.n, self.grid.num_scales):
            raise ValueError(
                f"field shape {values.shape} does not match ({self.n}, {self.grid.num_scales})"
            )
        is_complex = np.iscomplexobj(values)
        out = np.empty(values.shape, dtype=complex if is_complex else float)
        for cols, pad, n_fft, k_half, k_full in self._groups:
            padded = np.pad(values[:, cols], ((pad, pad), (0, 0)), mode="symmetric")
            if is_complex:
                res = sp_fft.ifft(sp_fft.fft(padded, n=n_fft, axis=0) * k_full, axis=0)
            else:
                res = sp_fft.irfft(sp_fft.rfft(padded, n=n_fft, axis=0) * k_half, n=n_fft, axis=0)
            out[:, cols] = res[pad:pad + self.n]
        return out

    def smooth_scale(self, values):
        return _kernels.convolve_scales(np.ascontiguousarray(values), self._scale_kernel)

    def __call__(self, values):
        return self.smooth_scale(self.smooth_time(values))


def smooth(values, grid, params=SmoothingParams()):
    """Apply the time-then-scale smoothing operator to a ``(time, scale)`` field."""
    values = np.asarray(values)
    return Smoother(grid, values.shape[0], params)(values)


@dataclass(frozen=True, eq=False)
class CoherenceField:
    r2: np.ndarray
    phase: np.ndarray
    r2_xy_oriented: np.ndarray
    r2_yx_oriented: np.ndarray
    grid: ScaleGrid
    coi: np.ndarray = field(repr=False)
    n_undefined: int = 0


def cross_wavelet(wx, wy):
    """Cross-wavelet transform ``Wx * conj(Wy)``."""
    if wx.grid != wy.grid or wx.coefficients.shape != wy.coefficients.shape:
        raise ValueError("cross_wavelet needs fields on the same grid and length")
    return wx.coefficients * np.conj(wy.coefficients)


def _scaled_power(w):
    return w.power / w.grid.scales[None, :]


def _coherence_from_smoothed(cross_s, power_x_s, power_y_s, grid, coi):
    r2, phase, r2_xy, r2_yx, n_zero = _kernels.oriented_coherence(
        np.ascontiguousarray(cross_s), power_x_s, power_y_s, POWER_FLOOR
    )
    if n_zero:
        log.debug("%d cells with zero smoothed power set to r2=0", n_zero)
    return CoherenceField(r2, phase, r2_xy, r2_yx, grid, coi, n_undefined=n_zero)


def orient(r2, phase):
    """Split squared coherence into ``(R2 x->y, R2 y->x)`` given the phase.

    The leading side keeps ``r2``, the lagging side gets ``r2 * |cos(phase)|``.
    ``phase = +-pi/2`` (the float nearest to it) zeroes the lagging side exactly.
    """
    r2 = np.asarray(r2, dtype=float)
    phase = np.asarray(phase, dtype=float)
    cos_abs = np.abs(np.cos(phase))
    # cos(fl(pi/2)) is 6e-17, not 0
    cos_abs = np.where(np.abs(phase) == 0.5 * np.pi, 0.0, cos_abs)
    penalised = r2 * cos_abs
    lead = phase >= 0.0
    return np.where(lead, r2, penalised), np.where(lead, penalised, r2)


def coherence_pair(wx, wy, smoothing=SmoothingParams(), smoother=None):
    """Squared coherence, phase difference and both oriented coherences.

    Positive phase means ``x`` leads ``y``; the lagging direction is scaled
    by ``|cos(phase)|`` cell by cell.
    """
    cross = cross_wavelet(wx, wy) / wx.grid.scales[None, :]
    if smoother is None:
        smoother = Smoother(wx.grid, wx.n_times, smoothing)
    return _coherence_from_smoothed(
        smoother(cross),
        smoother(_scaled_power(wx)),
        smoother(_scaled_power(wy)),
        wx.grid,
        wx.coi,
    )


# -- band averaging ----------------------------------------------------------


@dataclass(frozen=True)
class FrequencyBand:
    """Scale interval in time units; ``s_hi=inf`` runs to the top of the grid."""

    label: str
    s_lo: float
    s_hi: float = math.inf

    def __post_init__(self):
        if not self.s_lo < self.s_hi:
            raise ValueError(f"band {self.label!r}: s_lo must be below s_hi")
        if self.s_lo <= 0:
            raise ValueError(f"band {self.label!r}: s_lo must be positive")

    def to_dict(self):
        return {"label": self.label, "s_lo": self.s_lo,
                "s_hi": None if math.isinf(self.s_hi) else self.s_hi}


DEFAULT_BANDS = (
    FrequencyBand("short", 2.0, 5.0),
    FrequencyBand("medium", 5.0, 22.0),
    FrequencyBand("long", 22.0, math.inf),
)


def trapezoid_weights(nodes, a, b):
    """Weights ``w`` with ``sum(w * f) == integral_a^b of the linear interpolant of f``.

    ``nodes`` must be increasing; ``[a, b]`` is clipped to the node range.
    """
    x = np.asarray(nodes, dtype=float)
    w = np.zeros_like(x)
    lo_all = max(a, x[0])
    hi_all = min(b, x[-1])
    if x.size == 1:
        return w
    h = np.diff(x)
    lo = np.clip(lo_all, x[:-1], x[1:])
    hi = np.clip(hi_all, x[:-1], x[1:])
    t_lo = (lo - x[:-1]) / h
    t_hi = (hi - x[:-1]) / h
    active = hi > lo
    sq = 0.5 * (t_hi**2 - t_lo**2)
    left = np.where(active, h * ((t_hi - t_lo) - sq), 0.0)
    right = np.where(active, h * sq, 0.0)
    w[:-1] += left
    w[1:] += right
    return w


def band_weights(grid, coi, band, window=None, coi_policy="include"):
    """Normalised cell weights for a band/time-window average.

    Integration runs over time ``u`` and log-scale ``k = log2 s``. With
    ``coi_policy='exclude'`` cells above the cone of influence get zero weight
    and the normalising area shrinks with them.
    """
    n = coi.shape[0]
    times = np.arange(n) * grid.dt
    u1, u2 = (times[0], times[-1]) if window is None else window
    k = grid.log_scales
    k1 = math.log2(band.s_lo)
    k2 = math.log2(band.s_hi) if math.isfinite(band.s_hi) else k[-1]
    if min(k2, k[-1]) - max(k1, k[0]) <= 0:
        raise ValueError(f"band {band.label!r} does not intersect the scale grid")
    if min(u2, times[-1]) - max(u1, times[0]) <= 0:
        raise ValueError(f"window {window} does not intersect the sample")
    w = np.outer(trapezoid_weights(times, u1, u2), trapezoid_weights(k, k1, k2))
    if coi_policy == "exclude":
        w[grid.scales[None, :] > coi[:, None]] = 0.0
    elif coi_policy != "include":
        raise ValueError(f"unknown coi_policy {coi_policy!r}")
    total = w.sum()
    if total <= 0:
        raise ValueError(f"band {band.label!r} is empty after cone-of-influence exclusion")
    return w / total


def band_average(values, grid, band, window=None, coi=None, coi_policy="include"):
    """Mean of a ``(time, scale)`` field over a band and time window.

    ``window`` is ``(u1, u2)`` in time units from the first sample; ``None``
    means the whole record.
    """
    values = np.asarray(values, dtype=float)
    if coi is None:
        coi = cone_of_influence(values.shape[0], grid.dt)
    return float(np.sum(values * band_weights(grid, coi, band, window, coi_policy)))


@dataclass(frozen=True, eq=False)
class BandMatrix:
    """Band/window means for every asset pair.

    ``mean_oriented[x, y]`` is the mean of ``R2_{x->y}``.
    """

    band: FrequencyBand
    window: tuple
    assets: tuple
    mean_r2: np.ndarray
    mean_oriented: np.ndarray
    window_label: str = "full"


def band_matrices(values, assets, grid, params=MorletParams(), bands=DEFAULT_BANDS,
                  windows=None, coi_policy="include", smoothing=SmoothingParams()):
    """Band-averaged coherence matrices for every (band, window).

    Parameters
    ----------
    values : (n, m) array
        Return panel, one column per asset.
    assets : sequence of str
    windows : dict label -> (u1, u2), optional
        Time windows in time units from the first sample. Defaults to the
        whole record under the label ``"full"``.

    Returns
    -------
    list of BandMatrix, ordered window-major then band.
    """
    values = np.asarray(values, dtype=float)
    n, m = values.shape
    if m < 2:
        raise ValueError("band_matrices needs at least two assets")
    if windows is None:
        windows = {"full": None}
    fields = [cwt(values[:, a], grid, params) for a in range(m)]
    coi = fields[0].coi
    smoother = Smoother(grid, n, smoothing)
    powers = [smoother(_scaled_power(f)) for f in fields]
    combos = [(wl, win, band) for wl, win in windows.items() for band in bands]
    weights = [band_weights(grid, coi, band, win, coi_policy) for wl, win, band in combos]
    sym = np.ones((len(combos), m, m))
    ori = np.ones((len(combos), m, m))
    inv_s = 1.0 / grid.scales[None, :]
    for x, y in combinations(range(m), 2):
        cross = smoother(fields[x].coefficients * np.conj(fields[y].coefficients) * inv_s)
        cf = _coherence_from_smoothed(cross, powers[x], powers[y], grid, coi)
        for c, w in enumerate(weights):
            sym[c, x, y] = sym[c, y, x] = np.sum(cf.r2 * w)
            ori[c, x, y] = np.sum(cf.r2_xy_oriented * w)
            ori[c, y, x] = np.sum(cf.r2_yx_oriented * w)
    return [
        BandMatrix(band, None if win is None else tuple(win), tuple(assets),
                   sym[c], ori[c], window_label=wl)
        for c, (wl, win, band) in enumerate(combos)
    ]
