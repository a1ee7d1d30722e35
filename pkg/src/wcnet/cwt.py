"""Morlet continuous wavelet transform on a dyadic scale grid."""

from dataclasses import dataclass, field

import numpy as np
from scipy import fft as sp_fft


@dataclass(frozen=True)
class ScaleGrid:
    """Dyadic scale grid ``s_j = s0 * 2**(j / voices_per_octave)``.

    Scales are in the time unit of ``dt`` (days for daily data).
    """

    s0: float
    voices_per_octave: int
    num_scales: int
    dt: float = 1.0

    def __post_init__(self):
        if self.num_scales < 1:
            raise ValueError("empty scale grid")
        if self.voices_per_octave < 1:
            raise ValueError("voices_per_octave must be >= 1")
        if self.s0 <= 0 or self.dt <= 0:
            raise ValueError("s0 and dt must be positive")

    @property
    def log_scales(self):
        return np.log2(self.s0) + np.arange(self.num_scales) / self.voices_per_octave

    @property
    def scales(self):
        return 2.0 ** self.log_scales

    @property
    def dk(self):
        """Spacing of the grid in octaves."""
        return 1.0 / self.voices_per_octave

    def to_dict(self):
        return {
            "s0": self.s0,
            "voices_per_octave": self.voices_per_octave,
            "num_scales": self.num_scales,
            "dt": self.dt,
        }


@dataclass(frozen=True)
class MorletParams:
    omega0: float = 6.0

    def __post_init__(self):
        if not self.omega0 > 0:
            raise ValueError("omega0 must be positive")

    @property
    def fourier_factor(self):
        """Ratio between Fourier period and scale."""
        return 4 * np.pi / (self.omega0 + np.sqrt(2 + self.omega0**2))


@dataclass(frozen=True, eq=False)
class CwtField:
    """Wavelet coefficients of one series, shape ``(n_times, num_scales)``."""

    coefficients: np.ndarray
    grid: ScaleGrid
    coi: np.ndarray = field(repr=False)

    @property
    def n_times(self):
        return self.coefficients.shape[0]

    @property
    def power(self):
        return np.abs(self.coefficients) ** 2


def make_scale_grid(n, dt=1.0, voices=12, s0=None, s_max=None):
    """Build the dyadic grid spanning ``[s0, s_max]``.

    Defaults are ``s0 = 2 dt`` and ``s_max = n dt / 3``. The number of scales is
    ``floor(voices * log2(s_max / s0)) + 1`` so the last scale never exceeds
    ``s_max``.
    """
    s0 = 2.0 * dt if s0 is None else float(s0)
    s_max = n * dt / 3.0 if s_max is None else float(s_max)
    if voices < 1:
        raise ValueError("voices must be >= 1")
    if s0 < 2.0 * dt * (1 - 1e-12):
        raise ValueError(f"s0={s0} is below the Nyquist limit 2*dt={2 * dt}")
    if s_max > n * dt / 2.0 * (1 + 1e-12):
        raise ValueError(f"s_max={s_max} exceeds half the record length {n * dt / 2}")
    if s_max < s0:
        raise ValueError("empty scale grid: s_max < s0")
    # tiny slack so that exact powers of two are kept despite rounding in log2
    num = int(np.floor(voices * np.log2(s_max / s0) + 1e-9)) + 1
    return ScaleGrid(s0=s0, voices_per_octave=int(voices), num_scales=num, dt=float(dt))


def morlet_fourier(omega, scale, params=MorletParams(), dt=1.0):
    """Fourier transform of the Morlet daughter wavelet at ``scale``.

    Uses the L2 normalisation ``sqrt(2 pi s / dt)``; zero for ``omega <= 0``.
    """
    omega = np.asarray(omega, dtype=float)
    scale = np.asarray(scale, dtype=float)
    norm = np.pi ** -0.25 * np.sqrt(2 * np.pi * scale / dt)
    gauss = np.exp(-0.5 * (scale * omega - params.omega0) ** 2)
    return np.where(omega > 0, norm * gauss, 0.0)


def cone_of_influence(n, dt=1.0):
    """Largest trustworthy scale at each time, from the e-folding time ``sqrt(2) s``."""
    if n < 2:
        raise ValueError("cone_of_influence needs n >= 2")
    u = np.arange(n) * dt
    return np.minimum(u, (n - 1) * dt - u) / np.sqrt(2.0)


def _angular_frequencies(n_fft, dt):
    return 2 * np.pi * sp_fft.fftfreq(n_fft, d=dt)


def cwt(series, grid, params=MorletParams()):
    """Continuous wavelet transform of a real series.

    The series is de-meaned and zero-padded to the next power of two; each
    scale is one inverse FFT. With the ``1/N`` forward convention used here,
    unit-variance white noise has ``E|W|^2 = 1`` at every scale.

    Parameters
    ----------
    series : (n,) array_like
        Real, finite samples spaced ``grid.dt`` apart.
    grid : ScaleGrid
    params : MorletParams

    Returns
    -------
    CwtField
    """
    x = np.asarray(series, dtype=float)
    if x.ndim != 1:
        raise ValueError("series must be one-dimensional")
    n = x.shape[0]
    if n < 8:
        raise ValueError("series must have at least 8 samples")
    if not np.all(np.isfinite(x)):
        raise ValueError("series contains non-finite values")

    n_fft = 1 << int(np.ceil(np.log2(n)))
    x_hat = sp_fft.fft(x - x.mean(), n=n_fft) / n_fft
    omega = _angular_frequencies(n_fft, grid.dt)
    daughters = morlet_fourier(omega[None, :], grid.scales[:, None], params, grid.dt)
    coeffs = sp_fft.ifft(x_hat[None, :] * daughters, axis=1) * n_fft
    return CwtField(
        coefficients=np.ascontiguousarray(coeffs[:, :n].T),
        grid=grid,
        coi=cone_of_influence(n, grid.dt),
    )
