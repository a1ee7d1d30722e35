import math

import numpy as np
import pytest

from wcnet.cwt import (MorletParams, ScaleGrid, cone_of_influence, cwt, make_scale_grid,
                       morlet_fourier)


def test_grid_octaves():
    g = make_scale_grid(1024, dt=1, voices=1, s0=2, s_max=64)
    np.testing.assert_allclose(g.scales, [2, 4, 8, 16, 32, 64])


def test_grid_half_octaves():
    g = make_scale_grid(100, voices=2, s0=2, s_max=8)
    r2 = math.sqrt(2)
    np.testing.assert_allclose(g.scales, [2, 2 * r2, 4, 4 * r2, 8])
    np.testing.assert_allclose(np.diff(g.log_scales), 0.5)


def test_grid_defaults_cover_ten_years():
    g = make_scale_grid(2541)
    assert g.scales[0] == 2.0
    assert g.scales[-1] >= 512
    assert g.scales[-1] <= 2541 / 3
    assert np.all(np.diff(g.scales) > 0)
    assert g.num_scales == math.floor(12 * math.log2((2541 / 3) / 2)) + 1


@pytest.mark.parametrize("kwargs", [dict(s0=1.0), dict(s_max=600.0), dict(voices=0),
                                    dict(s0=50.0, s_max=40.0)])
def test_grid_errors(kwargs):
    with pytest.raises(ValueError):
        make_scale_grid(1000, **kwargs)


def test_morlet_fourier_shape():
    p = MorletParams()
    s = 8.0
    peak = morlet_fourier(p.omega0 / s, s, p)
    assert peak == pytest.approx(np.pi ** -0.25 * math.sqrt(2 * np.pi * s))
    assert morlet_fourier(0.0, s, p) == 0.0
    assert morlet_fourier(-1.0, s, p) == 0.0
    for sw in (p.omega0 - 1, p.omega0 + 1):
        assert morlet_fourier(sw / s, s, p) / peak == pytest.approx(math.exp(-0.5))


def test_fourier_factor():
    assert 1 / MorletParams().fourier_factor * 32 == pytest.approx(30.98, abs=0.01)
    assert MorletParams().fourier_factor == pytest.approx(1.033, abs=1e-3)


def test_coi():
    coi = cone_of_influence(101)
    assert coi[0] == 0 and coi[-1] == 0
    assert coi[50] == pytest.approx(50 / math.sqrt(2))
    np.testing.assert_array_equal(coi, coi[::-1])


def test_white_noise_power_is_scale_independent():
    g = make_scale_grid(4096, s0=4, s_max=64, voices=4)
    x = np.random.default_rng(0).standard_normal(4096)
    power = cwt(x, g).power[300:-300].mean(axis=0)
    np.testing.assert_allclose(power, 1.0, atol=0.25)


def test_constant_gives_zero():
    g = make_scale_grid(256)
    w = cwt(np.full(256, 7.5), g)
    assert np.abs(w.coefficients).max() < 1e-8 * 7.5


def test_linearity(rng):
    g = make_scale_grid(300)
    x, y = rng.standard_normal((2, 300))
    wx, wy, wxy = cwt(x, g), cwt(y, g), cwt(x + y, g)
    scale = np.abs(wxy.coefficients).max()
    assert np.abs(wxy.coefficients - wx.coefficients - wy.coefficients).max() < 1e-8 * scale
    np.testing.assert_allclose(cwt(-2.5 * x, g).coefficients, -2.5 * wx.coefficients,
                               rtol=1e-10, atol=1e-12 * scale)


def test_translation_covariance(rng):
    n, m = 512, 7
    z = rng.standard_normal(n + m)
    g = make_scale_grid(n, s0=2, s_max=32)
    wa = cwt(z[:n], g).coefficients
    wb = cwt(z[m:m + n], g).coefficients  # wb[t] ~ wa[t + m]
    u = np.arange(n - m)
    ref = np.abs(wa).max()
    # far from both ends (6 scales of margin) the Gaussian tail is below 1e-6;
    # below 4 samples the Morlet spectrum is clipped at Nyquist and rings
    for j, s in enumerate(g.scales):
        if s < 4:
            continue
        keep = (u >= 6 * s + m) & (u <= n - 1 - m - 6 * s)
        if keep.any():
            diff = np.abs(wb[u[keep], j] - wa[u[keep] + m, j]).max()
            assert diff < 1e-6 * ref, (s, diff)


def test_sinusoid_scale_localisation():
    n, period = 1024, 32.0
    g = make_scale_grid(n)
    x = np.cos(2 * np.pi * np.arange(n) / period)
    w = cwt(x, g)
    inside = w.grid.scales[None, :] <= w.coi[:, None]
    mean_power = np.array([w.power[inside[:, j], j].mean() for j in range(g.num_scales)])
    top = int(np.argmax(mean_power))
    expected = period * (6 + math.sqrt(38)) / (4 * np.pi)  # 30.98
    assert abs(g.log_scales[top] - math.log2(expected)) <= g.dk
    assert np.all(np.diff(mean_power[:top + 1]) > 0)
    floor = 1e-12 * mean_power[top]
    assert np.all(np.diff(mean_power[top:]) < floor)


def test_cwt_errors():
    g = make_scale_grid(64)
    with pytest.raises(ValueError):
        cwt(np.ones(5), g)
    x = np.ones(64)
    x[3] = np.nan
    with pytest.raises(ValueError):
        cwt(x, g)


def test_grid_dataclass_validation():
    with pytest.raises(ValueError):
        ScaleGrid(2.0, 12, 0)
