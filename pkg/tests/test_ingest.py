import datetime as dt
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra import numpy as hnp

from wcnet.ingest import (DataError, PriceTable, ReturnPanel, align_and_clean, descriptive_stats,
                          load_price_table, log_returns, pearson_matrix, slice_period)


def _table(values, start="2020-01-01"):
    values = np.asarray(values, dtype=float)
    dates = np.datetime64(start) + np.arange(values.shape[0])
    return PriceTable(dates, tuple(f"a{i}" for i in range(values.shape[1])), values)


def test_load_small_csv(tmp_path):
    path = tmp_path / "p.csv"
    path.write_text("date,X,Y\n2020-01-03,1,2\n2020-01-01,3,4\n2020-01-02,5,6\n")
    table = load_price_table(path)
    assert table.assets == ("X", "Y")
    assert len(table.dates) == 3
    assert str(table.dates[0]) == "2020-01-01"
    np.testing.assert_array_equal(table.values[:, 0], [3, 5, 1])


def test_blank_cell_is_missing(tmp_path):
    path = tmp_path / "p.csv"
    path.write_text("date,X,Y\n2020-01-01,1,\n2020-01-02,5,6\n2020-01-03,n/a,6\n")
    table = load_price_table(path)
    assert table.missing.sum() == 2
    assert table.missing[0, 1] and table.missing[2, 0]


def test_custom_date_format_and_delimiter(tmp_path):
    path = tmp_path / "p.csv"
    path.write_text("day;X\n13/10/2010;1\n14/10/2010;2\n")
    table = load_price_table(path, date_column="day", date_format="%d/%m/%Y", delimiter=";")
    assert str(table.dates[0]) == "2010-10-13"


@pytest.mark.parametrize("text", [
    "date,X\n2020-01-01,1\n",  # one row
    "date,X\nnot-a-date,1\n2020-01-02,2\n",
    "day,X\n2020-01-01,1\n2020-01-02,2\n",  # no date column
])
def test_load_errors(tmp_path, text):
    path = tmp_path / "p.csv"
    path.write_text(text)
    with pytest.raises(DataError):
        load_price_table(path)


def test_load_missing_file(tmp_path):
    with pytest.raises(DataError):
        load_price_table(tmp_path / "nope.csv")


def test_decade_date_span_is_consistent():
    # a 2010-2020 daily sample: 2541 returns need 2542 prices; one business-day row per date
    dates = np.arange(np.datetime64("2010-10-13"), np.datetime64("2020-11-14"))
    weekdays = dates[np.is_busday(dates)]
    prices = np.exp(np.cumsum(np.full((2542, 2), 1e-3), axis=0))
    table = PriceTable(weekdays[:2542], ("a", "b"), prices)
    assert log_returns(table).n_obs == 2541


def test_clean_identity():
    t = _table([[1, 2], [3, 4], [5, 6]])
    c = align_and_clean(t)
    np.testing.assert_array_equal(c.values, t.values)
    np.testing.assert_array_equal(c.dates, t.dates)


def test_clean_drops_missing_and_nonpositive():
    t = _table([[1, 2], [3, np.nan], [5, 6], [7, 8], [9, 10]])
    assert align_and_clean(t).values.shape[0] == 4
    t = _table([[1, 2], [0, 4], [5, 6]])
    c = align_and_clean(t)
    assert c.values.shape[0] == 2
    np.testing.assert_array_equal(c.values[:, 0], [1, 5])


def test_clean_too_short():
    with pytest.raises(DataError):
        align_and_clean(_table([[1, np.nan], [3, 4]]))


def test_log_returns_examples():
    r = log_returns(_table([[100, 100], [100, 100 * math.e]]))
    assert r.values[0, 0] == 0.0
    assert r.values[0, 1] == pytest.approx(1.0, abs=1e-14)
    r = log_returns(_table([[100], [105]]), scale=100)
    # 100 * ln(1.05) by hand: 4.8790164169432...
    assert r.values[0, 0] == pytest.approx(4.879016416943205, rel=1e-12)
    assert r.dates[0] == np.datetime64("2020-01-02")


@settings(max_examples=50, deadline=None)
@given(hnp.arrays(float, (20, 3), elements=st.floats(0.5, 2000.0)),
       st.floats(0.1, 100.0))
def test_log_returns_round_trip(prices, scale):
    panel = log_returns(_table(prices), scale=scale)
    rebuilt = prices[0] * np.exp(np.cumsum(panel.values / scale, axis=0))
    np.testing.assert_allclose(rebuilt, prices[1:], rtol=1e-10)


def _panel(values, start="2020-01-01"):
    values = np.asarray(values, dtype=float)
    dates = np.datetime64(start) + np.arange(values.shape[0])
    return ReturnPanel(dates, tuple(f"a{i}" for i in range(values.shape[1])), values)


def test_slice_period():
    panel = _panel(np.arange(20.0).reshape(10, 2), start="2019-12-27")
    full = slice_period(panel, panel.dates[0].item(), panel.dates[-1].item())
    np.testing.assert_array_equal(full.values, panel.values)
    covid = slice_period(panel, dt.date(2020, 1, 1), "2020-11-13")
    assert str(covid.dates[0]) == "2020-01-01"
    assert covid.n_obs == 5
    with pytest.raises(DataError):
        slice_period(panel, "2021-01-01", "2021-02-01")
    with pytest.raises(ValueError):
        slice_period(panel, "2020-02-01", "2020-01-01")


def test_stats_constant_series():
    stats = descriptive_stats(_panel(np.column_stack([np.full(20, 0.3), np.arange(20.0)])))
    assert stats.std[0] == 0.0
    assert np.isnan(stats.skewness[0]) and np.isnan(stats.kurtosis[0])
    assert stats.skewness[1] == pytest.approx(0.0, abs=1e-12)


def test_stats_against_scipy():
    from scipy import stats as ss
    x = np.random.default_rng(3).gamma(2.0, size=(500, 2))
    st_ = descriptive_stats(_panel(x))
    np.testing.assert_allclose(st_.skewness, ss.skew(x, axis=0), rtol=1e-10)
    np.testing.assert_allclose(st_.kurtosis, ss.kurtosis(x, axis=0, fisher=False), rtol=1e-10)
    np.testing.assert_allclose(st_.std, x.std(axis=0, ddof=1), rtol=1e-12)
    jb = [ss.jarque_bera(x[:, i]).statistic for i in range(2)]
    np.testing.assert_allclose(st_.jarque_bera, jb, rtol=1e-10)


def test_stats_needs_eight_rows():
    with pytest.raises(DataError):
        descriptive_stats(_panel(np.ones((7, 1))))


@settings(max_examples=40, deadline=None)
@given(st.floats(-50, 50).filter(lambda a: abs(a) > 1e-2), st.floats(-100, 100),
       st.integers(0, 2**32 - 1))
def test_stats_affine(a, b, seed):
    x = np.random.default_rng(seed).standard_exponential((64, 1))
    s1 = descriptive_stats(_panel(x))
    s2 = descriptive_stats(_panel(a * x + b))
    assert s2.std[0] == pytest.approx(abs(a) * s1.std[0], rel=1e-9)
    assert s2.skewness[0] == pytest.approx(np.sign(a) * s1.skewness[0], rel=1e-9, abs=1e-9)
    assert s2.kurtosis[0] == pytest.approx(s1.kurtosis[0], rel=1e-9)


def test_pearson_examples():
    x = np.random.default_rng(0).standard_normal(100)
    c = pearson_matrix(_panel(np.column_stack([x, x, -x, np.full(100, 2.0)])))
    assert c[0, 1] == pytest.approx(1.0)
    assert c[0, 2] == pytest.approx(-1.0)
    assert np.isnan(c[0, 3]) and np.isnan(c[3, 3])


@settings(max_examples=40, deadline=None)
@given(hnp.arrays(float, (30, 4), elements=st.floats(-1e3, 1e3)))
def test_pearson_symmetric_unit_diagonal(values):
    c = pearson_matrix(_panel(values))
    ok = ~np.isnan(np.diag(c))
    np.testing.assert_array_equal(c, c.T)
    assert np.all(np.diag(c)[ok] == 1.0)
    finite = c[np.isfinite(c)]
    assert np.all((finite >= -1) & (finite <= 1))
