import numpy as np
import pandas as pd
import pytest

_ACCEPTANCE = []


def record(criterion, passed, detail=""):
    _ACCEPTANCE.append((criterion, bool(passed), detail))
    return bool(passed)


@pytest.fixture
def check():
    """Record an acceptance line, then assert it."""
    def _check(criterion, passed, detail=""):
        record(criterion, passed, detail)
        assert passed, f"{criterion}: {detail}"
    return _check


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, passed, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {criterion}  {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def write_prices(path, n=400, n_groups=2, per_group=3, seed=0, start="2019-01-01"):
    """Synthetic business-day price file with block-correlated assets."""
    r = np.random.default_rng(seed)
    dates = pd.bdate_range(start, periods=n)
    factors = r.standard_normal((n, n_groups))
    cols = np.repeat(np.arange(n_groups), per_group)
    rets = 0.01 * factors[:, cols] + 0.01 * r.standard_normal((n, cols.size))
    prices = 100 * np.exp(np.cumsum(rets, axis=0))
    names = [f"A{i:02d}" for i in range(cols.size)]
    frame = pd.DataFrame(prices, columns=names)
    frame.insert(0, "date", dates.strftime("%Y-%m-%d"))
    frame.to_csv(path, index=False)
    return path


@pytest.fixture
def price_file(tmp_path):
    return write_prices(tmp_path / "prices.csv")
