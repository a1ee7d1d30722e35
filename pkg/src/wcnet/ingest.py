"""Price panels, log-returns and the descriptive statistics table."""

from dataclasses import dataclass
import datetime as dt
import logging

import numpy as np
import pandas as pd

log = logging.getLogger(__name__)


class DataError(ValueError):
    """Input data cannot be used (unreadable, unparseable or too short)."""


@dataclass(frozen=True, eq=False)
class PriceTable:
    dates: np.ndarray  # datetime64[D], strictly increasing
    assets: tuple
    values: np.ndarray  # (n_dates, n_assets), NaN marks a missing cell

    def __post_init__(self):
        if len(set(self.assets)) != len(self.assets):
            raise DataError("duplicate asset identifiers")
        if self.values.shape != (len(self.dates), len(self.assets)):
            raise DataError("values shape does not match dates x assets")
        if len(self.dates) > 1 and not np.all(np.diff(self.dates) > np.timedelta64(0, "D")):
            raise DataError("dates must be strictly increasing")

    @property
    def missing(self):
        return ~np.isfinite(self.values)


@dataclass(frozen=True, eq=False)
class ReturnPanel:
    dates: np.ndarray
    assets: tuple
    values: np.ndarray
    dt: float = 1.0

    @property
    def n_obs(self):
        return self.values.shape[0]

    def to_frame(self):
        return pd.DataFrame(self.values, index=pd.DatetimeIndex(self.dates, name="date"),
                            columns=list(self.assets))


def load_price_table(path, date_column="date", date_format=None, delimiter=","):
    """Read a delimited price file with a header row and one date column.

    Non-numeric cells become NaN (missing). Rows are sorted by date; a
    duplicated date is an error.
    """
    try:
        frame = pd.read_csv(path, sep=delimiter, dtype=str, keep_default_na=False)
    except (OSError, pd.errors.ParserError, UnicodeDecodeError) as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if date_column not in frame.columns:
        raise DataError(f"{path}: no date column {date_column!r}")
    try:
        dates = pd.to_datetime(frame[date_column].str.strip(), format=date_format or "ISO8601")
    except (ValueError, TypeError) as exc:
        raise DataError(f"{path}: unparseable date ({exc})") from exc
    if len(frame) < 2:
        raise DataError(f"{path}: fewer than 2 rows")
    assets = tuple(c.strip() for c in frame.columns if c != date_column)
    prices = frame.drop(columns=[date_column]).apply(pd.to_numeric, errors="coerce")
    order = np.argsort(dates.values, kind="stable")
    days = dates.values[order].astype("datetime64[D]")
    if np.any(np.diff(days) == np.timedelta64(0, "D")):
        raise DataError(f"{path}: duplicated date")
    values = prices.to_numpy(dtype=float)[order]
    n_missing = int((~np.isfinite(values)).sum())
    if n_missing:
        log.info("%s: %d missing cells", path, n_missing)
    return PriceTable(days, assets, values)


def align_and_clean(table):
    """Drop every date with a missing or non-positive price."""
    with np.errstate(invalid="ignore"):
        keep = np.all(np.isfinite(table.values) & (table.values > 0), axis=1)
    if keep.sum() < 2:
        raise DataError("fewer than 2 complete rows after cleaning")
    dropped = int((~keep).sum())
    if dropped:
        log.info("dropped %d incomplete rows", dropped)
    return PriceTable(table.dates[keep], table.assets, table.values[keep])


def log_returns(table, scale=1.0, dt=1.0):
    """``scale * ln(P[t+1] / P[t])``, dated at the later observation."""
    if not scale > 0:
        raise ValueError("scale must be positive")
    with np.errstate(divide="ignore", invalid="ignore"):
        values = scale * np.diff(np.log(table.values), axis=0)
    if not np.all(np.isfinite(values)):
        raise DataError("non-finite returns; clean the price table first")
    return ReturnPanel(table.dates[1:], table.assets, values, dt)


def _as_day(value):
    if isinstance(value, str):
        value = dt.date.fromisoformat(value)
    return np.datetime64(value, "D")


def slice_period(panel, start, end):
    """Rows with ``start <= date <= end`` (both inclusive)."""
    start, end = _as_day(start), _as_day(end)
    if start > end:
        raise ValueError("slice_period: start after end")
    keep = (panel.dates >= start) & (panel.dates <= end)
    if not keep.any():
        raise DataError(f"no observations between {start} and {end}")
    return ReturnPanel(panel.dates[keep], panel.assets, panel.values[keep], panel.dt)


@dataclass(frozen=True, eq=False)
class StatsTable:
    assets: tuple
    mean: np.ndarray
    std: np.ndarray
    skewness: np.ndarray
    kurtosis: np.ndarray
    jarque_bera: np.ndarray
    n_obs: int

    def to_frame(self):
        return pd.DataFrame(
            {"mean": self.mean, "std": self.std, "skewness": self.skewness,
             "kurtosis": self.kurtosis, "jarque_bera": self.jarque_bera},
            index=pd.Index(self.assets, name="asset"),
        )


def descriptive_stats(panel):
    """Mean, sample std, skewness, raw kurtosis and Jarque-Bera per asset.

    Skewness is ``m3 / m2**1.5`` and kurtosis ``m4 / m2**2`` with biased central
    moments; JB uses excess kurtosis. Zero-variance assets get NaN for the
    shape statistics.
    """
    x = np.asarray(panel.values, dtype=float)
    n = x.shape[0]
    if n < 8:
        raise DataError("descriptive_stats needs at least 8 observations")
    mean = x.mean(axis=0)
    dev = x - mean
    m2 = np.mean(dev**2, axis=0)
    m3 = np.mean(dev**3, axis=0)
    m4 = np.mean(dev**4, axis=0)
    # rounding in the mean leaves constant series with a tiny non-zero m2
    degenerate = (m2 == 0) | (m2 <= (1e-12 * np.abs(mean)) ** 2)
    std = np.where(degenerate, 0.0, np.sqrt(m2 * n / (n - 1)))
    safe = np.where(degenerate, 1.0, m2)
    skew = np.where(degenerate, np.nan, m3 / safe**1.5)
    kurt = np.where(degenerate, np.nan, m4 / safe**2)
    jb = n / 6.0 * (skew**2 + (kurt - 3.0) ** 2 / 4.0)
    return StatsTable(tuple(panel.assets), mean, std, skew, kurt, jb, n)


def pearson_matrix(panel):
    """Pearson correlation matrix; rows/columns of zero-variance assets are NaN."""
    x = np.asarray(panel.values, dtype=float)
    if x.shape[0] < 2:
        raise DataError("pearson_matrix needs at least 2 observations")
    dev = x - x.mean(axis=0)
    norms = np.sqrt(np.sum(dev**2, axis=0))
    ok = norms > 1e-12 * np.sqrt(x.shape[0]) * np.abs(x.mean(axis=0))
    ok &= norms > 0
    z = np.where(ok, dev / np.where(ok, norms, 1.0), np.nan)
    corr = np.clip(z.T @ z, -1.0, 1.0)
    corr = 0.5 * (corr + corr.T)
    np.fill_diagonal(corr, np.where(ok, 1.0, np.nan))
    return corr


def write_matrix(path, matrix, labels, fmt="%.10g", delimiter=","):
    """Write a labelled square matrix as delimited text (NaN written empty)."""
    frame = pd.DataFrame(np.asarray(matrix), index=pd.Index(labels, name="asset"),
                         columns=list(labels))
    frame.to_csv(path, sep=delimiter, float_format=fmt, na_rep="", lineterminator="\n")
