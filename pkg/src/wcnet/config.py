"""Pipeline configuration: YAML file, CLI overrides, validation."""

from dataclasses import dataclass, field, fields, is_dataclass
import datetime as dt
import math
from pathlib import Path
import zlib

import numpy as np
import yaml

from .coherence import FrequencyBand, SmoothingParams


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Period:
    label: str
    start: dt.date
    end: dt.date


CRISIS_PERIODS = (
    Period("sovereign_debt", dt.date(2010, 10, 13), dt.date(2012, 7, 31)),
    Period("oil_collapse", dt.date(2014, 6, 20), dt.date(2016, 2, 28)),
    Period("covid19", dt.date(2020, 1, 1), dt.date(2020, 11, 13)),
)

HORIZON_BANDS = (
    FrequencyBand("short", 2.0, 5.0),
    FrequencyBand("medium", 5.0, 22.0),
    FrequencyBand("long", 22.0, math.inf),
)


@dataclass(frozen=True)
class InputConfig:
    path: str = ""
    date_column: str = "date"
    date_format: str = ""  # empty: ISO-8601
    delimiter: str = ","


@dataclass(frozen=True)
class GridConfig:
    s0: float = 0.0  # 0: two sampling intervals
    s_max: float = 0.0  # 0: a third of the record
    voices: int = 12


@dataclass(frozen=True)
class GapConfig:
    enabled: bool = True
    k_max: int = 6
    num_refs: int = 50
    mode: str = "full"  # full | cheap
    pam_restarts: int = 5  # extra seeded SWAP runs for the final partition


@dataclass(frozen=True)
class ThresholdConfig:
    reps: int = 100
    quantile: float = 0.95
    fixed: float = 0.38  # negative: use the Monte Carlo estimate per band
    pairing: str = "random"


@dataclass(frozen=True)
class PipelineConfig:
    input: InputConfig = field(default_factory=InputConfig)
    return_scale: float = 1.0
    dt: float = 1.0
    grid: GridConfig = field(default_factory=GridConfig)
    omega0: float = 6.0
    smoothing: SmoothingParams = field(default_factory=SmoothingParams)
    bands: tuple = HORIZON_BANDS
    periods: tuple = CRISIS_PERIODS
    coi_policy: str = "include"
    gap: GapConfig = field(default_factory=GapConfig)
    threshold: ThresholdConfig = field(default_factory=ThresholdConfig)
    seed: int = 0
    output_dir: str = "wcnet-out"
    formats: tuple = ("dot", "json", "adjacency")
    dump_power: bool = False
    n_jobs: int = 1


def _band_from(obj):
    if isinstance(obj, FrequencyBand):
        return obj
    if isinstance(obj, str):
        label, lo, hi = obj.split(":")
        obj = {"label": label, "s_lo": lo, "s_hi": hi or None}
    hi = obj.get("s_hi")
    hi = math.inf if hi in (None, "", "inf") else float(hi)
    return FrequencyBand(str(obj["label"]), float(obj["s_lo"]), hi)


def _date(value):
    if isinstance(value, dt.date):
        return value
    return dt.date.fromisoformat(str(value))


def _period_from(obj):
    if isinstance(obj, Period):
        return obj
    if isinstance(obj, str):
        label, start, end = obj.split(":")
        obj = {"label": label, "start": start, "end": end}
    return Period(str(obj["label"]), _date(obj["start"]), _date(obj["end"]))


def _build(cls, data, where):
    if not isinstance(data, dict):
        raise ConfigError(f"{where or 'config'}: expected a mapping")
    known = {f.name: f for f in fields(cls)}
    unknown = set(data) - set(known)
    if unknown:
        raise ConfigError(f"{where or 'config'}: unknown keys {sorted(unknown)}")
    kwargs = {}
    for name, value in data.items():
        key = f"{where}.{name}" if where else name
        default = getattr(cls(), name)
        try:
            if name == "bands":
                kwargs[name] = tuple(_band_from(b) for b in value)
            elif name == "periods":
                kwargs[name] = tuple(_period_from(p) for p in (value or ()))
            elif name == "formats":
                kwargs[name] = tuple(value)
            elif is_dataclass(default):
                kwargs[name] = _build(type(default), value, key)
            elif isinstance(default, bool):
                kwargs[name] = _bool(value)
            elif value is None:
                kwargs[name] = default
            else:
                kwargs[name] = type(default)(value)
        except ConfigError:
            raise
        except (TypeError, ValueError, KeyError) as exc:
            raise ConfigError(f"{key}: {exc}") from exc
    return cls(**kwargs)


def _bool(value):
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {value!r}")


def config_from_dict(data):
    return _build(PipelineConfig, data or {}, "")


def load_config(path):
    try:
        data = yaml.safe_load(Path(path).read_text())
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return config_from_dict(data)


def config_to_dict(cfg):
    """Plain, YAML/JSON-safe representation (inverse of ``config_from_dict``)."""
    out = {}
    for f in fields(cfg):
        value = getattr(cfg, f.name)
        if f.name == "bands":
            value = [b.to_dict() for b in value]
        elif f.name == "periods":
            value = [{"label": p.label, "start": p.start.isoformat(), "end": p.end.isoformat()}
                     for p in value]
        elif f.name == "formats":
            value = list(value)
        elif is_dataclass(value):
            value = config_to_dict(value)
        out[f.name] = value
    return out


def scalar_keys(cls=PipelineConfig, prefix=""):
    """Dotted paths of every scalar setting, with its default."""
    out = {}
    default = cls()
    for f in fields(cls):
        value = getattr(default, f.name)
        key = prefix + f.name
        if f.name in ("bands", "periods", "formats"):
            continue
        if is_dataclass(value):
            out.update(scalar_keys(type(value), key + "."))
        else:
            out[key] = value
    return out


def apply_overrides(cfg, overrides):
    """Return ``cfg`` with dotted-key overrides, e.g. ``{"gap.k_max": 4}``."""
    data = config_to_dict(cfg)
    for key, value in overrides.items():
        node = data
        *parents, leaf = key.split(".")
        for p in parents:
            node = node[p]
        node[leaf] = value
    return config_from_dict(data)


def validate_config(cfg, n_assets=None, n_obs=None):
    """All problems with ``cfg`` as human-readable strings; empty when valid.

    When ``n_assets``/``n_obs`` are not given and the input file exists, they
    are read from it.
    """
    issues = []
    path = Path(cfg.input.path) if cfg.input.path else None
    if path is None:
        issues.append("input.path: missing")
    elif not path.is_file():
        issues.append(f"input.path: {path} does not exist")
    elif n_assets is None or n_obs is None:
        try:
            from .ingest import load_price_table
            table = load_price_table(path, cfg.input.date_column, cfg.input.date_format or None,
                                     cfg.input.delimiter)
            n_assets, n_obs = len(table.assets), len(table.dates) - 1
        except ValueError as exc:
            issues.append(f"input: {exc}")
    if not cfg.return_scale > 0:
        issues.append("return_scale: must be positive")
    if not cfg.dt > 0:
        issues.append("dt: must be positive")
    if cfg.grid.voices < 1:
        issues.append("grid.voices: must be >= 1")
    if cfg.grid.s0 and cfg.grid.s0 < 2 * cfg.dt:
        issues.append("grid.s0: below two sampling intervals")
    if cfg.grid.s_max and cfg.grid.s0 and cfg.grid.s_max <= cfg.grid.s0:
        issues.append("grid.s_max: must exceed grid.s0")
    if n_obs is not None and cfg.grid.s_max and cfg.grid.s_max > n_obs * cfg.dt / 2:
        issues.append("grid.s_max: exceeds half the record length")
    if not cfg.omega0 > 0:
        issues.append("omega0: must be positive")
    labels = [b.label for b in cfg.bands]
    if not cfg.bands:
        issues.append("bands: at least one band is required")
    if len(set(labels)) != len(labels):
        issues.append("bands: duplicate labels")
    for b in cfg.bands:
        if not b.s_lo < b.s_hi:
            issues.append(f"bands.{b.label}: s_lo={b.s_lo} must be below s_hi={b.s_hi}")
    plabels = [p.label for p in cfg.periods]
    if len(set(plabels)) != len(plabels) or "full" in plabels:
        issues.append("periods: labels must be unique and not 'full'")
    for p in cfg.periods:
        if p.start > p.end:
            issues.append(f"periods.{p.label}: start {p.start} after end {p.end}")
    if cfg.coi_policy not in ("include", "exclude"):
        issues.append(f"coi_policy: {cfg.coi_policy!r} is not include|exclude")
    if cfg.gap.mode not in ("full", "cheap"):
        issues.append(f"gap.mode: {cfg.gap.mode!r} is not full|cheap")
    if cfg.gap.num_refs < 1:
        issues.append("gap.num_refs: must be >= 1")
    if cfg.gap.pam_restarts < 0:
        issues.append("gap.pam_restarts: must be >= 0")
    if cfg.gap.k_max < 1:
        issues.append("gap.k_max: must be >= 1")
    if n_assets is not None:
        if n_assets < 2:
            issues.append(f"input: {n_assets} asset(s); at least 2 are needed")
        if cfg.gap.enabled and cfg.gap.k_max >= n_assets:
            issues.append(f"gap.k_max: {cfg.gap.k_max} must be below the asset count {n_assets}")
    if cfg.threshold.reps < 1:
        issues.append("threshold.reps: must be >= 1")
    if not 0 <= cfg.threshold.quantile <= 1:
        issues.append("threshold.quantile: must be in [0, 1]")
    if cfg.threshold.fixed > 1:
        issues.append("threshold.fixed: must be <= 1 (negative disables the override)")
    if cfg.threshold.pairing not in ("random", "fixed"):
        issues.append(f"threshold.pairing: {cfg.threshold.pairing!r} is not random|fixed")
    bad = set(cfg.formats) - {"dot", "json", "adjacency"}
    if bad:
        issues.append(f"formats: unknown {sorted(bad)}")
    if cfg.n_jobs < 1:
        issues.append("n_jobs: must be >= 1")
    return issues


def child_seed(master, *names):
    """Stable integer seed for a stochastic stage, keyed by names."""
    key = tuple(zlib.crc32(str(n).encode()) for n in names)
    ss = np.random.SeedSequence(int(master), spawn_key=key)
    return int(ss.generate_state(1, np.uint64)[0])
