"""End-to-end run: ingest, coherence matrices, threshold, clustering, networks."""

from contextlib import contextmanager
from dataclasses import dataclass, field
import hashlib
import json
import logging
from pathlib import Path
import time

import numpy as np

from . import __version__, _kernels
from .clustering import (ClusterAssignment, dissimilarity_matrix, gap_statistic, pam,
                         uniform_reference_dissimilarities, wavelet_reference_dissimilarities)
from .coherence import band_matrices
from .config import ConfigError, child_seed, config_to_dict, validate_config
from .cwt import MorletParams, cwt, make_scale_grid
from .ingest import (DataError, align_and_clean, descriptive_stats, load_price_table,
                     log_returns, pearson_matrix, slice_period, write_matrix)
from .netgraph import build_network, export_graph, noise_threshold

log = logging.getLogger(__name__)

MANIFEST = "manifest.json"
TIMINGS = "timings.json"


class StageError(RuntimeError):
    def __init__(self, stage, cause):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class RunManifest:
    config: dict
    input_sha256: str
    artifacts: dict = field(default_factory=dict)  # relative path -> sha256
    versions: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)  # written to timings.json, not hashed
    status: str = "ok"
    failed_stage: str = ""
    summary: dict = field(default_factory=dict)

    def to_dict(self):
        out = {"config": self.config, "input_sha256": self.input_sha256,
               "artifacts": dict(sorted(self.artifacts.items())), "versions": self.versions,
               "status": self.status, "summary": self.summary, "timings_file": TIMINGS}
        if self.failed_stage:
            out["failed_stage"] = self.failed_stage
        return out


def _sha256(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _dump_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n")


def resolve_grid(cfg, n):
    return make_scale_grid(n, cfg.dt, cfg.grid.voices, cfg.grid.s0 or None, cfg.grid.s_max or None)


def period_window(panel, period):
    """Time window ``(u1, u2)``, in units of ``dt``, covering ``period`` in ``panel``."""
    start, end = np.datetime64(period.start, "D"), np.datetime64(period.end, "D")
    idx = np.flatnonzero((panel.dates >= start) & (panel.dates <= end))
    if idx.size < 2:
        raise DataError(f"period {period.label!r} has fewer than 2 observations")
    return (float(idx[0] * panel.dt), float(idx[-1] * panel.dt))


def run_pipeline(cfg, output_dir=None):
    """Run every stage and write artifacts plus ``manifest.json``.

    Artifact names follow ``<window>__<band>__<artifact>.<ext>``. Stochastic
    stages draw from seeds derived from ``(cfg.seed, stage, window, band)``.
    """
    issues = validate_config(cfg)
    if issues:
        raise ConfigError("; ".join(issues))
    out = Path(output_dir or cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest(
        config={k: v for k, v in config_to_dict(cfg).items() if k != "output_dir"},
        input_sha256=_sha256(cfg.input.path),
        versions={"wcnet": __version__, "numpy": np.__version__,
                  "numba_kernels": bool(_kernels.HAS_NUMBA)},
    )
    stage_name = ["setup"]

    def emit(name, writer):
        path = out / name
        written = writer(path)
        for p in (written if isinstance(written, list) else [path]):
            manifest.artifacts[Path(p).relative_to(out).as_posix()] = _sha256(p)

    @contextmanager
    def stage(name):
        stage_name[0] = name
        t0 = time.perf_counter()
        log.info("stage %s", name)
        try:
            yield
        finally:
            manifest.timings[name] = round(time.perf_counter() - t0, 4)

    try:
        _run_stages(cfg, out, manifest, emit, stage)
    except (ConfigError, DataError):
        _fail(out, manifest, stage_name[0])
        raise
    except Exception as exc:
        _fail(out, manifest, stage_name[0])
        raise StageError(stage_name[0], exc) from exc
    _dump_json(out / TIMINGS, manifest.timings)
    _dump_json(out / MANIFEST, manifest.to_dict())
    return manifest


def _fail(out, manifest, stage):
    manifest.status = "failed"
    manifest.failed_stage = stage
    _dump_json(out / TIMINGS, manifest.timings)
    _dump_json(out / MANIFEST, manifest.to_dict())


def _run_stages(cfg, out, manifest, emit, stage):
    with stage("ingest"):
        table = align_and_clean(load_price_table(
            cfg.input.path, cfg.input.date_column, cfg.input.date_format or None,
            cfg.input.delimiter))
        panel = log_returns(table, cfg.return_scale, cfg.dt)
        assets = list(panel.assets)
        windows = {"full": None}
        sliced = {"full": panel}
        for p in cfg.periods:
            windows[p.label] = period_window(panel, p)
            sliced[p.label] = slice_period(panel, p.start, p.end)
        manifest.summary["n_obs"] = panel.n_obs
        manifest.summary["assets"] = assets
        manifest.summary["windows"] = {k: (None if v is None else list(v)) for k, v in windows.items()}

    with stage("stats"):
        for label, sub in sliced.items():
            stats = descriptive_stats(sub)
            emit(f"{label}__stats.csv", lambda p, s=stats: s.to_frame().to_csv(
                p, float_format="%.10g", na_rep="", lineterminator="\n"))
            emit(f"{label}__pearson.csv",
                 lambda p, s=sub: write_matrix(p, pearson_matrix(s), assets))

    grid = resolve_grid(cfg, panel.n_obs)
    params = MorletParams(cfg.omega0)
    manifest.summary["grid"] = grid.to_dict()

    if cfg.dump_power:
        with stage("cwt_dump"):
            for a, name in enumerate(assets):
                power = cwt(panel.values[:, a], grid, params).power
                emit(f"cwt__{name}__power.csv", lambda p, w=power: np.savetxt(
                    p, w, delimiter=",", fmt="%.10g"))

    with stage("coherence"):
        mats = band_matrices(panel.values, assets, grid, params, cfg.bands, windows,
                             cfg.coi_policy, cfg.smoothing)
        for bm in mats:
            prefix = f"{bm.window_label}__{bm.band.label}"
            emit(f"{prefix}__mean_r2.csv", lambda p, m=bm.mean_r2: write_matrix(p, m, assets))
            emit(f"{prefix}__mean_oriented.csv",
                 lambda p, m=bm.mean_oriented: write_matrix(p, m, assets))

    thresholds = {}
    with stage("threshold"):
        variances = panel.values.var(axis=0, ddof=1)
        for label, win in windows.items():
            est = noise_threshold(
                variances, panel.n_obs, grid, params, cfg.bands, cfg.threshold.reps,
                cfg.threshold.quantile, child_seed(cfg.seed, "threshold", label),
                cfg.smoothing, cfg.coi_policy, win, cfg.threshold.pairing, cfg.n_jobs)
            for band in cfg.bands:
                thresholds[label, band.label] = est.per_band[band.label]
                emit(f"{label}__{band.label}__threshold.json", lambda p, e=est, b=band.label: _dump_json(
                    p, {"band": b, "value": e.per_band[b], "quantile": e.quantile,
                        "reps": e.reps, "max_over_bands": e.value, "samples": e.samples[b],
                        "fixed_override": cfg.threshold.fixed if cfg.threshold.fixed >= 0 else None}))

    clusters = {}
    if cfg.gap.enabled:
        with stage("clustering"):
            refs = None
            if cfg.gap.mode == "full":
                refs = wavelet_reference_dissimilarities(
                    panel.values, assets, grid, cfg.gap.num_refs, child_seed(cfg.seed, "gap"),
                    params, cfg.bands, windows, cfg.coi_policy, cfg.smoothing, cfg.n_jobs)
            for bm in mats:
                key = (bm.window_label, bm.band.label)
                d = dissimilarity_matrix(bm)
                if refs is None:
                    ref = uniform_reference_dissimilarities(
                        d, cfg.gap.num_refs, child_seed(cfg.seed, "gap", *key))
                else:
                    ref = refs[key]
                gap = gap_statistic(d, ref, cfg.gap.k_max)
                assignment = pam(d, gap.k, seed=child_seed(cfg.seed, "pam", *key),
                                 restarts=cfg.gap.pam_restarts)
                clusters[key] = assignment
                emit(f"{key[0]}__{key[1]}__dissimilarity.csv",
                     lambda p, v=d.values: write_matrix(p, v, assets))
                emit(f"{key[0]}__{key[1]}__clusters.json", lambda p, g=gap, c=assignment: _dump_json(
                    p, {"assets": assets, "mode": cfg.gap.mode, "gap": g.to_dict(),
                        "assignment": c.to_dict()}))

    with stage("network"):
        ext = {"dot": "dot", "json": "json", "adjacency": "csv"}
        n_networks = 0
        for bm in mats:
            key = (bm.window_label, bm.band.label)
            assignment = clusters.get(key) or ClusterAssignment(
                1, np.array([0]), np.zeros(len(assets), dtype=int), float("nan"))
            thr = cfg.threshold.fixed if cfg.threshold.fixed >= 0 else thresholds[key]
            net = build_network(bm, assignment, thr)
            for fmt in cfg.formats:
                emit(f"{key[0]}__{key[1]}__network.{ext[fmt]}",
                     lambda p, f=fmt, n=net: export_graph(n, f, p))
            n_networks += 1
        manifest.summary["n_networks"] = n_networks
