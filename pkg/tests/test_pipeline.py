import json

import numpy as np
import pytest

from wcnet.config import PipelineConfig, apply_overrides
from wcnet.netgraph import load_network
from wcnet.pipeline import StageError, run_pipeline


def _cfg(price_file, out, **extra):
    base = {"input.path": str(price_file), "output_dir": str(out), "gap.k_max": 3,
            "gap.mode": "cheap", "gap.num_refs": 10, "threshold.reps": 4}
    base.update(extra)
    cfg = apply_overrides(PipelineConfig(), base)
    from dataclasses import replace
    from wcnet.config import Period
    import datetime as dt
    return replace(cfg, periods=(Period("h1", dt.date(2019, 1, 1), dt.date(2019, 6, 30)),))


def test_run_emits_everything(price_file, tmp_path):
    out = tmp_path / "out"
    manifest = run_pipeline(_cfg(price_file, out))
    assert manifest.summary["n_networks"] == 6
    names = set(manifest.artifacts)
    for w in ("full", "h1"):
        assert f"{w}__stats.csv" in names and f"{w}__pearson.csv" in names
        for b in ("short", "medium", "long"):
            for art in ("mean_r2.csv", "mean_oriented.csv", "threshold.json", "clusters.json",
                        "dissimilarity.csv", "network.dot", "network.json",
                        "network.r2.csv", "network.oriented.csv"):
                assert f"{w}__{b}__{art}" in names
    for name in names:
        assert (out / name).exists()
    data = json.loads((out / "manifest.json").read_text())
    assert data["status"] == "ok"
    assert "output_dir" not in data["config"]
    net = load_network(out / "full__medium__network.json")
    assert net.threshold == 0.38
    clusters = json.loads((out / "full__medium__clusters.json").read_text())
    labels = clusters["assignment"]["labels"]
    assert labels[:3] == [labels[0]] * 3 and labels[3:] == [labels[3]] * 3


def test_no_periods_three_networks(price_file, tmp_path):
    from dataclasses import replace
    cfg = replace(_cfg(price_file, tmp_path / "o"), periods=())
    assert run_pipeline(cfg).summary["n_networks"] == 3


def test_clustering_disabled_still_emits(price_file, tmp_path):
    out = tmp_path / "o"
    m = run_pipeline(_cfg(price_file, out, **{"gap.enabled": False}))
    names = set(m.artifacts)
    assert "full__short__mean_r2.csv" in names and "full__short__threshold.json" in names
    assert not any(n.endswith("clusters.json") for n in names)
    assert m.summary["n_networks"] == 6


def test_monte_carlo_threshold_used_without_override(price_file, tmp_path):
    out = tmp_path / "o"
    run_pipeline(_cfg(price_file, out, **{"threshold.fixed": -1}))
    thr = json.loads((out / "full__long__threshold.json").read_text())
    net = load_network(out / "full__long__network.json")
    assert net.threshold == thr["value"]


def test_failure_is_stage_tagged(price_file, tmp_path):
    from dataclasses import replace
    from wcnet.config import Period
    import datetime as dt
    cfg = replace(_cfg(price_file, tmp_path / "o"),
                  periods=(Period("future", dt.date(2030, 1, 1), dt.date(2030, 2, 1)),))
    with pytest.raises(Exception) as info:
        run_pipeline(cfg)
    data = json.loads((tmp_path / "o" / "manifest.json").read_text())
    assert data["status"] == "failed" and data["failed_stage"] == "ingest"


def test_internal_error_wrapped(price_file, tmp_path, monkeypatch):
    import wcnet.pipeline as pl

    def boom(*a, **k):
        raise FloatingPointError("synthetic")
    monkeypatch.setattr(pl, "band_matrices", boom)
    with pytest.raises(StageError) as info:
        run_pipeline(_cfg(price_file, tmp_path / "o"))
    assert info.value.stage == "coherence"


def test_full_gap_mode(price_file, tmp_path):
    out = tmp_path / "o"
    m = run_pipeline(_cfg(price_file, out, **{"gap.mode": "full", "gap.num_refs": 3}))
    clusters = json.loads((out / "h1__short__clusters.json").read_text())
    assert clusters["mode"] == "full" and clusters["gap"]["num_refs"] == 3


def test_power_dump(price_file, tmp_path):
    out = tmp_path / "o"
    m = run_pipeline(_cfg(price_file, out, dump_power=True, **{"gap.enabled": False}))
    dumped = [n for n in m.artifacts if n.startswith("cwt__")]
    assert len(dumped) == 6
    power = np.loadtxt(out / dumped[0], delimiter=",")
    assert power.shape[0] == m.summary["n_obs"]
