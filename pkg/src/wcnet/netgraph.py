"""Noise threshold, network assembly and graph export."""

from dataclasses import asdict, dataclass, field
import json
import math
from pathlib import Path

import numpy as np

from ._parallel import pmap
from .coherence import (DEFAULT_BANDS, FrequencyBand, Smoother, SmoothingParams,
                        _coherence_from_smoothed, _scaled_power, band_weights)
from .cwt import MorletParams, cone_of_influence, cwt

SCHEMA = "wcnet.network"
SCHEMA_VERSION = 1

# fill colours for clusters, cycled
PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
           "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")


@dataclass(frozen=True)
class ThresholdEstimate:
    value: float  # max over bands
    quantile: float
    reps: int
    per_band: dict  # band label -> threshold
    samples: dict = field(default_factory=dict, compare=False, repr=False)

    def to_dict(self):
        return {"value": self.value, "quantile": self.quantile, "reps": self.reps,
                "per_band": dict(self.per_band),
                "samples": {k: list(v) for k, v in self.samples.items()}}


def noise_threshold(variances, n, grid, params=MorletParams(), bands=DEFAULT_BANDS, reps=100,
                    quantile=0.95, seed=None, smoothing=SmoothingParams(), coi_policy="include",
                    window=None, pairing="random", n_jobs=1):
    """Empirical quantile of band-mean coherence between independent Gaussian series.

    Each repetition draws two series whose variances come from ``variances``:
    two distinct entries picked at random (``pairing='random'``) or the
    asset pairs in order (``pairing='fixed'``).
    """
    if reps < 1:
        raise ValueError("reps must be >= 1")
    if not 0.0 <= quantile <= 1.0:
        raise ValueError("quantile must be in [0, 1]")
    variances = np.atleast_1d(np.asarray(variances, dtype=float))
    if variances.size == 0 or np.any(variances <= 0):
        raise ValueError("variances must be positive")
    if pairing not in ("random", "fixed"):
        raise ValueError(f"unknown pairing {pairing!r}")
    m = variances.size
    pairs = [(i, j) for i in range(m) for j in range(i + 1, m)] or [(0, 0)]
    smoother = Smoother(grid, n, smoothing)
    coi = cone_of_influence(n, grid.dt)
    weights = [band_weights(grid, coi, b, window, coi_policy) for b in bands]
    children = np.random.SeedSequence(seed).spawn(reps)

    def one(job):
        rep, child = job
        rng = np.random.default_rng(child)
        if pairing == "fixed":
            i, j = pairs[rep % len(pairs)]
        elif m > 1:
            i, j = rng.choice(m, size=2, replace=False)
        else:
            i = j = 0
        x = rng.standard_normal(n) * math.sqrt(variances[i])
        y = rng.standard_normal(n) * math.sqrt(variances[j])
        wx, wy = cwt(x, grid, params), cwt(y, grid, params)
        cross = smoother(wx.coefficients * np.conj(wy.coefficients) / grid.scales[None, :])
        cf = _coherence_from_smoothed(cross, smoother(_scaled_power(wx)),
                                      smoother(_scaled_power(wy)), grid, coi)
        return [float(np.sum(cf.r2 * w)) for w in weights]

    values = np.array(pmap(one, enumerate(children), n_jobs))
    per_band = {b.label: float(np.quantile(values[:, c], quantile)) for c, b in enumerate(bands)}
    samples = {b.label: values[:, c].tolist() for c, b in enumerate(bands)}
    return ThresholdEstimate(max(per_band.values()), quantile, reps, per_band, samples)


@dataclass(frozen=True)
class Edge:
    source: str
    target: str
    weight: float  # mean squared coherence (display darkness)
    forward: float  # mean R2 source -> target
    backward: float  # mean R2 target -> source


@dataclass(frozen=True)
class Node:
    name: str
    cluster: int
    strength: float


@dataclass(frozen=True)
class Network:
    nodes: tuple
    edges: tuple
    band: FrequencyBand
    window: tuple  # (u1, u2) in time units, or None for the full record
    threshold: float
    window_label: str = "full"

    def to_dict(self):
        return {
            "schema": SCHEMA,
            "version": SCHEMA_VERSION,
            "band": self.band.to_dict(),
            "window": None if self.window is None else list(self.window),
            "window_label": self.window_label,
            "threshold": self.threshold,
            "nodes": [asdict(nd) for nd in self.nodes],
            "edges": [asdict(e) for e in self.edges],
        }

    @classmethod
    def from_dict(cls, data):
        if data.get("schema") != SCHEMA or data.get("version") != SCHEMA_VERSION:
            raise ValueError(f"not a {SCHEMA} v{SCHEMA_VERSION} document")
        b = data["band"]
        band = FrequencyBand(b["label"], b["s_lo"], math.inf if b["s_hi"] is None else b["s_hi"])
        return cls(
            nodes=tuple(Node(**nd) for nd in data["nodes"]),
            edges=tuple(Edge(**e) for e in data["edges"]),
            band=band,
            window=None if data["window"] is None else tuple(data["window"]),
            threshold=data["threshold"],
            window_label=data["window_label"],
        )

    def adjacency(self):
        """Thresholded symmetric and directed weight matrices (zeros off the edge set)."""
        names = [nd.name for nd in self.nodes]
        index = {name: i for i, name in enumerate(names)}
        sym = np.zeros((len(names), len(names)))
        directed = np.zeros_like(sym)
        for e in self.edges:
            i, j = index[e.source], index[e.target]
            sym[i, j] = sym[j, i] = e.weight
            directed[i, j] = e.forward
            directed[j, i] = e.backward
        return names, sym, directed


def node_strengths(mean_oriented):
    """Mean outgoing oriented coherence of each asset to all the others."""
    ori = np.asarray(mean_oriented, dtype=float)
    m = ori.shape[0]
    if m < 2:
        return np.zeros(m)
    off = ~np.eye(m, dtype=bool)
    return np.array([ori[i, off[i]].mean() for i in range(m)])


def build_network(band_matrix, clusters, threshold):
    """Display edge ``(x, y)`` iff ``mean_r2[x, y] > threshold``."""
    assets = tuple(band_matrix.assets)
    labels = np.asarray(clusters.labels)
    if labels.shape[0] != len(assets):
        raise ValueError("cluster labels do not match the asset list")
    strengths = np.clip(node_strengths(band_matrix.mean_oriented), 0.0, 1.0)
    nodes = tuple(Node(a, int(c), float(s)) for a, c, s in zip(assets, labels, strengths))
    sym, ori = band_matrix.mean_r2, band_matrix.mean_oriented
    edges = tuple(
        Edge(assets[i], assets[j], float(sym[i, j]), float(ori[i, j]), float(ori[j, i]))
        for i in range(len(assets)) for j in range(i + 1, len(assets))
        if sym[i, j] > threshold
    )
    window = None if band_matrix.window is None else tuple(float(u) for u in band_matrix.window)
    return Network(nodes, edges, band_matrix.band, window, float(threshold),
                   band_matrix.window_label)


def _quote(name):
    return '"' + str(name).replace("\\", "\\\\").replace('"', '\\"') + '"'


def _gray(weight):
    level = int(round(255 * (1.0 - min(max(weight, 0.0), 1.0))))
    return f"#{level:02x}{level:02x}{level:02x}"


def to_dot(network):
    """Graphviz text for the network.

    Each displayed pair is one ``dir=both`` edge: darker for higher mean
    coherence, ``arrowsize`` from the larger directed weight, a filled head on
    the dominant end and a hollow one on the other. The raw directed weights
    are kept in ``headweight``/``tailweight``.
    """
    title = f"{network.window_label}__{network.band.label}"
    lines = [f"digraph {_quote(title)} {{",
             f"  graph [label={_quote(title)}, threshold=\"{network.threshold:.6f}\"];",
             "  node [shape=circle, style=filled, fixedsize=true, fontsize=10];"]
    for nd in network.nodes:
        width = 0.3 + 1.2 * nd.strength
        color = PALETTE[nd.cluster % len(PALETTE)]
        lines.append(f"  {_quote(nd.name)} [width=\"{width:.4f}\", fillcolor=\"{color}\", "
                     f"cluster=\"{nd.cluster}\", strength=\"{nd.strength:.6f}\"];")
    for e in network.edges:
        head = "normal" if e.forward >= e.backward else "onormal"
        tail = "normal" if e.backward > e.forward else "onormal"
        size = 0.4 + 1.6 * max(e.forward, e.backward)
        lines.append(
            f"  {_quote(e.source)} -> {_quote(e.target)} [dir=both, color=\"{_gray(e.weight)}\", "
            f"penwidth=\"{0.5 + 3.0 * e.weight:.4f}\", arrowhead={head}, arrowtail={tail}, "
            f"arrowsize=\"{size:.4f}\", coherence=\"{e.weight:.6f}\", "
            f"headweight=\"{e.forward:.6f}\", tailweight=\"{e.backward:.6f}\"];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def to_json(network):
    return json.dumps(network.to_dict(), indent=2, sort_keys=True) + "\n"


def load_network(path):
    return Network.from_dict(json.loads(Path(path).read_text()))


def export_graph(network, fmt, path):
    """Write ``network`` as ``dot``, ``json`` or ``adjacency``.

    ``adjacency`` writes two matrices, ``<stem>.r2.csv`` (symmetric mean
    coherence) and ``<stem>.oriented.csv`` (row -> column oriented coherence).
    Returns the list of written paths.
    """
    from .ingest import write_matrix
    path = Path(path)
    try:
        if fmt == "dot":
            path.write_text(to_dot(network))
            return [path]
        if fmt == "json":
            path.write_text(to_json(network))
            return [path]
        if fmt == "adjacency":
            names, sym, directed = network.adjacency()
            stem = path.with_suffix("") if path.suffix == ".csv" else path
            out = [stem.with_name(stem.name + ".r2.csv"), stem.with_name(stem.name + ".oriented.csv")]
            write_matrix(out[0], sym, names)
            write_matrix(out[1], directed, names)
            return out
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    raise ValueError(f"unknown graph format {fmt!r}")
