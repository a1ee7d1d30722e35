"""Command line entry point: ``wcnet run|validate|stats|threshold``."""

import argparse
import json
import logging
import os
from pathlib import Path
import sys

import numpy as np

from .config import (ConfigError, PipelineConfig, apply_overrides, child_seed, config_from_dict,
                     config_to_dict, load_config, scalar_keys, validate_config)
from .cwt import MorletParams, make_scale_grid
from .ingest import (DataError, align_and_clean, descriptive_stats, load_price_table,
                     log_returns, slice_period)
from .netgraph import noise_threshold
from .pipeline import StageError, resolve_grid, run_pipeline

EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_INTERNAL = 4
OUTPUT_ENV = "WCNET_OUTPUT_DIR"

log = logging.getLogger("wcnet")


def _flag(key):
    return "--" + key.replace(".", "-").replace("_", "-")


def _add_config_options(p):
    p.add_argument("-c", "--config", help="YAML configuration file")
    group = p.add_argument_group("settings (override the configuration file)")
    for key, default in scalar_keys().items():
        group.add_argument(_flag(key), dest="set:" + key, metavar=type(default).__name__.upper(),
                           help=f"{key} (default {default!r})")
    group.add_argument("--band", action="append", metavar="LABEL:LO:HI",
                       help="frequency band in scale units; empty HI is unbounded (repeatable)")
    group.add_argument("--period", action="append", metavar="LABEL:START:END",
                       help="sub-period with ISO dates (repeatable)")
    group.add_argument("--no-periods", action="store_true", help="full sample only")
    group.add_argument("--format", action="append", choices=("dot", "json", "adjacency"),
                       help="network export format (repeatable)")


def resolve_config(args):
    cfg = load_config(args.config) if args.config else PipelineConfig()
    overrides = {}
    if os.environ.get(OUTPUT_ENV):
        overrides["output_dir"] = os.environ[OUTPUT_ENV]
    for name, value in vars(args).items():
        if name.startswith("set:") and value is not None:
            overrides[name[4:]] = value
    if args.band:
        overrides["bands"] = args.band
    if args.no_periods:
        overrides["periods"] = []
    elif args.period:
        overrides["periods"] = args.period
    if args.format:
        overrides["formats"] = args.format
    return apply_overrides(cfg, overrides) if overrides else cfg


def cmd_validate(args):
    cfg = resolve_config(args)
    issues = validate_config(cfg)
    for issue in issues:
        print(issue)
    if not issues:
        print("ok")
    return EXIT_CONFIG if issues else 0


def cmd_run(args):
    cfg = resolve_config(args)
    manifest = run_pipeline(cfg)
    print(f"{len(manifest.artifacts)} artifacts, {manifest.summary.get('n_networks', 0)} networks "
          f"in {cfg.output_dir}")
    return 0


def _load_panel(cfg):
    table = load_price_table(cfg.input.path, cfg.input.date_column,
                             cfg.input.date_format or None, cfg.input.delimiter)
    return log_returns(align_and_clean(table), cfg.return_scale, cfg.dt)


def cmd_stats(args):
    cfg = resolve_config(args)
    if not cfg.input.path:
        raise ConfigError("input.path: missing")
    panel = _load_panel(cfg)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    subsets = {"full": panel}
    subsets.update({p.label: slice_period(panel, p.start, p.end) for p in cfg.periods})
    for label, sub in subsets.items():
        frame = descriptive_stats(sub).to_frame()
        frame.to_csv(out / f"{label}__stats.csv", float_format="%.10g", na_rep="",
                     lineterminator="\n")
        print(f"# {label}: {sub.n_obs} observations")
        print(frame.to_string(float_format=lambda v: f"{v:.3f}"))
    return 0


def cmd_threshold(args):
    cfg = resolve_config(args)
    if cfg.input.path:
        panel = _load_panel(cfg)
        variances, n = panel.values.var(axis=0, ddof=1), panel.n_obs
    else:
        variances, n = np.ones(2), args.n
    grid = resolve_grid(cfg, n)
    est = noise_threshold(variances, n, grid, MorletParams(cfg.omega0), cfg.bands,
                          cfg.threshold.reps, cfg.threshold.quantile,
                          child_seed(cfg.seed, "threshold", "full"), cfg.smoothing,
                          cfg.coi_policy, None, cfg.threshold.pairing, cfg.n_jobs)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "threshold.json").write_text(json.dumps(est.to_dict(), indent=2, sort_keys=True) + "\n")
    for label, value in est.per_band.items():
        print(f"{label}\t{value:.4f}")
    print(f"max\t{est.value:.4f}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="wcnet", description=__doc__)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, func, text in (
        ("run", cmd_run, "full pipeline"),
        ("validate", cmd_validate, "check a configuration without running it"),
        ("stats", cmd_stats, "descriptive statistics of the returns"),
        ("threshold", cmd_threshold, "Gaussian-noise coherence threshold study"),
    ):
        p = sub.add_parser(name, help=text)
        _add_config_options(p)
        p.set_defaults(func=func)
        if name == "threshold":
            p.add_argument("--n", type=int, default=2541,
                           help="series length when no input file is given")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except StageError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
