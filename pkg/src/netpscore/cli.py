"""Command-line front end: ``netpscore run | simulate | diagnose``.

Exit status: 0 success, 2 configuration or validation error, 3 data
integrity error, 4 numeric or fitting failure.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import platform
import sys
from pathlib import Path

import numpy as np
import pandas as pd
import scipy
import yaml

from . import __version__, kernels
from .config import load_config
from .diagnostics import balance_summary, balance_table, orq_normality
from .dgp import DgpSpec, generate, write_fixture
from .effects import bootstrap, default_contrasts, write_effects_csv, write_effects_json
from .errors import ConfigError, FitError, NetPScoreError
from .exposure import ExposureMatrix
from .influence import build_influence, load_pairwise
from .panel import categorize_treatment, lag_align, load_panel
from .pipeline import fit_pipeline, prepare_analysis

log = logging.getLogger("netpscore")

MANIFEST = "manifest.json"


def _tag(alpha, beta):
    return f"a{alpha:g}_b{beta:g}"


def _write_csv(df, path):
    df.to_csv(path, index=False, float_format="%.10g", lineterminator="\n")


def _sha256(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _load_inputs(cfg):
    panel = load_panel(cfg.panel_path, cfg.schema)
    panel = lag_align(panel, cfg.covariate_lag, cfg.outcome_lag, cfg.append_outcome)
    assignment = categorize_treatment(panel, cfg.scheme, cfg.impol_weights)
    raw = None
    if cfg.pairwise_path is not None:
        raw = load_pairwise(cfg.pairwise_path, cfg.standardize_dist, cfg.schema.delimiter)
    return panel, assignment, raw


def _fit_all(cfg, panel, assignment, raw, threads):
    options = cfg.pipeline_options(threads)
    units = list(zip(panel.country, panel.time))
    for alpha, beta in cfg.iiw:
        graph = build_influence(raw, alpha, beta, units=units)
        data = prepare_analysis(panel, assignment, graph)
        yield (alpha, beta), data, fit_pipeline(data, options)


def cmd_run(args):
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    out = Path(args.out) if args.out else cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    panel, assignment, raw = _load_inputs(cfg)
    counts = dict(zip(assignment.levels, assignment.counts().tolist()))
    log.info("%d analysis units, category counts %s", panel.n, counts)
    contrasts = cfg.contrasts or default_contrasts(assignment.levels, assignment.reference)

    tables, files = [], []
    mnl_written = False
    for (alpha, beta), data, state in _fit_all(cfg, panel, assignment, raw, args.threads):
        tag = _tag(alpha, beta)
        log.info("IIW (%g, %g): bootstrap with %d replicates", alpha, beta, cfg.replicates)
        table = bootstrap(data, state.options, R=cfg.replicates, seed=cfg.seed,
                          level=cfg.level, contrasts=contrasts, threads=args.threads,
                          cluster=cfg.cluster, state=state)
        tables.append(table)
        if not mnl_written:
            # the individual propensity model does not depend on the graph
            files.append(out / "mnl_coefficients.csv")
            _write_csv(state.mnl.to_frame(), files[-1])
            mnl_written = True
        files.append(out / f"ntem_{tag}.csv")
        ntem = ExposureMatrix(data.ntem, data.levels).to_frame(data.country, data.time)
        _write_csv(ntem, files[-1])
        files.append(out / f"outcome_coefficients_{tag}.csv")
        _write_csv(state.outcome.to_frame(), files[-1])
        if state.has_exposure:
            files.append(out / f"mvlr_coefficients_{tag}.csv")
            _write_csv(state.mvlr.to_frame(), files[-1])
            files.append(out / f"mvlr_omnibus_{tag}.csv")
            _write_csv(state.mvlr.omnibus(), files[-1])

    files.append(out / "effects.csv")
    write_effects_csv(tables, files[-1])
    files.append(out / "effects.json")
    write_effects_json(tables, files[-1], cfg.level)
    manifest = {
        "config": str(cfg.source),
        "config_sha256": cfg.sha256,
        "seed": cfg.seed,
        "replicates": cfg.replicates,
        "iiw": [list(p) for p in cfg.iiw],
        "kernel_backend": kernels.BACKEND,
        "versions": {"netpscore": __version__, "python": platform.python_version(),
                     "numpy": np.__version__, "scipy": scipy.__version__,
                     "pandas": pd.__version__},
        "outputs": {f.name: _sha256(f) for f in files},
    }
    with open(out / MANIFEST, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(pd.read_csv(out / "effects.csv").to_string(index=False))
    return 0


def cmd_simulate(args):
    mapping = {}
    if args.config:
        try:
            mapping = yaml.safe_load(Path(args.config).read_text(encoding="utf-8")) or {}
        except OSError as exc:
            raise ConfigError(f"cannot read DGP spec {args.config}: {exc.strerror}") from None
        except yaml.YAMLError as exc:
            raise ConfigError(f"invalid YAML in {args.config}: {exc}") from None
        if not isinstance(mapping, dict):
            raise ConfigError("DGP spec must be a mapping")
    if args.seed is not None:
        mapping["seed"] = args.seed
    spec = DgpSpec.from_mapping(mapping)
    out = write_fixture(generate(spec), args.out or "fixture")
    print(f"wrote {spec.n_countries * spec.n_years} panel rows to {out}")
    return 0


def cmd_diagnose(args):
    cfg = load_config(args.config)
    out = Path(args.out) if args.out else cfg.output_dir
    if not (out / MANIFEST).is_file():
        raise ConfigError(f"no completed run in {out} (missing {MANIFEST}); run first")
    panel, assignment, raw = _load_inputs(cfg)
    balance, summary, normality = [], [], []
    for (alpha, beta), _, state in _fit_all(cfg, panel, assignment, raw, args.threads):
        keys = {"alpha": alpha, "beta": beta}
        tab = balance_table(state)
        balance.append(tab.assign(**keys))
        summary.append(balance_summary(tab).assign(**keys))
        if state.has_exposure:
            normality.append(orq_normality(state.g_star, state.levels).assign(**keys))
    diag = out / "diagnostics"
    diag.mkdir(exist_ok=True)
    summary = pd.concat(summary, ignore_index=True)
    _write_csv(pd.concat(balance, ignore_index=True), diag / "balance.csv")
    _write_csv(summary, diag / "balance_summary.csv")
    print(summary.to_string(index=False))
    if normality:
        normality = pd.concat(normality, ignore_index=True)
        _write_csv(normality, diag / "orq_normality.csv")
        print(normality.to_string(index=False))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="netpscore",
        description="Direct effects of multi-valued treatments under network interference.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML configuration file")
    common.add_argument("--out", help="output directory (overrides the config)")
    common.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                        help="worker threads for bootstrap and grid (default: all cores)")
    common.add_argument("--seed", type=int, help="override the configured seed")
    common.add_argument("--verbose", "-v", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="estimate effects for every IIW")
    sub.add_parser("simulate", parents=[common],
                   help="write a synthetic fixture (config = optional DGP spec)")
    sub.add_parser("diagnose", parents=[common],
                   help="balance and normality checks for a completed run")
    return parser


COMMANDS = {"run": cmd_run, "simulate": cmd_simulate, "diagnose": cmd_diagnose}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s",
                        stream=sys.stderr)
    logging.captureWarnings(True)
    if args.command in ("run", "diagnose") and not args.config:
        print(json.dumps({"error": "ConfigError", "message": "--config is required"}),
              file=sys.stderr)
        return 2
    if args.threads < 1:
        print(json.dumps({"error": "ConfigError", "message": "--threads must be positive"}),
              file=sys.stderr)
        return 2
    try:
        return COMMANDS[args.command](args)
    except NetPScoreError as exc:
        if args.verbose:
            log.exception("failed")
        print(json.dumps({"error": type(exc).__name__, "message": str(exc),
                          "exit_code": exc.exit_code}), file=sys.stderr)
        return exc.exit_code
    except np.linalg.LinAlgError as exc:
        print(json.dumps({"error": "LinAlgError", "message": str(exc),
                          "exit_code": FitError.exit_code}), file=sys.stderr)
        return FitError.exit_code


if __name__ == "__main__":
    sys.exit(main())
