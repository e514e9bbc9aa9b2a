"""Command line interface.

Exit codes: 0 success, 2 configuration error, 3 numerical error,
4 threshold failure in --check mode.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .axion import model_params
from .errors import ConfigurationError, NumericalError
from .harness import (check_campaign, desk_config, load_config, run_campaign,
                      theory_report, DEFAULT_COUPLING_AXIS, DEFAULT_GS_AXIS)
from .pipeline import dump_stages, run_pipeline, write_grand_csv
from .scanrate import enhancement_grid
from .synth import read_run, synthesize_run, write_run

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_CHECK = 4


def _load(args):
    if args.config is None:
        return desk_config()
    return load_config(args.config)


def _apply_seed(cfg, args):
    if getattr(args, "seed", None) is not None:
        cfg = replace(cfg, seed=args.seed,
                      synth=replace(cfg.synth, seed=args.seed))
    return cfg


def _out_dir(args, default: str) -> Path:
    out = Path(args.out) if args.out else Path(default)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_visibility(args) -> int:
    cfg = _load(args)
    out = _out_dir(args, "theory_out")
    report = theory_report(cfg, out_dir=out)
    print(f"wrote visibility curves for {len(report['visibility_curves'])} "
          f"cases to {out}")
    return EXIT_OK


def cmd_scanrate_grid(args) -> int:
    cfg = _load(args)
    eta = args.eta if args.eta is not None else cfg.squeezed.eta
    grid = enhancement_grid(eta, np.asarray(DEFAULT_GS_AXIS),
                            np.asarray(DEFAULT_COUPLING_AXIS), cfg.squeezed)
    out = _out_dir(args, "theory_out")
    target = out / f"enhancement_grid_eta_{eta:.2f}.csv"
    grid.to_csv(target)
    if grid.failures:
        print(f"{len(grid.failures)} cells failed to integrate", file=sys.stderr)
    print(f"wrote {target}")
    return EXIT_OK


def cmd_axion_params(args) -> int:
    cfg = _load(args)
    if cfg.axion_physical is None:
        raise ConfigurationError("config has no axion_physical section")
    mp = model_params(cfg.axion_physical)
    payload = {"n_A": mp.n_A, "kappa_a_rad_s": mp.kappa_a,
               "kappa_a_over_2pi_hz": mp.kappa_a / (2 * np.pi), "N_A": mp.N_A}
    print(json.dumps(payload, indent=2))
    if args.out:
        out = _out_dir(args, "axion_out")
        (out / "model_params.json").write_text(json.dumps(payload, indent=2))
    return EXIT_OK


def cmd_synth(args) -> int:
    cfg = _apply_seed(_load(args), args)
    params = cfg.unsqueezed if args.receiver == "unsqueezed" else cfg.squeezed
    run = synthesize_run(params, cfg.synth, seed=cfg.synth.seed)
    out = _out_dir(args, "synth_out")
    write_run(run, out, fmt=args.format)
    print(f"wrote run directory {out} ({run.spectra.shape[0]} spectra x "
          f"{run.spectra.shape[1]} bins)")
    return EXIT_OK


def cmd_pipeline(args) -> int:
    run = read_run(args.run_dir)
    cfg = _load(args)
    result = run_pipeline(run, cfg.pipeline)
    out = _out_dir(args, "pipeline_out")
    if args.dump_stages:
        dump_stages(result, out)
    else:
        write_grand_csv(result.grand, out / "grand.csv")
        (out / "stage_stats.json").write_text(json.dumps(result.stats, indent=2))
    peak = float(np.nanmax(result.grand.values))
    print(f"grand spectrum: {result.grand.values.size} bins, peak excess "
          f"{peak:.2f} sigma; stats in {out}")
    return EXIT_OK


def cmd_campaign(args) -> int:
    cfg = _apply_seed(_load(args), args)
    if args.out:
        cfg = replace(cfg, output_dir=str(_out_dir(args, "campaign_out")))
    result = run_campaign(cfg)
    print(json.dumps(result.summary(), indent=2, sort_keys=True))
    if args.check:
        problems = check_campaign(cfg, result)
        if problems:
            for p in problems:
                print(f"CHECK FAILED: {p}", file=sys.stderr)
            return EXIT_CHECK
        print("all configured checks passed")
    return EXIT_OK


def cmd_theory_report(args) -> int:
    cfg = _load(args)
    out = _out_dir(args, "theory_out")
    report = theory_report(cfg, out_dir=out)
    print(json.dumps({
        "e_t": report["e_t"],
        "e_t_band": report["e_t_band"],
        "optimal_couplings": report["optimal_couplings"],
        "high_efficiency_enhancement": report["high_efficiency_enhancement"],
    }, indent=2))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sqzscan",
        description="squeezed-state receiver scan simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed=True):
        p.add_argument("--config", type=Path, default=None,
                       help="experiment config JSON (defaults to the built-in "
                            "desk configuration)")
        p.add_argument("--out", type=Path, default=None, help="output directory")
        if seed:
            p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("visibility", help="normalized visibility curves")
    common(p, seed=False)
    p.set_defaults(func=cmd_visibility)

    p = sub.add_parser("scanrate-grid", help="enhancement grid CSV")
    common(p, seed=False)
    p.add_argument("--eta", type=float, default=None)
    p.set_defaults(func=cmd_scanrate_grid)

    p = sub.add_parser("axion-params", help="physical to model parameters")
    common(p, seed=False)
    p.set_defaults(func=cmd_axion_params)

    p = sub.add_parser("synth", help="synthesize one raw run directory")
    common(p)
    p.add_argument("--receiver", choices=("squeezed", "unsqueezed"),
                   default="squeezed")
    p.add_argument("--format", choices=("auto", "csv", "f64"), default="auto")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("pipeline", help="process a run directory")
    common(p, seed=False)
    p.add_argument("run_dir", type=Path)
    p.add_argument("--dump-stages", action="store_true")
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("campaign", help="Monte Carlo campaign")
    common(p)
    p.add_argument("--check", action="store_true",
                   help="compare results against thresholds in the config")
    p.set_defaults(func=cmd_campaign)

    p = sub.add_parser("theory-report", help="analytic tables and figures")
    common(p, seed=False)
    p.set_defaults(func=cmd_theory_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as err:
        print(f"invalid parameter: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as err:
        print(f"numerical error: {err}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
