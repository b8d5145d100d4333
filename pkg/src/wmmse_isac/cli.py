"""Command line entry point: ``wmmse-isac {solve,sweep,check}``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import montecarlo
from .channel import sample_scenario
from .checks import run_checks, small_scenario
from .exceptions import AggregationError, ConfigError, WMMSEISACError
from .files import (
    build_manifest,
    load_config,
    manifest_to_config,
    write_jsonl,
    write_manifest,
    write_sweep_csv,
    write_trace_csv,
)
from .metrics import weighted_sum_rate
from .solver import solve

logger = logging.getLogger("wmmse_isac")

OUT_ENV = "WMMSE_ISAC_OUT"
EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_PARTIAL = 0, 1, 2, 3


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", metavar="PATH", help="YAML or JSON config file")
    p.add_argument("--set", dest="overrides", metavar="KEY=VALUE", action="append", default=[],
                   help="override a config key (repeatable)")
    p.add_argument("--seed", type=int, help="channel seed (solve) or master seed (sweep)")
    p.add_argument("--out", metavar="DIR",
                   help=f"output directory (default: ${OUT_ENV} or ./results)")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wmmse-isac",
                                     description="WMMSE transceiver design for ISAC.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="optimize one channel realization")
    _common(p_solve)
    p_solve.add_argument("--trial", type=int, default=0, help="trial index of the realization")

    p_sweep = sub.add_parser("sweep", help="Monte-Carlo sweep")
    p_sweep.add_argument("which", choices=("omega", "snr", "tradeoff"))
    _common(p_sweep)
    p_sweep.add_argument("--trials", type=int, help="trials per sweep point")
    p_sweep.add_argument("--workers", type=int, default=montecarlo.default_workers())
    p_sweep.add_argument("--manifest", metavar="PATH",
                         help="rerun using the resolved config of a previous manifest")

    p_check = sub.add_parser("check", help="run the invariant/oracle suite on a small scenario")
    p_check.add_argument("--instances", type=int, default=5)
    p_check.add_argument("--seed", type=int, default=7)
    return parser


def _out_dir(args) -> Path:
    out = Path(args.out or os.environ.get(OUT_ENV) or "results")
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_solve(args) -> int:
    cfg, _ = load_config(args.config, args.overrides)
    if args.seed is not None:
        cfg = cfg.replace(seed=args.seed)
    channels = sample_scenario(cfg, args.trial)
    try:
        state = solve(channels, cfg)
    except WMMSEISACError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    report = weighted_sum_rate(channels, state.precoder, cfg)

    print(f"converged={state.converged} iterations={state.iterations} lambda={state.lam:.6g}")
    for k, r in enumerate(report.comm_rates):
        print(f"  user {k}: CMI rate {r:.6f} bits")
    print(f"  target: SMI rate {report.sense_rate:.6f} bits")
    print(f"  weighted sum rate {report.weighted_sum:.6f}")
    print("iter  objective        weighted_rate    lambda         power")
    for row in state.trace_rows():
        print(f"{row['iteration']:4d}  {row['objective']:<15.8g}  {row['weighted_rate']:<15.8g}  "
              f"{row['lambda']:<13.6g}  {row['power']:.6g}")

    out = _out_dir(args)
    outputs = {"trace": out / "trace.csv", "report": out / "report.json",
               "manifest": out / "manifest.json"}
    write_trace_csv(outputs["trace"], state.trace_rows())
    outputs["report"].write_text(json.dumps(
        {**report.to_dict(), **state.summary(), "trial": args.trial}, indent=2, sort_keys=True) + "\n")
    write_manifest(outputs["manifest"], build_manifest("solve", cfg, None, outputs))
    return EXIT_OK


def _progress(done, total):
    step = max(1, total // 10)
    if done % step == 0 or done == total:
        logger.info("%d/%d trials", done, total)


def cmd_sweep(args) -> int:
    if args.manifest:
        cfg, spec = manifest_to_config(json.loads(Path(args.manifest).read_text()))
        if spec is None:
            raise ConfigError("manifest", "manifest holds no sweep")
    else:
        cfg, spec = load_config(args.config, args.overrides)
    changes = {}
    if args.seed is not None:
        changes["master_seed"] = args.seed
    if args.trials is not None:
        changes["n_trials"] = args.trials
    if changes:
        spec = type(spec)(**{**{f: getattr(spec, f) for f in
                                ("omega_values", "snr_values_db", "n_trials", "master_seed",
                                 "base_config")}, **changes})

    try:
        result = montecarlo.run_sweep(spec, args.which, workers=max(1, args.workers),
                                      progress=_progress)
    except AggregationError as exc:
        print(f"sweep failed: {exc}", file=sys.stderr)
        return EXIT_PARTIAL

    out = _out_dir(args)
    outputs = {"aggregate": out / f"sweep_{args.which}.csv",
               "trials": out / f"trials_{args.which}.jsonl",
               "manifest": out / f"manifest_{args.which}.json"}
    write_sweep_csv(outputs["aggregate"], result.points)
    write_jsonl(outputs["trials"], (t.to_record() for t in result.trials))
    write_manifest(outputs["manifest"],
                   build_manifest(f"sweep {args.which}", spec.base_config, spec, outputs,
                                  workers=args.workers))
    for p in result.points:
        print(f"{p.sweep_param}={p.value:<6g} omega={p.omega:<5g} snr={p.snr_db:<5g} "
              f"CMI/UE={p.mean_cmi_per_ue:.4f}±{p.se_cmi:.4f}  SMI={p.mean_smi:.4f}±{p.se_smi:.4f}  "
              f"S&C={p.mean_sc_rate:.4f}  iters={p.mean_iters:.1f}  failed={p.n_failed}")
    print(f"wrote {outputs['aggregate']}")
    return EXIT_OK


def cmd_check(args) -> int:
    results = run_checks(small_scenario(seed=args.seed), n_instances=args.instances)
    for r in results:
        print(r.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_SOLVER


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handlers = {"solve": cmd_solve, "sweep": cmd_sweep, "check": cmd_check}
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
