"""Command-line entry point.

    dickebattery simulate --config run.cfg --out series.csv
    dickebattery steady   --config run.cfg --out steady.csv
    dickebattery sweep    --config sweep.cfg --out grid.csv
    dickebattery compare  --F 0.5 --g1 0.1 --g2 0.1
    dickebattery validate [--quick]

Exit codes: 0 success, 1 configuration error, 2 numerical failure,
3 validation-suite failure. ``DICKEBATTERY_JOBS`` caps sweep parallelism.
"""
from __future__ import annotations

import argparse
import logging
import sys
from typing import Optional, Sequence

from . import csvio
from .config import ConfigError, RunConfig, parse_config
from .dynamics import IntegrationError, IntegratorConfig
from .experiments import (
    STEADY_CFG,
    SteadyCriteria,
    compare_baselines,
    parallelism,
    provenance,
    run_sweep,
    run_time_series,
    steady_report,
)
from .model import ModelError, build_model
from .thermo import NumericalConsistencyError
from .validation import run_validation

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_VALIDATE = 0, 1, 2, 3

log = logging.getLogger("dickebattery")


def _load(path: str) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", line=None) from None
    if text.lstrip().startswith("#") and "\n# kind =" in text:
        # an output file: rerun from its provenance header
        text = csvio.config_from_header(text)
    return parse_config(text)


def _emit(text: str, out: Optional[str]):
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        log.info("wrote %s", out)


def _header(cfg: RunConfig, integrator: IntegratorConfig, steady=None):
    dim = build_model(cfg.params).dim
    return provenance(cfg.params, integrator, steady, truncation_dim=dim)


def cmd_simulate(args) -> int:
    cfg = _load(args.config)
    if cfg.sweep is not None:
        raise ConfigError("simulate takes no sweep axes; use the sweep subcommand", "sweep")
    traj = run_time_series(cfg.params, cfg.integrator)
    _emit(csvio.time_series_csv(traj, _header(cfg, cfg.integrator)), args.out or cfg.output_path)
    return EXIT_OK


def cmd_steady(args) -> int:
    cfg = _load(args.config)
    if cfg.sweep is not None:
        raise ConfigError("steady takes no sweep axes; use the sweep subcommand", "sweep")
    # a steady run needs a long horizon unless the user chose one
    integrator = cfg.integrator if "integrator.t_end" in cfg.explicit else STEADY_CFG
    report = steady_report(cfg.params, integrator, cfg.steady, args.observable)
    text = csvio.steady_csv(report, _header(cfg, integrator, cfg.steady))
    _emit(text, args.out or cfg.output_path)
    if not report.reached:
        log.warning("no steady state within t_end=%g", integrator.t_end)
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _load(args.config)
    if cfg.sweep is None:
        raise ConfigError("no sweep axes given (write e.g. 'sweep.g2 = 0:0.1:0.01')", "sweep")
    jobs = args.jobs or cfg.parallelism or parallelism()
    result = run_sweep(cfg.sweep, jobs)
    _emit(csvio.sweep_csv(result), args.out or cfg.output_path)
    return EXIT_OK


def cmd_compare(args) -> int:
    for name in ("F", "g1", "g2"):
        if getattr(args, name) < 0:
            raise ConfigError("must be >= 0", name)
    integrator = STEADY_CFG if args.t_end is None else IntegratorConfig(t_end=args.t_end)
    steady = SteadyCriteria()
    report = compare_baselines(args.F, args.g1, args.g2, integrator, steady)
    header = provenance(None, integrator, steady,
                        **{"compare.F": args.F, "compare.g1": args.g1, "compare.g2": args.g2})
    _emit(csvio.compare_csv(report, header), args.out)
    e0, e1, e2 = report.values
    print(f"direct {e0:.4f} < linear {e1:.4f} < nonlinear {e2:.4f}: "
          f"{'holds' if report.ordered else 'VIOLATED'}", file=sys.stderr)
    return EXIT_OK


def cmd_validate(args) -> int:
    results = run_validation(quick=args.quick)
    for r in results:
        print(r.line())
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return EXIT_VALIDATE if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dickebattery", description="Open Dicke quantum battery simulator")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="time series of battery and cavity observables")
    s.add_argument("--config", required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("steady", help="steady-state time and value")
    s.add_argument("--config", required=True)
    s.add_argument("--out")
    s.add_argument("--observable", default="battery_ergotropy",
                   choices=("battery_ergotropy", "battery_energy", "aux_energy", "aux_ergotropy"))
    s.set_defaults(func=cmd_steady)

    s = sub.add_parser("sweep", help="grid of a steady-state observable")
    s.add_argument("--config", required=True)
    s.add_argument("--out")
    s.add_argument("--jobs", type=int, help="worker processes (default: $DICKEBATTERY_JOBS or 1)")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("compare", help="no-cavity vs linear vs nonlinear steady ergotropy")
    s.add_argument("--F", type=float, default=0.5)
    s.add_argument("--g1", type=float, default=0.1)
    s.add_argument("--g2", type=float, default=0.1)
    s.add_argument("--t-end", type=float, dest="t_end")
    s.add_argument("--out")
    s.set_defaults(func=cmd_compare)

    s = sub.add_parser("validate", help="run the invariant and oracle suite")
    s.add_argument("--quick", action="store_true", help="fewer Monte-Carlo samples")
    s.set_defaults(func=cmd_validate)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, ModelError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (IntegrationError, NumericalConsistencyError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
