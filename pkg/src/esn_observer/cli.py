"""Command-line front end: ``generate``, ``run``, ``sweep <parameter>``, ``compare``.

Exit status is 0 on success, 1 for usage or configuration errors and 2 for
pipeline or numerical failures.
"""

from __future__ import annotations

import argparse
import logging
import sys
import warnings
from pathlib import Path

from . import io, svg
from .config import ConfigError, RunConfig, format_config, parse_config, parse_override
from .dynamics import DivergenceError, generate_trajectory
from .harness import (
    PAPER_KINDS,
    PlanError,
    SweepError,
    compare_topologies,
    median_by_value,
    run_pipeline,
    run_sweep,
)
from .reservoir import EchoStateWarning, ReadoutError
from .topology import SpectralRadiusError, TopologyError, TopologyKind

log = logging.getLogger("esn_observer")

EXIT_USAGE = 1
EXIT_PIPELINE = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="key=value configuration file")
    common.add_argument("--out", type=Path, help="output directory (overrides out_dir)")
    common.add_argument("--seed", type=int, help="sets both seed and master_seed")
    common.add_argument("--seeds-per-value", type=int, dest="seeds_per_value")
    common.add_argument("--workers", type=int)
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override one configuration key (repeatable)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="esn-observer",
                     description="Echo state network observer for the Rössler system.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("generate", parents=[common], help="write the Rössler trajectory CSV")
    run = sub.add_parser("run", parents=[common], help="train and evaluate one observer")
    run.add_argument("--self-test", action="store_true",
                     help="score predictions against themselves (MSE must be 0)")
    sweep = sub.add_parser("sweep", parents=[common], help="single-parameter sweep")
    sweep.add_argument("parameter", help="one of N, D, T0, T1, T2, delta")
    sweep.add_argument("--values", help="A:inc:B or comma list, replaces the default list")
    sweep.add_argument("--timing", action="store_true",
                       help="fill wall_seconds (makes the CSV run-dependent)")
    compare = sub.add_parser("compare", parents=[common], help="compare reservoir topologies")
    compare.add_argument("--topologies", help="comma list (default: all four)")
    return parser


def load_config(args) -> RunConfig:
    text = args.config.read_text() if args.config else ""
    overrides: dict = {}
    for item in args.set:
        overrides.update(parse_override(item))
    if args.seed is not None:
        overrides["seed"] = overrides["master_seed"] = args.seed
    for key in ("seeds_per_value", "workers"):
        if getattr(args, key) is not None:
            overrides[key] = getattr(args, key)
    if args.out is not None:
        overrides["out_dir"] = str(args.out)
    if getattr(args, "values", None):
        overrides["sweep_values"] = args.values
    return parse_config(text, overrides)


def _outdir(cfg: RunConfig) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "manifest.txt").write_text(format_config(cfg))
    return out


def cmd_generate(cfg: RunConfig) -> int:
    out = _outdir(cfg)
    traj = generate_trajectory(cfg.rossler_params(), (cfg.x0, cfg.y0, cfg.z0), cfg.dt, cfg.t2)
    io.write_trajectory(out / "trajectory.csv", traj)
    print(f"{len(traj)} samples -> {out / 'trajectory.csv'}")
    return 0


def cmd_run(cfg: RunConfig, self_test: bool = False) -> int:
    out = _outdir(cfg)
    result = run_pipeline(cfg.reservoir_config(), cfg.times(), cfg.rossler_params(),
                          (cfg.x0, cfg.y0, cfg.z0), self_test=self_test)
    io.write_predictions(out / "predictions.csv", result.truth, result.predicted)
    io.save_snapshot(out / "model", result.observer)
    (out / "mse.txt").write_text(f"mse={io.fmt_float(result.mse)}\n")
    print(f"mse={io.fmt_float(result.mse)}")
    return 0


def cmd_sweep(cfg: RunConfig, parameter: str, timing: bool = False) -> int:
    plan = cfg.plan(parameter)
    out = _outdir(cfg)
    records = run_sweep(plan, workers=cfg.workers)
    csv_path = out / f"sweep_{parameter}.csv"
    io.write_sweep_csv(csv_path, records, timing=timing)
    meds = median_by_value(records)
    chart = svg.sweep_plot(parameter, [(r.value, r.mse) for r in records],
                           [(v, m) for v, m, _ in meds],
                           title=f"{cfg.topology}: median MSE vs {parameter}")
    (out / f"sweep_{parameter}.svg").write_text(chart)
    excluded = sum(n for _, _, n in meds)
    print(f"{len(records)} trials -> {csv_path} ({excluded} failed trials excluded from medians)")
    return 0


def cmd_compare(cfg: RunConfig, topologies: str | None = None) -> int:
    kinds = PAPER_KINDS
    if topologies:
        kinds = tuple(TopologyKind.parse(k) for k in topologies.split(",") if k.strip())
    plan = cfg.plan()
    out = _outdir(cfg)
    records = compare_topologies(plan, kinds, workers=cfg.workers)
    io.write_comparison_csvs(out, records)
    chart = svg.bar_chart([r.topology.value for r in records], [r.median_mse for r in records],
                          [r.reference_mse for r in records])
    (out / "comparison.svg").write_text(chart)
    for r in records:
        ref = f" (published {r.reference_mse})" if r.reference_mse is not None else ""
        print(f"{r.topology.value:16s} median={io.fmt_float(r.median_mse)} "
              f"ok={r.n_ok} failed={r.n_failed}{ref}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if not args.verbose:
        warnings.simplefilter("ignore", EchoStateWarning)
    try:
        cfg = load_config(args)
        if args.command == "generate":
            return cmd_generate(cfg)
        if args.command == "run":
            return cmd_run(cfg, args.self_test)
        if args.command == "sweep":
            return cmd_sweep(cfg, args.parameter, args.timing)
        return cmd_compare(cfg, args.topologies)
    except (ConfigError, PlanError, TopologyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DivergenceError, SweepError, ReadoutError, SpectralRadiusError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PIPELINE


if __name__ == "__main__":
    sys.exit(main())
