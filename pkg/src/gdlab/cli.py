"""Command-line front end.

Exit codes: 0 success, 1 configuration or I/O error (including bad flags),
2 when ``verify`` finds a failed check.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .config import (
    ConfigError,
    ExperimentConfig,
    GridCell,
    ObjectiveSpec,
    config_from_dict,
    default_grid,
    load_config,
    manifest,
    save_records,
    write_manifest,
)
from .experiments import FigureError, TrajectoryRecorder, export_figure1, run_experiment
from .init import SCALAR_NEAR_ONE, SEED_LIMIT, InitScheme, draw_matrix_init, draw_scalar_init
from .matrix_core import matrix_run
from .scalar_core import ScalarLoss, StepPlan, scalar_run
from .util import atomic_write_text

SEED_ENV = "GDLAB_SEED"

FIG1_K = 7
FIG1_ETA = 1e-2
FIG1_SEED = 0
FIG2_ETA = 1e-3
FIG2_CAP = 10**7
FIG2_K_MAX = 5
FIG2_TRIALS = 10


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message} (see --help)")


def _u64(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if not 0 <= value < SEED_LIMIT:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _cap(text: str) -> int:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a number") from None
    if not (value >= 1 and value == int(value)):
        raise argparse.ArgumentTypeError("cap must be a positive integer such as 1e7")
    return int(value)


def _parallelism(text: str):
    if text == "auto":
        return "auto"
    return _positive_int(text)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gdlab", description="Gradient descent on deep linear networks.")
    parser.add_argument("--version", action="version", version=f"gdlab {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)

    def common(p, config=True, sweep=False):
        if config:
            p.add_argument("--config", metavar="PATH", help="JSON experiment config")
        p.add_argument("--seed", type=_u64, metavar="U64",
                       help=f"master seed (falls back to ${SEED_ENV}, then the config)")
        p.add_argument("--out", metavar="DIR", help="output directory")
        if sweep:
            p.add_argument("--parallelism", type=_parallelism, metavar="N", help="worker processes or 'auto'")
            p.add_argument("--cap", type=_cap, metavar="FLOAT", help="iteration cap, e.g. 1e7")
            p.add_argument("--trials", type=int, metavar="N", help="trials per grid cell")
            p.add_argument("--k-max", type=_positive_int, metavar="N", help="drop grid cells with k > N")

    p = sub.add_parser("simulate", help="one trajectory: CSV + SVG")
    common(p, sweep=True)
    p.add_argument("--trial", type=int, default=0, metavar="N", help="trial index of the first grid cell")

    p = sub.add_parser("experiment", help="full sweep: trials.csv, summary.csv, figure2.svg")
    common(p, sweep=True)

    p = sub.add_parser("verify", help="run the lemma checks and write a JSON report")
    common(p, config=False)
    p.add_argument("--quick", action="store_true", help="about 10x fewer samples")

    p = sub.add_parser("paper-fig1", help="k=7 trajectory from a near-one initialization")
    common(p, config=False)

    p = sub.add_parser("paper-fig2", help="desk-scale multi-dimensional sweep")
    common(p, config=False, sweep=True)
    return parser


def _resolve_seed(args, fallback: int) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env:
        try:
            return _u64(env)
        except argparse.ArgumentTypeError as exc:
            raise ConfigError(SEED_ENV, str(exc)) from None
    return fallback


def _apply_overrides(config: ExperimentConfig, args) -> ExperimentConfig:
    changes = {"master_seed": _resolve_seed(args, config.master_seed)}
    if getattr(args, "trials", None) is not None:
        if args.trials < 1:
            raise ConfigError("trials", "must be >= 1")
        changes["trials"] = args.trials
    if getattr(args, "cap", None) is not None:
        changes["plan"] = replace(config.plan, max_iters=args.cap)
    if getattr(args, "parallelism", None) is not None:
        changes["parallelism"] = args.parallelism
    if getattr(args, "k_max", None) is not None:
        grid = tuple(c for c in config.grid if c.k <= args.k_max)
        if not grid:
            raise ConfigError("grid", f"no cells left with k <= {args.k_max}")
        changes["grid"] = grid
    if args.out is not None:
        changes["output_dir"] = args.out
    return replace(config, **changes)


def _load(args) -> ExperimentConfig:
    if not args.config:
        raise ConfigError("", f"{args.command} needs --config PATH")
    return _apply_overrides(load_config(args.config), args)


def _out_dir(path) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError("output_dir", f"cannot create {out}: {exc.strerror}") from None
    if not os.access(out, os.W_OK):
        raise ConfigError("output_dir", f"{out} is not writable")
    return out


def _simulate(config: ExperimentConfig, trial: int, out: Path, command: str, prefix: str) -> dict:
    cell = config.grid[0]
    scheme = cell.scheme.for_trial(config.master_seed, trial)
    rec = TrajectoryRecorder(config.thinning["policy"], config.thinning["value"],
                             sign_events=config.objective.kind == "scalar")
    if config.objective.kind == "scalar":
        result = scalar_run(draw_scalar_init(scheme, cell.k), config.objective.loss(), config.plan, rec)
    else:
        result = matrix_run(draw_matrix_init(scheme, cell.k, cell.d), config.objective.target(cell.d),
                            config.plan, rec)
    run_info = {"scheme": scheme.scheme_id, "k": cell.k, "d": cell.d, "trial": trial,
                "status": result.status.value, "iterations": result.iterations,
                "final_objective": result.final_objective, "sign_events": rec.events}
    try:
        paths = export_figure1(rec, out, prefix=prefix)
    except FigureError as exc:
        print(f"warning: {exc}", file=sys.stderr)
        paths = {"csv": out / f"{prefix}.csv"}
    write_manifest(out, manifest(config, command, {"run": run_info}))
    print(f"{result.status.value} after {result.iterations} iterations "
          f"(objective {result.final_objective:.6g}); wrote {', '.join(str(p) for p in paths.values())}")
    return run_info


def cmd_simulate(args) -> int:
    config = _load(args)
    if args.trial < 0:
        raise ConfigError("trial", "must be >= 0")
    _simulate(config, args.trial, _out_dir(config.output_dir), "simulate", "trajectory")
    return 0


def _sweep(config: ExperimentConfig, command: str) -> int:
    out = _out_dir(config.output_dir)
    records = run_experiment(config)
    paths = save_records(records, out, config, command)
    print(f"{len(records)} trials; wrote {', '.join(str(p) for p in paths.values())}")
    return 0


def cmd_experiment(args) -> int:
    return _sweep(_load(args), "experiment")


def fig1_config(seed: int = FIG1_SEED, output_dir: str = "results/fig1") -> ExperimentConfig:
    """Scalar quadratic target -1, k=7, coordinates uniform within 1/k of one."""
    return ExperimentConfig(
        plan=StepPlan(FIG1_ETA, 10**8, 0.1),
        objective=ObjectiveSpec("scalar", "quadratic", -1.0),
        grid=(GridCell(InitScheme(SCALAR_NEAR_ONE), FIG1_K, 1),),
        trials=1,
        master_seed=seed,
        thinning={"policy": "geometric", "value": 1.01},
        output_dir=output_dir,
    )


def fig2_config(seed: int = 0, cap: int = FIG2_CAP, k_max: int = FIG2_K_MAX, trials: int = FIG2_TRIALS,
                parallelism=1, output_dir: str = "results/fig2") -> ExperimentConfig:
    """d=25, Y=-I, eta=1e-3, threshold 0.1, three initialization schemes."""
    return ExperimentConfig(
        plan=StepPlan(FIG2_ETA, cap, 0.1),
        grid=tuple(default_grid(range(2, k_max + 1))),
        trials=trials,
        master_seed=seed,
        output_dir=output_dir,
        parallelism=parallelism,
    )


def cmd_paper_fig1(args) -> int:
    config = fig1_config(_resolve_seed(args, FIG1_SEED), args.out or "results/fig1")
    _simulate(config, 0, _out_dir(config.output_dir), "paper-fig1", "figure1")
    return 0


def cmd_paper_fig2(args) -> int:
    if args.trials is not None and args.trials < 1:
        raise ConfigError("trials", "must be >= 1")
    config = fig2_config(
        _resolve_seed(args, 0),
        cap=args.cap or FIG2_CAP,
        k_max=args.k_max or FIG2_K_MAX,
        trials=args.trials or FIG2_TRIALS,
        parallelism=args.parallelism or 1,
        output_dir=args.out or "results/fig2",
    )
    if args.k_max is not None and args.k_max < 2:
        raise ConfigError("k_max", "must be >= 2")
    return _sweep(config, "paper-fig2")


def cmd_verify(args) -> int:
    from .theory_checks import verify_suite

    seed = _resolve_seed(args, 42)
    out = _out_dir(args.out or "results/verify")
    reports = verify_suite(seed=seed, quick=args.quick)
    doc = {name: rep.to_dict() for name, rep in reports.items()}
    path = atomic_write_text(out / "verify.json", json.dumps(doc, indent=2, sort_keys=True) + "\n")
    failed = [name for name, rep in reports.items() if not rep.passed]
    write_manifest(out, {"tool": "gdlab", "version": __version__, "command": "verify",
                         "master_seed": seed, "quick": args.quick})
    for name, rep in reports.items():
        print(f"{'PASS' if rep.passed else 'FAIL'} {name}: {rep.n_instances} instances, "
              f"{rep.n_violations} violations")
    print(f"wrote {path}")
    return 2 if failed else 0


COMMANDS = {
    "simulate": cmd_simulate,
    "experiment": cmd_experiment,
    "verify": cmd_verify,
    "paper-fig1": cmd_paper_fig1,
    "paper-fig2": cmd_paper_fig2,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("gdlab: a command is required (see --help)")
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc.filename or ''}: {exc.strerror}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
