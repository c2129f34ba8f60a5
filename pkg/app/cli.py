"""Command-line entry point.

    python -m app.cli generate --bdf "min(x1,x2)" --n 1024 --seed 42
    python -m app.cli volume-check --bdf "max(x1,min(x2,x3))"
    python -m app.cli scaling-study --bdf "max(x1,min(x2,x3))" --n-grid 1024 2048 --seeds 0 1
    python -m app.cli two-round --bdf "min(x1,x2)" --n 8192 --delta 0.05
    python -m app.cli analyze --input out/girg_n1024_s42

Exit codes: 0 success, 2 validation, 3 IO, 4 internal invariant breach.
"""
import argparse
import logging
import sys
from typing import Callable, Dict, List, Optional

from app.config import ExperimentConfig, configure_logging, resolve_config
from app.errors import GirgError
from app.experiments import (
    run_analyze,
    run_generate,
    run_scaling_study,
    run_two_round,
    run_volume_check,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INTERNAL = 4


def _shared(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with ExperimentConfig fields")
    p.add_argument("--bdf", help='BDF source, e.g. "max(x1,min(x2,x3))"')
    p.add_argument("--n", type=int)
    p.add_argument("--beta", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--c", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--out-dir", dest="out_dir")
    p.add_argument("--delta", type=float)
    p.add_argument("--l", type=float)
    p.add_argument("--workers", type=int)
    p.add_argument("--log-level", dest="log_level")
    p.add_argument("--seeds", type=int, nargs="+")
    p.add_argument("--n-grid", dest="n_grid", type=int, nargs="+")
    p.add_argument("--epsilons", type=float, nargs="+")
    p.add_argument("--radii", type=float, nargs="+")
    p.add_argument("--offsets", type=float, nargs="+")
    p.add_argument("--samples", type=int)
    p.add_argument("--cell-fractions", dest="cell_fractions", type=float, nargs="+")
    p.add_argument("--steps", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="girg", description="BDF-GIRG experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    _shared(sub.add_parser("generate", help="sample one instance and write its CSV files"))
    _shared(sub.add_parser("volume-check", help="exact vs Monte Carlo ball volumes"))
    _shared(sub.add_parser("scaling-study", help="generate + analyze over an n-grid and seeds"))
    _shared(sub.add_parser("two-round", help="phased two-round exposure of a non-SCOM BDF"))
    p = sub.add_parser("analyze", help="analyze an instance already on disk")
    _shared(p)
    p.add_argument("--input", dest="input_prefix", required=True,
                   help="file prefix written by generate (without _edges.csv)")
    return parser


COMMANDS: Dict[str, Callable[[ExperimentConfig], dict]] = {
    "generate": run_generate,
    "volume-check": run_volume_check,
    "scaling-study": run_scaling_study,
    "two-round": run_two_round,
    "analyze": run_analyze,
}


def _overrides(args: argparse.Namespace) -> dict:
    skip = {"command", "config", "log_level"}
    return {k: v for k, v in vars(args).items() if k not in skip}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        configure_logging(args.log_level)
        cfg = resolve_config(args.config, _overrides(args))
        result = COMMANDS[args.command](cfg)
    except GirgError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except Exception as e:
        logger.exception("unexpected failure in %s", args.command)
        print(f"internal error: {e}", file=sys.stderr)
        return EXIT_INTERNAL

    meta = result.get("metadata", {})
    print(f"{args.command}: done in {meta.get('latency_ms', 0)} ms (out: {cfg.out_dir})")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
