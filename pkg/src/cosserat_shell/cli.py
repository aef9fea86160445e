"""Batch front end: ``cosserat-shell {verify,reduce,integrate,solve,compare} --config run.ini``.

Exit status: 0 success, 1 a check or the solver failed, 2 bad invocation or config.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import __version__

COMMANDS = ("verify", "reduce", "integrate", "solve", "compare")


def _limit_threads(n: int) -> None:
    # only effective before numpy/jax load their thread pools
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(var, str(n))
    flags = os.environ.get("XLA_FLAGS", "")
    if "intra_op_parallelism_threads" not in flags:
        os.environ["XLA_FLAGS"] = (flags + f" --xla_cpu_multi_thread_eigen=false intra_op_parallelism_threads={n}").strip()


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cosserat-shell", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, help="INI run configuration")
    p.add_argument("--seed", type=int, help="override run.seed")
    p.add_argument("--out", help="override run.out (output directory)")
    p.add_argument("--tol", type=float, help="override every suite tolerance")
    p.add_argument("--threads", type=int, help="override run.threads")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads is not None:
        if args.threads < 1:
            print("error: --threads must be positive", file=sys.stderr)
            return 2
        _limit_threads(args.threads)

    from .config import parse_config
    from .errors import ConfigError
    from . import commands

    try:
        cfg = parse_config(args.config)
        cfg = commands.apply_overrides(cfg, seed=args.seed, out=args.out, tol=args.tol, threads=args.threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        os.makedirs(cfg.run.out, exist_ok=True)
    except OSError as exc:
        print(f"config error: output directory not writable: {exc}", file=sys.stderr)
        return 2
    return commands.execute(args.command, cfg)


if __name__ == "__main__":
    sys.exit(main())
