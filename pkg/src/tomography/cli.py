"""Command-line entry point: ``tomography <subcommand> --config FILE``.

Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 runtime error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .config import KINDS, ConfigError, load_config, parse_config
from .neural.data import IdxFormatError
from .neural.linearized import JacobianTooLarge
from .numerics import DegenerateBasisError
from .runner import OutputError, run_sweep

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_RUNTIME = 0, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tomography", description="Training-dimension threshold sweeps.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for kind in KINDS:
        p = sub.add_parser(kind, help=f"run a {kind} experiment")
        p.add_argument("--config", help="JSON experiment config (defaults used if omitted)")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int, help="master seed")
        p.add_argument("--workers", type=int, help="parallel worker processes")
        p.add_argument("--svg", action="store_true", help="also write phase-map SVGs")
    return parser


def _config_for(args):
    config = load_config(args.config) if args.config else parse_config({"kind": args.command})
    if config.kind != args.command:
        raise ConfigError(f"kind: config says {config.kind!r} but subcommand is {args.command!r}")
    return config.with_overrides(seed=args.seed, out=args.out, svg=True if args.svg else None)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _config_for(args)
        if args.workers is not None and args.workers < 1:
            raise ConfigError("workers: must be at least 1")
        result = run_sweep(config, workers=args.workers)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (OutputError, IdxFormatError) as err:
        print(f"i/o error: {err}", file=sys.stderr)
        return EXIT_IO
    except OSError as err:
        print(f"i/o error: {err}", file=sys.stderr)
        return EXIT_IO
    except (DegenerateBasisError, JacobianTooLarge, FloatingPointError, ValueError) as err:
        print(f"runtime error: {err}", file=sys.stderr)
        return EXIT_RUNTIME
    summary = {"experiment": config.experiment, "out": str(result.out_dir),
               "files": sorted(result.files)}
    print(json.dumps(summary))
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
