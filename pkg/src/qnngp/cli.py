"""Command-line front end for the experiment harness.

Exit codes: 0 all asserted properties hold, 2 a non-vacuous bound was
violated, 3 a hypothesis is unmet (informational), 1 operational failure.
"""

from __future__ import annotations

import argparse
import sys

from . import harness

_COMMANDS = {
    "calibrate": harness.cmd_calibrate,
    "lightcones": harness.cmd_lightcones,
    "init-gauss": harness.cmd_init_gauss,
    "train": harness.cmd_train,
    "lazy": harness.cmd_lazy,
    "bounds-report": harness.cmd_bounds_report,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qnngp",
        description="Desk-scale experiments on quantum neural network training dynamics",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in _COMMANDS.items():
        cmd = sub.add_parser(name, help=fn.__doc__.splitlines()[0] if fn.__doc__ else None)
        cmd.add_argument("--config", required=True, help="path to the experiment config JSON")
        cmd.add_argument("--seed", type=int, default=None, help="override the config seed")
        cmd.add_argument("--out", default=None, help="output directory (default runs/<command>-<seed>)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = harness.load_config_file(args.config)
    except harness.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    if args.seed is not None:
        config.seed = args.seed
    out_dir = args.out or f"runs/{args.command}-{config.seed}"
    try:
        summary, code = _COMMANDS[args.command](config, out_dir)
    except harness.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    print(f"{args.command}: wrote {out_dir} (exit {code})")
    return code


if __name__ == "__main__":
    sys.exit(main())
