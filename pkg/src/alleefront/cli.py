"""Command-line entry point: simulate / certify / analyze.

Exit codes: 0 success, 1 usage or configuration error, 2 numerical failure,
3 certification failure.  Any configuration key can be overridden through
the environment (run.dt -> ALLEEFRONT_RUN_DT).
"""

from __future__ import annotations

import argparse
import sys

from .config import ConfigError, parse_config
from .runner import (
    EXIT_USAGE,
    CommandError,
    analyze_cmd,
    certify_cmd,
    simulate_cmd,
)


class _Parser(argparse.ArgumentParser):
    # spec reserves exit code 1 for usage errors (argparse defaults to 2)
    def error(self, message):
        self.print_usage(sys.stderr)
        raise CommandError(message, EXIT_USAGE)


def _build_parser():
    parser = _Parser(prog="alleefront", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run a front simulation")
    p_sim.add_argument("config", help="configuration file (key = value lines)")
    p_sim.add_argument("--out", default="alleefront_out", help="output directory")

    p_cert = sub.add_parser("certify", help="certify subsolution inequalities")
    p_cert.add_argument("config")
    p_cert.add_argument("--out", default="alleefront_out")

    p_an = sub.add_parser("analyze", help="recompute diagnostics from a stored run")
    p_an.add_argument("config")
    p_an.add_argument("run_dir", help="directory produced by simulate")
    p_an.add_argument("--out", default="alleefront_out")
    return parser


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        with open(args.config, "r", encoding="utf-8") as fh:
            text = fh.read()
        cfg = parse_config(text)
        if args.command == "simulate":
            return simulate_cmd(cfg, args.out)
        if args.command == "certify":
            return certify_cmd(cfg, args.out)
        return analyze_cmd(cfg, args.run_dir, args.out)
    except CommandError as exc:
        print("alleefront: %s" % exc, file=sys.stderr)
        return exc.code
    except ConfigError as exc:
        print("alleefront: config error: %s" % exc, file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print("alleefront: %s" % exc, file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
