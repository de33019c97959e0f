"""
kummerlab Main Module

Command-line entry point of the toolkit. It is responsible for:
  - Loading logging and numeric defaults from environment variables (.env).
  - Loading the command modules named in KUMMER_COMMANDS; each one registers
    its subcommands on the shared argparse parser:
      • curvature-profile, sigma, identity-check (commands.curvature)
      • geodesic, stability (commands.geodesic)
      • kummer-volumes, isometries (commands.kummer)
      • ma-scaling (commands.ma)
  - Running the selected subcommand, which writes a CSV or JSON report.
  - Mapping outcomes to exit codes: 0 when every check passes, 1 when a check
    fails or a numerical error occurs, 2 for usage and configuration errors.

Usage:
    python kummerlab.py curvature-profile --a 1.0 --format json
    python kummerlab.py kummer-volumes --a 0.1 --output volumes.csv
"""

from configs import setup_logger
import argparse
import importlib
import logging
import os
import sys

from dotenv import load_dotenv

from configs.version import __version__
from utils.error_handler import EXIT_OK, EXIT_USAGE, handle_error

load_dotenv()

DEFAULT_COMMANDS = "commands.curvature,commands.geodesic,commands.kummer,commands.ma"
KUMMER_COMMANDS = os.getenv("KUMMER_COMMANDS", DEFAULT_COMMANDS).split(",")


def build_parser(modules=None) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kummerlab",
        description="Numerical checks for Eguchi-Hanson necks and the glued Kummer K3 metric.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)

    for name in modules if modules is not None else KUMMER_COMMANDS:
        if not name.strip():
            continue
        try:
            importlib.import_module(name.strip()).register(subparsers)
        except Exception as e:
            logging.error(f"[ERROR] Failed to load command module '{name.strip()}': {e}", exc_info=True)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits 0 for --help/--version and 2 for bad usage
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    logging.info(f"kummerlab {__version__}: running '{args.command}'")
    try:
        args.handler(args)
    except Exception as e:
        return handle_error(e, args.command)
    logging.info(f"'{args.command}' passed all checks")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
