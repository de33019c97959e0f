"""
Shared helpers for command modules.
Reusable by any command that takes the common flags or writes a report.
"""
import argparse
import logging

import numpy as np

from configs.defaults import DELTA, LATTICE_SCALE, SEED, TRIALS
from geometry.kummer import KummerSurface
from utils.report_writer import FORMATS, build_metadata, write_report
from utils.surface_config import load_surface_config


def float_list(text: str) -> tuple:
    """argparse type for comma-separated floats, e.g. '0.02,0.05,0.1'."""
    try:
        values = tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got '{text}'")
    if not values:
        raise argparse.ArgumentTypeError("expected at least one number")
    return values


def positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got '{text}'")
    if not value > 0.0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {value}")
    return value


def add_common_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=SEED, help="RNG seed for randomized checks")
    parser.add_argument("--trials", type=int, default=TRIALS, help="number of randomized trials")
    parser.add_argument("--format", choices=FORMATS, default="csv", help="report format")
    parser.add_argument("--output", default=None, help="report path (stdout when omitted)")


def add_surface_arguments(parser: argparse.ArgumentParser, default_a: float = 0.05) -> None:
    parser.add_argument("--lattice-scale", type=positive_float, default=LATTICE_SCALE, help="lattice scale R")
    parser.add_argument("--a", type=float, default=default_a, help="common scale parameter of the 16 necks")
    parser.add_argument("--delta", type=positive_float, default=DELTA, help="gluing width")
    parser.add_argument("--lattice", choices=("square", "hexagonal"), default="square")
    parser.add_argument("--surface-config", default=None, help="JSON surface description; overrides the flags above")


def surface_from_args(args) -> KummerSurface:
    if getattr(args, "surface_config", None):
        return load_surface_config(args.surface_config)
    return KummerSurface.uniform(args.a, lattice_scale=args.lattice_scale, delta=args.delta, lattice=args.lattice)


def surface_parameters(surface: KummerSurface) -> dict:
    return {
        "lattice_scale": surface.lattice_scale,
        "a": list(surface.a),
        "delta": surface.delta,
        "lattice": surface.lattice,
        "cutoff_scale": surface.cutoff_scale,
    }


def rng_from_args(args) -> np.random.Generator:
    return np.random.default_rng(args.seed)


def emit_report(args, rows: list, parameters: dict, tolerances: dict = None, summary: dict = None) -> None:
    metadata = build_metadata(args.command, parameters, tolerances, getattr(args, "seed", None))
    write_report(rows, metadata, args.format, args.output, summary)
    logging.info(f"Command '{args.command}' finished with {len(rows)} rows")

