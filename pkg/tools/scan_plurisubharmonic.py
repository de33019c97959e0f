#!/usr/bin/env python3
"""
Plurisubharmonicity Scan

Tabulates, for a grid of gluing widths δ, the largest scale parameter a for
which the glued neck potential stays plurisubharmonic on u ∈ [1, 1+δ], and
the minimal metric eigenvalue at a fraction of that bound.

Usage:
    cd /path/to/kummerlab
    python tools/scan_plurisubharmonic.py --deltas 0.1,0.25,0.5,1.0

Output is a plain table on stdout; pass --output to also save it as CSV.
"""

import argparse
import csv
import logging
import os
import sys

# ---------------------------------------------------------------------------
# Constants
# ---------------------------------------------------------------------------

PROJECT_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, PROJECT_ROOT)

from configs import setup_logger  # noqa: E402,F401
from geometry.potentials import min_neck_eigenvalue, plurisubharmonic_bound  # noqa: E402
from utils.command_helpers import float_list  # noqa: E402
from utils.error_handler import ParameterRangeError  # noqa: E402

DEFAULT_DELTAS = "0.1,0.25,0.5,1.0"
SAFETY_FRACTION = 0.5


def scan(deltas, n_grid: int = 401, a_high: float = 2.0) -> list:
    rows = []
    for delta in deltas:
        try:
            a_max = plurisubharmonic_bound(delta, n_grid=n_grid, a_high=a_high)
        except ParameterRangeError as e:
            logging.warning(f"Skipping delta={delta}: {e}")
            continue
        rows.append({
            "delta": delta,
            "a_max": a_max,
            "a_safe": SAFETY_FRACTION * a_max,
            "min_eigenvalue_at_a_safe": min_neck_eigenvalue(SAFETY_FRACTION * a_max, delta, n_grid),
        })
    return rows


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="Largest plurisubharmonic a per gluing width")
    parser.add_argument("--deltas", type=float_list, default=float_list(DEFAULT_DELTAS))
    parser.add_argument("--n-grid", type=int, default=401)
    parser.add_argument("--a-high", type=float, default=2.0)
    parser.add_argument("--output", default=None)
    args = parser.parse_args(argv)

    rows = scan(args.deltas, args.n_grid, args.a_high)
    print(f"{'delta':>8}  {'a_max':>12}  {'a_safe':>12}  {'min eig @ a_safe':>18}")
    for row in rows:
        print(f"{row['delta']:>8.4g}  {row['a_max']:>12.6g}  {row['a_safe']:>12.6g}  "
              f"{row['min_eigenvalue_at_a_safe']:>18.6g}")

    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as f:
            writer = csv.DictWriter(f, fieldnames=["delta", "a_max", "a_safe", "min_eigenvalue_at_a_safe"])
            writer.writeheader()
            writer.writerows(rows)
        print(f"\nSaved {len(rows)} rows to {args.output}")
    return 0 if rows else 1


if __name__ == "__main__":
    sys.exit(main())
