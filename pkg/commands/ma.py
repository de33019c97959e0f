"""
Monge-Ampère Commands

  - ma-scaling: the radial neck-correction experiment over an a-grid, with the
    log-log slopes of sup|φ| and sup|Δφ| in a, and the Eguchi-Hanson recovery
    check of the radial solver.
"""

import logging

import numpy as np

from configs.defaults import A_GRID, SCALING_DELTA, THREADS
from geometry.ma_radial import ma_scaling, norm_ma_residual, solve_radial_ma
from utils.command_helpers import add_common_arguments, emit_report, float_list, positive_float
from utils.error_handler import require

SLOPE_TARGET = 2.0
SLOPE_TOL = 0.2
SLACK_TOL = -1e-12
RECOVERY_TOL = 1e-12
NORM_MA_TOL = 1e-10


def eguchi_hanson_recovery(a: float = 1.0, u_max: float = 5.0, n_grid: int = 51) -> tuple:
    """
    Solve Φ'(uΦ')' = 1 with uΦ' = a at u = 0 and compare with the closed form.

    Returns (max |Φ' − √(a²+u²)/u|, normalized Monge-Ampère residual).
    """
    solution = solve_radial_ma(lambda u: 1.0, a, (0.0, u_max), n_grid=n_grid)
    grid = solution.grid[1:]
    error = float(np.abs(solution.phi_prime[1:] - np.sqrt(a * a + grid * grid) / grid).max())
    return error, norm_ma_residual(solution)


def scaling(args) -> None:
    report = ma_scaling(args.a_grid, args.delta, args.threads, n_grid=args.n_grid)
    rows = [row.as_dict() for row in report.rows]
    recovery, norm_ma = eguchi_hanson_recovery()
    summary = {
        "phi_slope": report.phi_slope,
        "laplacian_slope": report.laplacian_slope,
        "min_slack": min(row.min_slack for row in report.rows),
        "min_lap_phi_over_a2": min(row.min_laplacian / row.a ** 2 for row in report.rows if row.a > 0.0),
        "eguchi_hanson_recovery": recovery,
        "eguchi_hanson_norm_ma": norm_ma,
    }
    emit_report(
        args, rows,
        {"a_grid": list(args.a_grid), "delta": args.delta, "n_grid": args.n_grid},
        {"slope": SLOPE_TOL, "slack": SLACK_TOL, "recovery": RECOVERY_TOL, "norm_ma": NORM_MA_TOL},
        summary,
    )
    require(abs(report.phi_slope - SLOPE_TARGET) <= SLOPE_TOL, "phi_scaling_slope",
            f"slope {report.phi_slope:.4f}")
    require(summary["min_slack"] >= SLACK_TOL, "arithmetic_geometric_bound")
    require(recovery < RECOVERY_TOL, "eguchi_hanson_recovery", f"error {recovery:.3e}")
    require(norm_ma < NORM_MA_TOL, "norm_ma_identity", f"residual {norm_ma:.3e}")


def register(subparsers) -> None:
    parser = subparsers.add_parser("ma-scaling", help="radial Monge-Ampère neck correction over an a-grid")
    add_common_arguments(parser)
    parser.add_argument("--a-grid", type=float_list, default=A_GRID)
    parser.add_argument("--delta", type=positive_float, default=SCALING_DELTA)
    parser.add_argument("--n-grid", type=int, default=151)
    parser.add_argument("--threads", type=int, default=THREADS)
    parser.set_defaults(handler=scaling)

    logging.info("Monge-Ampere commands loaded")
