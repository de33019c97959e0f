"""
Kummer Surface Commands

  - kummer-volumes: per-neck volume deficits, the constant A, chart overlap
    consistency and the homothety residuals of the patchwork metric.
  - isometries: the isometry group for equal scale parameters, its element
    orders, and the checks on the special isometry and its fixed torus.
"""

import logging

from geometry.isometries import (
    homothety_check,
    isometry_group,
    isometry_maps_regions,
    special_element,
    special_torus_checks,
)
from geometry.kummer import N_FIXED_POINTS, chart_consistency_check, volumes_and_A
from utils.command_helpers import (
    add_common_arguments,
    add_surface_arguments,
    emit_report,
    float_list,
    rng_from_args,
    surface_from_args,
    surface_parameters,
)
from utils.error_handler import require

DEFICIT_TOL = 1e-8
A_TOL = 1e-10
CHART_TOL = 1e-12
HOMOTHETY_TOL = 1e-11
GROUP_SIZE = 512
MAX_ORDER = 8
POTENTIAL_TOL = 1e-12
TANGENT_DRIFT_TOL = 1e-9
TORUS_EIGEN_TOL = -1e-8


# ═══════════════════════════════════════════════════════════════════════
# kummer-volumes
# ═══════════════════════════════════════════════════════════════════════

def kummer_volumes(args) -> None:
    surface = surface_from_args(args)
    rng = rng_from_args(args)
    report = volumes_and_A(surface)
    rows = []
    for index in range(N_FIXED_POINTS):
        closed = report.closed_form[index]
        rows.append({
            "neck": index,
            "a": surface.a[index],
            "deficit": report.deficits[index],
            "boundary_deficit": report.boundary_deficits[index],
            "closed_form": closed,
            "relative_error": abs(report.deficits[index] - closed) / closed if closed > 0.0 else 0.0,
        })

    charts = chart_consistency_check(surface, rng, n_points=min(args.trials, 100))
    homothety = [homothety_check(surface, alpha, rng, n_points=min(args.trials, 100)) for alpha in args.alpha]
    summary = {
        "A": report.A,
        "A_closed_form": report.A_closed_form,
        "max_relative_error": report.max_relative_error,
        "chart_flat_vs_eguchi_hanson": charts["flat_vs_eguchi_hanson"],
        "chart_bundle_vs_orbifold": charts["bundle_vs_orbifold"],
        "homothety": homothety,
    }
    parameters = surface_parameters(surface)
    parameters["alpha"] = list(args.alpha)
    emit_report(
        args, rows, parameters,
        {"deficit": DEFICIT_TOL, "A": A_TOL, "charts": CHART_TOL, "homothety": HOMOTHETY_TOL},
        summary,
    )
    require(report.max_relative_error < DEFICIT_TOL, "neck_deficits",
            f"max relative error {report.max_relative_error:.3e}")
    require(abs(report.A - report.A_closed_form) < A_TOL, "constant_A",
            f"A = {report.A:.15g}, closed form {report.A_closed_form:.15g}")
    require(max(charts.values()) < CHART_TOL, "chart_consistency", f"{charts}")
    for entry in homothety:
        require(max(entry["metric_residual"], entry["divisor_residual"]) < HOMOTHETY_TOL,
                "homothety", f"alpha={entry['alpha']}")


# ═══════════════════════════════════════════════════════════════════════
# isometries
# ═══════════════════════════════════════════════════════════════════════

def isometries(args) -> None:
    surface = surface_from_args(args)
    rng = rng_from_args(args)
    group = isometry_group(surface, rng, n_points=min(args.trials, 100))
    rows = [element.as_dict() for element in group.elements]
    maps_regions = isometry_maps_regions(surface, group.elements, rng, n_points=min(args.trials, 50))
    f = special_element(surface)

    summary = {
        "raw_count": group.raw_count,
        "count": len(group.elements),
        "closed": group.closed,
        "max_order": group.max_order,
        "permutations_ok": group.permutations_ok,
        "potential_residual": group.potential_residual,
        "maps_regions": maps_regions,
        "special_order": f.order(),
    }
    if not args.skip_torus:
        summary["special_torus"] = special_torus_checks(surface, rng, n_modes=args.modes)

    emit_report(
        args, rows, surface_parameters(surface),
        {"potential": POTENTIAL_TOL, "tangent_drift": TANGENT_DRIFT_TOL, "torus_eigenvalue": TORUS_EIGEN_TOL},
        summary,
    )
    require(summary["count"] == GROUP_SIZE, "group_size", f"{summary['count']} elements")
    require(group.closed, "group_closure")
    require(group.max_order == MAX_ORDER, "max_order", f"max order {group.max_order}")
    require(group.permutations_ok, "half_point_permutations")
    require(group.potential_residual < POTENTIAL_TOL, "potential_preserved",
            f"residual {group.potential_residual:.3e}")
    require(maps_regions, "regions_preserved")
    require(summary["special_order"] == 4, "special_isometry_order")
    if not args.skip_torus:
        torus = summary["special_torus"]
        require(torus["in_flat_region"], "torus_in_flat_region")
        require(torus["tangent_drift"] < TANGENT_DRIFT_TOL, "totally_geodesic",
                f"drift {torus['tangent_drift']:.3e}")
        require(torus["min_eigenvalue"] >= TORUS_EIGEN_TOL, "torus_stable")


# ═══════════════════════════════════════════════════════════════════════
# Registration
# ═══════════════════════════════════════════════════════════════════════

def register(subparsers) -> None:
    volumes = subparsers.add_parser("kummer-volumes", help="neck volumes and the constant A")
    add_common_arguments(volumes)
    add_surface_arguments(volumes, default_a=0.1)
    volumes.add_argument("--alpha", type=float_list, default=(0.5, 2.0, 3.0), help="homothety factors")
    volumes.set_defaults(handler=kummer_volumes)

    group = subparsers.add_parser("isometries", help="isometry group and the special torus")
    add_common_arguments(group)
    add_surface_arguments(group, default_a=0.05)
    group.add_argument("--modes", type=int, default=8)
    group.add_argument("--skip-torus", action="store_true", help="skip the special torus checks")
    group.set_defaults(handler=isometries)

    logging.info("Kummer commands loaded")
