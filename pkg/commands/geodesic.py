"""
Geodesic Commands

  - geodesic: integrate one geodesic of the Eguchi-Hanson (or glued) metric
    from a point on the z1 axis, with energy drift, divisor distance and the
    radial θ first integral of the launch level.
  - stability: second-variation spectrum along the equator of E for each a,
    then over a Kummer surface: a closed circle of the flat region and the
    equator of every blown-up neck.
"""

import logging

import numpy as np

from geometry.geodesics import (
    DRIFT_TOL,
    GeodesicState,
    divisor_distance_profile,
    energy,
    integrate_geodesic,
    radial_theta_first_integral,
)
from geometry.kummer import ChartKind, ChartPoint
from geometry.metric import RadialField, hol_vector
from geometry.potentials import PotentialKind, RadialPotentialSpec
from geometry.stability import closed_geodesic_scan, kummer_closed_geodesic_scan
from utils.command_helpers import (
    add_common_arguments,
    add_surface_arguments,
    emit_report,
    float_list,
    positive_float,
    surface_from_args,
    surface_parameters,
)
from utils.error_handler import require

THETA_TOL = 1e-8
TORUS_EIGEN_TOL = -1e-8
TORUS_MIN_NULLITY = 3


# ═══════════════════════════════════════════════════════════════════════
# geodesic
# ═══════════════════════════════════════════════════════════════════════

def geodesic(args) -> None:
    spec = (RadialPotentialSpec.glued(args.a, args.delta) if args.potential == "glued"
            else RadialPotentialSpec.eguchi_hanson(args.a))
    field = RadialField(spec)
    z0 = np.array([np.sqrt(args.u0), 0.0], dtype=complex)
    direction = np.asarray(args.direction, dtype=float)
    if direction.shape != (4,):
        raise ValueError(f"--direction needs four components, got {len(direction)}")
    norm = np.sqrt(energy(field.metric(z0), hol_vector(direction)))
    state = GeodesicState(ChartPoint(ChartKind.EGUCHI_HANSON, z0), direction / norm)
    path = integrate_geodesic(field, state, args.time, step=args.step)

    every = max(1, args.every)
    profile = divisor_distance_profile(args.a, path, every) if spec.kind is PotentialKind.EGUCHI_HANSON else None
    rows = []
    for k, i in enumerate(range(0, len(path.times), every)):
        z = path.positions[i]
        row = {
            "t": float(path.times[i]),
            "x1": z[0].real, "y1": z[0].imag, "x2": z[1].real, "y2": z[1].imag,
            "u": float(np.vdot(z, z).real),
            "energy": float(path.energies[i]),
            "chart": path.charts[i],
        }
        if profile is not None:
            row.update({"d": profile.d[k], "d_dot": profile.d_dot[k], "d_ddot": profile.d_ddot[k]})
        rows.append(row)

    theta = radial_theta_first_integral(args.a, args.u0)
    summary = {
        "energy_drift": path.energy_drift,
        "transitions": len(path.transitions),
        "theta_first_integral_residual": theta.first_integral_residual,
        "theta_inversion_residual": theta.inversion_residual,
        "sqrt_distance": theta.sqrt_d,
    }
    emit_report(
        args, rows,
        {"a": args.a, "potential": args.potential, "u0": args.u0, "direction": list(direction),
         "time": args.time, "step": args.step},
        {"energy_drift_per_time": DRIFT_TOL, "theta": THETA_TOL},
        summary,
    )
    require(theta.first_integral_residual < THETA_TOL, "theta_first_integral")


# ═══════════════════════════════════════════════════════════════════════
# stability
# ═══════════════════════════════════════════════════════════════════════

def stability(args) -> None:
    rows = []
    for a, sup_riemann, min_eigenvalue in closed_geodesic_scan(args.a_values, args.n_steps, args.modes):
        rows.append({"geodesic": "equator", "a": a, "sup_riemann": sup_riemann, "min_eigenvalue": min_eigenvalue})

    surface = surface_from_args(args)
    kummer_rows = kummer_closed_geodesic_scan(surface, args.n_steps, args.modes)
    for row in kummer_rows:
        rows.append({**row, "geodesic": f"kummer_{row['geodesic']}", "necks": len(row["necks"])})
    circle = kummer_rows[0]
    necks = kummer_rows[1:]
    equators = [row for row in rows if row["geodesic"] == "equator"]
    summary = {
        "max_equator_eigenvalue": max(row["min_eigenvalue"] for row in equators),
        "max_neck_eigenvalue": max((row["min_eigenvalue"] for row in necks), default=None),
        "torus_min_eigenvalue": circle["min_eigenvalue"],
        "torus_nullity": circle["nullity_estimate"],
    }
    emit_report(
        args, rows,
        {"a_values": list(args.a_values), "modes": args.modes, "n_steps": args.n_steps,
         **surface_parameters(surface)},
        {"torus_eigenvalue": TORUS_EIGEN_TOL, "torus_nullity": TORUS_MIN_NULLITY},
        summary,
    )
    require(summary["max_equator_eigenvalue"] < 0.0, "equator_unstable")
    require(all(row["min_eigenvalue"] < 0.0 for row in necks), "neck_equators_unstable")
    require(circle["min_eigenvalue"] >= TORUS_EIGEN_TOL, "torus_stable")
    require(circle["nullity_estimate"] >= TORUS_MIN_NULLITY, "torus_nullity")


# ═══════════════════════════════════════════════════════════════════════
# Registration
# ═══════════════════════════════════════════════════════════════════════

def register(subparsers) -> None:
    geo = subparsers.add_parser("geodesic", help="integrate a geodesic of the Eguchi-Hanson metric")
    add_common_arguments(geo)
    geo.add_argument("--a", type=positive_float, default=1.0)
    geo.add_argument("--potential", choices=("eguchi_hanson", "glued"), default="eguchi_hanson")
    geo.add_argument("--delta", type=positive_float, default=0.5)
    geo.add_argument("--u0", type=positive_float, default=1.0, help="launch level u = |z|² on the z1 axis")
    geo.add_argument("--direction", type=float_list, default=(0.0, 1.0, 0.0, 0.0),
                     help="real launch direction (x1, y1, x2, y2), normalized to unit speed")
    geo.add_argument("--time", type=positive_float, default=5.0)
    geo.add_argument("--step", type=positive_float, default=1e-3)
    geo.add_argument("--every", type=int, default=50, help="report every n-th step")
    geo.set_defaults(handler=geodesic)

    stab = subparsers.add_parser("stability", help="second-variation spectra of closed geodesics")
    add_common_arguments(stab)
    stab.add_argument("--a-values", type=float_list, default=(0.5, 1.0, 2.0))
    stab.add_argument("--modes", type=int, default=8)
    stab.add_argument("--n-steps", type=int, default=2000)
    add_surface_arguments(stab)
    stab.set_defaults(handler=stability)

    logging.info("Geodesic commands loaded")
