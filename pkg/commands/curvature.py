"""
Curvature Commands

Commands on a single Eguchi-Hanson (or glued) chart:
  - curvature-profile: Kretschmann scalar, metric eigenvalues and Ricci norm along u.
  - sigma: the six σ invariants at random (point, V), their trace, and the
    sectional-curvature reconstruction against direct contraction.
  - identity-check: Laplacian-of-curvature identity on the fixed set {z2 = 0}
    and the Monge-Ampère identities for random radial perturbations.

Every handler writes its report first and then raises CheckFailure for the
first violated acceptance check.
"""

import logging

import numpy as np

from geometry.hyperkahler import (
    angles_to_coefficients,
    direct_sectional,
    fixed_set_constraint_check,
    quaternionic_frame,
    sectional_reconstruction,
    sigma_from_geometry,
)
from geometry.metric import curvature_at
from geometry.potentials import PotentialKind, RadialPotentialSpec, radial_eigenvalues
from geometry.riemannian import local_geometry
from geometry.yau_identities import (
    laplacian_riemann_identity,
    random_radial_perturbation,
    yau_identity_residuals,
)
from utils.command_helpers import (
    add_common_arguments,
    emit_report,
    positive_float,
    rng_from_args,
)
from utils.error_handler import DegenerateMetricError, require

KRETSCHMANN_TOL = 1e-10
DETERMINANT_TOL = 1e-12
RICCI_TOL = 1e-10
SIGMA_TRACE_TOL = 1e-10
RECONSTRUCTION_TOL = 1e-9
PHASE_TOL = 1e-12
FIXED_SET_TOL = 1e-10
LAPLACIAN_FD_TOL = 1e-5
LAPLACIAN_JET_TOL = 1e-8
YAU_IDENTITY_TOL = 1e-9
YAU_SLACK_TOL = -1e-9


def _spec(args) -> RadialPotentialSpec:
    if args.potential == PotentialKind.GLUED.value:
        return RadialPotentialSpec.glued(args.a, args.delta)
    return RadialPotentialSpec.eguchi_hanson(args.a)


def _random_point(rng: np.random.Generator, u_low: float, u_high: float) -> np.ndarray:
    direction = rng.normal(size=4)
    direction /= np.linalg.norm(direction)
    radius = np.sqrt(rng.uniform(u_low, u_high))
    return radius * (direction[0::2] + 1j * direction[1::2])


def eguchi_hanson_kretschmann(a: float, u: float) -> float:
    """Hermitian Kretschmann scalar 24a⁴/(a²+u²)³; the real one is four times this."""
    return 24.0 * a ** 4 / (a * a + u * u) ** 3


# ═══════════════════════════════════════════════════════════════════════
# curvature-profile
# ═══════════════════════════════════════════════════════════════════════

def curvature_profile(args) -> None:
    spec = _spec(args)
    rows = []
    for u in np.linspace(args.u_min, args.u_max, args.n):
        z = np.array([np.sqrt(u), 0.0], dtype=complex)
        bundle = curvature_at(spec, z)
        tangential, radial = radial_eigenvalues(spec, float(u))
        closed = eguchi_hanson_kretschmann(args.a, float(u))
        rows.append({
            "u": float(u),
            "kretschmann": bundle.kretschmann,
            "closed_form": closed,
            "relative_error": abs(bundle.kretschmann - closed) / closed,
            "real_kretschmann": 4.0 * bundle.kretschmann,
            "eigenvalue_tangential": tangential,
            "eigenvalue_radial": radial,
            "determinant": tangential * radial,
            "ricci_norm": bundle.ricci_frame_norm(),
        })

    summary = {
        "max_relative_error": max(row["relative_error"] for row in rows),
        "max_determinant_error": max(abs(row["determinant"] - 1.0) for row in rows),
        "max_ricci_norm": max(row["ricci_norm"] for row in rows),
    }
    emit_report(
        args, rows,
        {"a": args.a, "potential": args.potential, "u_min": args.u_min, "u_max": args.u_max, "n": args.n},
        {"kretschmann": KRETSCHMANN_TOL, "determinant": DETERMINANT_TOL, "ricci": RICCI_TOL},
        summary,
    )
    if spec.kind is PotentialKind.EGUCHI_HANSON:
        require(summary["max_relative_error"] < KRETSCHMANN_TOL, "kretschmann_profile",
                f"max relative error {summary['max_relative_error']:.3e}")
        require(summary["max_determinant_error"] < DETERMINANT_TOL, "ricci_flat_determinant",
                f"max |det g − 1| {summary['max_determinant_error']:.3e}")
        require(summary["max_ricci_norm"] < RICCI_TOL, "ricci_tensor",
                f"max Ricci component {summary['max_ricci_norm']:.3e}")


# ═══════════════════════════════════════════════════════════════════════
# sigma
# ═══════════════════════════════════════════════════════════════════════

def sigma_check(args) -> None:
    spec = RadialPotentialSpec.eguchi_hanson(args.a)
    rng = rng_from_args(args)
    rows = []
    for trial in range(args.trials):
        z = _random_point(rng, args.u_min, args.u_max)
        v = rng.normal(size=4)
        frame = quaternionic_frame(spec, z)
        riemann = local_geometry(spec, z).riemann
        sigma = sigma_from_geometry(riemann, frame, v)
        theta, phi, psi = rng.uniform(0.0, 2.0 * np.pi, 3)
        coeffs = angles_to_coefficients(theta, phi, psi)
        direct = direct_sectional(riemann, frame, v, coeffs)
        rotated = direct_sectional(riemann, frame, v, angles_to_coefficients(theta, phi, psi + 1.0))
        scale = 1.0 + abs(sigma.sII)
        row = {"trial": trial, "u": float(np.vdot(z, z).real)}
        row.update(sigma.as_dict())
        row.update({
            "trace": sigma.trace,
            "trace_residual": abs(sigma.trace) / scale,
            "reconstruction_error": abs(sectional_reconstruction(sigma, coeffs=coeffs) - direct) / scale,
            "phase_dependence": abs(rotated - direct) / scale,
        })
        rows.append(row)

    fixed_residual = 0.0
    for x in np.linspace(0.3, 2.0, args.fixed_points):
        report = fixed_set_constraint_check(spec, 3, [x, 0.0])
        fixed_residual = max(fixed_residual, max(report.residuals.values()))

    summary = {
        "max_trace_residual": max((row["trace_residual"] for row in rows), default=0.0),
        "max_reconstruction_error": max((row["reconstruction_error"] for row in rows), default=0.0),
        "max_phase_dependence": max((row["phase_dependence"] for row in rows), default=0.0),
        "fixed_set_max_residual": fixed_residual,
    }
    emit_report(
        args, rows,
        {"a": args.a, "u_min": args.u_min, "u_max": args.u_max, "trials": args.trials},
        {"trace": SIGMA_TRACE_TOL, "reconstruction": RECONSTRUCTION_TOL, "phase": PHASE_TOL,
         "fixed_set": FIXED_SET_TOL},
        summary,
    )
    require(summary["max_trace_residual"] < SIGMA_TRACE_TOL, "sigma_trace")
    require(summary["max_reconstruction_error"] < RECONSTRUCTION_TOL, "sectional_reconstruction")
    require(summary["max_phase_dependence"] < PHASE_TOL, "phase_independence")
    require(summary["fixed_set_max_residual"] < FIXED_SET_TOL, "fixed_set_constraints")


# ═══════════════════════════════════════════════════════════════════════
# identity-check
# ═══════════════════════════════════════════════════════════════════════

def _laplacian_rows(spec: RadialPotentialSpec, n_points: int) -> list:
    rows = []
    for x in np.linspace(0.5, 1.5, n_points):
        report = laplacian_riemann_identity(spec, [x, 0.0], [1.0, 0.0, 0.0, 0.0])
        rows.append({
            "kind": "laplacian",
            "u": float(x * x),
            "tensorial": report.tensorial,
            "finite_difference": report.finite_difference,
            "rhs": report.rhs,
            "fixed_set_rhs": report.fixed_set_rhs,
            "coordinate_laplacian": report.coordinate_laplacian,
            "tensorial_error": report.tensorial_error,
            "finite_difference_error": report.finite_difference_error,
        })
    return rows


def _yau_rows(spec: RadialPotentialSpec, rng: np.random.Generator, trials: int) -> list:
    rows = []
    for trial in range(trials):
        z = _random_point(rng, 0.3, 3.0)
        perturbation = random_radial_perturbation(rng)
        try:
            report = yau_identity_residuals(spec, perturbation, z)
        except DegenerateMetricError:
            logging.warning(f"Trial {trial}: perturbed metric degenerate at z={z}, skipped")
            continue
        rows.append({
            "kind": "yau",
            "trial": trial,
            "u": float(np.vdot(z, z).real),
            "norm_ma": report.norm_ma,
            "trace_laplacian": report.trace_laplacian,
            "trace_laplacian_frame": report.trace_laplacian_frame,
            "weighted_laplacian": report.weighted_laplacian,
            "corrected_laplacian": report.corrected_laplacian,
            "gradient_slack": report.gradient_slack,
            "am_gm_slack": report.am_gm_slack,
            "min_curvature_bound_slack": min(report.curvature_bound_slack.values(), default=float("nan")),
            "min_eigenvalue_bound_slack": min(report.eigenvalue_bound_slack.values(), default=float("nan")),
        })
    return rows


def identity_check(args) -> None:
    spec = RadialPotentialSpec.eguchi_hanson(args.a)
    rng = rng_from_args(args)
    rows = []
    if args.kind in ("laplacian", "all"):
        rows += _laplacian_rows(spec, args.points)
    if args.kind in ("yau", "all"):
        rows += _yau_rows(spec, rng, args.trials)

    laplacian = [row for row in rows if row["kind"] == "laplacian"]
    yau = [row for row in rows if row["kind"] == "yau"]
    summary = {"laplacian_points": len(laplacian), "yau_trials": len(yau)}
    if laplacian:
        summary["max_finite_difference_error"] = max(row["finite_difference_error"] for row in laplacian)
        summary["max_tensorial_error"] = max(row["tensorial_error"] for row in laplacian)
    if yau:
        summary["max_identity_residual"] = max(
            max(row["norm_ma"], row["trace_laplacian"], row["trace_laplacian_frame"] or 0.0, row["weighted_laplacian"], row["corrected_laplacian"])
            for row in yau
        )
        summary["min_eigenvalue_bound_slack"] = min(row["min_eigenvalue_bound_slack"] for row in yau)
        summary["min_gradient_slack"] = min(row["gradient_slack"] for row in yau)
    emit_report(
        args, rows,
        {"a": args.a, "kind": args.kind, "points": args.points, "trials": args.trials},
        {"laplacian_fd": LAPLACIAN_FD_TOL, "laplacian_jets": LAPLACIAN_JET_TOL,
         "identities": YAU_IDENTITY_TOL, "slack": YAU_SLACK_TOL},
        summary,
    )
    if laplacian:
        require(summary["max_finite_difference_error"] < LAPLACIAN_FD_TOL, "laplacian_finite_difference")
        require(summary["max_tensorial_error"] < LAPLACIAN_JET_TOL, "laplacian_jets")
    if yau:
        require(summary["max_identity_residual"] < YAU_IDENTITY_TOL, "monge_ampere_identities")
        require(summary["min_eigenvalue_bound_slack"] >= YAU_SLACK_TOL, "yau_lower_bound")


# ═══════════════════════════════════════════════════════════════════════
# Registration
# ═══════════════════════════════════════════════════════════════════════

def register(subparsers) -> None:
    profile = subparsers.add_parser("curvature-profile", help="Kretschmann scalar along u")
    add_common_arguments(profile)
    profile.add_argument("--a", type=positive_float, default=1.0)
    profile.add_argument("--potential", choices=("eguchi_hanson", "glued"), default="eguchi_hanson")
    profile.add_argument("--delta", type=positive_float, default=0.5)
    profile.add_argument("--u-min", type=positive_float, default=0.01)
    profile.add_argument("--u-max", type=positive_float, default=5.0)
    profile.add_argument("--n", type=int, default=200)
    profile.set_defaults(handler=curvature_profile)

    sigma = subparsers.add_parser("sigma", help="σ invariants and sectional reconstruction")
    add_common_arguments(sigma)
    sigma.add_argument("--a", type=positive_float, default=1.0)
    sigma.add_argument("--u-min", type=positive_float, default=0.05)
    sigma.add_argument("--u-max", type=positive_float, default=5.0)
    sigma.add_argument("--fixed-points", type=int, default=20)
    sigma.set_defaults(handler=sigma_check)

    identity = subparsers.add_parser("identity-check", help="Laplacian and Monge-Ampère identities")
    add_common_arguments(identity)
    identity.add_argument("--a", type=positive_float, default=1.0)
    identity.add_argument("--kind", choices=("laplacian", "yau", "all"), default="all")
    identity.add_argument("--points", type=int, default=5, help="fixed-set points for the Laplacian identity")
    identity.set_defaults(handler=identity_check)

    logging.info("Curvature commands loaded")
