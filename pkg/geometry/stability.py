"""
Second Variation of Energy

Discretizes, for a closed geodesic γ of period T,

    δ²E(ξ, ξ) = ∫₀ᵀ |∇_γ̇ ξ|² − ⟨R(γ̇, ξ)ξ, γ̇⟩ dt

on the real Fourier fields ξ = φ_k(t)·∂_c (k over 1, cos, sin up to n_modes,
c over the four real chart directions), and solves the generalized symmetric
eigenproblem K c = λ M c with M the L² Gram matrix of the basis.

Primary functions:
  - second_variation_spectrum(source, path, n_modes)
  - closed_geodesic_scan(a_values): (sup |Rm|, min eigenvalue) over equators of E.
  - kummer_closed_geodesic_scan(surface): one flat circle of the torus and the
    equator of every blown-up neck of a Kummer surface.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicHermiteSpline
from scipy.linalg import eigh

from configs.defaults import FOURIER_MODES
from geometry.geodesics import (
    GeodesicPath,
    GeodesicState,
    PatchworkField,
    equator_field,
    equator_state,
    integrate_geodesic,
)
from geometry.kummer import ChartKind, ChartPoint, KummerSurface
from geometry.metric import complex_coordinates, real_coordinates, real_vector
from geometry.riemannian import local_geometry, real_kretschmann
from utils.error_handler import PreconditionError

CLOSURE_TOL = 1e-8
NULLITY_TOL = 1e-6
SYMMETRY_TOL = 1e-12


@dataclass
class StabilityReport:
    min_eigenvalue: float
    nullity_estimate: int
    sup_riemann: float
    eigenvalues: np.ndarray
    asymmetry: float
    n_modes: int

    @property
    def stable(self) -> bool:
        return self.min_eigenvalue >= -NULLITY_TOL

    def as_dict(self) -> dict:
        return {
            "min_eigenvalue": self.min_eigenvalue,
            "nullity_estimate": self.nullity_estimate,
            "sup_riemann": self.sup_riemann,
            "asymmetry": self.asymmetry,
            "n_modes": self.n_modes,
        }


def fourier_basis(times: np.ndarray, period: float, n_modes: int) -> tuple:
    """Values and derivatives of 1, cos(kωt), sin(kωt), k = 1..n_modes; shape (len(times), 2n+1)."""
    omega = 2.0 * np.pi / period
    k = np.arange(1, n_modes + 1)
    phase = np.outer(times, k) * omega
    values = np.hstack([np.ones((len(times), 1)), np.cos(phase), np.sin(phase)])
    derivatives = np.hstack([np.zeros((len(times), 1)), -k * omega * np.sin(phase), k * omega * np.cos(phase)])
    return values, derivatives


def _resample(path: GeodesicPath, n_samples: int) -> tuple:
    """Real positions and velocities at n_samples uniform times in [0, T)."""
    real_positions = np.array([real_coordinates(z) for z in path.positions])
    real_velocities = np.array([real_vector(v) for v in path.velocities])
    real_accelerations = np.array([real_vector(v) for v in path.accelerations])
    position_spline = CubicHermiteSpline(path.times, real_positions, real_velocities)
    velocity_spline = CubicHermiteSpline(path.times, real_velocities, real_accelerations)
    times = path.times[0] + path.duration * np.arange(n_samples) / n_samples
    return times, position_spline(times), velocity_spline(times)


def second_variation_spectrum(source, path: GeodesicPath, n_modes: int = FOURIER_MODES,
                              translation=None, n_samples: int = None,
                              nullity_tol: float = NULLITY_TOL) -> StabilityReport:
    """
    Spectrum of δ²E along a closed geodesic. `translation` is the deck
    transformation closing the path on a torus cover (None for a loop in the chart).
    """
    closure = path.closure_error(translation)
    scale = 1.0 + float(np.abs(path.positions).max())
    if closure > CLOSURE_TOL * scale:
        raise PreconditionError(f"path is not closed: mismatch {closure:.3e}")
    period = path.duration
    n_samples = n_samples or max(4 * (2 * n_modes + 1), 64)
    times, positions, velocities = _resample(path, n_samples)
    phi, dphi = fourier_basis(times - times[0], period, n_modes)
    weight = period / n_samples
    size = 4 * phi.shape[1]
    stiffness = np.zeros((size, size))
    mass = np.zeros((size, size))
    sup_kretschmann = 0.0
    for j in range(n_samples):
        geometry = local_geometry(source, complex_coordinates(positions[j]))
        g = geometry.metric
        v = velocities[j]
        connection = np.einsum("abc,b->ac", geometry.christoffel, v)       # ∇_v ∂_c = A[:, c]
        curvature = np.einsum("acdb,a,b->cd", geometry.riemann, v, v)       # Rm(v, ∂c, ∂d, v)
        d_field = np.kron(dphi[j][None, :], np.eye(4)) + np.kron(phi[j][None, :], connection)
        outer = np.outer(phi[j], phi[j])
        stiffness += weight * (d_field.T @ g @ d_field - np.kron(outer, curvature))
        mass += weight * np.kron(outer, g)
        sup_kretschmann = max(sup_kretschmann, real_kretschmann(geometry))

    asymmetry = float(np.abs(stiffness - stiffness.T).max() / max(np.abs(stiffness).max(), 1.0))
    if asymmetry > SYMMETRY_TOL:
        logging.warning(f"Second-variation matrix asymmetry {asymmetry:.3e}")
    eigenvalues = eigh(0.5 * (stiffness + stiffness.T), 0.5 * (mass + mass.T), eigvals_only=True)
    report = StabilityReport(
        min_eigenvalue=float(eigenvalues[0]),
        nullity_estimate=int(np.sum(np.abs(eigenvalues) < nullity_tol)),
        sup_riemann=float(np.sqrt(sup_kretschmann / 4.0)),
        eigenvalues=eigenvalues,
        asymmetry=asymmetry,
        n_modes=n_modes,
    )
    logging.info(
        f"Second variation: min eigenvalue {report.min_eigenvalue:.6g}, nullity {report.nullity_estimate}, "
        f"sup|Rm| {report.sup_riemann:.6g}"
    )
    return report


def equator_stability(a: float, n_steps: int = 2000, n_modes: int = 8) -> StabilityReport:
    """Second variation along the unit-speed equator of E ⊂ Eguchi-Hanson(a)."""
    state, period = equator_state(a)
    field = equator_field(a)
    path = integrate_geodesic(field, state, period, step=period / n_steps)
    return second_variation_spectrum(field, path, n_modes)


def closed_geodesic_scan(a_values, n_steps: int = 2000, n_modes: int = 8) -> list:
    """(a, sup_riemann, min_eigenvalue) for the equator of E at each a."""
    rows = []
    for a in a_values:
        report = equator_stability(float(a), n_steps, n_modes)
        rows.append((float(a), report.sup_riemann, report.min_eigenvalue))
    return rows


def flat_circle_stability(surface: KummerSurface, n_modes: int = 8, step: float = 0.01) -> StabilityReport:
    """
    Second variation along the closed circle t ↦ (z0 + t·b1/√2, w0) of the
    patchwork metric, w0 = R(b1 + b2)/4, closing after the lattice vector R·b1.
    The chart overlap bound of KummerSurface keeps |w0 − q|² ≥ R²/16 above the
    flat-region radius for every half-lattice point q.
    """
    R = surface.lattice_scale
    b1, b2 = surface.basis
    w0 = 0.25 * R * (b1 + b2)
    start = np.array([0.25 * R * b1 + 0.1j * R * b1, w0], dtype=complex)
    state = GeodesicState(ChartPoint(ChartKind.FLAT, start), real_vector([b1 / np.sqrt(2.0), 0.0]))
    field = PatchworkField(surface)
    path = integrate_geodesic(field, state, np.sqrt(2.0) * R, step=step)
    return second_variation_spectrum(field, path, n_modes, translation=[R * b1, 0.0])


def kummer_closed_geodesic_scan(surface: KummerSurface, n_steps: int = 2000, n_modes: int = 8,
                                step: float = 0.01) -> list:
    """
    Rows over the closed geodesics of a Kummer surface: the flat circle, then one
    equator per distinct blown-up scale a_i with the neck indices sharing it.
    The equator of E_i lies inside the Eguchi-Hanson zone u < s, where the
    patchwork metric is EH(a_i).
    """
    flat = flat_circle_stability(surface, n_modes, step)
    rows = [{"geodesic": "flat_circle", "region": "Flat", "a": 0.0, "necks": [], **flat.as_dict()}]
    for a in sorted({a for a in surface.a if a > 0.0}):
        necks = [i for i, value in enumerate(surface.a) if value == a]
        report = equator_stability(a, n_steps, n_modes)
        rows.append({"geodesic": "equator", "region": "EH", "a": a, "necks": necks, **report.as_dict()})
    logging.info(f"Kummer closed-geodesic scan: {len(rows) - 1} neck scales, flat circle λ_min {flat.min_eigenvalue:.3e}")
    return rows
