"""
Geodesics Module

Geodesic flow of Kähler metrics in complex coordinates,

    z̈^λ + Γ^λ_{μα} ż^μ ż^α = 0,

with parallel transport of (1,0)-vectors alongside, plus the radial distance
quantities of the exceptional divisor and the Christoffel defect between two
metrics.

Metric fields: RadialField, BundleField (geometry.metric), FlatField and
PatchworkField below. A field exposes metric(z), christoffel(z) and
hermitian_jets(z, order).

Primary functions:
  - integrate_geodesic(field, state0, T, step): GeodesicPath (RK4, step-doubling monitor).
  - parallel_transport(field, state0, vectors, T, step)
  - radial_theta_first_integral(a, u): θ-profile of the radial distance minimizer.
  - divisor_distance_profile(a, path): d(t), ḋ(t), d̈(t) for the distance to E.
  - christoffel_defect(source_a, source_b, z): Ψ = Γ_B − Γ_A and |Ψ|_A.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import quad, solve_ivp

from configs.defaults import GEODESIC_STEP, U_MIN
from geometry import jets
from geometry.kummer import (
    ChartKind,
    ChartPoint,
    KummerSurface,
    nearest_fixed_point,
    patchwork_metric,
    patchwork_metric_jets,
    representative,
)
from geometry.metric import (
    NVARS,
    BundleField,
    RadialField,
    christoffel_from_jets,
    hermitian_metric_jets,
    hol_vector,
    radial_christoffel,
    real_vector,
)
from geometry.potentials import RadialPotentialSpec
from utils.error_handler import (
    AccuracyError,
    DegenerateMetricError,
    IntegrationError,
    OrbifoldProximityError,
)

ACCURACY_TOL = 1e-8
DRIFT_TOL = 1e-9                 # relative energy drift per unit time
MONITOR_EVERY = 10


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GeodesicState:
    """A point with a real tangent vector in the chart frame (∂x1, ∂y1, ∂x2, ∂y2)."""
    point: ChartPoint
    velocity: np.ndarray = field(compare=False)

    @classmethod
    def from_complex(cls, kind: ChartKind, z, zdot, index: Optional[int] = None,
                     patch: Optional[str] = None) -> "GeodesicState":
        point = ChartPoint(kind, np.asarray(z, dtype=complex), index, patch)
        return cls(point, real_vector(zdot))

    @property
    def zdot(self) -> np.ndarray:
        return hol_vector(self.velocity)


@dataclass
class GeodesicPath:
    times: np.ndarray
    positions: np.ndarray        # (n, 2) complex, field coordinates
    velocities: np.ndarray       # (n, 2) complex
    accelerations: np.ndarray    # (n, 2) complex, z̈ = −Γ(ż, ż)
    charts: list
    energies: np.ndarray
    transitions: list = field(default_factory=list)

    @property
    def energy_drift(self) -> float:
        """max |E(t) − E(0)| / E(0)."""
        e0 = self.energies[0]
        return float(np.abs(self.energies - e0).max() / e0) if e0 > 0 else 0.0

    @property
    def duration(self) -> float:
        return float(self.times[-1] - self.times[0])

    def closure_error(self, translation=None) -> float:
        shift = np.zeros(2) if translation is None else np.asarray(translation, dtype=complex)
        position = np.abs(self.positions[-1] - shift - self.positions[0]).max()
        velocity = np.abs(self.velocities[-1] - self.velocities[0]).max()
        return float(max(position, velocity))

    def final_state(self, kind: ChartKind = ChartKind.EGUCHI_HANSON) -> GeodesicState:
        return GeodesicState.from_complex(kind, self.positions[-1], self.velocities[-1])


@dataclass(frozen=True)
class ChristoffelDefect:
    psi_tensor: np.ndarray      # Ψ^λ_{μα}
    norm: float                 # |Ψ| in a g_A-unitary frame
    point: np.ndarray

    def apply(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=complex)
        return np.einsum("lma,m,a->l", self.psi_tensor, v, v)


# ---------------------------------------------------------------------------
# Metric fields
# ---------------------------------------------------------------------------

class FlatField:
    """Euclidean metric g = 1 on C² (or on the torus cover)."""

    chart = "flat"

    def metric(self, z) -> np.ndarray:
        return np.eye(2, dtype=complex)

    def christoffel(self, z) -> np.ndarray:
        return np.zeros((2, 2, 2), dtype=complex)

    def hermitian_jets(self, z, order: int) -> np.ndarray:
        return jets.constant_tensor(np.eye(2, dtype=complex), NVARS, order)


class PatchworkField:
    """
    Patchwork metric of a Kummer surface on the cover C² of the torus.

    Positions are cover coordinates; every chart is a translate of the cover
    so chart changes carry the velocity unchanged. Labels follow a hysteresis
    band around the gluing radius: EH_i is entered below u = s(1−δ/2) and
    left above u = s(1+δ/2); a path with no previous label splits at u = s.
    """

    chart = "patchwork"

    def __init__(self, surface: KummerSurface):
        self.surface = surface

    def _local(self, z) -> tuple:
        q, index = nearest_fixed_point(self.surface, z)
        local = np.asarray(z, dtype=complex) - q
        return local, index, float(np.vdot(local, local).real)

    def metric(self, z) -> np.ndarray:
        return patchwork_metric(self.surface, z).components

    def christoffel(self, z) -> np.ndarray:
        local, index, u = self._local(z)
        if u >= self.surface.cutoff_scale * (1.0 + self.surface.delta):
            return np.zeros((2, 2, 2), dtype=complex)
        return radial_christoffel(self.surface.local_spec(index), local)

    def hermitian_jets(self, z, order: int) -> np.ndarray:
        return patchwork_metric_jets(self.surface, z, order)

    def orbifold_distance(self, z) -> float:
        """u to the nearest blown-up point; inf where a_i = 0."""
        _, index, u = self._local(z)
        return u if self.surface.a[index] > 0.0 else np.inf

    def coordinates(self, point: ChartPoint) -> np.ndarray:
        return representative(self.surface, point)

    def chart_label(self, z, previous: Optional[str] = None) -> str:
        _, index, u = self._local(z)
        s, delta = self.surface.cutoff_scale, self.surface.delta
        label = f"EH_{index}"
        if previous is None:
            threshold = s
        elif previous == label:
            threshold = s * (1.0 + 0.5 * delta)
        else:
            threshold = s * (1.0 - 0.5 * delta)
        return label if u < threshold else "Flat"


def _coordinates(source, point: ChartPoint) -> np.ndarray:
    if hasattr(source, "coordinates"):
        return source.coordinates(point)
    return np.asarray(point.coords, dtype=complex)


def _orbifold_distance(source, z) -> float:
    if hasattr(source, "orbifold_distance"):
        return source.orbifold_distance(z)
    if isinstance(source, RadialField) and source.spec.a > 0.0:
        return float(np.vdot(z, z).real)
    return np.inf


def _label(source, z, previous) -> str:
    if hasattr(source, "chart_label"):
        return source.chart_label(z, previous)
    return source.chart


def energy(g: np.ndarray, zdot) -> float:
    """G(γ̇, γ̇) = 2 g_{μν̄} ż^μ conj(ż^ν)."""
    zdot = np.asarray(zdot, dtype=complex)
    return float(2.0 * (zdot @ g @ zdot.conj()).real)


# ---------------------------------------------------------------------------
# Integration
# ---------------------------------------------------------------------------

def _rhs(source, y: np.ndarray) -> np.ndarray:
    z, zdot, rest = y[:2], y[2:4], y[4:].reshape(-1, 2)
    gamma = source.christoffel(z)
    out = np.empty_like(y)
    out[:2] = zdot
    out[2:4] = -np.einsum("lma,m,a->l", gamma, zdot, zdot)
    if len(rest):
        out[4:] = -np.einsum("lma,m,ka->kl", gamma, zdot, rest).ravel()
    return out


def _rk4(source, y: np.ndarray, h: float) -> np.ndarray:
    k1 = _rhs(source, y)
    k2 = _rhs(source, y + 0.5 * h * k1)
    k3 = _rhs(source, y + 0.5 * h * k2)
    k4 = _rhs(source, y + h * k3)
    return y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _integrate(source, z0, zdot0, vectors, T: float, step: float,
               tolerance: float, u_min: float) -> tuple:
    if not T > 0.0 or not step > 0.0:
        raise IntegrationError(f"need T > 0 and step > 0, got T={T}, step={step}")
    n_steps = int(np.ceil(T / step - 1e-9))
    h = T / n_steps
    y = np.concatenate([np.asarray(z0, dtype=complex), np.asarray(zdot0, dtype=complex),
                        np.asarray(vectors, dtype=complex).ravel()])
    history = [y]
    labels = [_label(source, y[:2], None)]
    transitions = []
    for k in range(n_steps):
        if _orbifold_distance(source, y[:2]) < u_min:
            raise OrbifoldProximityError(
                f"geodesic reached u < {u_min} at t={k * h:.6g}; continue in a bundle chart"
            )
        if k % MONITOR_EVERY == 0:
            coarse = _rk4(source, y, h)
            fine = _rk4(source, _rk4(source, y, 0.5 * h), 0.5 * h)
            error = float(np.abs(coarse - fine).max()) / 15.0
            if error > tolerance * (1.0 + float(np.abs(fine).max())):
                raise AccuracyError(f"step {h:.3g} too large: local error estimate {error:.3e} at t={k * h:.6g}")
            y = fine
        else:
            y = _rk4(source, y, h)
        if not np.all(np.isfinite(y)):
            raise IntegrationError(f"non-finite state at t={(k + 1) * h:.6g}")
        label = _label(source, y[:2], labels[-1])
        if label != labels[-1]:
            transitions.append(((k + 1) * h, labels[-1], label))
            logging.debug(f"Chart transition {labels[-1]} -> {label} at t={(k + 1) * h:.6g}")
        history.append(y)
        labels.append(label)
    return np.arange(n_steps + 1) * h, np.array(history), labels, transitions


def _build_path(source, times, history, labels, transitions) -> GeodesicPath:
    positions = history[:, :2]
    velocities = history[:, 2:4]
    accelerations = np.empty_like(velocities)
    energies = np.empty(len(times))
    for i, (z, zdot) in enumerate(zip(positions, velocities)):
        accelerations[i] = -np.einsum("lma,m,a->l", source.christoffel(z), zdot, zdot)
        energies[i] = energy(source.metric(z), zdot)
    return GeodesicPath(times, positions, velocities, accelerations, labels, energies, transitions)


def _check_drift(path: GeodesicPath, T: float, drift_tol: float) -> None:
    if path.energy_drift > drift_tol * max(T, 1.0):
        raise AccuracyError(
            f"energy drift {path.energy_drift:.3e} over T={T} exceeds {drift_tol:.1e} per unit time"
        )


def integrate_geodesic(source, state0: GeodesicState, T: float, step: float = GEODESIC_STEP,
                       tolerance: float = ACCURACY_TOL, u_min: float = U_MIN,
                       drift_tol: float = DRIFT_TOL) -> GeodesicPath:
    """
    Fixed-step RK4 for (z, ż).

    The local error monitor is step doubling (Richardson): every
    MONITOR_EVERY steps one step of h is compared with two of h/2, standing in
    for an embedded 5th-order pair. The acceptance gate is energy drift:
    AccuracyError when max |E(t) − E(0)| / E(0) exceeds drift_tol · max(T, 1).
    """
    if isinstance(source, RadialPotentialSpec):
        source = RadialField(source)
    z0 = _coordinates(source, state0.point)
    times, history, labels, transitions = _integrate(
        source, z0, state0.zdot, [], T, step, tolerance, u_min
    )
    path = _build_path(source, times, history, labels, transitions)
    _check_drift(path, T, drift_tol)
    logging.debug(f"Geodesic integrated: {len(times) - 1} steps, drift {path.energy_drift:.3e}")
    return path


@dataclass
class TransportResult:
    path: GeodesicPath
    vectors: np.ndarray          # (n, k, 4) real, transported along the path


def parallel_transport(source, state0: GeodesicState, vectors, T: float, step: float = GEODESIC_STEP,
                       tolerance: float = ACCURACY_TOL, u_min: float = U_MIN,
                       drift_tol: float = DRIFT_TOL) -> TransportResult:
    """Transport real vectors along the geodesic from state0: ξ̇^λ + Γ^λ_{μα} ż^μ ξ^α = 0."""
    if isinstance(source, RadialPotentialSpec):
        source = RadialField(source)
    vectors = np.atleast_2d(np.asarray(vectors, dtype=float))
    complex_vectors = np.array([hol_vector(v) for v in vectors])
    z0 = _coordinates(source, state0.point)
    times, history, labels, transitions = _integrate(
        source, z0, state0.zdot, complex_vectors, T, step, tolerance, u_min
    )
    path = _build_path(source, times, history[:, :4], labels, transitions)
    _check_drift(path, T, drift_tol)
    rest = history[:, 4:].reshape(len(times), -1, 2)
    transported = np.stack([np.stack([real_vector(xi) for xi in row]) for row in rest])
    return TransportResult(path, transported)


def reverse_state(state: GeodesicState) -> GeodesicState:
    return GeodesicState(state.point, -np.asarray(state.velocity, dtype=float))


def equator_state(a: float, speed: float = 1.0) -> tuple:
    """
    Launch on the equator |base| = 1 of E in the zeta bundle patch.

    Returns (state, period); g_bb = a/4 on the equator, so the velocity
    ḃ = i·speed·√(2/a) has G-norm `speed` and the orbit closes after 2π√(a/2)/speed.
    """
    velocity = np.array([0.0, 0.0, 0.0, speed * np.sqrt(2.0 / a)])
    point = ChartPoint(ChartKind.BUNDLE, np.array([0.0, 1.0], dtype=complex), patch="zeta")
    return GeodesicState(point, velocity), 2.0 * np.pi * np.sqrt(a / 2.0) / speed


def equator_field(a: float) -> BundleField:
    return BundleField(a, "zeta")


# ---------------------------------------------------------------------------
# Radial distance to the exceptional divisor
# ---------------------------------------------------------------------------

def _quad(fn, low: float = 0.0, high: float = 1.0) -> float:
    value, _ = quad(fn, low, high, epsabs=1e-15, epsrel=1e-13, limit=200)
    return float(value)


def sqrt_distance(a: float, u: float) -> float:
    """√d = ∫₀¹ s u / (a² + s⁴u²)^{1/4} ds, the distance from E at level u."""
    return _quad(lambda s: s * u / (a * a + s ** 4 * u * u) ** 0.25)


def _sqrt_distance_derivatives(a: float, u: float) -> tuple:
    """(√d, ∂_u√d, ∂²_u√d)."""
    a2 = a * a
    root = sqrt_distance(a, u)
    first = _quad(lambda s: s * (a2 + 0.5 * s ** 4 * u * u) / (a2 + s ** 4 * u * u) ** 1.25)
    second = -_quad(lambda s: s ** 5 * u * (1.5 * a2 + 0.25 * s ** 4 * u * u) / (a2 + s ** 4 * u * u) ** 2.25)
    return root, first, second


@dataclass
class ThetaProfile:
    s: np.ndarray
    theta: np.ndarray
    theta_prime: np.ndarray
    sqrt_d: float
    first_integral_residual: float
    inversion_residual: float


def radial_theta_first_integral(a: float, u: float, s_min: float = 0.05, n: int = 201) -> ThetaProfile:
    """
    Solves θ'' + a²θ'²/((a² + u²θ⁴)θ) = 0 backwards from θ(1) = 1 with the slope
    from the first integral θ' = √d (a² + θ⁴u²)^{1/4} / (θu), then measures the
    first integral and the inversion s(θ) = ∫₀^θ τu/(a²+τ⁴u²)^{1/4} dτ / √d along
    the solution.
    """
    if not u > 0.0 or a < 0.0:
        raise IntegrationError(f"need u > 0 and a >= 0, got a={a}, u={u}")
    a2, u2 = a * a, u * u
    root = sqrt_distance(a, u)

    def slope(theta):
        return root * (a2 + theta ** 4 * u2) ** 0.25 / (theta * u)

    def rhs(_, y):
        theta, dtheta = y
        return [dtheta, -a2 * dtheta * dtheta / ((a2 + u2 * theta ** 4) * theta)]

    grid = np.linspace(1.0, s_min, n)
    solution = solve_ivp(rhs, (1.0, s_min), [1.0, slope(1.0)], method="DOP853",
                         t_eval=grid, rtol=1e-13, atol=1e-15)
    if not solution.success:
        raise IntegrationError(f"theta ODE failed: {solution.message}")
    s = solution.t[::-1]
    theta, dtheta = solution.y[0][::-1], solution.y[1][::-1]

    integral = float(np.max(np.abs(dtheta - slope(theta)) / np.abs(slope(theta))))
    inverse = [_quad(lambda t: t * u / (a2 + t ** 4 * u2) ** 0.25, 0.0, th) / root for th in theta]
    inversion = float(np.max(np.abs(np.asarray(inverse) - s)))
    logging.debug(f"Theta profile a={a}, u={u}: sqrt(d)={root:.15g}, residuals {integral:.2e}, {inversion:.2e}")
    return ThetaProfile(s, theta, dtheta, root, integral, inversion)


@dataclass
class DistanceProfile:
    times: np.ndarray
    d: np.ndarray
    d_dot: np.ndarray
    d_ddot: np.ndarray
    radial_speed: np.ndarray     # Re⟨z, ż⟩_{C²}
    fd_ddot: np.ndarray          # central differences of d, nan at the ends

    def stationary(self, tol: float = 1e-9) -> np.ndarray:
        return np.abs(self.d_dot) < tol


def divisor_distance_profile(a: float, path: GeodesicPath, every: int = 1,
                             u_min: float = U_MIN) -> DistanceProfile:
    """
    d = (√d)² at u(t) = |z(t)|² along an orbifold-chart path of the
    Eguchi-Hanson metric, with

        ḋ = d'(u) u̇,   d̈ = d''(u) u̇² + d'(u) ü,
        u̇ = 2Re⟨z, ż⟩,  ü = 2|ż|² + 2Re⟨z, z̈⟩.
    """
    index = np.arange(0, len(path.times), every)
    times = path.times[index]
    d = np.empty(len(index))
    d_dot = np.empty(len(index))
    d_ddot = np.empty(len(index))
    radial = np.empty(len(index))
    for k, i in enumerate(index):
        z, zdot, zddot = path.positions[i], path.velocities[i], path.accelerations[i]
        u = float(np.vdot(z, z).real)
        if u < u_min:
            raise OrbifoldProximityError(f"path reaches u={u:.3e} < {u_min} at t={path.times[i]:.6g}")
        root, first, second = _sqrt_distance_derivatives(a, u)
        d_u = 2.0 * root * first
        d_uu = 2.0 * first * first + 2.0 * root * second
        radial[k] = float(np.vdot(z, zdot).real)
        u_dot = 2.0 * radial[k]
        u_ddot = 2.0 * float(np.vdot(zdot, zdot).real) + 2.0 * float(np.vdot(z, zddot).real)
        d[k] = root * root
        d_dot[k] = d_u * u_dot
        d_ddot[k] = d_uu * u_dot * u_dot + d_u * u_ddot
    fd = np.full(len(index), np.nan)
    if len(index) >= 3:
        h = times[1] - times[0]
        fd[1:-1] = (d[2:] - 2.0 * d[1:-1] + d[:-2]) / (h * h)
    return DistanceProfile(times, d, d_dot, d_ddot, radial, fd)


# ---------------------------------------------------------------------------
# Christoffel defect between two metrics
# ---------------------------------------------------------------------------

def _metric_and_christoffel(source, z) -> tuple:
    gj = hermitian_metric_jets(source, z, 1)
    g = gj[0]
    eigenvalues = np.linalg.eigvalsh(g)
    if eigenvalues[0] <= 0.0:
        raise DegenerateMetricError(f"metric not positive definite at z={z}: eigenvalues {eigenvalues}")
    return g, christoffel_from_jets(gj)


def tensor_norm(psi: np.ndarray, g: np.ndarray) -> float:
    """|Ψ|² = Σ_ij |Ψ(e_i, e_j)|²_g over a g-unitary frame e."""
    frame = np.linalg.inv(np.linalg.cholesky(g))
    values = np.einsum("lma,im,ja->ijl", psi, frame, frame)
    return float(np.sqrt(max(np.einsum("ijl,ln,ijn->", values, g, values.conj()).real, 0.0)))


def christoffel_defect(source_a, source_b, z) -> ChristoffelDefect:
    z = np.asarray(z, dtype=complex)
    g_a, gamma_a = _metric_and_christoffel(source_a, z)
    _, gamma_b = _metric_and_christoffel(source_b, z)
    psi = gamma_b - gamma_a
    return ChristoffelDefect(psi, tensor_norm(psi, g_a), z)


def acceleration_identity_residual(source_a, source_b, path: GeodesicPath, every: int = 10) -> float:
    """
    Along a B-geodesic, max over samples of | |D_t^A γ̇|_A − |Ψ(γ̇, γ̇)|_A |,
    with z̈ from the integrator and Ψ from the jets route.
    """
    worst = 0.0
    for i in range(0, len(path.times), every):
        z, zdot, zddot = path.positions[i], path.velocities[i], path.accelerations[i]
        g_a, gamma_a = _metric_and_christoffel(source_a, z)
        covariant = zddot + np.einsum("lma,m,a->l", gamma_a, zdot, zdot)
        defect = christoffel_defect(source_a, source_b, z).apply(zdot)
        lhs = np.sqrt(max(energy(g_a, covariant), 0.0))
        rhs = np.sqrt(max(energy(g_a, defect), 0.0))
        worst = max(worst, abs(lhs - rhs))
    return worst
