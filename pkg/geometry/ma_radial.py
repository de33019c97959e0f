"""
Radial Monge-Ampère Solver

For a potential Φ(u) of u = |z|², det g = Φ'·(uΦ')'. With h = uΦ' the equation
det g = F(u) becomes (h²)' = 2uF, solved by quadrature:

    h(u) = √(h0² + ∫_{u0}^u 2sF(s) ds),    Φ(u) = ∫ h(s)/s ds.

The neck experiment runs the correction problem on the annulus
u ∈ [0.5, 2] around one glued neck: find φ with φ(u0) = φ(u1) = 0 such that
Φ_a + φ has constant determinant A, the annulus volume ratio of Φ_a. The
constant h(u0) of the solution is fixed by the second boundary condition.

Primary functions:
  - solve_radial_ma(F, h0, u_range): RadialMASolution
  - neck_correction_experiment(a, delta): NeckCorrection
  - ma_scaling(a_grid, delta): sup|φ|, sup|Δφ| and their log-log slopes in a
  - lower_bound_check(solution), norm_ma_residual(solution)
"""

import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from configs.defaults import A_GRID, SCALING_DELTA, THREADS
from geometry.metric import loglog_slope
from geometry.potentials import (
    RadialPotentialSpec,
    is_plurisubharmonic,
    potential_value,
    radial_determinant,
    radial_eigenvalues,
)
from utils.error_handler import IntegrationError, NonKahlerRhsError, ParameterRangeError
from utils.workers import run_sweep

QUAD_TOL = 1e-14
RESIDUAL_TOL = 1e-10
NECK_RANGE = (0.5, 2.0)
N_CHEBYSHEV = 16
N_RHS_SAMPLES = 513


@dataclass
class RadialMASolution:
    grid: np.ndarray
    h: np.ndarray                 # u·Φ'(u)
    Phi: np.ndarray               # up to an additive constant
    F: Callable[[float], float]
    h0: float
    u_range: tuple
    residual: float               # max |Φ'(uΦ')' − F| / (1 + |F|) at Chebyshev points
    background: Optional[RadialPotentialSpec] = None

    @property
    def phi_prime(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.h / self.grid

    @property
    def h_derivative(self) -> np.ndarray:
        """(uΦ')' = uF/h."""
        rhs = np.array([self.F(float(u)) for u in self.grid])
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.grid * rhs / self.h


def _quad(fn, low: float, high: float, tol: float, points=None) -> float:
    if high == low:
        return 0.0
    inner = None
    if points is not None:
        inner = [p for p in points if low < p < high] or None
    value, _ = quad(fn, low, high, epsabs=tol, epsrel=tol, limit=200, points=inner)
    return float(value)


def _check_rhs(F, u0: float, u1: float) -> None:
    for u in np.linspace(u0, u1, N_RHS_SAMPLES):
        value = F(float(u))
        if not value >= 0.0:
            raise NonKahlerRhsError(f"right-hand side F({u:.6g}) = {value:.6g} is negative")


def _chebyshev_points(u0: float, u1: float, n: int = N_CHEBYSHEV) -> np.ndarray:
    k = np.arange(n)
    return 0.5 * (u0 + u1) + 0.5 * (u1 - u0) * np.cos(np.pi * (2 * k + 1) / (2 * n))


def solve_radial_ma(F: Callable[[float], float], h0: float, u_range: tuple,
                    n_grid: int = 101, tol: float = QUAD_TOL,
                    background: Optional[RadialPotentialSpec] = None,
                    residual_tol: float = RESIDUAL_TOL) -> RadialMASolution:
    """
    Solve Φ'·(uΦ')' = F on [u0, u1] with u·Φ' = h0 at u0.
    IntegrationError when the Chebyshev residual exceeds residual_tol.

    Φ is accumulated as ∫(h − h0)/s ds + h0·ln u, so u0 = 0 with h0 > 0 is
    allowed (Φ(u0) = −inf there, as for Eguchi-Hanson).
    """
    u0, u1 = float(u_range[0]), float(u_range[1])
    if not (0.0 <= u0 < u1):
        raise ParameterRangeError(f"need 0 <= u0 < u1, got {u_range}")
    if h0 < 0.0:
        raise ParameterRangeError(f"h0={h0} must be non-negative")
    _check_rhs(F, u0, u1)

    def h_at(u: float) -> float:
        return float(np.sqrt(h0 * h0 + _quad(lambda s: 2.0 * s * F(s), u0, u, tol)))

    def log_part(u: float) -> float:
        if h0 == 0.0:
            return 0.0
        return h0 * (np.log(u) - (np.log(u0) if u0 > 0.0 else 0.0)) if u > 0.0 else -np.inf

    grid = np.linspace(u0, u1, n_grid)
    increments = [_quad(lambda s: 2.0 * s * F(s), lo, hi, tol) for lo, hi in zip(grid[:-1], grid[1:])]
    h = np.sqrt(h0 * h0 + np.concatenate([[0.0], np.cumsum(increments)]))

    regular = [_quad(lambda s: (h_at(s) - h0) / s, lo, hi, tol) for lo, hi in zip(grid[:-1], grid[1:])]
    Phi = np.concatenate([[0.0], np.cumsum(regular)]) + np.array([log_part(float(u)) for u in grid])

    # Φ'·(uΦ')' − F at Chebyshev points, (uΦ')' by a five-point stencil on h
    eta = 5e-4 * (u1 - u0)
    worst = 0.0
    for x in _chebyshev_points(u0, u1):
        stencil = [h_at(x + k * eta) for k in (-2, -1, 1, 2)]
        dh = (stencil[0] - 8.0 * stencil[1] + 8.0 * stencil[2] - stencil[3]) / (12.0 * eta)
        f = F(x)
        worst = max(worst, abs(h_at(x) / x * dh - f) / (1.0 + abs(f)))
    if worst > residual_tol:
        raise IntegrationError(f"radial Monge-Ampère residual {worst:.3e} above {residual_tol:g}")
    logging.debug(f"Radial Monge-Ampère solved on [{u0:g}, {u1:g}], residual {worst:.3e}")

    return RadialMASolution(grid, h, Phi, F, float(h0), (u0, u1), worst, background)


# ---------------------------------------------------------------------------
# Correction fields against a background potential
# ---------------------------------------------------------------------------

def _background_h(spec: RadialPotentialSpec, u: float) -> tuple:
    """(uΦ', (uΦ')') of the background."""
    tangential, radial = radial_eigenvalues(spec, u)
    return u * tangential, radial


def _relative_eigenvalues(solution: RadialMASolution) -> tuple:
    """Eigenvalues of g̃ relative to g: (h̃/h, h̃'/h')."""
    background = solution.background or RadialPotentialSpec.euclidean()
    pairs = np.array([_background_h(background, float(u)) for u in solution.grid])
    with np.errstate(divide="ignore", invalid="ignore"):
        return solution.h / pairs[:, 0], solution.h_derivative / pairs[:, 1]


def correction_laplacian(solution: RadialMASolution) -> np.ndarray:
    """Δφ = g^{ν̄μ}φ_{μν̄} for φ = Φ̃ − Φ_background, at the grid nodes."""
    tangential, radial = _relative_eigenvalues(solution)
    return (tangential - 1.0) + (radial - 1.0)


def lower_bound_check(solution: RadialMASolution) -> float:
    """min over nodes of Tr_g g̃ / 2 − √(det g̃ / det g); non-negative by AM-GM."""
    tangential, radial = _relative_eigenvalues(solution)
    if np.any(tangential <= 0.0) or np.any(radial <= 0.0):
        raise ParameterRangeError("total metric is not positive definite")
    slack = 0.5 * (tangential + radial) - np.sqrt(tangential * radial)
    worst = float(slack.min())
    if worst < -1e-12:
        logging.warning(f"Arithmetic-geometric lower bound violated: slack {worst:.3e}")
    return worst


def norm_ma_residual(solution: RadialMASolution) -> float:
    """max |2(det g̃/det g − 1) − (2Δφ + (Δφ)² − |∂∂̄φ|²_g)| with det g̃ = F, over nodes u > 0."""
    background = solution.background or RadialPotentialSpec.euclidean()
    tangential, radial = _relative_eigenvalues(solution)
    inside = solution.grid > 0.0
    x, y = tangential[inside] - 1.0, radial[inside] - 1.0
    lap = x + y
    ratio = np.array([solution.F(float(u)) / radial_determinant(background, float(u))
                      for u in solution.grid[inside]])
    return float(np.abs(2.0 * (ratio - 1.0) - (2.0 * lap + lap ** 2 - (x ** 2 + y ** 2))).max())


# ---------------------------------------------------------------------------
# Neck experiment
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NeckCorrectionRow:
    a: float
    delta: float
    A: float
    sup_phi: float
    sup_laplacian: float
    min_laplacian: float
    min_slack: float
    boundary_mismatch: float

    def as_dict(self) -> dict:
        return {
            "a": self.a,
            "delta": self.delta,
            "A": self.A,
            "sup_phi": self.sup_phi,
            "sup_lap_phi": self.sup_laplacian,
            "min_lap_phi": self.min_laplacian,
            "min_slack": self.min_slack,
            "boundary_mismatch": self.boundary_mismatch,
        }


@dataclass
class NeckCorrection:
    solution: RadialMASolution
    phi: np.ndarray
    laplacian: np.ndarray
    row: NeckCorrectionRow


def _neck_background(a: float, delta: float) -> RadialPotentialSpec:
    if a == 0.0:
        return RadialPotentialSpec.euclidean()
    spec = RadialPotentialSpec.glued(a, delta)
    if not is_plurisubharmonic(spec):
        raise ParameterRangeError(f"glued potential with a={a}, delta={delta} is not plurisubharmonic")
    return spec


def neck_correction_experiment(a: float, delta: float = SCALING_DELTA, u_range: tuple = NECK_RANGE,
                               n_grid: int = 151, tol: float = QUAD_TOL) -> NeckCorrection:
    u0, u1 = u_range
    if not (0.0 < u0 < 1.0 and 1.0 + delta <= u1):
        raise ParameterRangeError(f"annulus {u_range} does not contain the neck [1, {1.0 + delta}]")
    background = _neck_background(a, delta)
    neck_points = (1.0, 1.0 + delta)

    def h_background(u: float) -> float:
        return _background_h(background, u)[0]

    h_low, h_high = h_background(u0), h_background(u1)
    A = (h_high ** 2 - h_low ** 2) / (u1 ** 2 - u0 ** 2)
    if not A > 0.0:
        raise ParameterRangeError(f"annulus volume ratio A={A} is not positive")

    def mismatch(c: float) -> float:
        return _quad(lambda s: (np.sqrt(c * c + A * (s * s - u0 * u0)) - h_background(s)) / s,
                     u0, u1, tol, neck_points)

    c = brentq(mismatch, 0.0, 2.0 * h_high + 1.0, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    solution = solve_radial_ma(lambda u: A, c, u_range, n_grid, tol, background)

    base = np.array([potential_value(background, float(u)) for u in solution.grid])
    phi = (solution.Phi - solution.Phi[0]) - (base - base[0])
    laplacian = correction_laplacian(solution)
    slack = lower_bound_check(solution)
    row = NeckCorrectionRow(
        a=float(a),
        delta=float(delta),
        A=float(A),
        sup_phi=float(np.abs(phi).max()),
        sup_laplacian=float(np.abs(laplacian).max()),
        min_laplacian=float(laplacian.min()),
        min_slack=slack,
        boundary_mismatch=float(abs(phi[-1])),
    )
    logging.info(
        f"Neck correction a={a}, delta={delta}: A={A:.12g}, sup|phi|={row.sup_phi:.6e}, "
        f"sup|lap phi|={row.sup_laplacian:.6e}"
    )
    return NeckCorrection(solution, phi, laplacian, row)


@dataclass
class MAScalingReport:
    rows: list
    phi_slope: float
    laplacian_slope: float

    def as_dict(self) -> dict:
        return {
            "rows": [row.as_dict() for row in self.rows],
            "phi_slope": self.phi_slope,
            "laplacian_slope": self.laplacian_slope,
        }


def ma_scaling(a_grid=A_GRID, delta: float = SCALING_DELTA, threads: int = THREADS,
               n_grid: int = 151) -> MAScalingReport:
    """Neck experiment over an a-grid (run concurrently) with log-log slopes of sup|φ| and sup|Δφ|."""
    results = run_sweep(lambda a: neck_correction_experiment(float(a), delta, n_grid=n_grid), a_grid, threads)
    rows = [result.row for result in results]
    positive = [row for row in rows if row.a > 0.0]
    if len(positive) >= 2:
        a_values = [row.a for row in positive]
        phi_slope = loglog_slope(a_values, [row.sup_phi for row in positive])
        laplacian_slope = loglog_slope(a_values, [row.sup_laplacian for row in positive])
    else:
        phi_slope = laplacian_slope = float("nan")
    logging.info(f"Monge-Ampère scaling: sup|phi| ~ a^{phi_slope:.3f}, sup|lap phi| ~ a^{laplacian_slope:.3f}")
    return MAScalingReport(rows, phi_slope, laplacian_slope)
