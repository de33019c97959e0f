"""
Kummer Atlas Module

The Kummer surface X built from the torus T = C²/Γ, Γ = Λ ⊕ Λ with
Λ = R·Z{1, i} (square) or R·Z{1, ζ}, ζ = e^{2πi/3} (hexagonal). The sixteen
points of (½Γ)/Γ are blown up; around each one the patchwork potential is
the glued potential Φ_{a_i}(|z − q_i|²), Euclidean beyond the neck.

Charts:
  - FLAT: the cover coordinate w reduced to the fundamental domain and mod ±1.
  - EGUCHI_HANSON: local orbifold coordinate z − q_i for u < s(1+2δ).
  - BUNDLE: bundle-patch coordinates of the same point when u < u_min.

Primary functions:
  - locate(surface, z): ChartPoint of a cover point.
  - volumes_and_A(surface): neck volume deficits and the constant A.
  - patchwork_metric, local_potential: the metric and potential at a cover point.
  - chart_consistency_check, a_monotonicity.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from itertools import product
from typing import Optional

import numpy as np
from numpy.polynomial.legendre import leggauss

from configs.defaults import DELTA, LATTICE_SCALE, U_MIN
from geometry import jets
from geometry.metric import (
    NVARS,
    HermitianMetric,
    bundle_chart_metric,
    bundle_pullback_metric,
    bundle_to_orbifold,
    metric_at,
    orbifold_to_bundle,
    radial_metric_jets,
)
from geometry.potentials import (
    RadialPotentialSpec,
    is_plurisubharmonic,
    potential_value,
    radial_determinant,
)
from utils.error_handler import (
    OrbifoldPointError,
    OverlapError,
    ParameterRangeError,
)

N_FIXED_POINTS = 16
ZETA = np.exp(2j * np.pi / 3)
LATTICES = ("square", "hexagonal")

_BASIS = {
    "square": (1.0 + 0j, 1j),
    "hexagonal": (1.0 + 0j, ZETA),
}


class ChartKind(Enum):
    FLAT = "Flat"
    EGUCHI_HANSON = "EH"
    BUNDLE = "Bundle"


@dataclass(frozen=True)
class KummerSurface:
    """
    Immutable description of a Kummer surface with its patchwork metric.

    cutoff_scale s rescales every neck to s < u < s(1+δ); the α-homothetic
    surface has lattice scale αR, parameters α²a and s = α².
    """
    lattice_scale: float = LATTICE_SCALE
    a: tuple = (0.0,) * N_FIXED_POINTS
    delta: float = DELTA
    lattice: str = "square"
    cutoff_scale: float = 1.0

    def __post_init__(self):
        a = tuple(float(x) for x in np.broadcast_to(np.asarray(self.a, dtype=float), (N_FIXED_POINTS,)))
        object.__setattr__(self, "a", a)
        if self.lattice not in LATTICES:
            raise ParameterRangeError(f"unknown lattice '{self.lattice}', expected one of {LATTICES}")
        if min(a) < 0.0:
            raise ParameterRangeError(f"a_i must be non-negative, got {min(a)}")
        if not 0.0 < self.delta <= 0.5:
            raise ParameterRangeError(f"delta={self.delta} outside (0, 1/2]")
        if not self.cutoff_scale > 0.0:
            raise ParameterRangeError(f"cutoff_scale={self.cutoff_scale} must be positive")
        required = 4.0 * np.sqrt(self.cutoff_scale) * (1.0 + 2.0 * self.delta)
        if self.lattice_scale < required:
            raise OverlapError(
                f"lattice scale {self.lattice_scale} < {required:.6g}: Eguchi-Hanson charts would overlap"
            )

    @classmethod
    def uniform(cls, a: float, **kwargs) -> "KummerSurface":
        return cls(a=(a,) * N_FIXED_POINTS, **kwargs)

    def scaled(self, alpha: float) -> "KummerSurface":
        if not alpha > 0.0:
            raise ParameterRangeError(f"alpha={alpha} must be positive")
        return KummerSurface(
            lattice_scale=alpha * self.lattice_scale,
            a=tuple(alpha ** 2 * x for x in self.a),
            delta=self.delta,
            lattice=self.lattice,
            cutoff_scale=alpha ** 2 * self.cutoff_scale,
        )

    @property
    def a_norm_squared(self) -> float:
        return float(sum(x * x for x in self.a))

    @property
    def r_a(self) -> float:
        """max a_i / min a_i."""
        low = min(self.a)
        return float(max(self.a) / low) if low > 0.0 else float("inf")

    @property
    def chart_bound(self) -> float:
        """u below which the Eguchi-Hanson chart is used."""
        return self.cutoff_scale * (1.0 + 2.0 * self.delta)

    @property
    def basis(self) -> tuple:
        return _BASIS[self.lattice]

    @property
    def torus_volume(self) -> float:
        """Euclidean volume of C²/Γ."""
        b1, b2 = self.basis
        cell = abs((np.conj(b1) * b2).imag) * self.lattice_scale ** 2
        return float(cell ** 2)

    def local_spec(self, index: int) -> RadialPotentialSpec:
        a = self.a[index]
        if a == 0.0:
            return RadialPotentialSpec.euclidean()
        return RadialPotentialSpec.glued(a, self.delta, self.cutoff_scale)


@dataclass(frozen=True)
class ChartPoint:
    kind: ChartKind
    coords: np.ndarray = field(compare=False)
    index: Optional[int] = None
    patch: Optional[str] = None

    @property
    def label(self) -> str:
        if self.kind is ChartKind.FLAT:
            return "Flat"
        return f"{self.kind.value}_{self.index}"

    @property
    def u(self) -> float:
        return float(np.vdot(self.coords, self.coords).real)

    def same_as(self, other: "ChartPoint", tol: float = 1e-12) -> bool:
        return (
            self.kind is other.kind
            and self.index == other.index
            and self.patch == other.patch
            and bool(np.abs(self.coords - other.coords).max() <= tol * (1.0 + np.abs(self.coords).max()))
        )


# ---------------------------------------------------------------------------
# Lattice arithmetic (per complex coordinate)
# ---------------------------------------------------------------------------

def _basis_matrix(surface: KummerSurface, scale: float) -> np.ndarray:
    b1, b2 = surface.basis
    return scale * np.array([[b1.real, b2.real], [b1.imag, b2.imag]])


def _to_lattice(surface: KummerSurface, w: complex, scale: float) -> np.ndarray:
    return np.linalg.solve(_basis_matrix(surface, scale), [w.real, w.imag])


def _from_lattice(surface: KummerSurface, mn, scale: float) -> complex:
    x, y = _basis_matrix(surface, scale) @ np.asarray(mn, dtype=float)
    return complex(x, y)


def reduce_coordinate(surface: KummerSurface, w: complex) -> complex:
    """w mod Λ, lattice coordinates in [−1/2, 1/2)."""
    mn = _to_lattice(surface, complex(w), surface.lattice_scale)
    mn = mn - np.floor(mn + 0.5)
    return _from_lattice(surface, mn, surface.lattice_scale)


def nearest_half_point(surface: KummerSurface, w: complex) -> tuple:
    """Nearest point of ½Λ to w, with its class (m mod 2, n mod 2)."""
    half = surface.lattice_scale / 2.0
    center = np.round(_to_lattice(surface, complex(w), half))
    best, best_mn = None, None
    for dm, dn in product((-1, 0, 1), repeat=2):
        mn = center + (dm, dn)
        q = _from_lattice(surface, mn, half)
        if best is None or abs(w - q) < abs(w - best) - 1e-15:
            best, best_mn = q, mn
    m, n = (int(round(x)) % 2 for x in best_mn)
    return best, (m, n)


def fixed_point_index(classes: tuple) -> int:
    (m1, n1), (m2, n2) = classes
    return ((m1 * 2 + n1) * 2 + m2) * 2 + n2


def half_lattice_points(surface: KummerSurface) -> np.ndarray:
    """The sixteen representatives q_i in the cover, row i ↔ fixed point i."""
    half = surface.lattice_scale / 2.0
    points = np.zeros((N_FIXED_POINTS, 2), dtype=complex)
    for m1, n1, m2, n2 in product((0, 1), repeat=4):
        index = fixed_point_index(((m1, n1), (m2, n2)))
        points[index] = [_from_lattice(surface, (m1, n1), half), _from_lattice(surface, (m2, n2), half)]
    return points


def nearest_fixed_point(surface: KummerSurface, z) -> tuple:
    """(q, index) of the nearest point of ½Γ in the cover."""
    q1, c1 = nearest_half_point(surface, complex(z[0]))
    q2, c2 = nearest_half_point(surface, complex(z[1]))
    return np.array([q1, q2]), fixed_point_index((c1, c2))


def canonical_sign(x) -> np.ndarray:
    """x or −x, whichever has a positive first nonzero real component."""
    x = np.asarray(x, dtype=complex)
    for component in (x[0].real, x[0].imag, x[1].real, x[1].imag):
        if component != 0.0:
            return x if component > 0.0 else -x
    return x


# ---------------------------------------------------------------------------
# Charts
# ---------------------------------------------------------------------------

def locate(surface: KummerSurface, z, u_min: float = U_MIN) -> ChartPoint:
    """Chart and local coordinates of the cover point z."""
    z = np.asarray(z, dtype=complex)
    w = np.array([reduce_coordinate(surface, z[0]), reduce_coordinate(surface, z[1])])
    q, index = nearest_fixed_point(surface, w)
    local = w - q
    u = float(np.vdot(local, local).real)
    if u >= surface.chart_bound:
        return ChartPoint(ChartKind.FLAT, canonical_sign(w))
    if u == 0.0:
        raise OrbifoldPointError(f"z={z} is the half-lattice point {index}; use a bundle chart")
    local = canonical_sign(local)
    if u < u_min:
        patch = "zeta" if abs(local[0]) >= abs(local[1]) else "upsilon"
        return ChartPoint(ChartKind.BUNDLE, orbifold_to_bundle(local, patch), index, patch)
    return ChartPoint(ChartKind.EGUCHI_HANSON, local, index)


def representative(surface: KummerSurface, point: ChartPoint) -> np.ndarray:
    """A cover point that locates to `point`."""
    if point.kind is ChartKind.FLAT:
        return np.asarray(point.coords, dtype=complex)
    q = half_lattice_points(surface)[point.index]
    if point.kind is ChartKind.BUNDLE:
        return q + canonical_sign(bundle_to_orbifold(point.coords, point.patch))
    return q + point.coords


def region(surface: KummerSurface, z) -> str:
    """'eguchi_hanson', 'neck' or 'flat' for a cover point."""
    q, _ = nearest_fixed_point(surface, z)
    u = float(np.sum(np.abs(np.asarray(z, dtype=complex) - q) ** 2))
    if u <= surface.cutoff_scale:
        return "eguchi_hanson"
    if u < surface.cutoff_scale * (1.0 + surface.delta):
        return "neck"
    return "flat"


def local_potential(surface: KummerSurface, z) -> float:
    """Φ_{a_i}(|z − q_i|²) around the nearest half-lattice point (u beyond the neck)."""
    q, index = nearest_fixed_point(surface, z)
    local = np.asarray(z, dtype=complex) - q
    return potential_value(surface.local_spec(index), float(np.vdot(local, local).real))


def patchwork_metric(surface: KummerSurface, z) -> HermitianMetric:
    q, index = nearest_fixed_point(surface, z)
    return metric_at(surface.local_spec(index), np.asarray(z, dtype=complex) - q)


def patchwork_metric_jets(surface: KummerSurface, z, order: int) -> np.ndarray:
    q, index = nearest_fixed_point(surface, z)
    local = np.asarray(z, dtype=complex) - q
    u = float(np.vdot(local, local).real)
    if u >= surface.cutoff_scale * (1.0 + surface.delta):
        return jets.constant_tensor(np.eye(2, dtype=complex), NVARS, order)
    return radial_metric_jets(surface.local_spec(index), local, order)


# ---------------------------------------------------------------------------
# Volumes and A
# ---------------------------------------------------------------------------

@dataclass
class VolumeReport:
    deficits: np.ndarray            # Vol_Euc(N_i) − Vol_g(N_i), quadrature
    boundary_deficits: np.ndarray   # same from the boundary values of uφ'
    closed_form: np.ndarray         # π² a_i² / 4
    A: float
    A_closed_form: float
    boundary_values: list = field(default_factory=list)

    @property
    def max_relative_error(self) -> float:
        mask = self.closed_form > 0.0
        if not mask.any():
            return float(np.abs(self.deficits).max())
        return float(np.max(np.abs(self.deficits[mask] - self.closed_form[mask]) / self.closed_form[mask]))


def _gauss_legendre(fn, low: float, high: float, nodes: int, panels: int) -> float:
    x, w = leggauss(nodes)
    edges = np.linspace(low, high, panels + 1)
    total = 0.0
    for left, right in zip(edges[:-1], edges[1:]):
        half = 0.5 * (right - left)
        total += half * sum(wk * fn(left + half * (xk + 1.0)) for xk, wk in zip(x, w))
    return float(total)


def neck_deficit(spec: RadialPotentialSpec, nodes: int = 64, panels: int = 4) -> float:
    """
    Vol_Euc(N) − Vol_g(N) for one neck of the μ₂ quotient:

        (π²/2) ∫_s^{s(1+δ)} u (1 − det g(u)) du
    """
    if spec.a == 0.0:
        return 0.0
    low, high = spec.neck
    integral = _gauss_legendre(lambda u: u * (1.0 - radial_determinant(spec, u)), low, high, nodes, panels)
    return 0.5 * np.pi ** 2 * integral


def _boundary_deficit(spec: RadialPotentialSpec) -> tuple:
    """Deficit from (π²/4)[(uφ')²] at both ends of the neck, and the two boundary values."""
    low, high = spec.neck
    if spec.a == 0.0:
        return 0.0, (low, high)
    inner = float(np.hypot(spec.a, low))     # uφ' = √(a²+u²) on the Eguchi-Hanson side
    outer = high                            # uφ' = u on the Euclidean side
    vol_g = 0.25 * np.pi ** 2 * (outer ** 2 - inner ** 2)
    vol_euc = 0.25 * np.pi ** 2 * (high ** 2 - low ** 2)
    return vol_euc - vol_g, (inner, outer)


def volumes_and_A(surface: KummerSurface, nodes: int = 64, panels: int = 4) -> VolumeReport:
    deficits = np.zeros(N_FIXED_POINTS)
    boundary = np.zeros(N_FIXED_POINTS)
    values = []
    for index in range(N_FIXED_POINTS):
        spec = surface.local_spec(index)
        unit = RadialPotentialSpec.glued(spec.a / spec.cutoff_scale, spec.delta) if spec.a > 0.0 else spec
        if not is_plurisubharmonic(unit, n_grid=101):
            logging.warning(f"Neck {index} with a={spec.a} is not plurisubharmonic for delta={surface.delta}")
        deficits[index] = neck_deficit(spec, nodes, panels)
        boundary[index], ends = _boundary_deficit(spec)
        values.append(ends)
    closed = 0.25 * np.pi ** 2 * np.asarray(surface.a) ** 2
    volume = surface.torus_volume
    a_numeric = 1.0 - 2.0 * deficits.sum() / volume
    a_closed = 1.0 - surface.a_norm_squared * np.pi ** 2 / (2.0 * volume)
    if a_closed <= 0.0:
        raise ParameterRangeError(f"A = {a_closed:.6g} <= 0: |a|² = {surface.a_norm_squared:.6g} too large")
    logging.info(f"Kummer volumes: A = {a_numeric:.15g} (closed form {a_closed:.15g})")
    return VolumeReport(deficits, boundary, closed, float(a_numeric), float(a_closed), values)


def a_monotonicity(surface: KummerSurface, index: int = 0, grid=None) -> np.ndarray:
    """Closed-form A as a_index runs over `grid`; strictly decreasing."""
    grid = np.linspace(0.0, 0.2, 11) if grid is None else np.asarray(grid, dtype=float)
    values = []
    for value in grid:
        a = list(surface.a)
        a[index] = float(value)
        trial = KummerSurface(surface.lattice_scale, tuple(a), surface.delta, surface.lattice, surface.cutoff_scale)
        values.append(1.0 - trial.a_norm_squared * np.pi ** 2 / (2.0 * trial.torus_volume))
    return np.asarray(values)


# ---------------------------------------------------------------------------
# Chart consistency
# ---------------------------------------------------------------------------

def chart_consistency_check(surface: KummerSurface, rng: np.random.Generator, n_points: int = 100) -> dict:
    """
    Max componentwise disagreement of overlapping chart data:

      - flat vs Eguchi-Hanson chart on s(1+δ) <= u < s(1+2δ) (translation Jacobian);
      - bundle closed form vs the pulled-back orbifold metric for u < s.
    """
    points = half_lattice_points(surface)
    s = surface.cutoff_scale
    flat_vs_eh = 0.0
    bundle_vs_orbifold = 0.0
    for _ in range(n_points):
        index = int(rng.integers(N_FIXED_POINTS))
        direction = rng.normal(size=4)
        direction /= np.linalg.norm(direction)
        u = s * (1.0 + surface.delta * (1.0 + rng.uniform()))
        local = np.sqrt(u) * (direction[0::2] + 1j * direction[1::2])
        g = patchwork_metric(surface, points[index] + local).components
        flat_vs_eh = max(flat_vs_eh, float(np.abs(g - np.eye(2)).max()))

        a = surface.a[index]
        if a > 0.0:
            patch = "zeta" if rng.uniform() < 0.5 else "upsilon"
            coords = np.array([rng.uniform(0.05, 0.4) * s * np.exp(2j * np.pi * rng.uniform()),
                               rng.uniform(0.0, 1.0) * np.exp(2j * np.pi * rng.uniform())])
            closed = bundle_chart_metric(a, coords, patch).components
            pulled = bundle_pullback_metric(a, coords, patch)
            bundle_vs_orbifold = max(bundle_vs_orbifold, float(np.abs(closed - pulled).max()))
    return {"flat_vs_eguchi_hanson": flat_vs_eh, "bundle_vs_orbifold": bundle_vs_orbifold}
