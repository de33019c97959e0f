"""
Isometries of the Kummer Patchwork Metric

On the square lattice Λ = R·Z[i] the affine maps z ↦ B·c(z) + b with

  - B ∈ U(2) ∩ GL(2, Z[i]): diagonal or antidiagonal, entries in {±1, ±i};
  - b ∈ (½Λ)² mod Γ;
  - c = identity or complex conjugation,

descend to X and preserve the patchwork metric whenever all a_i agree.
F and −F induce the same map on X, leaving 1024 / 2 = 512 isometries.

Elements are held in exact integer form: a swap flag and unit exponents for
B, translation bits (m, n) mod 2 per coordinate with b_k = (R/2)(m_k + i n_k),
and the conjugation flag. Composition and equality are integer operations.

Primary functions:
  - isometry_group(surface): the 512 elements, with closure and orders.
  - special_isometry(surface), special_torus_checks(surface)
  - homothety_check(surface, alpha)
"""

import logging
from dataclasses import dataclass
from itertools import product

import numpy as np

from configs.defaults import U_MIN
from geometry.geodesics import PatchworkField, integrate_geodesic, GeodesicState
from geometry.kummer import (
    ZETA,
    ChartKind,
    ChartPoint,
    KummerSurface,
    half_lattice_points,
    local_potential,
    locate,
    nearest_half_point,
    nearest_fixed_point,
    patchwork_metric,
    reduce_coordinate,
    region,
)
from geometry.metric import bundle_chart_metric, real_vector
from geometry.stability import second_variation_spectrum
from utils.error_handler import HypothesisViolationError, OverlapError

_UNITS = (1.0 + 0j, 1j, -1.0 + 0j, -1j)


# ---------------------------------------------------------------------------
# Group elements
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IsometryElement:
    swap: bool                 # antidiagonal B
    exponents: tuple           # B entries i^e, row by row
    shift: tuple               # ((m1, n1), (m2, n2)) mod 2
    conj: bool
    lattice_scale: float = 8.0

    def __post_init__(self):
        e0, e1 = (e % 4 for e in self.exponents)
        if e0 >= 2:                       # (B, b) ~ (−B, b) on X
            e0, e1 = e0 - 2, (e1 + 2) % 4
        object.__setattr__(self, "exponents", (e0, e1))
        object.__setattr__(self, "shift", tuple((m % 2, n % 2) for m, n in self.shift))

    @property
    def key(self) -> tuple:
        return self.swap, self.exponents, self.shift, self.conj

    @property
    def B(self) -> np.ndarray:
        matrix = np.zeros((2, 2), dtype=complex)
        for row, e in enumerate(self.exponents):
            matrix[row, 1 - row if self.swap else row] = _UNITS[e]
        return matrix

    @property
    def b(self) -> np.ndarray:
        half = self.lattice_scale / 2.0
        return np.array([half * complex(m, n) for m, n in self.shift])

    @property
    def is_identity(self) -> bool:
        return self.key == (False, (0, 0), ((0, 0), (0, 0)), False)

    def __call__(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        return self.B @ (z.conj() if self.conj else z) + self.b

    def compose(self, other: "IsometryElement") -> "IsometryElement":
        """self ∘ other."""
        e_other = tuple(-e for e in other.exponents) if self.conj else other.exponents
        exponents = []
        shift = []
        for row in range(2):
            col = 1 - row if self.swap else row
            exponents.append(self.exponents[row] + e_other[col])
            m, n = other.shift[col]          # conjugation fixes b mod Γ
            if self.exponents[row] % 2:
                m, n = n, m
            m0, n0 = self.shift[row]
            shift.append((m + m0, n + n0))
        return IsometryElement(
            swap=self.swap != other.swap,
            exponents=tuple(exponents),
            shift=tuple(shift),
            conj=self.conj != other.conj,
            lattice_scale=self.lattice_scale,
        )

    def order(self, limit: int = 16) -> int:
        power = self
        for k in range(1, limit + 1):
            if power.is_identity:
                return k
            power = self.compose(power)
        raise HypothesisViolationError(f"element {self.key} has order > {limit}")

    def as_dict(self) -> dict:
        return {
            "B": [[str(x) for x in row] for row in self.B],
            "b": [str(x) for x in self.b],
            "conj": self.conj,
            "order": self.order(),
        }


def identity(lattice_scale: float) -> IsometryElement:
    return IsometryElement(False, (0, 0), ((0, 0), (0, 0)), False, lattice_scale)


def _check_group_hypotheses(surface: KummerSurface) -> None:
    if surface.lattice != "square":
        raise HypothesisViolationError("the 512-element group is defined for the square lattice")
    if len(set(surface.a)) != 1:
        raise HypothesisViolationError(f"isometry group needs equal a_i, got r_a = {surface.r_a}")


def raw_maps(lattice_scale: float) -> list:
    """All 32 x 16 x 2 affine maps before identifying F with −F."""
    maps = []
    for swap, e0, e1, m1, n1, m2, n2, conj in product(
        (False, True), range(4), range(4), (0, 1), (0, 1), (0, 1), (0, 1), (False, True)
    ):
        maps.append((swap, (e0, e1), ((m1, n1), (m2, n2)), conj))
    return maps


def half_point_permutation(surface: KummerSurface, element: IsometryElement) -> list:
    points = half_lattice_points(surface)
    return [nearest_fixed_point(surface, element(q))[1] for q in points]


@dataclass
class GroupReport:
    elements: list
    raw_count: int
    closed: bool
    orders: dict
    permutations_ok: bool
    potential_residual: float

    @property
    def max_order(self) -> int:
        return max(self.orders.values())


def _neck_samples(surface: KummerSurface, rng: np.random.Generator, n_points: int) -> np.ndarray:
    """Points spread over flat regions and Eguchi-Hanson necks of the cover."""
    points = half_lattice_points(surface)
    samples = []
    s = surface.cutoff_scale
    for k in range(n_points):
        if k % 2:
            samples.append(rng.uniform(-1.0, 1.0, 2) * surface.lattice_scale
                           + 1j * rng.uniform(-1.0, 1.0, 2) * surface.lattice_scale)
            continue
        direction = rng.normal(size=4)
        direction /= np.linalg.norm(direction)
        u = s * rng.uniform(0.2, 1.0 + 2.5 * surface.delta)
        local = np.sqrt(u) * (direction[0::2] + 1j * direction[1::2])
        samples.append(points[rng.integers(len(points))] + local)
    return np.array(samples)


def isometry_group(surface: KummerSurface, rng: np.random.Generator = None,
                   n_points: int = 100, check_closure: bool = True) -> GroupReport:
    _check_group_hypotheses(surface)
    rng = rng or np.random.default_rng(0)
    R = surface.lattice_scale
    raw = raw_maps(R)
    unique = {}
    for swap, exponents, shift, conj in raw:
        element = IsometryElement(swap, exponents, shift, conj, R)
        unique.setdefault(element.key, element)
    elements = sorted(unique.values(), key=lambda e: e.key)
    logging.info(f"Isometry group: {len(raw)} raw maps, {len(elements)} after F ~ -F")

    closed = True
    if check_closure:
        for first in elements:
            for second in elements:
                if first.compose(second).key not in unique:
                    closed = False
                    logging.error(f"Composition {first.key} o {second.key} leaves the group")
                    break
            if not closed:
                break

    orders = {element.key: element.order() for element in elements}
    identity_set = list(range(16))
    permutations_ok = all(
        sorted(half_point_permutation(surface, element)) == identity_set for element in elements
    )

    samples = _neck_samples(surface, rng, n_points)
    reference = np.array([local_potential(surface, z) for z in samples])
    residual = 0.0
    for element in elements:
        values = np.array([local_potential(surface, element(z)) for z in samples])
        residual = max(residual, float(np.max(np.abs(values - reference) / (1.0 + np.abs(reference)))))
    return GroupReport(elements, len(raw), closed, orders, permutations_ok, residual)


def isometry_maps_regions(surface: KummerSurface, elements, rng: np.random.Generator,
                          n_points: int = 50) -> bool:
    """Every element maps Eguchi-Hanson, neck and flat samples into the same kind of region."""
    samples = _neck_samples(surface, rng, n_points)
    kinds = [region(surface, z) for z in samples]
    for element in elements:
        for z, kind in zip(samples, kinds):
            if region(surface, element(z)) != kind:
                logging.warning(f"Element {element.key} maps a {kind} point to {region(surface, element(z))}")
                return False
    return True


# ---------------------------------------------------------------------------
# The special isometry and its totally geodesic torus
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpecialIsometry:
    """f(z, w) = (z, u·w + t); M = {w = fixed_w} is fixed pointwise in w."""
    unit: complex
    translation: complex
    fixed_w: complex
    lattice: str

    def __call__(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        return np.array([z[0], self.unit * z[1] + self.translation])


def special_isometry(surface: KummerSurface) -> SpecialIsometry:
    R = surface.lattice_scale
    if surface.lattice == "square":
        return SpecialIsometry(1j, R / 2.0, R * (1 + 1j) / 4.0, "square")
    return SpecialIsometry(ZETA, R * (1 + ZETA) / 2.0, R * (1 + 2 * ZETA) / 6.0, "hexagonal")


def special_element(surface: KummerSurface) -> IsometryElement:
    """The square-lattice special isometry as a group element."""
    return IsometryElement(False, (0, 1), ((0, 0), (1, 0)), False, surface.lattice_scale)


def affine_order(surface: KummerSurface, f: SpecialIsometry, limit: int = 12) -> int:
    """Least k with f^k = id on X: u^k = 1 and the translation part in Λ."""
    unit, shift = 1.0 + 0j, 0j
    for k in range(1, limit + 1):
        unit, shift = f.unit * unit, f.unit * shift + f.translation
        if abs(unit - 1.0) < 1e-12 and abs(reduce_coordinate(surface, shift)) < 1e-9:
            return k
    raise HypothesisViolationError(f"special isometry has order > {limit}")


def _min_distance_squared(surface: KummerSurface, w0: complex) -> float:
    """min over M = {w = w0} of the distance² to ½Γ, attained with z on a half-lattice point."""
    q, _ = nearest_half_point(surface, w0)
    return float(abs(w0 - q) ** 2)


def special_torus_checks(surface: KummerSurface, rng: np.random.Generator = None,
                         n_points: int = 20, n_launches: int = 4, length: float = 10.0,
                         n_modes: int = 8) -> dict:
    rng = rng or np.random.default_rng(0)
    f = special_isometry(surface)
    w0 = f.fixed_w
    R = surface.lattice_scale

    distance_squared = _min_distance_squared(surface, w0)
    if distance_squared <= surface.chart_bound:
        raise OverlapError(f"M comes within u={distance_squared:.6g} of a half-lattice point")

    samples = [np.array([complex(*rng.uniform(0.0, R, 2)), w0]) for _ in range(n_points)]
    flat = all(locate(surface, z).kind is ChartKind.FLAT for z in samples)
    metric_residual = max(float(np.abs(patchwork_metric(surface, z).components - np.eye(2)).max()) for z in samples)
    fixed_residual = max(abs(reduce_coordinate(surface, f(z)[1] - w0)) for z in samples)

    field = PatchworkField(surface)
    drift = 0.0
    for _ in range(n_launches):
        start = np.array([complex(*rng.uniform(0.0, R, 2)), w0])
        direction = np.exp(2j * np.pi * rng.uniform()) / np.sqrt(2.0)
        state = GeodesicState(ChartPoint(ChartKind.FLAT, start), real_vector([direction, 0.0]))
        path = integrate_geodesic(field, state, length, step=0.01)
        drift = max(drift, float(np.abs(path.positions[:, 1] - w0).max()))

    # closed circle along Re z of Euclidean length R
    start = np.array([0.25 * R + 0.1j * R, w0])
    state = GeodesicState(ChartPoint(ChartKind.FLAT, start), real_vector([1.0 / np.sqrt(2.0), 0.0]))
    loop = integrate_geodesic(field, state, np.sqrt(2.0) * R, step=0.01)
    closure = loop.closure_error(translation=[R, 0.0])
    spectrum = second_variation_spectrum(field, loop, n_modes, translation=[R, 0.0])

    report = {
        "lattice": surface.lattice,
        "order": affine_order(surface, f),
        "min_distance_squared": distance_squared,
        "chart_bound": surface.chart_bound,
        "in_flat_region": flat,
        "flat_metric_residual": metric_residual,
        "fixed_residual": float(fixed_residual),
        "tangent_drift": drift,
        "loop_closure": closure,
        "min_eigenvalue": spectrum.min_eigenvalue,
        "nullity_estimate": spectrum.nullity_estimate,
    }
    logging.info(f"Special torus checks: {report}")
    return report


# ---------------------------------------------------------------------------
# Homothety
# ---------------------------------------------------------------------------

def homothety_check(surface: KummerSurface, alpha: float, rng: np.random.Generator = None,
                    n_points: int = 100) -> dict:
    """
    max |α² g_α(αz) − α² g(z)| over samples, g_α the patchwork metric of the
    α-scaled surface, and the same comparison for E in the bundle chart.
    """
    rng = rng or np.random.default_rng(0)
    scaled = surface.scaled(alpha)
    residual = 0.0
    for z in _neck_samples(surface, rng, n_points):
        q, _ = nearest_fixed_point(surface, z)
        if np.sum(np.abs(z - q) ** 2) < U_MIN:
            continue
        pulled = alpha ** 2 * patchwork_metric(scaled, alpha * z).components
        original = alpha ** 2 * patchwork_metric(surface, z).components
        residual = max(residual, float(np.abs(pulled - original).max()))

    divisor = 0.0
    for a in sorted(set(surface.a)):
        if a == 0.0:
            continue
        for base in rng.uniform(-1.0, 1.0, (10, 2)):
            coords = np.array([0.0, complex(*base) / np.sqrt(2.0)])
            small = bundle_chart_metric(a, coords).components[1, 1]
            large = bundle_chart_metric(alpha ** 2 * a, coords).components[1, 1]
            divisor = max(divisor, float(abs(large - alpha ** 2 * small)))
    logging.info(f"Homothety alpha={alpha}: metric residual {residual:.3e}, divisor residual {divisor:.3e}")
    return {"alpha": alpha, "metric_residual": residual, "divisor_residual": divisor}
