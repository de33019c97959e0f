"""
Radial Kähler Potentials

Closed-form potentials of the patchwork construction, all functions of
u = |z|² only:

- Euclidean:       f(u) = u
- Eguchi-Hanson:   f_a(u) = √(a²+u²) − a·arsinh(a/u)
- Glued:           Φ_a(u) = u + χ(u)·(f_a(u) − u), with χ the smooth cutoff
                   equal to 1 for u ≤ 1 and 0 for u ≥ 1+δ

Every potential is evaluated as a univariate jet in u. The Eguchi-Hanson part
is always carried as the small difference G = f_a − u, whose value and
derivatives have cancellation-free closed forms; the glued potential is then
u + χ·G and the Eguchi-Hanson one u + G.

Primary functions:
  - eval_potential(spec, u, order): Jet of φ(u+t) in t.
  - derivative_series(spec, u, order): Taylor series of φ' at u.
  - radial_eigenvalues(spec, u): (φ', (uφ')'), the metric eigenvalues.
  - eval_cutoff, neck_remainder, homothety_transform.
  - plurisubharmonic_bound(delta): measured a_max(δ).
"""

import logging
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np
from scipy.optimize import brentq

from configs.defaults import DELTA
from geometry import jets
from geometry.jets import Jet
from utils.error_handler import OrbifoldPointError, OutOfRegionError, ParameterRangeError

# smoothstep treated as exactly 0 / 1 this close to its support ends
_STEP_EPS = 1e-3

# u below which neck_remainder refuses to evaluate
NECK_U_FLOOR = 0.25


class PotentialKind(Enum):
    EUCLIDEAN = "euclidean"
    EGUCHI_HANSON = "eguchi_hanson"
    GLUED = "glued"


@dataclass(frozen=True)
class RadialPotentialSpec:
    """
    A spherically symmetric Kähler potential.

    cutoff_scale s rescales the cutoff to χ(u/s); s = α² is the cutoff of the
    α-homothetic surface.
    """
    kind: PotentialKind
    a: float = 0.0
    delta: float = DELTA
    cutoff_scale: float = 1.0

    def __post_init__(self):
        if self.kind is not PotentialKind.EUCLIDEAN and not self.a > 0.0:
            raise ParameterRangeError(f"{self.kind.value} potential needs a > 0, got a={self.a}")
        if not 0.0 < self.delta <= 0.5:
            raise ParameterRangeError(f"delta={self.delta} outside (0, 1/2]")
        if not self.cutoff_scale > 0.0:
            raise ParameterRangeError(f"cutoff_scale={self.cutoff_scale} must be positive")

    @classmethod
    def euclidean(cls) -> "RadialPotentialSpec":
        return cls(PotentialKind.EUCLIDEAN)

    @classmethod
    def eguchi_hanson(cls, a: float) -> "RadialPotentialSpec":
        return cls(PotentialKind.EGUCHI_HANSON, a=a)

    @classmethod
    def glued(cls, a: float, delta: float = DELTA, cutoff_scale: float = 1.0) -> "RadialPotentialSpec":
        return cls(PotentialKind.GLUED, a=a, delta=delta, cutoff_scale=cutoff_scale)

    def scaled(self, alpha: float) -> "RadialPotentialSpec":
        """Parameters of the α-homothetic potential: a -> α²a, cutoff χ(u/α²)."""
        if self.kind is PotentialKind.EUCLIDEAN:
            return self
        return replace(self, a=alpha ** 2 * self.a, cutoff_scale=alpha ** 2 * self.cutoff_scale)

    @property
    def neck(self) -> tuple:
        """The u-interval on which the cutoff is strictly between 0 and 1."""
        return self.cutoff_scale, self.cutoff_scale * (1.0 + self.delta)


# ---------------------------------------------------------------------------
# Cutoff
# ---------------------------------------------------------------------------

def _smoothstep(t: Jet) -> Jet:
    """s(t) = e^{-1/t} / (e^{-1/t} + e^{-1/(1-t)}), clamped to 0 / 1 outside (0, 1)."""
    if t.value <= _STEP_EPS:
        return Jet.constant(0.0, t.nvars, t.order)
    if t.value >= 1.0 - _STEP_EPS:
        return Jet.constant(1.0, t.nvars, t.order)
    rising = jets.exp(-1.0 / t)
    falling = jets.exp(-1.0 / (1.0 - t))
    return rising / (rising + falling)


def cutoff_jet(u: Jet, delta: float, scale: float = 1.0) -> Jet:
    """χ applied to an arbitrary jet u (any number of variables)."""
    return _smoothstep((1.0 + delta - u / scale) / delta)


def eval_cutoff(u: float, delta: float, order: int, scale: float = 1.0) -> Jet:
    """Jet of χ(u+t) in t; χ = 1 for u <= scale, 0 for u >= scale·(1+δ)."""
    return cutoff_jet(Jet.variable(0, u, 1, order), delta, scale)


# ---------------------------------------------------------------------------
# Eguchi-Hanson difference G = f_a - u, in units of a²
# ---------------------------------------------------------------------------

def _arsinh_ratio(a: float, u: float) -> float:
    """arsinh(a/u)/a, with the a -> 0 limit 1/u."""
    if a == 0.0:
        return 1.0 / u
    return jets.arsinh_compensated(a / u) / a


def _eh_remainder(a: float, u: float, order: int) -> Jet:
    """
    Jet of (f_a(u+t) − (u+t)) / a².

    value: 1/(W+u) − arsinh(a/u)/a, derivative: 1/(u(W+u)), W = √(a²+u²).
    """
    w = float(np.hypot(a, u))
    value = 1.0 / (w + u) - _arsinh_ratio(a, u)
    if order == 0:
        return Jet.constant(value, 1, 0)
    t = Jet.variable(0, u, 1, order - 1)
    slope = 1.0 / (t * (jets.sqrt(a * a + t * t) + t))
    return Jet(jets.antiderivative(slope.coeffs, value), 1, order)


def _check_u(spec: RadialPotentialSpec, u: float) -> None:
    if spec.kind is PotentialKind.EUCLIDEAN:
        if u < 0.0:
            raise OrbifoldPointError(f"u={u} is negative")
        return
    if not u > 0.0:
        raise OrbifoldPointError(f"{spec.kind.value} potential is singular at u={u}")


def eval_potential(spec: RadialPotentialSpec, u: float, order: int) -> Jet:
    """Jet of φ(u+t) in t for the given radial potential."""
    _check_u(spec, u)
    t = Jet.variable(0, u, 1, order)
    if spec.kind is PotentialKind.EUCLIDEAN:
        return t
    g = _eh_remainder(spec.a, u, order) * spec.a ** 2
    if spec.kind is PotentialKind.EGUCHI_HANSON:
        return t + g
    return t + eval_cutoff(u, spec.delta, order, spec.cutoff_scale) * g


def potential_value(spec: RadialPotentialSpec, u: float) -> float:
    return float(eval_potential(spec, u, 0).value)


def derivative_series(spec: RadialPotentialSpec, u: float, order: int) -> np.ndarray:
    """Taylor coefficients of φ'(u+t) up to t^order."""
    if spec.kind is PotentialKind.EUCLIDEAN:
        series = np.zeros(order + 1)
        series[0] = 1.0
        return series
    return eval_potential(spec, u, order + 1).partial(0).coeffs


def in_eguchi_hanson_zone(spec: RadialPotentialSpec, u: float) -> bool:
    return spec.kind is PotentialKind.EGUCHI_HANSON or (
        spec.kind is PotentialKind.GLUED and u <= spec.cutoff_scale
    )


def radial_eigenvalues(spec: RadialPotentialSpec, u: float) -> tuple:
    """
    The two metric eigenvalues (φ'(u), (uφ'(u))').

    Exact closed forms W/u and u/W are used wherever the potential is pure
    Eguchi-Hanson, so their product is 1 to roundoff.
    """
    _check_u(spec, u)
    if spec.kind is PotentialKind.EUCLIDEAN:
        return 1.0, 1.0
    if in_eguchi_hanson_zone(spec, u):
        w = float(np.hypot(spec.a, u))
        return w / u, u / w
    series = derivative_series(spec, u, 1)
    return float(series[0]), float(series[0] + u * series[1])


def radial_determinant(spec: RadialPotentialSpec, u: float) -> float:
    """det of the hermitian metric, φ'·(uφ')'."""
    tangential, radial = radial_eigenvalues(spec, u)
    return tangential * radial


# ---------------------------------------------------------------------------
# Neck remainder and homothety
# ---------------------------------------------------------------------------

def neck_remainder(a: float, delta: float, u: float, order: int = 2,
                   u_floor: float = NECK_U_FLOOR) -> Jet:
    """Jet of ξ_a = (Φ_a − u)/a², bounded as a -> 0 for u >= u_floor."""
    if u < u_floor:
        raise OutOfRegionError(f"u={u} below the neck-remainder floor {u_floor}")
    return eval_cutoff(u, delta, order) * _eh_remainder(a, u, order)


def homothety_transform(a: float, alpha: float, u: float,
                        kind: PotentialKind = PotentialKind.EGUCHI_HANSON,
                        delta: float = DELTA) -> float:
    """|Φ_{α²a}(α²u) − α²Φ_a(u)|, with the cutoff of the scaled potential set to χ(u/α²)."""
    if not alpha > 0.0:
        raise ParameterRangeError(f"alpha={alpha} must be positive")
    spec = RadialPotentialSpec(kind, a=a, delta=delta) if kind is not PotentialKind.EUCLIDEAN \
        else RadialPotentialSpec.euclidean()
    scaled = spec.scaled(alpha)
    return abs(potential_value(scaled, alpha ** 2 * u) - alpha ** 2 * potential_value(spec, u))


# ---------------------------------------------------------------------------
# Plurisubharmonicity of the glued potential
# ---------------------------------------------------------------------------

def min_neck_eigenvalue(a: float, delta: float, n_grid: int = 401) -> float:
    """min over u in [1, 1+δ] of min(φ', (uφ')') for the glued potential."""
    spec = RadialPotentialSpec.glued(a, delta)
    lowest = np.inf
    for u in np.linspace(1.0, 1.0 + delta, n_grid):
        lowest = min(lowest, *radial_eigenvalues(spec, float(u)))
    return float(lowest)


def is_plurisubharmonic(spec: RadialPotentialSpec, n_grid: int = 401) -> bool:
    if spec.kind is not PotentialKind.GLUED:
        return True
    return min_neck_eigenvalue(spec.a, spec.delta, n_grid) > 0.0


def plurisubharmonic_bound(delta: float, n_grid: int = 401, a_high: float = 2.0,
                           xtol: float = 1e-6) -> float:
    """
    Largest a for which the glued potential stays plurisubharmonic on the neck.

    Scans a geometric a-grid for the first sign change of the minimal
    eigenvalue, then refines it with brentq.
    """
    def margin(a):
        return min_neck_eigenvalue(a, delta, n_grid)

    grid = np.geomspace(1e-3, a_high, 40)
    previous = grid[0]
    if margin(previous) <= 0.0:
        raise ParameterRangeError(f"glued potential not plurisubharmonic even at a={previous}, delta={delta}")
    for a in grid[1:]:
        if margin(a) <= 0.0:
            a_max = brentq(margin, previous, a, xtol=xtol)
            logging.info(f"Plurisubharmonic bound for delta={delta}: a_max={a_max:.6g}")
            return float(a_max)
        previous = a
    logging.warning(f"No loss of plurisubharmonicity up to a={a_high} for delta={delta}")
    return float(a_high)
